import numpy as np
import pytest

from pqqa.graphio import Graph
from pqqa.problems import EnergyModel
from pqqa.relax import (
    CommConfig,
    EntropyConfig,
    clamp_sigma,
    comm_grad,
    comm_term,
    ensemble_energy,
    entropy_binary,
    entropy_kary,
    kary_sigma,
    qqa_energy,
)
from pqqa.verify import central_difference, max_std_ensembles, relative_error


def test_clamp():
    np.testing.assert_array_equal(clamp_sigma([-0.3, 0.5, 1.7]), [0.0, 0.5, 1.0])
    w = np.array([0.0, 0.2, 1.0])
    np.testing.assert_array_equal(clamp_sigma(w), w)
    np.testing.assert_array_equal(clamp_sigma(clamp_sigma([-2, 3, 0.4])), clamp_sigma([-2, 3, 0.4]))


def test_kary_sigma():
    # the upper clamp binds before normalizing: (1, 1, 0) / 2
    np.testing.assert_allclose(kary_sigma([2.0, 1.0, -1.0]), [0.5, 0.5, 0.0])
    np.testing.assert_allclose(kary_sigma([1.0, 0.5, -1.0]), [2 / 3, 1 / 3, 0.0])
    np.testing.assert_array_equal(kary_sigma([0.25] * 4), [0.25] * 4)
    np.testing.assert_array_equal(kary_sigma([-1.0, -2.0]), [0.5, 0.5])


def test_binary_entropy_values():
    assert entropy_binary(np.full(6, 0.5)) == 6.0
    assert entropy_binary(np.array([0.0, 1.0, 1.0])) == 0.0
    assert entropy_binary(np.array([0.75])) == pytest.approx(0.9375)


def test_kary_entropy_values():
    assert entropy_kary(np.array([[1.0, 0.0, 0.0]])) == pytest.approx(0.0, abs=1e-15)
    assert entropy_kary(np.full((1, 3), 1 / 3)) == pytest.approx(1.0)


def test_kary_matches_binary_for_two_categories(rng):
    p = rng.random(100)
    P = np.stack([p, 1 - p], axis=-1)
    for i in range(100):
        assert abs(entropy_kary(P[i : i + 1]) - entropy_binary(p[i : i + 1])) <= 1e-12


def test_qqa_energy(edge):
    m = EnergyModel("mis", edge, lam=2.0)
    p = np.array([0.5, 0.5])
    assert qqa_energy(p, m, 0.0) == m.relaxed_energy(p)
    assert qqa_energy(p, m, -2.0) == pytest.approx(-4.5)
    x = np.array([1.0, 0.0])
    assert qqa_energy(x, m, 3.0) == m.energy([1, 0])


def test_comm_std_column():
    P = np.array([[0.0], [0.0], [1.0], [1.0]])
    assert comm_term(P, CommConfig(comm_strength=1.0)) == pytest.approx(-4 * 0.5)


def test_comm_identical_runs():
    P = np.tile(np.array([0.2, 0.7, 0.4]), (5, 1))
    cfg = CommConfig(comm_strength=0.5)
    assert comm_term(P, cfg) == 0.0
    np.testing.assert_array_equal(comm_grad(P, cfg), 0.0)


def test_half_split_maximizes_std():
    best, arg = max_std_ensembles(4, 2)
    assert best == pytest.approx(1.0)
    for P in arg:
        assert np.all(P.sum(axis=0) == 2)


def test_ensemble_energy_reductions(rng, triangle):
    m = EnergyModel("maxcut", triangle)
    P = rng.random((4, 3))
    off = CommConfig(comm_strength=0.0)
    assert ensemble_energy(P, m, -1.0, comm_cfg=off) == pytest.approx(sum(qqa_energy(row, m, -1.0) for row in P))
    one = P[:1]
    assert ensemble_energy(one, m, -1.0) == pytest.approx(float(qqa_energy(one[0], m, -1.0)))


def test_comm_gradient_fd(rng):
    cfg = CommConfig(comm_strength=0.3)
    P = rng.uniform(0.05, 0.95, (3, 4))
    assert relative_error(central_difference(lambda q: comm_term(q, cfg), P), comm_grad(P, cfg)) <= 1e-5


def test_config_validation():
    with pytest.raises(ValueError):
        EntropyConfig(alpha=3)
    with pytest.raises(ValueError):
        CommConfig(comm_strength=1.5)
