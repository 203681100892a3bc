import numpy as np
import pytest

from conftest import cycle
from pqqa.baseline import brute_force
from pqqa.graphio import Graph, gen_er, gen_queen
from pqqa.problems import (
    DEFAULT_LAMBDA,
    EnergyModel,
    Kind,
    all_minimizers,
    balanceness,
    compute_metrics,
    one_hot,
    select_lambda,
)


def test_mis_energy(edge):
    m = EnergyModel("mis", edge, lam=2.0)
    assert m.energy([1, 1]) == 0.0
    assert m.energy([1, 0]) == -1.0
    assert m.energy([0, 0]) == 0.0


def test_clique_energy(triangle, path3):
    assert EnergyModel("clique", triangle, lam=2.0).energy([1, 1, 1]) == -3.0
    m = EnergyModel("clique", path3, lam=2.0)
    assert m.energy([1, 0, 1]) == 0.0
    assert m.energy([0, 0, 0]) == 0.0


def test_maxcut_energy(edge, triangle):
    assert EnergyModel("maxcut", edge).energy([0, 1]) == -1.0
    tri = EnergyModel("maxcut", triangle)
    assert tri.energy([0, 0, 0]) == 0.0
    assert brute_force(tri).energy == -2.0


def test_partition_energy(path4):
    m = EnergyModel("partition", path4, lam=1.0, arity=2)
    assert m.energy([0, 0, 1, 1]) == 2.0
    assert m.energy([0, 0, 0, 0]) == 8.0
    empty = EnergyModel("partition", Graph.from_edges(4, []), lam=1.0, arity=2)
    assert empty.energy([0, 1, 0, 1]) == 0.0


def test_coloring_energy(edge):
    m = EnergyModel("coloring", edge, arity=2)
    assert m.energy([0, 0]) == 1.0
    assert m.energy([0, 1]) == 0.0


def test_latin_square_coloring_queen5():
    m = EnergyModel("coloring", gen_queen(5), arity=5)
    x = np.array([(r + 2 * c) % 5 for r in range(5) for c in range(5)])
    assert m.energy(x) == 0.0
    assert m.solution(x).feasible


def test_mis_relaxed_gradient_example(edge):
    m = EnergyModel("mis", edge, lam=2.0)
    np.testing.assert_allclose(m.relaxed_grad(np.array([0.5, 0.5])), [0.0, 0.0])


def test_maxcut_relaxed_at_half():
    g = gen_er(9, 0.5, 2)
    m = EnergyModel("maxcut", g)
    assert m.relaxed_energy(np.full(9, 0.5)) == pytest.approx(-0.5 * g.weight.sum())


def test_coloring_relaxed_one_hot(rng):
    g = gen_er(8, 0.5, 3)
    m = EnergyModel("coloring", g, arity=3)
    for _ in range(10):
        x = rng.integers(3, size=8)
        assert m.relaxed_energy(one_hot(x, 3)) == pytest.approx(m.energy(x))


def test_batched_energy_matches_rows(rng):
    m = EnergyModel("partition", gen_er(7, 0.5, 1), arity=3)
    xs = rng.integers(3, size=(5, 7))
    np.testing.assert_allclose(m.energy(xs), [m.energy(x) for x in xs])


def test_feasibility():
    g = cycle(4)
    assert not EnergyModel("mis", g).solution([1, 1, 0, 0]).feasible
    assert EnergyModel("mis", g).solution([1, 0, 1, 0]).feasible
    assert not EnergyModel("clique", g).solution([1, 0, 1, 0]).feasible
    assert EnergyModel("partition", g, arity=2).solution([0, 0, 1, 1]).feasible
    assert not EnergyModel("partition", g, arity=2).solution([0, 0, 0, 1]).feasible


def test_apr_and_balanceness():
    m = EnergyModel("mis", Graph.from_edges(45, []))
    sol = m.solution(np.ones(45, dtype=int))
    assert compute_metrics(sol, m, 44.87).apr == pytest.approx(45 / 44.87)
    assert compute_metrics(sol, m).apr is None
    assert balanceness([0, 0, 1, 1], 2) == 1.0
    assert balanceness([0, 0, 0, 0], 2) == 0.5


def test_metric_fields(path4):
    part = EnergyModel("partition", path4, arity=2)
    met = compute_metrics(part.solution([0, 0, 1, 1]), part)
    assert met.edge_cut_ratio == pytest.approx(1 / 3)
    assert met.balanceness == 1.0
    col = EnergyModel("coloring", path4, arity=2)
    assert compute_metrics(col.solution([0, 0, 1, 1]), col).conflicts == 2
    cut = EnergyModel("maxcut", path4)
    assert compute_metrics(cut.solution([0, 1, 0, 1]), cut).cut_ratio == 0.75


def test_select_lambda(edge):
    # at lam=1 both (1,0) and (1,1) reach -1, so 1 is the insufficient boundary
    m = EnergyModel("mis", edge)
    _, mins = all_minimizers(m.with_lambda(1.0))
    assert any(m.violation(x) > 0 for x in mins)
    assert select_lambda(m) == 1.5
    assert select_lambda(EnergyModel("mis", Graph.from_edges(3, []))) == 0.5
    assert DEFAULT_LAMBDA["mis"] == 2.0
    assert EnergyModel("mis", edge).lam == 2.0


def test_validation(edge):
    with pytest.raises(ValueError):
        EnergyModel("mis", edge, arity=3)
    with pytest.raises(ValueError):
        EnergyModel("coloring", edge, arity=1)
    with pytest.raises(ValueError):
        EnergyModel("mis", edge, lam=-1)
    with pytest.raises(ValueError):
        EnergyModel("mis", edge).energy([0, 2])
    with pytest.raises(ValueError):
        EnergyModel("mis", edge).relaxed_energy(np.zeros(3))
    assert Kind("mis").maximize and not Kind("coloring").maximize
