"""Invariants checked over generated graphs and relaxed points."""

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pqqa.annealer import AnnealSchedule, gamma_at, repair_mis
from pqqa.baseline import SAConfig, greedy_mis, sa_solve
from pqqa.graphio import Graph, parse_dimacs, parse_weighted_edgelist, write_dimacs, write_weighted_edgelist
from pqqa.problems import EnergyModel, balanceness, one_hot, part_sizes
from pqqa.relax import (
    CommConfig,
    EntropyConfig,
    clamp_sigma,
    comm_term,
    entropy_binary,
    entropy_kary,
    kary_sigma,
)
from pqqa.verify import central_difference, half_split_std, relative_error

KINDS = [("mis", 2), ("clique", 2), ("maxcut", 2), ("partition", 2), ("partition", 3), ("coloring", 3)]
finite = st.floats(-5, 5, allow_nan=False)


@st.composite
def graphs(draw, min_nodes=1, max_nodes=8, weighted=False):
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    if weighted:
        w = draw(st.lists(st.sampled_from([-1.0, 0.0, 0.5, 1.0, 2.0]), min_size=len(chosen), max_size=len(chosen)))
        return Graph.from_edges(n, chosen, w if chosen else None)
    return Graph.from_edges(n, chosen)


@st.composite
def models(draw):
    kind, k = draw(st.sampled_from(KINDS))
    g = draw(graphs(weighted=kind in ("maxcut", "partition", "coloring")))
    lam = draw(st.sampled_from([0.5, 1.0, 2.0, 3.0]))
    return EnergyModel(kind, g, lam=lam, arity=k)


@given(models(), st.integers(0, 2**32 - 1))
def test_relaxation_exact_at_integral_points(model, seed):
    x = np.random.default_rng(seed).integers(model.arity, size=model.n)
    p = one_hot(x, model.arity) if model.categorical else x.astype(float)
    assert abs(float(model.relaxed_energy(p)) - float(model.energy(x))) <= 1e-9


@settings(deadline=None, max_examples=40)
@given(models(), st.integers(0, 2**32 - 1))
def test_relaxed_gradient_matches_finite_differences(model, seed):
    rng = np.random.default_rng(seed)
    if model.categorical:
        p = rng.uniform(0.05, 1.0, (model.n, model.arity))
        p /= p.sum(axis=1, keepdims=True)
    else:
        p = rng.uniform(0.05, 0.95, model.n)
    fd = central_difference(model.relaxed_energy, p)
    assume(np.linalg.norm(fd) > 1e-3)
    assert relative_error(fd, model.relaxed_grad(p)) <= 1e-5


@given(arrays(np.float64, st.integers(1, 20), elements=finite))
def test_clamp_range_and_idempotence(w):
    c = clamp_sigma(w)
    assert np.all((c >= 0) & (c <= 1))
    np.testing.assert_array_equal(clamp_sigma(c), c)


@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(2, 5)), elements=finite))
def test_kary_sigma_rows_on_simplex(W):
    P = kary_sigma(W)
    assert np.all(P >= 0)
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)


@given(arrays(np.float64, st.integers(1, 30), elements=st.floats(0, 1)))
def test_binary_entropy_bounds(p):
    s = entropy_binary(p)
    assert -1e-12 <= s <= len(p) + 1e-12


@given(st.integers(2, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_kary_entropy_bounds(k, n, seed):
    P = np.random.default_rng(seed).dirichlet(np.ones(k), size=n)
    s = entropy_kary(P)
    assert -1e-9 <= s <= n + 1e-9
    assert abs(entropy_kary(np.eye(k)[np.zeros(n, dtype=int)])) <= 1e-12


@given(st.integers(1, 8), st.integers(1, 5), st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_comm_term_bounds(S, N, strength, seed):
    P = np.random.default_rng(seed).random((S, N))
    val = comm_term(P, CommConfig(comm_strength=strength))
    # a column in [0, 1] never exceeds the std of the half split
    assert 0.0 >= val >= -S * strength * N * (half_split_std(S) + 1e-12)


@given(st.integers(1, 5), st.lists(st.integers(0, 4), min_size=1, max_size=30))
def test_balanceness_range(k, xs):
    x = np.array([v % k for v in xs])
    assert 0.0 <= balanceness(x, k) <= 1.0
    assert part_sizes(x, k).sum() == len(x)


@given(graphs(weighted=True))
def test_graph_file_roundtrip(g):
    assert parse_weighted_edgelist(write_weighted_edgelist(g)) == g
    assert parse_dimacs(write_dimacs(g)) == g


@given(graphs(max_nodes=12), st.integers(0, 1000))
def test_greedy_mis_is_maximal_independent(g, seed):
    sol = greedy_mis(g, seed)
    assert sol.feasible
    x = sol.assignment
    for v, row in enumerate(g.neighbors()):
        assert x[v] or any(x[j] for j, _ in row)


@given(graphs(), st.integers(0, 2**32 - 1))
def test_repair_gives_feasible_subset(g, seed):
    m = EnergyModel("mis", g)
    x = np.random.default_rng(seed).integers(2, size=g.n_nodes)
    fixed = repair_mis(m.solution(x), m)
    assert fixed.feasible
    assert np.all(fixed.assignment <= x)


@settings(deadline=None, max_examples=30)
@given(models(), st.integers(0, 1000))
def test_sa_never_worse_than_start(model, seed):
    x0 = np.random.default_rng(seed).integers(model.arity, size=model.n)
    sol = sa_solve(model, SAConfig(steps=300, seed=seed), x0=x0)
    assert sol.energy <= float(model.energy(x0)) + 1e-9


@given(st.integers(1, 5000), st.floats(-5, 0), st.floats(0, 1))
def test_gamma_schedule_monotone(total, gmin, gmax):
    s = AnnealSchedule(total_steps=total, gamma_min=gmin, gamma_max=gmax)
    steps = np.linspace(0, total, 7)
    vals = [gamma_at(s, k) for k in steps]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
    assert abs(vals[0] - gmin) <= 1e-12 and abs(vals[-1] - gmax) <= 1e-9


@given(st.integers(2, 12))
def test_half_split_variance_closed_form(S):
    var = (S * S - 1) / (4 * S * S) if S % 2 else 0.25
    assert abs(half_split_std(S) ** 2 - var) <= 1e-12


@given(st.sampled_from([2, 4, 6, 8]), arrays(np.float64, 5, elements=st.floats(0, 1)))
def test_entropy_alpha_family(alpha, p):
    # larger exponents flatten the penalty, so the value can only grow
    cfg, wider = EntropyConfig(alpha), EntropyConfig(alpha + 2)
    assert entropy_binary(p, wider) >= entropy_binary(p, cfg) - 1e-12
