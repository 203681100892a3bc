import numpy as np
import pytest

from pqqa.graphio import (
    GraphFormatError,
    InstanceMeta,
    family_name,
    gen_ba,
    gen_er,
    gen_gnm,
    gen_mycielski,
    gen_queen,
    gen_rrg,
    generate,
    parse_dimacs,
    parse_generator_spec,
    parse_weighted_edgelist,
    read_graph,
    write_dimacs,
    write_weighted_edgelist,
)


def test_dimacs_basic():
    g = parse_dimacs("p edge 3 2\ne 1 2\ne 2 3")
    assert g.n_nodes == 3
    assert g.edges == [(0, 1, 1.0), (1, 2, 1.0)]


def test_dimacs_single_node():
    g = parse_dimacs("p edge 1 0")
    assert (g.n_nodes, g.n_edges) == (1, 0)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("p edge 3 1\ne 1 5", "out of range"),
        ("e 1 2\np edge 2 1", "before header"),
        ("p edge 2 1\ne 1 1", "self-loop"),
        ("p edge 3 2\ne 1 2\ne 2 1", "duplicate"),
        ("p edge 3 2\ne 1 2", "declares 2"),
        ("c only a comment", "header"),
        ("p edge x 1", "malformed"),
    ],
)
def test_dimacs_errors(text, fragment):
    with pytest.raises(GraphFormatError, match=fragment):
        parse_dimacs(text)


def test_edgelist_negative_weight():
    g = parse_weighted_edgelist("2 1\n0 1 -1")
    assert g.n_nodes == 2
    assert g.edges == [(0, 1, -1.0)]


def test_edgelist_edgeless():
    g = parse_weighted_edgelist("2 0")
    assert (g.n_nodes, g.n_edges) == (2, 0)


def test_edgelist_bad_weight():
    with pytest.raises(GraphFormatError, match="non-numeric"):
        parse_weighted_edgelist("0 1 x")


def test_edgelist_keeps_zero_weight():
    g = parse_weighted_edgelist("0 1 0\n1 2 1")
    assert g.n_edges == 2


def test_roundtrips(tmp_path):
    g = gen_gnm(30, 60, 4, weights=(-1, 0, 1))
    assert parse_weighted_edgelist(write_weighted_edgelist(g)) == g
    assert parse_dimacs(write_dimacs(g)) == g
    path = tmp_path / "g.col"
    path.write_text(write_dimacs(gen_er(12, 0.4, 1)))
    assert read_graph(path) == gen_er(12, 0.4, 1)


def test_er_extremes():
    assert gen_er(10, 0.0, 3).n_edges == 0
    assert gen_er(10, 1.0, 3).n_edges == 45


def test_er_edge_count_statistics():
    counts = [gen_er(100, 0.1, s).n_edges for s in range(200)]
    sigma = np.sqrt(4950 * 0.1 * 0.9)
    # tolerance on the mean of 200 draws, 3 standard errors
    assert abs(np.mean(counts) - 495) <= 3 * sigma / np.sqrt(200)
    assert abs(np.std(counts) - sigma) <= 0.2 * sigma


def test_er_seeded():
    assert gen_er(40, 0.2, 9) == gen_er(40, 0.2, 9)
    assert gen_er(40, 0.2, 9) != gen_er(40, 0.2, 10)


def test_ba():
    g = gen_ba(5, 1, 0)
    assert g.n_edges == 4
    # a connected graph with n - 1 edges is a tree
    seen, stack, nbrs = {0}, [0], g.neighbors()
    while stack:
        for j, _ in nbrs[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    assert len(seen) == 5
    assert gen_ba(3, 2, 7).edges == [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]


@pytest.mark.parametrize("seed", range(5))
def test_handshake(seed):
    for g in (gen_ba(50, 3, seed), gen_er(50, 0.1, seed), gen_rrg(20, 4, seed)):
        assert g.degrees().sum() == 2 * g.n_edges


def test_rrg():
    g = gen_rrg(10, 3, 1)
    assert np.all(g.degrees() == 3)
    assert g.n_edges == 15
    with pytest.raises(ValueError, match="odd"):
        gen_rrg(5, 3, 0)


def test_queen_sizes():
    assert (gen_queen(5).n_nodes, gen_queen(5).n_edges) == (25, 160)
    assert (gen_queen(6).n_nodes, gen_queen(6).n_edges) == (36, 290)
    assert (gen_queen(1).n_nodes, gen_queen(1).n_edges) == (1, 0)


def test_mycielski_sizes():
    assert (gen_mycielski(5).n_nodes, gen_mycielski(5).n_edges) == (47, 236)
    assert (gen_mycielski(6).n_nodes, gen_mycielski(6).n_edges) == (95, 755)
    # benchmark naming: the smallest member is a single edge
    assert gen_mycielski(1).edges == [(0, 1, 1.0)]


def test_gnm_signed():
    g = gen_gnm(125, 375, 0, weights=(-1, 0, 1))
    assert (g.n_nodes, g.n_edges) == (125, 375)
    assert set(np.unique(g.weight)) <= {-1.0, 0.0, 1.0}


def test_generator_spec():
    fam, params = parse_generator_spec("er:n=700,p=0.15")
    assert fam == "er" and params == {"n": "700", "p": "0.15"}
    assert generate("queen", {"n": "5"}).n_edges == 160
    assert family_name("myciel") == "Mycielski"
    with pytest.raises(ValueError):
        parse_generator_spec("er:n700")
    with pytest.raises(ValueError):
        generate("nope", {})


def test_instance_meta_family():
    InstanceMeta("x", "ER")
    with pytest.raises(ValueError):
        InstanceMeta("x", "Unknown")
