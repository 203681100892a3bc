"""Graphs: representation, file formats and synthetic instance families."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp


class GraphFormatError(ValueError):
    """Raised when a graph file cannot be parsed."""


class GenerationError(RuntimeError):
    """Raised when a random generator gives up."""


FAMILIES = ("ER", "GNM", "BA", "RRG", "Queen", "Mycielski", "Book", "File")


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected, optionally weighted graph with edges stored as ``i < j``.

    ``src``, ``dst`` and ``weight`` are parallel arrays sorted by ``(src, dst)``.
    Use :meth:`from_edges` to build one from an arbitrary edge list.
    """

    n_nodes: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        n = self.n_nodes
        if n < 0:
            raise ValueError("n_nodes must be non-negative")
        if not (len(self.src) == len(self.dst) == len(self.weight)):
            raise ValueError("edge arrays differ in length")
        if len(self.src):
            if self.src.min() < 0 or self.dst.max() >= n:
                raise ValueError("edge endpoint out of range")
            if np.any(self.src >= self.dst):
                raise ValueError("edges must satisfy i < j (no self-loops)")
            keys = self.src.astype(np.int64) * n + self.dst
            if np.any(np.diff(keys) <= 0):
                raise ValueError("edges must be sorted and unique")
        for arr in (self.src, self.dst, self.weight):
            arr.setflags(write=False)

    @classmethod
    def from_edges(cls, n_nodes, edges, weights=None):
        """Build a graph from ``(i, j)`` or ``(i, j, w)`` tuples in any order.

        Duplicate edges and self-loops raise ``ValueError``.
        """
        edges = list(edges)
        src = np.empty(len(edges), dtype=np.int64)
        dst = np.empty(len(edges), dtype=np.int64)
        w = np.ones(len(edges), dtype=np.float64)
        for k, e in enumerate(edges):
            i, j = int(e[0]), int(e[1])
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            src[k], dst[k] = min(i, j), max(i, j)
            if len(e) > 2:
                w[k] = float(e[2])
        if weights is not None:
            w = np.asarray(weights, dtype=np.float64).copy()
        order = np.lexsort((dst, src))
        src, dst, w = src[order], dst[order], w[order]
        if len(src) > 1:
            same = (np.diff(src) == 0) & (np.diff(dst) == 0)
            if same.any():
                k = int(np.flatnonzero(same)[0])
                raise ValueError(f"duplicate edge ({src[k]}, {dst[k]})")
        return cls(int(n_nodes), src, dst, w)

    @property
    def n_edges(self) -> int:
        return len(self.src)

    @property
    def edges(self):
        return [(int(i), int(j), float(w)) for i, j, w in zip(self.src, self.dst, self.weight)]

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric weighted adjacency matrix (CSR)."""
        n = self.n_nodes
        rows = np.concatenate([self.src, self.dst])
        cols = np.concatenate([self.dst, self.src])
        vals = np.concatenate([self.weight, self.weight])
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))

    @cached_property
    def structure(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency matrix, ignoring weights."""
        a = self.adjacency.copy()
        a.data[:] = 1.0
        return a

    def degrees(self) -> np.ndarray:
        return np.bincount(np.concatenate([self.src, self.dst]), minlength=self.n_nodes)

    def neighbors(self):
        """Adjacency lists ``[(nbr, weight), ...]`` per node."""
        out = [[] for _ in range(self.n_nodes)]
        for i, j, w in zip(self.src.tolist(), self.dst.tolist(), self.weight.tolist()):
            out[i].append((j, w))
            out[j].append((i, w))
        return out

    def complement(self) -> "Graph":
        n = self.n_nodes
        present = set(zip(self.src.tolist(), self.dst.tolist()))
        pairs = [(i, j) for i, j in itertools.combinations(range(n), 2) if (i, j) not in present]
        return Graph.from_edges(n, pairs)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n_nodes == other.n_nodes
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.weight, other.weight)
        )

    def __repr__(self):
        return f"Graph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"


@dataclass(frozen=True)
class InstanceMeta:
    name: str
    family: str
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")


# ---------------------------------------------------------------------------
# file formats


def parse_dimacs(text: str) -> Graph:
    """Parse DIMACS ``p edge N M`` / ``e i j`` text (1-indexed) into a Graph."""
    n = None
    declared_m = None
    edges = []
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] == "c":
            continue
        parts = line.split()
        if parts[0] == "p":
            if n is not None:
                raise GraphFormatError(f"line {lineno}: second problem line")
            if len(parts) != 4 or parts[1] not in ("edge", "col"):
                raise GraphFormatError(f"line {lineno}: malformed header {line!r}")
            try:
                n, declared_m = int(parts[2]), int(parts[3])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: malformed header {line!r}") from None
            if n < 0 or declared_m < 0:
                raise GraphFormatError(f"line {lineno}: negative size in header")
        elif parts[0] == "e":
            if n is None:
                raise GraphFormatError(f"line {lineno}: edge before header")
            if len(parts) not in (3, 4):
                raise GraphFormatError(f"line {lineno}: malformed edge {line!r}")
            try:
                i, j = int(parts[1]), int(parts[2])
                w = float(parts[3]) if len(parts) == 4 else 1.0
            except ValueError:
                raise GraphFormatError(f"line {lineno}: non-numeric edge {line!r}") from None
            if not (1 <= i <= n and 1 <= j <= n):
                raise GraphFormatError(f"line {lineno}: edge index out of range {line!r}")
            if i == j:
                raise GraphFormatError(f"line {lineno}: self-loop {line!r}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise GraphFormatError(f"line {lineno}: duplicate edge {key} (first on line {seen[key]})")
            seen[key] = lineno
            edges.append((key[0] - 1, key[1] - 1, w))
        else:
            raise GraphFormatError(f"line {lineno}: unknown record {parts[0]!r}")
    if n is None:
        raise GraphFormatError("missing 'p edge' header")
    if len(edges) != declared_m:
        raise GraphFormatError(f"header declares {declared_m} edges, found {len(edges)}")
    return Graph.from_edges(n, edges)


def write_dimacs(graph: Graph) -> str:
    weighted = bool(np.any(graph.weight != 1.0))
    lines = [f"p edge {graph.n_nodes} {graph.n_edges}"]
    for i, j, w in graph.edges:
        lines.append(f"e {i + 1} {j + 1} {w:.17g}" if weighted else f"e {i + 1} {j + 1}")
    return "\n".join(lines) + "\n"


def _number(tok, lineno, kind=float):
    try:
        return kind(tok)
    except ValueError:
        raise GraphFormatError(f"line {lineno}: non-numeric token {tok!r}") from None


def parse_weighted_edgelist(text: str) -> Graph:
    """Parse whitespace-separated ``i j w`` lines (0-indexed).

    An optional two-token first line ``N M`` fixes the node count and the
    expected edge count; without it N is one more than the largest index.
    Zero-weight edges are kept.
    """
    rows = [(k, ln.split()) for k, ln in enumerate(text.splitlines(), start=1)]
    rows = [(k, p) for k, p in rows if p and not p[0].startswith(("#", "c"))]
    n = declared_m = None
    if rows and len(rows[0][1]) == 2:
        k, (a, b) = rows.pop(0)
        n, declared_m = _number(a, k, int), _number(b, k, int)
    edges = []
    for k, parts in rows:
        if len(parts) not in (2, 3):
            raise GraphFormatError(f"line {k}: expected 'i j w', got {' '.join(parts)!r}")
        i, j = _number(parts[0], k, int), _number(parts[1], k, int)
        w = _number(parts[2], k) if len(parts) == 3 else 1.0
        if i < 0 or j < 0:
            raise GraphFormatError(f"line {k}: negative node index")
        edges.append((i, j, w))
    top = max((max(i, j) for i, j, _ in edges), default=-1) + 1
    if n is None:
        n = top
    elif top > n:
        raise GraphFormatError(f"edge index {top - 1} inconsistent with N={n}")
    if declared_m is not None and declared_m != len(edges):
        raise GraphFormatError(f"header declares {declared_m} edges, found {len(edges)}")
    try:
        return Graph.from_edges(n, edges)
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from None


def write_weighted_edgelist(graph: Graph) -> str:
    lines = [f"{graph.n_nodes} {graph.n_edges}"]
    lines += [f"{i} {j} {w:.17g}" for i, j, w in graph.edges]
    return "\n".join(lines) + "\n"


def read_graph(path) -> Graph:
    """Read a graph file, choosing the parser from content."""
    with open(path) as fh:
        text = fh.read()
    for line in text.splitlines():
        s = line.strip()
        if s and not s.startswith("c"):
            return parse_dimacs(text) if s.startswith("p") else parse_weighted_edgelist(text)
    return parse_dimacs(text)


# ---------------------------------------------------------------------------
# generators


def gen_er(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi G(n, p)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return Graph(n, iu[keep].astype(np.int64), ju[keep].astype(np.int64), np.ones(int(keep.sum())))


def gen_gnm(n: int, m: int, seed: int, weights=None) -> Graph:
    """Uniform graph with exactly m edges; each weight drawn uniformly from ``weights``.

    ``gen_gnm(125, 375, s, weights=(-1, 0, 1))`` gives signed instances in the
    style of the Optsicom max-cut set.
    """
    total = n * (n - 1) // 2
    if not 0 <= m <= total:
        raise ValueError(f"cannot place {m} edges on {n} nodes")
    rng = np.random.default_rng(seed)
    i, j = np.triu_indices(n, k=1)
    pick = np.sort(rng.choice(total, size=m, replace=False))
    w = None if weights is None else rng.choice(np.asarray(weights, dtype=float), size=m)
    return Graph.from_edges(n, np.column_stack([i[pick], j[pick]]), w)


def gen_ba(n: int, m: int, seed: int) -> Graph:
    """Barabasi-Albert preferential attachment grown from an m-node clique.

    Each new node attaches to m distinct existing nodes chosen with
    probability proportional to degree, adding ``(n - m) * m`` edges on top
    of the seed clique.
    """
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    rng = np.random.default_rng(seed)
    edges = list(itertools.combinations(range(m), 2))
    # node repeated once per incident edge end; the seed clique of a single
    # node has no edges, so seed it with one entry to make it selectable
    targets = [v for e in edges for v in e] or list(range(m))
    for new in range(m, n):
        chosen = set()
        while len(chosen) < m:
            chosen.add(targets[rng.integers(len(targets))])
        for t in sorted(chosen):
            edges.append((t, new))
            targets.extend((t, new))
    return Graph.from_edges(n, edges)


def gen_rrg(n: int, d: int, seed: int, max_restarts: int = 1000) -> Graph:
    """Random d-regular graph by the pairing model, restarting on any collision."""
    if (n * d) % 2:
        raise ValueError(f"n*d = {n * d} is odd")
    if not 0 <= d < n:
        raise ValueError("need 0 <= d < n")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), d)
    for _ in range(max_restarts):
        perm = rng.permutation(stubs).reshape(-1, 2)
        a, b = perm.min(axis=1), perm.max(axis=1)
        if np.any(a == b):
            continue
        keys = a.astype(np.int64) * n + b
        if len(np.unique(keys)) != len(keys):
            continue
        return Graph.from_edges(n, list(zip(a.tolist(), b.tolist())))
    raise GenerationError(f"pairing model failed after {max_restarts} restarts (n={n}, d={d})")


def gen_queen(n: int, m: int | None = None) -> Graph:
    """Queen graph on an n x m board (square when m is omitted)."""
    m = n if m is None else m
    if n < 1 or m < 1:
        raise ValueError("board size must be positive")
    cells = [(r, c) for r in range(n) for c in range(m)]
    edges = []
    for a, b in itertools.combinations(range(len(cells)), 2):
        (r1, c1), (r2, c2) = cells[a], cells[b]
        if r1 == r2 or c1 == c2 or abs(r1 - r2) == abs(c1 - c2):
            edges.append((a, b))
    return Graph.from_edges(n * m, edges)


def mycielski(graph: Graph) -> Graph:
    """One Mycielski step: n -> 2n + 1 nodes, raising the chromatic number by one."""
    n = graph.n_nodes
    edges = []
    for i, j, _ in graph.edges:
        edges += [(i, j), (i, n + j), (j, n + i)]
    edges += [(n + i, 2 * n) for i in range(n)]
    return Graph.from_edges(2 * n + 1, edges)


def gen_mycielski(k: int) -> Graph:
    """Mycielski graph named as in the COLOR benchmark set.

    ``myciel1`` is a single edge and every increment of k applies one more
    transformation, so ``myciel k`` is triangle-free with chromatic number
    k + 1 (``myciel5``: 47 nodes, 236 edges).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    g = Graph.from_edges(2, [(0, 1)])
    for _ in range(k - 1):
        g = mycielski(g)
    return g


def generate(family: str, params: dict, seed: int = 0) -> Graph:
    """Dispatch on a generator family name (case-insensitive)."""
    fam = family.lower()
    if fam == "er":
        return gen_er(int(params["n"]), float(params["p"]), seed)
    if fam == "gnm":
        signed = params.get("w", "") == "signed"
        return gen_gnm(int(params["n"]), int(params["m"]), seed, (-1, 0, 1) if signed else None)
    if fam == "ba":
        return gen_ba(int(params["n"]), int(params["m"]), seed)
    if fam == "rrg":
        return gen_rrg(int(params["n"]), int(params["d"]), seed)
    if fam == "queen":
        return gen_queen(int(params["n"]), int(params["m"]) if "m" in params else None)
    if fam in ("mycielski", "myciel"):
        return gen_mycielski(int(params["k"]))
    raise ValueError(f"unknown generator family {family!r}")


_CANONICAL = {"er": "ER", "gnm": "GNM", "ba": "BA", "rrg": "RRG", "queen": "Queen", "mycielski": "Mycielski", "myciel": "Mycielski"}


def family_name(family: str) -> str:
    """Canonical :data:`FAMILIES` entry for a generator name."""
    try:
        return _CANONICAL[family.lower()]
    except KeyError:
        raise ValueError(f"unknown generator family {family!r}") from None


def parse_generator_spec(text: str):
    """Split ``"er:n=700,p=0.15"`` into ``("er", {"n": "700", "p": "0.15"})``."""
    fam, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"bad generator parameter {item!r}")
        params[key.strip()] = val.strip()
    return fam.strip(), params
