"""Undirected simple graphs and their network statistics.

Vertices are 0-based everywhere in code; the text formats (edge lists,
adjacency CSV) use 1-based ids and the parsers/writers translate at that
boundary.  A :class:`Graph` is immutable from the caller's perspective:
the only public mutation is :func:`toggle_edge`, which returns a copy.
"""

from __future__ import annotations

import io

import numpy as np

#: Supported sufficient-statistic kinds, in canonical order.
EDGES = "edges"
TWOSTARS = "twostars"
TRIANGLES = "triangles"
STAT_KINDS = (EDGES, TWOSTARS, TRIANGLES)


def validate_kinds(kinds):
    """Check a statistic list: known tags, non-empty, no duplicates."""
    kinds = tuple(kinds)
    if not kinds:
        raise ValueError("statistic list must be non-empty")
    for k in kinds:
        if k not in STAT_KINDS:
            raise ValueError(
                f"unknown statistic {k!r}; supported: {', '.join(STAT_KINDS)}"
            )
    if len(set(kinds)) != len(kinds):
        raise ValueError(f"duplicate statistic in {kinds!r}")
    return kinds


class Graph:
    """Undirected simple graph on ``n`` labeled vertices.

    Stored as a dense symmetric boolean adjacency matrix plus a degree
    array and edge count kept in sync.  No self-loops; symmetry holds by
    construction because all updates write both triangle halves.
    """

    __slots__ = ("n", "_adj", "_deg", "_n_edges")

    def __init__(self, n, edges=()):
        n = int(n)
        if n < 1:
            raise ValueError(f"vertex count must be >= 1, got {n}")
        self.n = n
        self._adj = np.zeros((n, n), dtype=bool)
        self._deg = np.zeros(n, dtype=np.int64)
        self._n_edges = 0
        for i, j in edges:
            self._check_dyad(i, j)
            if not self._adj[i, j]:
                self._toggle(i, j)

    def _check_dyad(self, i, j):
        if i == j:
            raise ValueError(f"self-loop ({i}, {j}) not allowed")
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise ValueError(f"vertex id out of range in dyad ({i}, {j}); n={self.n}")

    def _toggle(self, i, j):
        # Internal, unchecked flip. Callers own the graph privately.
        new = not self._adj[i, j]
        self._adj[i, j] = new
        self._adj[j, i] = new
        d = 1 if new else -1
        self._deg[i] += d
        self._deg[j] += d
        self._n_edges += d

    @property
    def n_edges(self):
        return self._n_edges

    def has_edge(self, i, j):
        self._check_dyad(i, j)
        return bool(self._adj[i, j])

    def degrees(self):
        """Degree of every vertex, as an int64 array of length n."""
        return self._deg.copy()

    def edges(self):
        """Sorted list of edges as (i, j) with i < j."""
        ii, jj = np.nonzero(np.triu(self._adj, k=1))
        return list(zip(ii.tolist(), jj.tolist()))

    def adjacency(self):
        """Copy of the boolean adjacency matrix."""
        return self._adj.copy()

    def copy(self):
        g = Graph(self.n)
        g._adj = self._adj.copy()
        g._deg = self._deg.copy()
        g._n_edges = self._n_edges
        return g

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self._adj, other._adj))

    def __hash__(self):
        return hash((self.n, self._adj.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self._n_edges})"


def as_graph(x) -> Graph:
    """Coerce input to a :class:`Graph`.

    Accepts a Graph (returned as-is) or a square 0/1 array-like with zero
    diagonal and symmetric entries.
    """
    if isinstance(x, Graph):
        return x
    a = np.asarray(x)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"adjacency matrix must be square, got shape {a.shape}")
    if not np.isin(a, (0, 1)).all():
        raise ValueError("adjacency matrix entries must be 0 or 1")
    if np.diagonal(a).any():
        raise ValueError("adjacency matrix diagonal must be zero (no self-loops)")
    if not np.array_equal(a, a.T):
        raise ValueError("adjacency matrix must be symmetric")
    n = a.shape[0]
    g = Graph(n)
    g._adj = a.astype(bool)
    g._deg = g._adj.sum(axis=1).astype(np.int64)
    g._n_edges = int(g._deg.sum()) // 2
    return g


def toggle_edge(g: Graph, i, j) -> Graph:
    """Return a copy of ``g`` with dyad (i, j) flipped. Involution."""
    g._check_dyad(i, j)
    out = g.copy()
    out._toggle(i, j)
    return out


def density(g: Graph) -> float:
    """Edge count over the n(n-1)/2 possible dyads."""
    if g.n < 2:
        raise ValueError(f"density needs n >= 2, got n={g.n}")
    return g.n_edges / (g.n * (g.n - 1) / 2)


def degree_stats(g: Graph) -> np.ndarray:
    """Per-vertex degree vector t(y); entry i is the number of ties of i."""
    return g.degrees()


def sufficient_stats(g: Graph, kinds) -> np.ndarray:
    """Sufficient statistics s(y) for the requested kinds, in order.

    edges: edge count; twostars: sum_i C(d_i, 2); triangles: number of
    vertex triples with all three edges present.
    """
    kinds = validate_kinds(kinds)
    out = np.empty(len(kinds), dtype=np.int64)
    for idx, k in enumerate(kinds):
        if k == EDGES:
            out[idx] = g.n_edges
        elif k == TWOSTARS:
            d = g._deg
            out[idx] = int((d * (d - 1) // 2).sum())
        else:
            a = g._adj.astype(np.int64)
            # trace-free count: sum over adjacent (i,j) of common neighbors
            # counts each triangle 6 times
            out[idx] = int(((a @ a) * a).sum()) // 6
    return out


def change_stats(g: Graph, i, j, kinds) -> np.ndarray:
    """Change statistics s_ij(y): stats with dyad (i,j) on minus off.

    Computed from the local neighborhood only, never by a double recount;
    independent of the current state of (i, j) itself.
    """
    g._check_dyad(i, j)
    kinds = validate_kinds(kinds)
    out = np.empty(len(kinds), dtype=np.int64)
    on = g._adj[i, j]
    for idx, k in enumerate(kinds):
        if k == EDGES:
            out[idx] = 1
        elif k == TWOSTARS:
            di = g._deg[i] - (1 if on else 0)
            dj = g._deg[j] - (1 if on else 0)
            out[idx] = int(di + dj)
        else:
            out[idx] = int(np.count_nonzero(g._adj[i] & g._adj[j]))
    return out


def parse_edge_list(text: str) -> Graph:
    """Parse the edge-list text format.

    A header line ``n=<count>`` fixes the vertex count; every following
    non-comment line holds two 1-based vertex ids.  Duplicate lines
    collapse to one edge.  Lines starting with ``#`` and blank lines are
    ignored.
    """
    n = None
    g = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if n is None:
            if not line.startswith("n="):
                raise ValueError(f"line {lineno}: expected header 'n=<count>' first")
            try:
                n = int(line[2:])
            except ValueError:
                raise ValueError(f"line {lineno}: bad vertex count in header {line!r}") from None
            if n < 1:
                raise ValueError(f"line {lineno}: vertex count must be >= 1, got {n}")
            g = Graph(n)
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected two vertex ids, got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer vertex id in {line!r}") from None
        if u == v:
            raise ValueError(f"line {lineno}: self-loop {u} {v} not allowed")
        if not (1 <= u <= n and 1 <= v <= n):
            raise ValueError(f"line {lineno}: vertex id out of range 1..{n} in {line!r}")
        i, j = u - 1, v - 1
        if not g._adj[i, j]:
            g._toggle(i, j)
    if g is None:
        raise ValueError("empty input: missing 'n=<count>' header")
    return g


def read_edge_list(path) -> Graph:
    with open(path, "r", encoding="utf-8") as f:
        return parse_edge_list(f.read())


def write_edge_list(g: Graph, path_or_file):
    """Write a graph in the edge-list format (1-based ids, LF endings)."""
    if hasattr(path_or_file, "write"):
        f = path_or_file
        f.write(f"n={g.n}\n")
        for i, j in g.edges():
            f.write(f"{i + 1} {j + 1}\n")
    else:
        with open(path_or_file, "w", encoding="utf-8", newline="\n") as f:
            write_edge_list(g, f)


def format_edge_list(g: Graph) -> str:
    buf = io.StringIO()
    write_edge_list(g, buf)
    return buf.getvalue()


def parse_adjacency_csv(text: str) -> Graph:
    """Parse an n x n adjacency matrix given as n lines of comma-separated 0/1.

    The diagonal must be zero and the matrix symmetric.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        cells = [c.strip() for c in line.split(",")]
        row = []
        for c in cells:
            if c not in ("0", "1"):
                raise ValueError(f"line {lineno}: adjacency entries must be 0 or 1, got {c!r}")
            row.append(int(c))
        rows.append((lineno, row))
    if not rows:
        raise ValueError("empty adjacency input")
    n = len(rows)
    for lineno, row in rows:
        if len(row) != n:
            raise ValueError(f"line {lineno}: expected {n} columns, got {len(row)}")
    a = np.array([row for _, row in rows], dtype=np.int64)
    if np.diagonal(a).any():
        raise ValueError("adjacency diagonal must be zero")
    if not np.array_equal(a, a.T):
        raise ValueError("adjacency matrix must be symmetric")
    return as_graph(a)


def read_adjacency_csv(path) -> Graph:
    with open(path, "r", encoding="utf-8") as f:
        return parse_adjacency_csv(f.read())


def load_karate() -> Graph:
    """The bundled 34-vertex karate club friendship network."""
    from importlib import resources

    text = resources.files("ergmix.data").joinpath("karate.edges").read_text("utf-8")
    return parse_edge_list(text)
