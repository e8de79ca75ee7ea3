"""Network simulation for doubly-intractable inference.

Two samplers target f(y | theta, phi) on graphs with a fixed node set:

* ``tnt``  - tie/no-tie Metropolis.  With probability 1/2 propose
  toggling a uniformly chosen existing edge, otherwise a uniformly
  chosen empty dyad, with the usual Hastings correction.  Mixes much
  faster than a uniform-dyad walk on sparse graphs.
* ``gibbs`` - pick one dyad uniformly at random and resample it from
  its full conditional (a Bernoulli with the conditional log-odds).

The production path runs a jitted kernel over a dense adjacency matrix
with pre-drawn uniforms, so a simulation is a pure function of
(initial graph, parameters, generator state).  ``gibbs_step`` and
``tnt_step`` are slow reference implementations of a single move used
for cross-checking.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._kernels import run_sampler
from .graph import EDGES, TWOSTARS, TRIANGLES, Graph, as_graph
from .model import ModelSpec, ParamState, conditional_logit

SAMPLERS = ("tnt", "gibbs")
INITS = ("observed", "empty", "random")

# uniforms consumed by one kernel step; layout is fixed so that runs are
# reproducible across sampler kinds
UNIFORMS_PER_STEP = 3


def n_dyads(n: int) -> int:
    return n * (n - 1) // 2


@lru_cache(maxsize=64)
def dyad_index(n):
    """Upper-triangle dyad endpoints in row-major order, as int64 arrays."""
    ii, jj = np.triu_indices(n, k=1)
    return ii.astype(np.int64), jj.astype(np.int64)


@dataclass(frozen=True)
class SimConfig:
    """How auxiliary networks are generated.

    aux_iters defaults to the number of dyads when left as None.
    init selects the starting graph: the observed network, the empty
    graph, or an independent-dyad draw with the given density.
    """

    aux_iters: int | None = None
    sampler: str = "tnt"
    init: str = "observed"
    init_density: float = 0.5

    def __post_init__(self):
        if self.aux_iters is not None and self.aux_iters < 1:
            raise ValueError("aux_iters must be at least 1")
        if self.sampler not in SAMPLERS:
            raise ValueError(f"unknown sampler {self.sampler!r}")
        if self.init not in INITS:
            raise ValueError(f"unknown init {self.init!r}")
        if not 0.0 <= self.init_density <= 1.0:
            raise ValueError("init_density must lie in [0, 1]")

    def resolve_iters(self, n: int) -> int:
        return self.aux_iters if self.aux_iters is not None else n_dyads(n)


class SimState:
    """Mutable sampler workspace in the layout the kernel expects.

    Holds the dense adjacency, degrees, incremental sufficient
    statistics and the dyad pool permutation (edges occupy the prefix).
    Build once from a graph, then recycle via copy_from to avoid paying
    the setup cost inside tight loops.
    """

    __slots__ = ("n", "D", "dy_i", "dy_j", "adj", "deg", "pool", "pos",
                 "ne", "edges", "twostars", "triangles")

    def __init__(self, graph: Graph):
        n = graph.n
        self.n = n
        self.D = n_dyads(n)
        self.dy_i, self.dy_j = dyad_index(n)
        self.adj = graph.adjacency().astype(np.uint8)
        self.deg = graph.degrees().astype(np.int64)
        edge_mask = self.adj[self.dy_i, self.dy_j] != 0
        self.pool = np.concatenate(
            [np.flatnonzero(edge_mask), np.flatnonzero(~edge_mask)]
        ).astype(np.int64)
        self.pos = np.empty(self.D, dtype=np.int64)
        self.pos[self.pool] = np.arange(self.D, dtype=np.int64)
        self.ne = int(edge_mask.sum())
        d = self.deg
        self.edges = self.ne
        self.twostars = int((d * (d - 1) // 2).sum())
        a = self.adj.astype(np.int64)
        self.triangles = int(((a @ a) * a).sum() // 6)

    def copy_from(self, other: "SimState"):
        np.copyto(self.adj, other.adj)
        np.copyto(self.deg, other.deg)
        np.copyto(self.pool, other.pool)
        np.copyto(self.pos, other.pos)
        self.ne = other.ne
        self.edges = other.edges
        self.twostars = other.twostars
        self.triangles = other.triangles

    def copy(self) -> "SimState":
        out = object.__new__(SimState)
        out.n = self.n
        out.D = self.D
        out.dy_i = self.dy_i
        out.dy_j = self.dy_j
        out.adj = self.adj.copy()
        out.deg = self.deg.copy()
        out.pool = self.pool.copy()
        out.pos = self.pos.copy()
        out.ne = self.ne
        out.edges = self.edges
        out.twostars = self.twostars
        out.triangles = self.triangles
        return out

    def to_graph(self) -> Graph:
        return as_graph(self.adj)

    def stats3(self):
        return np.array([self.edges, self.twostars, self.triangles],
                        dtype=np.int64)

    def run(self, coef3, phi, uniforms, *, use_tnt, burn, n_draws, thin,
            collect_codes=False):
        """Advance the state in place, collecting n_draws thinned draws.

        Returns (degree draws, stat draws, codes, accepted).  codes is
        None unless collect_codes; stat draws columns are edge count,
        two-star count, triangle count.
        """
        if n_draws < 1:
            raise ValueError("n_draws must be at least 1")
        out_deg = np.empty((n_draws, self.n), dtype=np.int64)
        out_stats = np.empty((n_draws, 3), dtype=np.int64)
        out_codes = np.empty(n_draws if collect_codes else 0, dtype=np.uint64)
        if collect_codes and self.D > 63:
            raise ValueError("graph codes need at most 63 dyads")
        ne, accepted = run_sampler(
            self.adj, self.deg, self.pool, self.pos, self.dy_i, self.dy_j,
            self.ne, self.edges, self.twostars, self.triangles,
            coef3[0], coef3[1], coef3[2],
            np.ascontiguousarray(phi, dtype=np.float64),
            uniforms, use_tnt, burn, n_draws, thin,
            out_deg, out_stats, out_codes, collect_codes,
        )
        # the final draw always lands on the last step, so it carries the
        # current statistics of the workspace
        self.ne = ne
        self.edges = int(out_stats[-1, 0])
        self.twostars = int(out_stats[-1, 1])
        self.triangles = int(out_stats[-1, 2])
        return out_deg, out_stats, (out_codes if collect_codes else None), accepted


def coef3_from(spec: ModelSpec, theta) -> np.ndarray:
    """Map active structural coefficients onto the kernel's fixed slots."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (spec.n_stats,):
        raise ValueError("theta length does not match the model's statistics")
    out = np.zeros(3, dtype=np.float64)
    slot = {EDGES: 0, TWOSTARS: 1, TRIANGLES: 2}
    for kind, value in zip(spec.stats, theta):
        out[slot[kind]] = value
    return out


def select_stat_columns(spec_stats, stats3: np.ndarray) -> np.ndarray:
    """Pick this model's statistic columns out of a kernel stat array."""
    slot = {EDGES: 0, TWOSTARS: 1, TRIANGLES: 2}
    cols = [slot[k] for k in spec_stats]
    return stats3[..., cols]


def initial_state(config: SimConfig, n: int, rng, start: Graph | None) -> SimState:
    if config.init == "observed":
        if start is None:
            raise ValueError("init='observed' needs a starting graph")
        if start.n != n:
            raise ValueError("starting graph has the wrong number of nodes")
        return SimState(start)
    if config.init == "empty":
        return SimState(Graph(n))
    # independent-dyad random start, consumes one uniform per dyad
    dy_i, dy_j = dyad_index(n)
    u = rng.random(dy_i.shape[0])
    adj = np.zeros((n, n), dtype=np.uint8)
    hit = u < config.init_density
    adj[dy_i[hit], dy_j[hit]] = 1
    adj[dy_j[hit], dy_i[hit]] = 1
    return SimState(as_graph(adj))


def simulate_network(state: ParamState, spec: ModelSpec, n: int,
                     config: SimConfig, rng, start: Graph | None = None) -> Graph:
    """Run config's sampler for its iteration budget; return the end graph.

    Deterministic given (state, spec, n, config, generator state, start).
    """
    state.check(spec, n)
    ws = initial_state(config, n, rng, start)
    steps = config.resolve_iters(n)
    coef3 = coef3_from(spec, state.theta)
    phi = state.phi if spec.random_effects else np.zeros(n)
    uniforms = rng.random((steps, UNIFORMS_PER_STEP))
    ws.run(coef3, phi, uniforms,
           use_tnt=config.sampler == "tnt", burn=steps - 1, n_draws=1, thin=1)
    return ws.to_graph()


def simulate_draws(ws: SimState, coef3, phi, rng, *, use_tnt, burn,
                   n_draws, thin, collect_codes=False):
    """Low-level thinned collection on an existing workspace.

    Advances ws in place; returns (degree draws, stat draws, codes).
    """
    steps = burn + n_draws * thin
    uniforms = rng.random((steps, UNIFORMS_PER_STEP))
    out_deg, out_stats, codes, _ = ws.run(
        coef3, phi, uniforms, use_tnt=use_tnt, burn=burn,
        n_draws=n_draws, thin=thin, collect_codes=collect_codes)
    return out_deg, out_stats, codes


def simulate_graph_codes(state: ParamState, spec: ModelSpec, n: int,
                         steps: int, rng, sampler: str = "tnt",
                         start: Graph | None = None) -> np.ndarray:
    """Record the visited graph after every step as a dyad bitmask.

    Only defined for graphs with at most 63 dyads; used to compare the
    sampler's long-run occupancy against exact enumeration.
    """
    if n_dyads(n) > 63:
        raise ValueError("graph codes need at most 63 dyads")
    if sampler not in SAMPLERS:
        raise ValueError(f"unknown sampler {sampler!r}")
    state.check(spec, n)
    ws = SimState(start) if start is not None else SimState(Graph(n))
    coef3 = coef3_from(spec, state.theta)
    phi = state.phi if spec.random_effects else np.zeros(n)
    uniforms = rng.random((steps, UNIFORMS_PER_STEP))
    _, _, codes, _ = ws.run(coef3, phi, uniforms,
                            use_tnt=sampler == "tnt", burn=0,
                            n_draws=steps, thin=1, collect_codes=True)
    return codes


def graph_code(g: Graph) -> int:
    """The dyad bitmask a code collection would assign to g."""
    if n_dyads(g.n) > 63:
        raise ValueError("graph codes need at most 63 dyads")
    dy_i, dy_j = dyad_index(g.n)
    mask = g.adjacency()[dy_i, dy_j] != 0
    code = 0
    for k in np.flatnonzero(mask):
        code |= 1 << int(k)
    return code


def gibbs_step(g: Graph, state: ParamState, spec: ModelSpec, rng) -> bool:
    """Reference single Gibbs update, mutating g. True if the dyad changed.

    Consumes one row of three uniforms in the same layout as the fast
    kernel, so a pure-python trajectory matches the kernel trajectory
    draw for draw.
    """
    u = rng.random(UNIFORMS_PER_STEP)
    D = n_dyads(g.n)
    k = min(int(u[0] * D), D - 1)
    dy_i, dy_j = dyad_index(g.n)
    i, j = int(dy_i[k]), int(dy_j[k])
    lam = conditional_logit(state, g, i, j, spec)
    want = u[1] < 1.0 / (1.0 + np.exp(-lam))
    if want != g.has_edge(i, j):
        g._toggle(i, j)
        return True
    return False


def tnt_step(g: Graph, state: ParamState, spec: ModelSpec, rng) -> bool:
    """Reference single tie/no-tie update, mutating g. True on acceptance.

    Dyad pools are kept in sorted order here, so trajectories are not
    comparable with the kernel (which permutes its pool); distributions
    are.
    """
    u = rng.random(UNIFORMS_PER_STEP)
    n = g.n
    D = n_dyads(n)
    ne = g.n_edges
    dy_i, dy_j = dyad_index(n)
    present = g.adjacency()[dy_i, dy_j] != 0

    if ne == 0 or ne == D:
        k = min(int(u[1] * D), D - 1)
        log_qf = -np.log(D)
    elif u[0] < 0.5:
        which = np.flatnonzero(present)
        k = which[min(int(u[1] * ne), ne - 1)]
        log_qf = np.log(0.5 / ne)
    else:
        which = np.flatnonzero(~present)
        nn = D - ne
        k = which[min(int(u[1] * nn), nn - 1)]
        log_qf = np.log(0.5 / nn)

    i, j = int(dy_i[k]), int(dy_j[k])
    adding = not g.has_edge(i, j)
    delta = conditional_logit(state, g, i, j, spec)
    if adding:
        dlogpot = delta
        ne2 = ne + 1
    else:
        dlogpot = -delta
        ne2 = ne - 1
    if ne2 == 0 or ne2 == D:
        log_qr = -np.log(D)
    elif adding:
        log_qr = np.log(0.5 / ne2)
    else:
        log_qr = np.log(0.5 / (D - ne2))

    if np.log(u[2]) < dlogpot + log_qr - log_qf:
        g._toggle(i, j)
        return True
    return False
