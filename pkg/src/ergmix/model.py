"""Model specification, priors, and unnormalized likelihood evaluation.

The graph model puts probability proportional to
``exp(theta . s(y) + phi . t(y))`` on a graph y, where s(y) are the active
structural statistics and t(y) the per-vertex degrees (present only when
nodal random effects are on).  The normalizing constant is intractable
except for tiny graphs, for which :func:`exact_log_kappa` enumerates it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .graph import EDGES, Graph, change_stats, degree_stats, sufficient_stats, validate_kinds


@dataclass(frozen=True)
class PriorHyper:
    """Hyperparameters of the (deliberately flat) priors.

    rho2: variance of the N(0, rho2 I) prior on each structural coefficient.
    tau2: variance of the N(0, tau2) hyperprior on the random-effect mean.
    ig_a, ig_b: shape and rate of the inverse-gamma hyperprior on the
    random-effect variance, density proportional to x^(-a-1) exp(-b/x).
    """

    rho2: float = 100.0
    tau2: float = 100.0
    ig_a: float = 0.001
    ig_b: float = 0.001

    def __post_init__(self):
        for name in ("rho2", "tau2", "ig_a", "ig_b"):
            v = getattr(self, name)
            if not v > 0:
                raise ValueError(f"{name} must be > 0, got {v}")


@dataclass(frozen=True)
class ModelSpec:
    """Which statistics are active and whether nodal random effects are on.

    With random effects the edges statistic is disallowed: the average tie
    propensity is absorbed by the random-effect mean, and dropping edges is
    what keeps the fixed and mixed models nested for model comparison.
    """

    stats: tuple = ()
    random_effects: bool = False
    hyper: PriorHyper = field(default_factory=PriorHyper)

    def __post_init__(self):
        stats = tuple(self.stats)
        if stats:
            validate_kinds(stats)
        elif not self.random_effects:
            raise ValueError("a model without random effects needs at least one statistic")
        if self.random_effects and EDGES in stats:
            raise ValueError(
                "the edges statistic cannot be combined with random effects; "
                "the edge effect is absorbed by the random-effect mean"
            )
        object.__setattr__(self, "stats", stats)

    @property
    def n_stats(self):
        return len(self.stats)


@dataclass
class ParamState:
    """One point (theta, phi, mu_phi, sigma2_phi) in the joint parameter space."""

    theta: np.ndarray
    phi: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mu_phi: float = 0.0
    sigma2_phi: float = 1.0

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float).reshape(-1)
        self.phi = np.asarray(self.phi, dtype=float).reshape(-1)

    def check(self, spec: ModelSpec, n=None):
        if len(self.theta) != spec.n_stats:
            raise ValueError(
                f"theta has length {len(self.theta)}, expected {spec.n_stats} for stats {spec.stats}"
            )
        if spec.random_effects:
            if n is not None and len(self.phi) != n:
                raise ValueError(f"phi has length {len(self.phi)}, expected n={n}")
            if not self.sigma2_phi > 0:
                raise ValueError(f"sigma2_phi must be > 0, got {self.sigma2_phi}")

    def copy(self):
        return ParamState(self.theta.copy(), self.phi.copy(), self.mu_phi, self.sigma2_phi)


def log_potential(state: ParamState, g: Graph, spec: ModelSpec) -> float:
    """log q(y) = theta . s(y) + phi . t(y) (phi term absent for fixed models)."""
    state.check(spec, g.n)
    val = 0.0
    if spec.n_stats:
        val += float(state.theta @ sufficient_stats(g, spec.stats))
    if spec.random_effects:
        val += float(state.phi @ degree_stats(g))
    return val


def conditional_logit(state: ParamState, g: Graph, i, j, spec: ModelSpec) -> float:
    """Log odds of the tie (i, j) given the rest of the graph.

    Equals the log-potential difference between the graph with the dyad
    forced on and forced off.
    """
    g._check_dyad(i, j)
    state.check(spec, g.n)
    val = 0.0
    if spec.n_stats:
        val += float(state.theta @ change_stats(g, i, j, spec.stats))
    if spec.random_effects:
        val += float(state.phi[i] + state.phi[j])
    return val


def normal_logpdf(x, mean, var) -> float:
    return -0.5 * (math.log(2.0 * math.pi * var) + (x - mean) ** 2 / var)


def invgamma_logpdf(x, a, b) -> float:
    """Inverse-gamma log density, shape/rate form: x^(-a-1) exp(-b/x) b^a / Gamma(a)."""
    if x <= 0:
        return -math.inf
    return a * math.log(b) - float(gammaln(a)) - (a + 1.0) * math.log(x) - b / x


def log_prior_theta(state: ParamState, spec: ModelSpec) -> float:
    rho2 = spec.hyper.rho2
    return float(sum(normal_logpdf(t, 0.0, rho2) for t in state.theta))


def log_prior_phi(state: ParamState, spec: ModelSpec) -> float:
    """log p(phi | mu_phi, sigma2_phi), the i.i.d. normal random-effect density."""
    if not spec.random_effects:
        return 0.0
    if not state.sigma2_phi > 0:
        raise ValueError(f"sigma2_phi must be > 0, got {state.sigma2_phi}")
    n = len(state.phi)
    resid = state.phi - state.mu_phi
    return float(
        -0.5 * n * math.log(2.0 * math.pi * state.sigma2_phi)
        - 0.5 * float(resid @ resid) / state.sigma2_phi
    )


def log_prior_hyper(state: ParamState, spec: ModelSpec) -> float:
    if not spec.random_effects:
        return 0.0
    h = spec.hyper
    return normal_logpdf(state.mu_phi, 0.0, h.tau2) + invgamma_logpdf(state.sigma2_phi, h.ig_a, h.ig_b)


def log_prior(state: ParamState, spec: ModelSpec) -> float:
    """Joint log prior: theta, random effects, and their hyperparameters."""
    state.check(spec)
    return log_prior_theta(state, spec) + log_prior_phi(state, spec) + log_prior_hyper(state, spec)


# Enumeration guard: 2^24 graphs is the most the exact oracle will sum over.
MAX_EXACT_DYADS = 24


def _dyad_table(n):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return pairs


def exact_log_kappa(state: ParamState, spec: ModelSpec, n: int) -> float:
    """Exact log normalizing constant by enumerating all graphs on n vertices.

    This is an oracle for tiny graphs, guarded at n(n-1)/2 <= 24 dyads; the
    inference paths never call it.
    """
    n = int(n)
    state.check(spec, n if spec.random_effects else None)
    n_dyads = n * (n - 1) // 2
    if n_dyads > MAX_EXACT_DYADS:
        raise ValueError(
            f"refusing exact enumeration over 2^{n_dyads} graphs (limit 2^{MAX_EXACT_DYADS}); "
            "this oracle is for tiny graphs only"
        )

    coef = dict.fromkeys(("edges", "twostars", "triangles"), 0.0)
    for k, th in zip(spec.stats, state.theta):
        coef[k] = float(th)
    phi = state.phi if spec.random_effects else np.zeros(n)

    pairs = _dyad_table(n)
    # incidence[d, v] = 1 if dyad d touches vertex v
    incidence = np.zeros((n_dyads, n), dtype=np.int64)
    for d, (i, j) in enumerate(pairs):
        incidence[d, i] = 1
        incidence[d, j] = 1
    pair_index = {p: d for d, p in enumerate(pairs)}
    triples = []
    for a, b, c in itertools.combinations(range(n), 3):
        triples.append((pair_index[(a, b)], pair_index[(a, c)], pair_index[(b, c)]))
    triples = np.array(triples, dtype=np.int64).reshape(-1, 3)

    total = -math.inf
    chunk = 1 << 16
    shifts = np.arange(n_dyads, dtype=np.uint64)
    for start in range(0, 1 << n_dyads, chunk):
        stop = min(start + chunk, 1 << n_dyads)
        masks = np.arange(start, stop, dtype=np.uint64)
        bits = ((masks[:, None] >> shifts) & np.uint64(1)).astype(np.int64)
        deg = bits @ incidence
        logpot = (
            coef["edges"] * bits.sum(axis=1)
            + coef["twostars"] * (deg * (deg - 1) // 2).sum(axis=1)
            + deg @ phi
        )
        if coef["triangles"] != 0.0 and len(triples):
            tri = (bits[:, triples[:, 0]] & bits[:, triples[:, 1]] & bits[:, triples[:, 2]]).sum(axis=1)
            logpot = logpot + coef["triangles"] * tri
        total = np.logaddexp(total, logsumexp(logpot))
    return float(total)
