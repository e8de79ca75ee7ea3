"""Marginal-likelihood machinery: Laplace approximation over the random
effects, thermodynamic integration for the normalizing-constant ratio,
and the Bayes factor that puts the pieces together.

The fixed model (model 1, statistics edges + shared stats) and the
mixed model (model 2, shared stats + nodal random effects) are nested:
collapsing every phi_i to a common value recovers an edge coefficient.
That nesting provides the linear path used for the kappa ratio.

All estimates are plug-in estimates at posterior summaries (means for
location parameters, the geometric mean for sigma2_phi), matching a
Chib-style identity

    log f(y) = log f(y | plug-in) + log prior(plug-in)
               - log posterior(plug-in | y)

with the mixed likelihood marginalized over phi by a Laplace
approximation and each posterior density replaced by a moment-matched
Gaussian fit to the chain draws.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError
from .graph import EDGES, Graph, degree_stats, sufficient_stats
from .model import ModelSpec, ParamState, invgamma_logpdf, normal_logpdf
from .rng import DOMAIN_COV, DOMAIN_PATH_POINT, normalize_seed, substream
from .sampler import ChainResult, geometric_mean
from .simulate import (
    SimConfig,
    SimState,
    coef3_from,
    select_stat_columns,
    simulate_draws,
)


@dataclass(frozen=True)
class LaplaceConfig:
    """Monte Carlo budget for the degree covariance estimate."""

    cov_sims: int = 10000
    sim: SimConfig = field(default_factory=SimConfig)
    seed: int = 0

    def __post_init__(self):
        if self.cov_sims < 2:
            raise ValueError("cov_sims must be at least 2")


@dataclass(frozen=True)
class PathConfig:
    """Thermodynamic-integration schedule.

    The unit interval is cut into grid_points subintervals; at each of
    the grid_points + 1 endpoints the sampler collects draws_per_point
    graphs, one per aux_iters sweep of the auxiliary sampler, after an
    aux_iters burn-in.  With warm_start the chain carries over between
    neighbouring points inside a block (n_blocks contiguous blocks, each
    opening with a longer fresh burn-in); without it every point burns
    in from scratch.  Each point consumes its own derived random stream,
    so results do not depend on thread scheduling.
    """

    grid_points: int = 1000
    draws_per_point: int = 1000
    sim: SimConfig = field(default_factory=lambda: SimConfig(init="empty"))
    seed: int = 0
    warm_start: bool = True
    n_blocks: int = 8
    cold_burn_mult: int = 5

    def __post_init__(self):
        if self.grid_points < 2:
            raise ValueError("grid_points must be at least 2")
        if self.draws_per_point < 1:
            raise ValueError("draws_per_point must be at least 1")
        if self.n_blocks < 1:
            raise ValueError("n_blocks must be at least 1")
        if self.cold_burn_mult < 1:
            raise ValueError("cold_burn_mult must be at least 1")
        if self.sim.init == "observed":
            raise ValueError("path sampling has no observed graph to start from")


@dataclass
class PluginPoint:
    """Posterior plug-ins for both models of a nested pair.

    theta_fixed holds the fixed model's coefficients (edges first);
    theta_mixed the mixed model's structural coefficients, which must be
    one shorter.  sigma2_hat is a geometric posterior mean.
    """

    theta_fixed: np.ndarray
    theta_mixed: np.ndarray
    phi_hat: np.ndarray
    mu_hat: float
    sigma2_hat: float

    def __post_init__(self):
        self.theta_fixed = np.asarray(self.theta_fixed, dtype=float)
        self.theta_mixed = np.asarray(self.theta_mixed, dtype=float)
        self.phi_hat = np.asarray(self.phi_hat, dtype=float)
        if self.theta_fixed.ndim != 1 or self.theta_mixed.ndim != 1:
            raise ValueError("plug-in coefficient vectors must be 1-d")
        if len(self.theta_fixed) != len(self.theta_mixed) + 1:
            raise ValueError(
                "nested models need exactly one extra fixed coefficient")
        if not self.sigma2_hat > 0:
            raise ValueError("sigma2_hat must be positive")

    @property
    def log_sigma2_hat(self) -> float:
        return math.log(self.sigma2_hat)

    @property
    def n(self) -> int:
        return len(self.phi_hat)


def check_nested(spec_fixed: ModelSpec, spec_mixed: ModelSpec):
    """The fixed model must be the mixed model plus an edge term."""
    if spec_fixed.random_effects:
        raise ValueError("the fixed model must not carry random effects")
    if not spec_mixed.random_effects:
        raise ValueError("the mixed model must carry random effects")
    if spec_fixed.stats[:1] != (EDGES,):
        raise ValueError("the fixed model's first statistic must be edge count")
    if spec_fixed.stats[1:] != spec_mixed.stats:
        raise ValueError(
            "models are not nested: fixed statistics must be edges plus "
            "the mixed statistics in order")


def plugin_from_fits(fit_fixed: ChainResult, fit_mixed: ChainResult) -> PluginPoint:
    """Posterior plug-in point from the two chains' draws."""
    fixed_theta_cols = fit_fixed.theta_columns()
    mixed_theta_cols = fit_mixed.theta_columns()
    if tuple(fit_fixed.columns) != tuple(fixed_theta_cols):
        raise ValueError("the fixed fit must contain only theta columns")
    if fixed_theta_cols[:1] != ["theta.edges"]:
        raise ValueError("the fixed fit must lead with theta.edges")
    if fixed_theta_cols[1:] != mixed_theta_cols:
        raise ValueError("fits are not nested: fixed columns must be "
                         "theta.edges plus the mixed theta columns")
    for name in ("mu_phi", "sigma2_phi"):
        if name not in fit_mixed.columns:
            raise ValueError(f"mixed fit is missing the {name} column")
    phi_cols = [c for c in fit_mixed.columns if c.startswith("phi.")]
    if not phi_cols:
        raise ValueError("mixed fit has no random-effect columns")

    theta_fixed = np.array([np.mean(fit_fixed.column(c)) for c in fixed_theta_cols])
    theta_mixed = np.array([np.mean(fit_mixed.column(c)) for c in mixed_theta_cols])
    phi_hat = np.array([np.mean(fit_mixed.column(c)) for c in phi_cols])
    mu_hat = float(np.mean(fit_mixed.column("mu_phi")))
    sigma2_hat = geometric_mean(fit_mixed.column("sigma2_phi"))
    return PluginPoint(theta_fixed, theta_mixed, phi_hat, mu_hat, sigma2_hat)


def mixed_plugin_state(pt: PluginPoint) -> ParamState:
    return ParamState(theta=pt.theta_mixed.copy(), phi=pt.phi_hat.copy(),
                      mu_phi=pt.mu_hat, sigma2_phi=pt.sigma2_hat)


def degree_cov(pt: PluginPoint, spec_mixed: ModelSpec, start: Graph,
               cfg: LaplaceConfig) -> np.ndarray:
    """Sample covariance of the degree vector at the mixed plug-ins.

    Draws cov_sims networks from one chain (spaced a full auxiliary
    budget apart) started per cfg.sim and returns the exact-symmetric
    covariance estimate.
    """
    n = start.n
    if cfg.cov_sims < n + 1:
        raise ValueError(
            f"cov_sims={cfg.cov_sims} cannot identify an {n}x{n} covariance; "
            f"need at least n + 1 = {n + 1}")
    rng = substream(normalize_seed(cfg.seed), DOMAIN_COV)
    if cfg.sim.init == "observed":
        ws = SimState(start)
    elif cfg.sim.init == "empty":
        ws = SimState(Graph(n))
    else:
        from .simulate import initial_state
        ws = initial_state(cfg.sim, n, rng, start)
    aux = cfg.sim.resolve_iters(n)
    coef3 = coef3_from(spec_mixed, pt.theta_mixed)
    deg, _, _ = simulate_draws(
        ws, coef3, pt.phi_hat, rng, use_tnt=cfg.sim.sampler == "tnt",
        burn=aux, n_draws=cfg.cov_sims, thin=aux)
    cov = np.cov(deg.astype(float), rowvar=False, ddof=1)
    return 0.5 * (cov + cov.T)


def laplace_factor(graph: Graph, pt: PluginPoint, cov: np.ndarray) -> float:
    """Log of the Laplace integral over phi, excluding the theta terms.

        -(n/2) log sigma2 + phi_hat . t(y) - ||phi_hat - mu 1||^2 / (2 sigma2)
        - (1/2) log det(I / sigma2 + Cov)

    The Gaussian (2 pi)^{n/2} factors from the prior and the curvature
    cancel exactly.
    """
    n = graph.n
    if cov.shape != (n, n):
        raise ValueError("covariance shape does not match the graph")
    t_obs = degree_stats(graph).astype(float)
    resid = pt.phi_hat - pt.mu_hat
    m = np.eye(n) / pt.sigma2_hat + cov
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise NumericalError(
            "curvature matrix is not positive definite; increase cov_sims "
            "or the auxiliary budget") from None
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    return (
        -0.5 * n * math.log(pt.sigma2_hat)
        + float(pt.phi_hat @ t_obs)
        - 0.5 * float(resid @ resid) / pt.sigma2_hat
        - 0.5 * logdet
    )


def laplace_log_marginal(graph: Graph, spec_mixed: ModelSpec, pt: PluginPoint,
                         cov: np.ndarray, log_kappa: float) -> float:
    """Approximate log f(y | theta, mu, sigma2) at the mixed plug-ins.

    log_kappa is the log normalizing constant at (theta_mixed, phi_hat),
    supplied externally (exact for tiny graphs, by path sampling
    otherwise).
    """
    s_obs = (sufficient_stats(graph, spec_mixed.stats).astype(float)
             if spec_mixed.n_stats else np.zeros(0))
    lead = float(pt.theta_mixed @ s_obs) if spec_mixed.n_stats else 0.0
    return lead + laplace_factor(graph, pt, cov) - log_kappa


@dataclass
class PathResult:
    """Normalizing-constant log ratio with per-point diagnostics."""

    value: float
    grid: np.ndarray
    e_values: np.ndarray
    se_values: np.ndarray

    def __float__(self):
        return float(self.value)


def _path_coefs(pt: PluginPoint, spec_fixed: ModelSpec, g: float):
    """Coefficients of the bridging model at path position g."""
    theta_aug = np.concatenate([[0.0], pt.theta_mixed])
    theta_g = (1.0 - g) * pt.theta_fixed + g * theta_aug
    return coef3_from(spec_fixed, theta_g), g * pt.phi_hat


def _batch_se(x: np.ndarray, n_batches: int = 16) -> float:
    """Batch-means standard error, honest under serial correlation."""
    m = x.size
    if m < 2 * n_batches:
        return float(np.std(x, ddof=1) / math.sqrt(m)) if m > 1 else float("inf")
    k = m // n_batches
    means = x[: k * n_batches].reshape(n_batches, k).mean(axis=1)
    return float(np.std(means, ddof=1) / math.sqrt(n_batches))


def _path_block(pt: PluginPoint, spec_fixed: ModelSpec, n: int,
                cfg: PathConfig, points) -> list:
    """Integrand estimates for one contiguous block of grid points."""
    ws = SimState(Graph(n))
    aux = cfg.sim.resolve_iters(n)
    use_tnt = cfg.sim.sampler == "tnt"
    dvec = pt.theta_fixed - np.concatenate([[0.0], pt.theta_mixed])
    out = []
    cold = True
    for idx in points:
        g = idx / cfg.grid_points
        rng = substream(normalize_seed(cfg.seed), DOMAIN_PATH_POINT, idx)
        coef3, phi_g = _path_coefs(pt, spec_fixed, g)
        if cold or not cfg.warm_start:
            ws = SimState(Graph(n))
            if cfg.sim.init == "random":
                from .simulate import initial_state
                ws = initial_state(cfg.sim, n, rng, None)
            burn = cfg.cold_burn_mult * aux
        else:
            burn = aux
        cold = False
        deg, stats3, _ = simulate_draws(
            ws, coef3, phi_g, rng, use_tnt=use_tnt, burn=burn,
            n_draws=cfg.draws_per_point, thin=aux)
        s_fixed = select_stat_columns(spec_fixed.stats, stats3).astype(float)
        integrand = s_fixed @ dvec - deg.astype(float) @ pt.phi_hat
        out.append((idx, float(integrand.mean()), _batch_se(integrand)))
    return out


def estimate_log_kappa_ratio(pt: PluginPoint, spec_fixed: ModelSpec,
                             spec_mixed: ModelSpec, n: int, cfg: PathConfig,
                             threads: int = 1) -> PathResult:
    """log kappa(theta_fixed) - log kappa(theta_mixed, phi_hat) by
    trapezoid integration along the linear bridge between the models.

    Deterministic for a fixed configuration regardless of thread count:
    every grid point has its own derived stream and the reduction runs
    in grid order.
    """
    check_nested(spec_fixed, spec_mixed)
    if pt.n != n:
        raise ValueError("plug-in phi length does not match the node count")
    if len(pt.theta_fixed) != spec_fixed.n_stats:
        raise ValueError("theta_fixed length does not match the fixed model")

    total = cfg.grid_points + 1
    n_blocks = min(cfg.n_blocks, total)
    bounds = np.linspace(0, total, n_blocks + 1).astype(int)
    blocks = [range(bounds[b], bounds[b + 1]) for b in range(n_blocks)
              if bounds[b] < bounds[b + 1]]

    results = {}
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_path_block, pt, spec_fixed, n, cfg, blk)
                       for blk in blocks]
            for fut in futures:
                for idx, e, se in fut.result():
                    results[idx] = (e, se)
    else:
        for blk in blocks:
            for idx, e, se in _path_block(pt, spec_fixed, n, cfg, blk):
                results[idx] = (e, se)

    grid = np.arange(total) / cfg.grid_points
    e_values = np.array([results[i][0] for i in range(total)])
    se_values = np.array([results[i][1] for i in range(total)])
    value = float(np.trapezoid(e_values, dx=1.0 / cfg.grid_points))
    return PathResult(value=value, grid=grid, e_values=e_values,
                      se_values=se_values)


def path_log_kappa_ratio(pt: PluginPoint, spec_fixed: ModelSpec,
                         spec_mixed: ModelSpec, n: int, cfg: PathConfig,
                         threads: int = 1) -> float:
    return estimate_log_kappa_ratio(pt, spec_fixed, spec_mixed, n, cfg,
                                    threads).value


def normal_logpdf_fit(draws: np.ndarray, point: np.ndarray) -> float:
    """Log density at point of a Gaussian moment-matched to the draws."""
    draws = np.asarray(draws, dtype=float)
    if draws.ndim == 1:
        draws = draws[:, None]
    point = np.atleast_1d(np.asarray(point, dtype=float))
    m, d = draws.shape
    if point.shape != (d,):
        raise ValueError("point dimension does not match the draws")
    if m < d + 1:
        raise ValueError("too few draws to fit a covariance")
    mean = draws.mean(axis=0)
    cov = np.cov(draws, rowvar=False, ddof=1).reshape(d, d)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise NumericalError(
            "posterior sample covariance is singular; the chain may not "
            "have moved in some coordinate") from None
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    z = np.linalg.solve(chol, point - mean)
    return float(-0.5 * (d * math.log(2.0 * math.pi) + logdet + z @ z))


@dataclass
class EvidenceReport:
    """log BF of mixed over fixed with its additive decomposition."""

    log_bf: float
    components: dict
    plugin: PluginPoint
    path: PathResult
    n_cov_sims: int

    def as_dict(self) -> dict:
        return {
            "log_bf_21": self.log_bf,
            "components": dict(self.components),
            "plugin": {
                "theta_fixed": self.plugin.theta_fixed.tolist(),
                "theta_mixed": self.plugin.theta_mixed.tolist(),
                "phi_hat": self.plugin.phi_hat.tolist(),
                "mu_hat": self.plugin.mu_hat,
                "sigma2_hat": self.plugin.sigma2_hat,
            },
            "path": {
                "grid": self.path.grid.tolist(),
                "e_values": self.path.e_values.tolist(),
                "se_values": self.path.se_values.tolist(),
            },
            "n_cov_sims": self.n_cov_sims,
        }


def _prior_ratio(pt: PluginPoint, spec_fixed: ModelSpec,
                 spec_mixed: ModelSpec) -> float:
    """log prior at the mixed plug-ins minus log prior at the fixed ones.

    The random-effect density itself is absent: it is marginalized away
    inside the Laplace factor.
    """
    val = sum(normal_logpdf(t, 0.0, spec_mixed.hyper.rho2)
              for t in pt.theta_mixed)
    val += normal_logpdf(pt.mu_hat, 0.0, spec_mixed.hyper.tau2)
    val += invgamma_logpdf(pt.sigma2_hat, spec_mixed.hyper.ig_a,
                           spec_mixed.hyper.ig_b)
    val -= sum(normal_logpdf(t, 0.0, spec_fixed.hyper.rho2)
               for t in pt.theta_fixed)
    return float(val)


def _posterior_ratio(pt: PluginPoint, fit_fixed: ChainResult,
                     fit_mixed: ChainResult) -> float:
    """log fitted posterior density at theta_fixed (model 1) minus the
    fitted joint density of (theta, mu_phi, log sigma2_phi) at the mixed
    plug-ins (model 2).  sigma2 enters on the log scale, where its
    posterior is close to Gaussian."""
    fixed_draws = np.column_stack(
        [fit_fixed.column(c) for c in fit_fixed.theta_columns()])
    log_p1 = normal_logpdf_fit(fixed_draws, pt.theta_fixed)

    mixed_cols = [fit_mixed.column(c) for c in fit_mixed.theta_columns()]
    mixed_cols.append(fit_mixed.column("mu_phi"))
    mixed_cols.append(np.log(fit_mixed.column("sigma2_phi")))
    mixed_draws = np.column_stack(mixed_cols)
    mixed_point = np.concatenate(
        [pt.theta_mixed, [pt.mu_hat, pt.log_sigma2_hat]])
    log_p2 = normal_logpdf_fit(mixed_draws, mixed_point)
    return float(log_p1 - log_p2)


def log_bayes_factor(graph: Graph, spec_fixed: ModelSpec,
                     spec_mixed: ModelSpec, fit_fixed: ChainResult,
                     fit_mixed: ChainResult, path_cfg: PathConfig,
                     laplace_cfg: LaplaceConfig,
                     threads: int = 1) -> EvidenceReport:
    """Estimate log BF of the mixed model over the fixed model.

    Five additive components: the plug-in log potential difference, the
    Laplace factor, the kappa log ratio from path sampling, the prior
    ratio and the fitted posterior-density ratio.
    """
    check_nested(spec_fixed, spec_mixed)
    pt = plugin_from_fits(fit_fixed, fit_mixed)
    if pt.n != graph.n:
        raise ValueError("fits do not match the graph's node count")

    s_fixed = sufficient_stats(graph, spec_fixed.stats).astype(float)
    s_mixed = (sufficient_stats(graph, spec_mixed.stats).astype(float)
               if spec_mixed.n_stats else np.zeros(0))

    log_lik_ratio = float(pt.theta_mixed @ s_mixed) - float(
        pt.theta_fixed @ s_fixed)
    cov = degree_cov(pt, spec_mixed, graph, laplace_cfg)
    log_laplace_term = laplace_factor(graph, pt, cov)
    path = estimate_log_kappa_ratio(pt, spec_fixed, spec_mixed, graph.n,
                                    path_cfg, threads)
    log_kappa_ratio = path.value
    log_prior_ratio = _prior_ratio(pt, spec_fixed, spec_mixed)
    log_posterior_ratio = _posterior_ratio(pt, fit_fixed, fit_mixed)

    components = {
        "log_likelihood_ratio_term": log_lik_ratio,
        "log_laplace_term": log_laplace_term,
        "log_kappa_ratio": log_kappa_ratio,
        "log_prior_ratio": log_prior_ratio,
        "log_posterior_density_ratio": log_posterior_ratio,
    }
    log_bf = float(sum(components.values()))
    return EvidenceReport(log_bf=log_bf, components=components, plugin=pt,
                          path=path, n_cov_sims=laplace_cfg.cov_sims)
