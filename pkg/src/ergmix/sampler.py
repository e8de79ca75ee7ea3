"""Exchange-algorithm MCMC for network models with intractable
normalizing constants.

Each Metropolis update simulates one auxiliary network at the proposed
parameters; the auxiliary likelihood contribution makes both normalizing
constants cancel from the acceptance ratio, leaving

    log alpha = (theta' - theta) . (s(y) - s(y'))  + log-prior difference

for a block theta update, and the analogous single-coordinate form with
degree statistics for each random effect.  The hyperparameters mu_phi
and sigma2_phi have conjugate-free random-walk updates that need no
auxiliary network.

One sweep is: theta block, then every phi site, then mu_phi, then
sigma2_phi (sites 2-4 only when the model carries random effects).
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .graph import Graph, degree_stats, sufficient_stats
from .model import (
    ModelSpec,
    ParamState,
    invgamma_logpdf,
    normal_logpdf,
)
from .rng import DOMAIN_CHAIN, normalize_seed, substream
from .simulate import SimConfig, SimState, coef3_from, select_stat_columns

PHI_SCANS = ("sequential", "random")


@dataclass(frozen=True)
class ChainConfig:
    """Run lengths, proposal scales and seeding for one chain.

    Proposal scales: theta and each phi site use Gaussian random walks,
    mu_phi a Gaussian walk, sigma2_phi a uniform walk of the given
    half-width (proposals at or below zero are rejected outright).
    """

    burnin: int = 1000
    main_iters: int = 30000
    thin: int = 1
    aux: SimConfig = field(default_factory=SimConfig)
    prop_sd_theta: float = 0.1
    prop_sd_phi: float = 0.5
    prop_sd_mu: float = 0.1
    prop_halfwidth_sigma2: float = 0.5
    phi_scan: str = "sequential"
    seed: int = 0

    def __post_init__(self):
        if self.burnin < 0:
            raise ValueError("burnin must be nonnegative")
        if self.main_iters < 1:
            raise ValueError("main_iters must be at least 1")
        if self.thin < 1:
            raise ValueError("thin must be at least 1")
        for name in ("prop_sd_theta", "prop_sd_phi", "prop_sd_mu",
                     "prop_halfwidth_sigma2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.phi_scan not in PHI_SCANS:
            raise ValueError(f"unknown phi_scan {self.phi_scan!r}")


@dataclass
class ChainResult:
    """Post-burnin draws in a dense matrix plus bookkeeping.

    columns follow a fixed grammar: "theta.<stat>" for structural
    coefficients, "phi.<k>" (1-based) for random effects, then "mu_phi"
    and "sigma2_phi".
    """

    draws: np.ndarray
    columns: tuple
    accept_rates: dict
    meta: dict

    def column(self, name: str) -> np.ndarray:
        try:
            idx = self.columns.index(name)
        except ValueError:
            raise KeyError(f"no column named {name!r}") from None
        return self.draws[:, idx]

    def theta_columns(self):
        return [c for c in self.columns if c.startswith("theta.")]


def column_names(spec: ModelSpec, n: int) -> tuple:
    cols = [f"theta.{kind}" for kind in spec.stats]
    if spec.random_effects:
        cols += [f"phi.{i + 1}" for i in range(n)]
        cols += ["mu_phi", "sigma2_phi"]
    return tuple(cols)


def default_state(spec: ModelSpec, n: int) -> ParamState:
    return ParamState(
        theta=np.zeros(spec.n_stats),
        phi=np.zeros(n),
        mu_phi=0.0,
        sigma2_phi=1.0,
    )


def _aux_stats(template: SimState, workspace: SimState, coef3, phi,
               aux_iters: int, use_tnt: bool, rng):
    """One auxiliary network from the observed start; returns (stats3, degrees)."""
    workspace.copy_from(template)
    uniforms = rng.random((aux_iters, 3))
    out_deg, out_stats, _, _ = workspace.run(
        coef3, phi, uniforms, use_tnt=use_tnt, burn=aux_iters - 1,
        n_draws=1, thin=1)
    return out_stats[0], out_deg[0]


def _aux_setup(graph: Graph, cfg: ChainConfig, template, workspace):
    if template is None:
        template = SimState(graph)
    if workspace is None:
        workspace = template.copy()
    aux_iters = cfg.aux.resolve_iters(graph.n)
    return template, workspace, aux_iters, cfg.aux.sampler == "tnt"


def update_theta(state: ParamState, graph: Graph, spec: ModelSpec,
                 cfg: ChainConfig, rng, *, obs_stats=None, template=None,
                 workspace=None, proposal=None) -> bool:
    """Exchange block update of theta; mutates state, True on acceptance."""
    if spec.n_stats == 0:
        raise ValueError("model has no structural statistics to update")
    if obs_stats is None:
        obs_stats = sufficient_stats(graph, spec.stats)
    template, workspace, aux_iters, use_tnt = _aux_setup(
        graph, cfg, template, workspace)

    if proposal is None:
        proposal = state.theta + cfg.prop_sd_theta * rng.standard_normal(spec.n_stats)
    proposal = np.asarray(proposal, dtype=float)

    phi = state.phi if spec.random_effects else np.zeros(graph.n)
    aux3, _ = _aux_stats(template, workspace, coef3_from(spec, proposal),
                         phi, aux_iters, use_tnt, rng)
    s_aux = select_stat_columns(spec.stats, aux3)

    rho2 = spec.hyper.rho2
    log_alpha = float((proposal - state.theta) @ (obs_stats - s_aux))
    log_alpha += sum(normal_logpdf(t, 0.0, rho2) for t in proposal)
    log_alpha -= sum(normal_logpdf(t, 0.0, rho2) for t in state.theta)

    if np.log(rng.random()) < log_alpha:
        state.theta = proposal
        return True
    return False


def update_phi_site(state: ParamState, i: int, graph: Graph, spec: ModelSpec,
                    cfg: ChainConfig, rng, *, obs_degrees=None, template=None,
                    workspace=None, proposal=None) -> bool:
    """Exchange update of one random effect; mutates state, True on acceptance."""
    if not spec.random_effects:
        raise ValueError("model has no random effects")
    if not 0 <= i < graph.n:
        raise ValueError(f"site index {i} out of range for {graph.n} nodes")
    if obs_degrees is None:
        obs_degrees = degree_stats(graph)
    template, workspace, aux_iters, use_tnt = _aux_setup(
        graph, cfg, template, workspace)

    if proposal is None:
        proposal = state.phi[i] + cfg.prop_sd_phi * rng.standard_normal()
    proposal = float(proposal)

    phi_prop = state.phi.copy()
    phi_prop[i] = proposal
    _, deg_aux = _aux_stats(template, workspace, coef3_from(spec, state.theta),
                            phi_prop, aux_iters, use_tnt, rng)

    log_alpha = (proposal - state.phi[i]) * float(obs_degrees[i] - deg_aux[i])
    log_alpha += normal_logpdf(proposal, state.mu_phi, state.sigma2_phi)
    log_alpha -= normal_logpdf(state.phi[i], state.mu_phi, state.sigma2_phi)

    if np.log(rng.random()) < log_alpha:
        state.phi[i] = proposal
        return True
    return False


def update_mu(state: ParamState, spec: ModelSpec, cfg: ChainConfig, rng,
              *, proposal=None) -> bool:
    """Random-walk update of the random-effect mean; no auxiliary network."""
    if not spec.random_effects:
        raise ValueError("model has no random effects")
    if proposal is None:
        proposal = state.mu_phi + cfg.prop_sd_mu * rng.standard_normal()
    proposal = float(proposal)

    resid_new = state.phi - proposal
    resid_old = state.phi - state.mu_phi
    log_alpha = -0.5 * float(resid_new @ resid_new - resid_old @ resid_old) / state.sigma2_phi
    log_alpha += normal_logpdf(proposal, 0.0, spec.hyper.tau2)
    log_alpha -= normal_logpdf(state.mu_phi, 0.0, spec.hyper.tau2)

    if np.log(rng.random()) < log_alpha:
        state.mu_phi = proposal
        return True
    return False


def update_sigma2(state: ParamState, spec: ModelSpec, cfg: ChainConfig, rng,
                  *, proposal=None) -> bool:
    """Uniform-walk update of the random-effect variance.

    Proposals at or below zero are rejected without consuming an
    acceptance uniform.
    """
    if not spec.random_effects:
        raise ValueError("model has no random effects")
    if proposal is None:
        half = cfg.prop_halfwidth_sigma2
        proposal = state.sigma2_phi + (2.0 * rng.random() - 1.0) * half
    proposal = float(proposal)
    if proposal <= 0.0:
        return False

    n = len(state.phi)
    resid = state.phi - state.mu_phi
    ssq = float(resid @ resid)
    log_alpha = -0.5 * n * (np.log(proposal) - np.log(state.sigma2_phi))
    log_alpha += -0.5 * ssq * (1.0 / proposal - 1.0 / state.sigma2_phi)
    log_alpha += invgamma_logpdf(proposal, spec.hyper.ig_a, spec.hyper.ig_b)
    log_alpha -= invgamma_logpdf(state.sigma2_phi, spec.hyper.ig_a, spec.hyper.ig_b)

    if np.log(rng.random()) < log_alpha:
        state.sigma2_phi = proposal
        return True
    return False


def run_chain(graph: Graph, spec: ModelSpec, cfg: ChainConfig,
              init: Optional[ParamState] = None) -> ChainResult:
    """Run the blocked exchange sampler and collect post-burnin draws.

    Deterministic given (graph, spec, cfg, init): all randomness comes
    from a stream derived from cfg.seed.
    """
    n = graph.n
    state = init.copy() if init is not None else default_state(spec, n)
    state.check(spec, n)

    rng = substream(normalize_seed(cfg.seed), DOMAIN_CHAIN)
    template = SimState(graph)
    workspace = template.copy()
    aux_iters = cfg.aux.resolve_iters(n)
    use_tnt = cfg.aux.sampler == "tnt"
    obs_stats = sufficient_stats(graph, spec.stats) if spec.n_stats else None
    obs_degrees = degree_stats(graph)

    cols = column_names(spec, n)
    n_kept = (cfg.main_iters + cfg.thin - 1) // cfg.thin
    draws = np.empty((n_kept, len(cols)))

    acc = {"theta": 0, "phi": 0, "mu_phi": 0, "sigma2_phi": 0}
    tries = {"theta": 0, "phi": 0, "mu_phi": 0, "sigma2_phi": 0}

    row = 0
    for it in range(cfg.burnin + cfg.main_iters):
        if spec.n_stats:
            tries["theta"] += 1
            acc["theta"] += update_theta(
                state, graph, spec, cfg, rng, obs_stats=obs_stats,
                template=template, workspace=workspace)
        if spec.random_effects:
            if cfg.phi_scan == "sequential":
                order = range(n)
            else:
                order = rng.permutation(n)
            for i in order:
                tries["phi"] += 1
                acc["phi"] += update_phi_site(
                    state, int(i), graph, spec, cfg, rng,
                    obs_degrees=obs_degrees, template=template,
                    workspace=workspace)
            tries["mu_phi"] += 1
            acc["mu_phi"] += update_mu(state, spec, cfg, rng)
            tries["sigma2_phi"] += 1
            acc["sigma2_phi"] += update_sigma2(state, spec, cfg, rng)

        k = it - cfg.burnin
        if k >= 0 and k % cfg.thin == 0:
            pieces = []
            if spec.n_stats:
                pieces.append(state.theta)
            if spec.random_effects:
                pieces.append(state.phi)
                pieces.append([state.mu_phi, state.sigma2_phi])
            draws[row] = np.concatenate(pieces) if len(pieces) > 1 else np.asarray(pieces[0])
            row += 1

    accept_rates = {k: (acc[k] / tries[k] if tries[k] else float("nan"))
                    for k in acc if tries[k]}
    meta = {
        "n_nodes": n,
        "stats": list(spec.stats),
        "random_effects": spec.random_effects,
        "burnin": cfg.burnin,
        "main_iters": cfg.main_iters,
        "thin": cfg.thin,
        "aux_iters": aux_iters,
        "sampler": cfg.aux.sampler,
        "seed": normalize_seed(cfg.seed),
    }
    return ChainResult(draws=draws[:row], columns=cols,
                       accept_rates=accept_rates, meta=meta)


def autocorrelation(x: np.ndarray, max_lag: int = 50) -> np.ndarray:
    """Sample autocorrelations at lags 1..max_lag.

    A constant series has no finite autocorrelation; by convention it
    reports 1.0 at every lag (the chain is perfectly persistent).
    """
    x = np.asarray(x, dtype=float)
    m = x.size
    lags = min(max_lag, m - 1)
    centered = x - x.mean()
    denom = float(centered @ centered)
    out = np.ones(max_lag)
    if denom == 0.0:
        return out
    for k in range(1, lags + 1):
        out[k - 1] = float(centered[:-k] @ centered[k:]) / denom
    for k in range(lags + 1, max_lag + 1):
        out[k - 1] = 0.0
    return out


def geometric_mean(x: np.ndarray) -> float:
    """exp(mean(log x)); the right location summary for the skewed
    variance posterior."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("geometric mean needs positive draws")
    return float(np.exp(np.mean(np.log(x))))


def summarize(result: ChainResult, acf_lags: int = 50) -> dict:
    """Posterior means and sds per column, ACF, and acceptance rates.

    sigma2_phi additionally gets a geometric mean; columns that never
    moved are flagged constant.
    """
    params = {}
    acf = {}
    for idx, name in enumerate(result.columns):
        x = result.draws[:, idx]
        entry = {
            "mean": float(np.mean(x)),
            "sd": float(np.std(x, ddof=1)) if x.size > 1 else 0.0,
        }
        if name == "sigma2_phi":
            entry["geometric_mean"] = geometric_mean(x)
        if float(np.ptp(x)) == 0.0:
            entry["constant"] = True
        params[name] = entry
        acf[name] = autocorrelation(x, acf_lags).tolist()
    return {
        "params": params,
        "acf_lags": acf_lags,
        "acf": acf,
        "accept_rates": dict(result.accept_rates),
        "n_draws": int(result.draws.shape[0]),
        "meta": dict(result.meta),
    }
