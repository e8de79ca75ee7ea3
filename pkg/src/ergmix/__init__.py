"""Bayesian inference for exponential random graph models with optional
nodal random effects, using the exchange algorithm.

The inference workflow: load or build a Graph, describe the model with
ModelSpec, run the exchange sampler with run_chain (or the BayesianErgm
estimator), and compare nested fixed/mixed models with log_bayes_factor.
"""

__version__ = "0.1.0"

from .errors import NumericalError
from .estimator import BayesianErgm
from .evidence import (
    EvidenceReport,
    LaplaceConfig,
    PathConfig,
    PathResult,
    PluginPoint,
    degree_cov,
    estimate_log_kappa_ratio,
    laplace_factor,
    laplace_log_marginal,
    log_bayes_factor,
    normal_logpdf_fit,
    path_log_kappa_ratio,
    plugin_from_fits,
)
from .graph import (
    EDGES,
    TRIANGLES,
    TWOSTARS,
    Graph,
    as_graph,
    change_stats,
    degree_stats,
    density,
    load_karate,
    parse_edge_list,
    read_adjacency_csv,
    read_edge_list,
    sufficient_stats,
    toggle_edge,
    write_edge_list,
)
from .model import (
    ModelSpec,
    ParamState,
    PriorHyper,
    conditional_logit,
    exact_log_kappa,
    log_potential,
    log_prior,
)
from .sampler import (
    ChainConfig,
    ChainResult,
    autocorrelation,
    geometric_mean,
    run_chain,
    summarize,
    update_mu,
    update_phi_site,
    update_sigma2,
    update_theta,
)
from .simulate import (
    SimConfig,
    gibbs_step,
    simulate_graph_codes,
    simulate_network,
    tnt_step,
)
from .study import StudyConfig, StudyGrid, StudyResult, generate_replicate, run_study

__all__ = [
    "__version__",
    "NumericalError",
    "BayesianErgm",
    "EvidenceReport",
    "LaplaceConfig",
    "PathConfig",
    "PathResult",
    "PluginPoint",
    "degree_cov",
    "estimate_log_kappa_ratio",
    "laplace_factor",
    "laplace_log_marginal",
    "log_bayes_factor",
    "normal_logpdf_fit",
    "path_log_kappa_ratio",
    "plugin_from_fits",
    "EDGES",
    "TWOSTARS",
    "TRIANGLES",
    "Graph",
    "as_graph",
    "change_stats",
    "degree_stats",
    "density",
    "load_karate",
    "parse_edge_list",
    "read_adjacency_csv",
    "read_edge_list",
    "sufficient_stats",
    "toggle_edge",
    "write_edge_list",
    "ModelSpec",
    "ParamState",
    "PriorHyper",
    "conditional_logit",
    "exact_log_kappa",
    "log_potential",
    "log_prior",
    "ChainConfig",
    "ChainResult",
    "autocorrelation",
    "geometric_mean",
    "run_chain",
    "summarize",
    "update_mu",
    "update_phi_site",
    "update_sigma2",
    "update_theta",
    "SimConfig",
    "gibbs_step",
    "simulate_graph_codes",
    "simulate_network",
    "tnt_step",
    "StudyConfig",
    "StudyGrid",
    "StudyResult",
    "generate_replicate",
    "run_study",
]
