"""Estimator-style front end over the exchange sampler.

BayesianErgm wraps model specification, chain configuration and the
fitted draws in one object with the usual get_params/set_params
contract, so it composes with parameter search and cloning utilities.
"""

import numpy as np
from sklearn.base import BaseEstimator

from .graph import Graph, as_graph
from .model import ModelSpec, PriorHyper
from .sampler import ChainConfig, run_chain, summarize
from .simulate import SimConfig


class BayesianErgm(BaseEstimator):
    """Bayesian network model with optional nodal random effects.

    Parameters mirror ModelSpec and ChainConfig; fit accepts a Graph or
    a dense 0/1 symmetric adjacency matrix and stores posterior draws.

    Attributes set by fit: draws_ (matrix of kept draws), columns_
    (draw column names), accept_rates_, n_nodes_, result_ (the full
    chain output).
    """

    def __init__(self, stats=("edges", "triangles"), random_effects=False,
                 burnin=1000, main_iters=30000, thin=1, aux_iters=None,
                 sampler="tnt", prop_sd_theta=0.1, prop_sd_phi=0.5,
                 prop_sd_mu=0.1, prop_halfwidth_sigma2=0.5,
                 phi_scan="sequential", rho2=100.0, tau2=100.0,
                 ig_a=0.001, ig_b=0.001, seed=0):
        self.stats = stats
        self.random_effects = random_effects
        self.burnin = burnin
        self.main_iters = main_iters
        self.thin = thin
        self.aux_iters = aux_iters
        self.sampler = sampler
        self.prop_sd_theta = prop_sd_theta
        self.prop_sd_phi = prop_sd_phi
        self.prop_sd_mu = prop_sd_mu
        self.prop_halfwidth_sigma2 = prop_halfwidth_sigma2
        self.phi_scan = phi_scan
        self.rho2 = rho2
        self.tau2 = tau2
        self.ig_a = ig_a
        self.ig_b = ig_b
        self.seed = seed

    def _spec(self) -> ModelSpec:
        hyper = PriorHyper(rho2=self.rho2, tau2=self.tau2,
                           ig_a=self.ig_a, ig_b=self.ig_b)
        return ModelSpec(stats=tuple(self.stats),
                         random_effects=self.random_effects, hyper=hyper)

    def _chain_config(self) -> ChainConfig:
        aux = SimConfig(aux_iters=self.aux_iters, sampler=self.sampler,
                        init="observed")
        return ChainConfig(
            burnin=self.burnin, main_iters=self.main_iters, thin=self.thin,
            aux=aux, prop_sd_theta=self.prop_sd_theta,
            prop_sd_phi=self.prop_sd_phi, prop_sd_mu=self.prop_sd_mu,
            prop_halfwidth_sigma2=self.prop_halfwidth_sigma2,
            phi_scan=self.phi_scan, seed=self.seed)

    def fit(self, X, y=None):
        """Run the sampler on one network. X: Graph or adjacency matrix."""
        graph = X if isinstance(X, Graph) else as_graph(np.asarray(X))
        result = run_chain(graph, self._spec(), self._chain_config())
        self.result_ = result
        self.draws_ = result.draws
        self.columns_ = result.columns
        self.accept_rates_ = result.accept_rates
        self.n_nodes_ = graph.n
        return self

    def summary(self, acf_lags: int = 50) -> dict:
        if not hasattr(self, "result_"):
            raise ValueError("estimator is not fitted yet; call fit first")
        return summarize(self.result_, acf_lags=acf_lags)

    def posterior_mean(self, column: str) -> float:
        if not hasattr(self, "result_"):
            raise ValueError("estimator is not fitted yet; call fit first")
        return float(np.mean(self.result_.column(column)))
