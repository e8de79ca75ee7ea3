import numpy as np
import pytest
from sklearn.base import clone

from ergmix.estimator import BayesianErgm
from ergmix.graph import as_graph


def random_adj(n, p, rng):
    adj = np.zeros((n, n), dtype=int)
    iu = np.triu_indices(n, k=1)
    hit = rng.random(iu[0].shape[0]) < p
    adj[iu[0][hit], iu[1][hit]] = 1
    return adj + adj.T


class TestEstimator:
    def make(self, **kw):
        base = dict(stats=("edges",), burnin=10, main_iters=40, aux_iters=20,
                    seed=3)
        base.update(kw)
        return BayesianErgm(**base)

    def test_fit_from_adjacency_matrix(self):
        adj = random_adj(6, 0.4, np.random.default_rng(0))
        est = self.make().fit(adj)
        assert est.n_nodes_ == 6
        assert est.draws_.shape == (40, 1)
        assert est.columns_ == ("theta.edges",)

    def test_fit_from_graph(self):
        g = as_graph(random_adj(5, 0.5, np.random.default_rng(1)))
        est = self.make().fit(g)
        assert est.n_nodes_ == 5

    def test_get_set_params_roundtrip(self):
        est = self.make(main_iters=77)
        params = est.get_params()
        assert params["main_iters"] == 77
        est2 = BayesianErgm(**params)
        assert est2.get_params() == params

    def test_clone_preserves_params(self):
        est = self.make(random_effects=True, stats=("twostars",), seed=11)
        c = clone(est)
        assert c.get_params() == est.get_params()
        assert not hasattr(c, "draws_")

    def test_deterministic_given_seed(self):
        adj = random_adj(6, 0.4, np.random.default_rng(5))
        a = self.make(seed=9).fit(adj)
        b = self.make(seed=9).fit(adj)
        assert np.array_equal(a.draws_, b.draws_)

    def test_summary_requires_fit(self):
        with pytest.raises(ValueError, match="not fitted"):
            self.make().summary()

    def test_summary_and_posterior_mean(self):
        adj = random_adj(6, 0.4, np.random.default_rng(7))
        est = self.make().fit(adj)
        s = est.summary(acf_lags=5)
        assert "theta.edges" in s["params"]
        assert est.posterior_mean("theta.edges") == pytest.approx(
            s["params"]["theta.edges"]["mean"])

    def test_mixed_model_columns(self):
        adj = random_adj(5, 0.5, np.random.default_rng(9))
        est = self.make(stats=("twostars",), random_effects=True).fit(adj)
        assert est.columns_[-2:] == ("mu_phi", "sigma2_phi")

    def test_invalid_model_raises_on_fit(self):
        adj = random_adj(5, 0.5, np.random.default_rng(9))
        with pytest.raises(ValueError):
            self.make(stats=("edges",), random_effects=True).fit(adj)
