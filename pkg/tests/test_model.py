import itertools
import math

import numpy as np
import pytest
from scipy import stats as sps

from ergmix.graph import Graph, as_graph, degree_stats, sufficient_stats, toggle_edge
from ergmix.model import (
    MAX_EXACT_DYADS,
    ModelSpec,
    ParamState,
    PriorHyper,
    conditional_logit,
    exact_log_kappa,
    invgamma_logpdf,
    log_potential,
    log_prior,
    log_prior_hyper,
    log_prior_phi,
    log_prior_theta,
    normal_logpdf,
)

ALL = ("edges", "twostars", "triangles")


def random_graph(n, p, rng):
    adj = np.zeros((n, n), dtype=int)
    iu = np.triu_indices(n, k=1)
    hit = rng.random(iu[0].shape[0]) < p
    adj[iu[0][hit], iu[1][hit]] = 1
    return as_graph(adj + adj.T)


def all_graphs(n):
    """Every labelled graph on n nodes, as Graph objects."""
    pairs = list(itertools.combinations(range(n), 2))
    for bits in itertools.product((0, 1), repeat=len(pairs)):
        g = Graph(n)
        for (i, j), b in zip(pairs, bits):
            if b:
                g = toggle_edge(g, i, j)
        yield g


class TestSpecValidation:
    def test_defaults(self):
        spec = ModelSpec(stats=("edges", "triangles"))
        assert spec.n_stats == 2
        assert not spec.random_effects
        assert spec.hyper.rho2 == 100.0

    def test_empty_stats_without_effects_rejected(self):
        with pytest.raises(ValueError):
            ModelSpec(stats=())

    def test_empty_stats_with_effects_allowed(self):
        spec = ModelSpec(stats=(), random_effects=True)
        assert spec.n_stats == 0

    def test_edges_with_effects_rejected(self):
        # a common edge coefficient is not identifiable next to nodal
        # effects: adding c to every phi_i/2 shifts it exactly
        with pytest.raises(ValueError):
            ModelSpec(stats=("edges",), random_effects=True)

    def test_unknown_stat_rejected(self):
        with pytest.raises(ValueError):
            ModelSpec(stats=("edges", "stars"))

    def test_hyper_validation(self):
        for kw in ({"rho2": 0.0}, {"tau2": -1.0}, {"ig_a": 0.0}, {"ig_b": -2.0}):
            with pytest.raises(ValueError):
                PriorHyper(**kw)


class TestParamState:
    def test_check_catches_wrong_lengths(self):
        spec = ModelSpec(stats=("edges",))
        st = ParamState(theta=np.zeros(2), phi=np.zeros(4), mu_phi=0.0,
                        sigma2_phi=1.0)
        with pytest.raises(ValueError):
            st.check(spec, 4)

    def test_check_catches_bad_sigma2(self):
        spec = ModelSpec(stats=("twostars",), random_effects=True)
        st = ParamState(theta=np.zeros(1), phi=np.zeros(4), mu_phi=0.0,
                        sigma2_phi=0.0)
        with pytest.raises(ValueError):
            st.check(spec, 4)

    def test_copy_is_deep(self):
        st = ParamState(theta=np.ones(1), phi=np.zeros(3), mu_phi=0.5,
                        sigma2_phi=2.0)
        c = st.copy()
        c.theta[0] = 9.0
        c.phi[1] = 9.0
        assert st.theta[0] == 1.0
        assert st.phi[1] == 0.0


class TestDensities:
    def test_normal_logpdf_vs_scipy(self):
        for x, m, v in [(0.0, 0.0, 1.0), (1.5, -2.0, 0.3), (-4.0, 1.0, 25.0)]:
            assert normal_logpdf(x, m, v) == pytest.approx(
                sps.norm.logpdf(x, loc=m, scale=math.sqrt(v)), rel=1e-12)

    def test_invgamma_logpdf_vs_scipy(self):
        for x, a, b in [(1.0, 0.001, 0.001), (0.5, 2.0, 3.0), (4.0, 1.5, 0.2)]:
            assert invgamma_logpdf(x, a, b) == pytest.approx(
                sps.invgamma.logpdf(x, a, scale=b), rel=1e-12)

    def test_invgamma_zero_and_negative(self):
        assert invgamma_logpdf(0.0, 1.0, 1.0) == -math.inf
        assert invgamma_logpdf(-1.0, 1.0, 1.0) == -math.inf


class TestPriors:
    def test_log_prior_decomposition_against_scipy(self):
        rng = np.random.default_rng(3)
        spec = ModelSpec(stats=("twostars", "triangles"), random_effects=True,
                         hyper=PriorHyper(rho2=30.0, tau2=7.0, ig_a=2.0, ig_b=0.5))
        st = ParamState(theta=rng.normal(size=2), phi=rng.normal(size=5),
                        mu_phi=0.3, sigma2_phi=1.7)
        want = (
            sps.norm.logpdf(st.theta, scale=math.sqrt(30.0)).sum()
            + sps.norm.logpdf(st.phi, loc=0.3, scale=math.sqrt(1.7)).sum()
            + sps.norm.logpdf(0.3, scale=math.sqrt(7.0))
            + sps.invgamma.logpdf(1.7, 2.0, scale=0.5)
        )
        assert log_prior(st, spec) == pytest.approx(want, rel=1e-12)
        parts = (log_prior_theta(st, spec) + log_prior_phi(st, spec)
                 + log_prior_hyper(st, spec))
        assert log_prior(st, spec) == pytest.approx(parts, rel=1e-14)

    def test_fixed_model_prior_has_no_phi_terms(self):
        spec = ModelSpec(stats=("edges",))
        st = ParamState(theta=np.array([0.4]), phi=np.ones(6), mu_phi=2.0,
                        sigma2_phi=3.0)
        assert log_prior_phi(st, spec) == 0.0
        assert log_prior_hyper(st, spec) == 0.0
        assert log_prior(st, spec) == pytest.approx(
            sps.norm.logpdf(0.4, scale=10.0), rel=1e-12)


class TestPotential:
    def test_log_potential_recount(self):
        rng = np.random.default_rng(17)
        spec = ModelSpec(stats=("twostars", "triangles"), random_effects=True)
        for _ in range(25):
            g = random_graph(6, 0.5, rng)
            st = ParamState(theta=rng.normal(size=2), phi=rng.normal(size=6),
                            mu_phi=0.0, sigma2_phi=1.0)
            s = sufficient_stats(g, spec.stats)
            t = degree_stats(g)
            want = float(st.theta @ s + st.phi @ t)
            assert log_potential(st, g, spec) == pytest.approx(want, rel=1e-12)

    def test_conditional_logit_equals_potential_difference(self):
        rng = np.random.default_rng(19)
        spec = ModelSpec(stats=("twostars", "triangles"), random_effects=True)
        for _ in range(25):
            g = random_graph(5, 0.5, rng)
            st = ParamState(theta=rng.normal(size=2), phi=rng.normal(size=5),
                            mu_phi=0.0, sigma2_phi=1.0)
            i, j = sorted(rng.choice(5, size=2, replace=False).tolist())
            on = g if g.has_edge(i, j) else toggle_edge(g, i, j)
            off = toggle_edge(on, i, j)
            want = log_potential(st, on, spec) - log_potential(st, off, spec)
            assert conditional_logit(st, g, i, j, spec) == pytest.approx(
                want, rel=1e-10, abs=1e-10)


class TestExactKappa:
    def test_bernoulli_closed_form(self):
        # kappa = prod over dyads of (1 + e^theta)
        spec = ModelSpec(stats=("edges",))
        for n, theta in [(3, 0.0), (4, -1.2), (5, 0.7)]:
            st = ParamState(theta=np.array([theta]), phi=np.zeros(n),
                            mu_phi=0.0, sigma2_phi=1.0)
            want = n * (n - 1) / 2 * math.log1p(math.exp(theta))
            assert exact_log_kappa(st, spec, n) == pytest.approx(want, rel=1e-10)

    def test_matches_explicit_enumeration(self):
        rng = np.random.default_rng(23)
        spec = ModelSpec(stats=("edges", "twostars", "triangles"))
        st = ParamState(theta=rng.normal(size=3) * 0.4, phi=np.zeros(4),
                        mu_phi=0.0, sigma2_phi=1.0)
        vals = [float(st.theta @ sufficient_stats(g, spec.stats))
                for g in all_graphs(4)]
        want = float(np.logaddexp.reduce(vals))
        assert exact_log_kappa(st, spec, 4) == pytest.approx(want, rel=1e-10)

    def test_matches_enumeration_with_random_effects(self):
        rng = np.random.default_rng(29)
        spec = ModelSpec(stats=("triangles",), random_effects=True)
        st = ParamState(theta=np.array([0.3]), phi=rng.normal(size=4) * 0.7,
                        mu_phi=0.0, sigma2_phi=1.0)
        vals = [float(st.theta @ sufficient_stats(g, spec.stats)
                      + st.phi @ degree_stats(g))
                for g in all_graphs(4)]
        want = float(np.logaddexp.reduce(vals))
        assert exact_log_kappa(st, spec, 4) == pytest.approx(want, rel=1e-10)

    def test_refuses_large_graphs(self):
        n = 9  # 36 dyads
        assert n * (n - 1) // 2 > MAX_EXACT_DYADS
        spec = ModelSpec(stats=("edges",))
        st = ParamState(theta=np.zeros(1), phi=np.zeros(n), mu_phi=0.0,
                        sigma2_phi=1.0)
        with pytest.raises(ValueError):
            exact_log_kappa(st, spec, n)
