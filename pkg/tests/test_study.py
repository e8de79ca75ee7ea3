import math

import numpy as np
import pytest

from ergmix.evidence import LaplaceConfig, PathConfig
from ergmix.graph import density
from ergmix.sampler import ChainConfig
from ergmix.simulate import SimConfig
from ergmix.study import (DECISIVE, StudyConfig, StudyGrid, aggregate_cell,
                          censored_plot_values, generate_replicate, run_study)


class TestStudyGrid:
    def test_defaults(self):
        grid = StudyGrid()
        assert grid.setting == "A"
        assert grid.cells == (1.0,)
        assert grid.replicates == 50

    def test_unknown_setting(self):
        with pytest.raises(ValueError):
            StudyGrid(setting="C")

    def test_setting_a_cell_range(self):
        StudyGrid(setting="A", cells=(0.25, 1.0))
        with pytest.raises(ValueError):
            StudyGrid(setting="A", cells=(0.0,))
        with pytest.raises(ValueError):
            StudyGrid(setting="A", cells=(1.5,))

    def test_setting_b_cell_range(self):
        StudyGrid(setting="B", cells=(0.0, 0.02, 0.05))
        with pytest.raises(ValueError):
            StudyGrid(setting="B", cells=(0.06,))
        with pytest.raises(ValueError):
            StudyGrid(setting="B", cells=(-0.01,))

    def test_bernoulli_forces_single_cell(self):
        grid = StudyGrid(setting="bernoulli", cells=(0.3, 0.7))
        assert grid.cells == (0.0,)

    def test_empty_cells_rejected(self):
        with pytest.raises(ValueError):
            StudyGrid(setting="A", cells=())

    def test_size_bounds(self):
        with pytest.raises(ValueError):
            StudyGrid(replicates=0)
        with pytest.raises(ValueError):
            StudyGrid(n=2)
        with pytest.raises(ValueError):
            StudyGrid(setting="B", gen_iters=0)


class TestGenerateReplicate:
    def test_deterministic(self):
        grid = StudyGrid(setting="A", cells=(0.5,), replicates=3, n=20, seed=5)
        a = generate_replicate(grid, 0, 1)
        b = generate_replicate(grid, 0, 1)
        assert np.array_equal(a.adjacency(), b.adjacency())

    def test_replicates_differ(self):
        grid = StudyGrid(setting="A", cells=(0.5,), replicates=3, n=20, seed=5)
        a = generate_replicate(grid, 0, 0)
        b = generate_replicate(grid, 0, 2)
        assert not np.array_equal(a.adjacency(), b.adjacency())

    def test_index_bounds(self):
        grid = StudyGrid(setting="A", cells=(0.5,), replicates=2, n=10)
        with pytest.raises(ValueError):
            generate_replicate(grid, 1, 0)
        with pytest.raises(ValueError):
            generate_replicate(grid, 0, 2)

    def test_bernoulli_density(self):
        # ties are iid with p = expit(2 mu_phi); the pooled edge count over
        # many replicates is binomial, so compare against the exact mean
        grid = StudyGrid(setting="bernoulli", replicates=30, n=40,
                         mu_phi=-1.0, seed=3)
        p = 1.0 / (1.0 + math.exp(2.0))
        dens = [density(generate_replicate(grid, 0, r)) for r in range(30)]
        d = 40 * 39 // 2
        mcse = math.sqrt(p * (1 - p) / (d * 30))
        assert np.mean(dens) == pytest.approx(p, abs=4 * mcse)

    def test_heterogeneous_density_matches_quadrature(self):
        # with phi_i ~ N(mu, s2), a dyad's tie probability marginalises to
        # E expit(Z) with Z ~ N(2 mu, 2 s2); integrate that directly
        mu, s2 = -1.0, 1.0
        z = np.linspace(-14.0, 12.0, 20001)
        pdf = np.exp(-0.5 * (z - 2 * mu) ** 2 / (2 * s2)) / math.sqrt(
            2 * math.pi * 2 * s2)
        target = np.trapezoid(pdf / (1.0 + np.exp(-z)), z)
        grid = StudyGrid(setting="A", cells=(s2,), replicates=50, n=40,
                         mu_phi=mu, seed=9)
        dens = [density(generate_replicate(grid, 0, r)) for r in range(50)]
        # replicate densities are iid; use their own spread for the band
        se = np.std(dens, ddof=1) / math.sqrt(len(dens))
        assert np.mean(dens) == pytest.approx(target, abs=4 * se + 0.005)

    def test_setting_b_zero_cell_is_edges_only(self):
        # at a zero two-star coefficient the generator targets a Bernoulli
        # graph with p = expit(theta_edges)
        grid = StudyGrid(setting="B", cells=(0.0,), replicates=20, n=30,
                         theta_edges=-2.0, seed=17)
        p = 1.0 / (1.0 + math.exp(2.0))
        dens = [density(generate_replicate(grid, 0, r)) for r in range(20)]
        assert np.mean(dens) == pytest.approx(p, abs=0.02)

    def test_cells_use_distinct_streams(self):
        grid = StudyGrid(setting="A", cells=(0.5, 0.5), replicates=2, n=20,
                         seed=5)
        a = generate_replicate(grid, 0, 0)
        b = generate_replicate(grid, 1, 0)
        assert not np.array_equal(a.adjacency(), b.adjacency())


class TestAggregateCell:
    def _records(self):
        return [
            {"cell_index": 0, "cell": 1.0, "replicate": 0, "density": 0.20,
             "log_bf": 7.0},
            {"cell_index": 0, "cell": 1.0, "replicate": 1, "density": 0.30,
             "log_bf": -6.0},
            {"cell_index": 0, "cell": 1.0, "replicate": 2, "density": 0.25,
             "log_bf": 0.0},
            {"cell_index": 0, "cell": 1.0, "replicate": 3, "density": 0.15,
             "error": "singular"},
            {"cell_index": 1, "cell": 0.5, "replicate": 0, "density": 0.99,
             "log_bf": 1.0},
        ]

    def test_counts_and_fractions(self):
        grid = StudyGrid(setting="A", cells=(1.0, 0.5), replicates=4)
        agg = aggregate_cell(grid, 0, self._records())
        assert agg["n_replicates"] == 4
        assert agg["n_failed"] == 1
        assert agg["mean_density"] == pytest.approx(0.225)
        assert agg["min_log_bf"] == -6.0
        assert agg["max_log_bf"] == 7.0
        assert agg["frac_below_minus_decisive"] == pytest.approx(1 / 3)
        assert agg["frac_negative"] == pytest.approx(1 / 3)
        # zero counts toward the favourable side
        assert agg["frac_positive"] == pytest.approx(2 / 3)
        assert agg["frac_above_decisive"] == pytest.approx(1 / 3)

    def test_all_failed_cell(self):
        grid = StudyGrid(setting="A", cells=(1.0,), replicates=1)
        agg = aggregate_cell(grid, 0, [
            {"cell_index": 0, "cell": 1.0, "replicate": 0, "density": 0.2,
             "error": "x"}])
        assert agg["n_failed"] == 1
        assert math.isnan(agg["min_log_bf"])
        assert math.isnan(agg["frac_positive"])

    def test_decisive_threshold_is_strict(self):
        grid = StudyGrid(setting="A", cells=(1.0,), replicates=2)
        recs = [
            {"cell_index": 0, "cell": 1.0, "replicate": 0, "density": 0.2,
             "log_bf": DECISIVE},
            {"cell_index": 0, "cell": 1.0, "replicate": 1, "density": 0.2,
             "log_bf": -DECISIVE},
        ]
        agg = aggregate_cell(grid, 0, recs)
        assert agg["frac_above_decisive"] == 0.0
        assert agg["frac_below_minus_decisive"] == 0.0


class TestCensoredPlotValues:
    def test_clamping(self):
        recs = [
            {"cell": 1.0, "replicate": 0, "log_bf": 35.0},
            {"cell": 1.0, "replicate": 1, "log_bf": -3.0},
            {"cell": 1.0, "replicate": 2, "error": "x"},
            {"cell": 1.0, "replicate": 3, "log_bf": -50.0},
        ]
        vals = censored_plot_values(recs, bound=20.0)
        assert vals == [(1.0, 0, 20.0, True), (1.0, 1, -3.0, False),
                        (1.0, 3, -20.0, True)]


def _tiny_config(threads=1):
    return StudyConfig(
        fit=ChainConfig(burnin=40, main_iters=240, prop_sd_theta=0.5,
                        prop_sd_phi=0.8, prop_sd_mu=0.3,
                        aux=SimConfig(aux_iters=60)),
        path=PathConfig(grid_points=16, draws_per_point=24,
                        sim=SimConfig(init="empty", aux_iters=30)),
        laplace=LaplaceConfig(cov_sims=400, sim=SimConfig(aux_iters=40)),
        threads=threads,
    )


class TestRunStudy:
    def test_structure_and_determinism(self):
        grid = StudyGrid(setting="A", cells=(1.0,), replicates=2, n=16,
                         seed=21)
        res = run_study(grid, _tiny_config())
        assert len(res.records) == 2
        for rec in res.records:
            assert rec["cell_index"] == 0
            assert "log_bf" in rec, rec.get("error")
            assert set(rec["components"]) == {
                "log_likelihood_ratio_term", "log_laplace_term",
                "log_kappa_ratio", "log_prior_ratio", "log_posterior_density_ratio"}
            assert rec["log_bf"] == pytest.approx(
                sum(rec["components"].values()))
        assert len(res.cells) == 1
        assert res.cells[0]["n_failed"] == 0

        again = run_study(grid, _tiny_config())
        assert [r["log_bf"] for r in again.records] == \
            [r["log_bf"] for r in res.records]

    def test_threaded_matches_serial(self):
        grid = StudyGrid(setting="bernoulli", replicates=3, n=12, seed=2)
        serial = run_study(grid, _tiny_config(threads=1))
        threaded = run_study(grid, _tiny_config(threads=3))
        assert [r["log_bf"] for r in serial.records] == \
            [r["log_bf"] for r in threaded.records]

    def test_as_dict_round_trip(self):
        grid = StudyGrid(setting="bernoulli", replicates=1, n=12, seed=4)
        res = run_study(grid, _tiny_config())
        d = res.as_dict()
        assert d["setting"] == "bernoulli"
        assert d["replicates"] == 1
        assert len(d["records"]) == 1
        assert d["cells"][0]["n_replicates"] == 1
