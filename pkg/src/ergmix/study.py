"""Replicated model-comparison experiments on synthetic networks.

Three generating regimes, all on a common node count:

* setting "A": nodal heterogeneity.  phi_i ~ N(mu_phi, sigma2) and ties
  are independent with logit p_ij = phi_i + phi_j.  The cell parameter
  is sigma2; sigma2 -> 0 degenerates to a Bernoulli graph.
* setting "B": structural dependence.  An edges + two-stars model with
  a fixed edge coefficient; the cell parameter is the two-star
  coefficient (0 again gives a Bernoulli graph).
* setting "bernoulli": the shared null, independent ties with
  logit p = 2 mu_phi = 2 theta_edges.

Each replicate gets a fixed-model fit (edges + two-stars), a mixed-model
fit (two-stars + random effects), and a log Bayes factor of mixed over
fixed.  Positive values favour heterogeneity, negative values favour
the structural explanation.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NumericalError
from .evidence import LaplaceConfig, PathConfig, log_bayes_factor
from .graph import EDGES, TWOSTARS, Graph, as_graph, density
from .model import ModelSpec, ParamState, PriorHyper
from .rng import DOMAIN_STUDY_REP, normalize_seed, substream
from .sampler import ChainConfig, run_chain
from .simulate import SimConfig, simulate_network

SETTINGS = ("A", "B", "bernoulli")

# decisive-evidence convention: |log BF| beyond this counts as strong
DECISIVE = 5.0


@dataclass(frozen=True)
class StudyGrid:
    """One experimental arm: a setting and the cell values to sweep.

    For setting A cells are sigma2 values in (0, 1]; for setting B they
    are two-star coefficients in [0, 0.05]; the bernoulli setting has a
    single implicit cell.  gen_iters is the sampler budget per generated
    network in setting B (None: 30 times the dyad count).
    """

    setting: str = "A"
    cells: tuple = (1.0,)
    replicates: int = 50
    n: int = 40
    mu_phi: float = -1.0
    theta_edges: float = -2.0
    gen_iters: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.setting not in SETTINGS:
            raise ValueError(f"unknown setting {self.setting!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if self.n < 3:
            raise ValueError("study networks need at least 3 nodes")
        if self.setting == "bernoulli":
            object.__setattr__(self, "cells", (0.0,))
        elif not self.cells:
            raise ValueError("cells must not be empty")
        if self.setting == "A":
            for c in self.cells:
                if not 0.0 < c <= 1.0:
                    raise ValueError(
                        f"setting A variance cells must lie in (0, 1], got {c}")
        if self.setting == "B":
            for c in self.cells:
                if not 0.0 <= c <= 0.05:
                    raise ValueError(
                        "setting B two-star cells must lie in [0, 0.05], "
                        f"got {c}")
        if self.gen_iters is not None and self.gen_iters < 1:
            raise ValueError("gen_iters must be at least 1")


def generate_replicate(grid: StudyGrid, cell_index: int, rep_index: int) -> Graph:
    """Draw one synthetic network for the given cell and replicate.

    Deterministic in (grid.seed, cell_index, rep_index).
    """
    if not 0 <= cell_index < len(grid.cells):
        raise ValueError("cell_index out of range")
    if not 0 <= rep_index < grid.replicates:
        raise ValueError("rep_index out of range")
    rng = substream(normalize_seed(grid.seed), DOMAIN_STUDY_REP,
                    cell_index, rep_index)
    n = grid.n
    cell = grid.cells[cell_index]

    if grid.setting in ("A", "bernoulli"):
        sigma2 = cell if grid.setting == "A" else 0.0
        phi = grid.mu_phi + np.sqrt(sigma2) * rng.standard_normal(n)
        logits = phi[:, None] + phi[None, :]
        p = 1.0 / (1.0 + np.exp(-logits))
        iu = np.triu_indices(n, k=1)
        u = rng.random(iu[0].shape[0])
        adj = np.zeros((n, n), dtype=np.int64)
        hit = u < p[iu]
        adj[iu[0][hit], iu[1][hit]] = 1
        return as_graph(adj + adj.T)

    # setting B: dependent-graph model, simulate a long chain from empty
    iters = grid.gen_iters if grid.gen_iters is not None else 30 * n * (n - 1) // 2
    spec = ModelSpec(stats=(EDGES, TWOSTARS))
    state = ParamState(theta=np.array([grid.theta_edges, cell]),
                       phi=np.zeros(n), mu_phi=0.0, sigma2_phi=1.0)
    cfg = SimConfig(aux_iters=iters, init="empty")
    return simulate_network(state, spec, n, cfg, rng)


@dataclass(frozen=True)
class StudyConfig:
    """Per-replicate inference budgets.

    fit holds run lengths and proposal scales shared by both model fits
    (its seed field is ignored; every fit derives its own stream).
    """

    fit: ChainConfig = field(default_factory=ChainConfig)
    path: PathConfig = field(default_factory=PathConfig)
    laplace: LaplaceConfig = field(default_factory=LaplaceConfig)
    hyper: PriorHyper = field(default_factory=PriorHyper)
    threads: int = 1


@dataclass
class StudyResult:
    """Flat per-replicate records plus per-cell aggregates."""

    grid: StudyGrid
    records: list
    cells: list

    def as_dict(self) -> dict:
        return {
            "setting": self.grid.setting,
            "n": self.grid.n,
            "replicates": self.grid.replicates,
            "records": list(self.records),
            "cells": list(self.cells),
        }


def _one_replicate(grid: StudyGrid, cfg: StudyConfig, cell_index: int,
                   rep_index: int) -> dict:
    graph = generate_replicate(grid, cell_index, rep_index)
    spec_fixed = ModelSpec(stats=(EDGES, TWOSTARS), hyper=cfg.hyper)
    spec_mixed = ModelSpec(stats=(TWOSTARS,), random_effects=True,
                           hyper=cfg.hyper)

    base = normalize_seed(grid.seed)
    seed_fixed = substream(base, DOMAIN_STUDY_REP, cell_index, rep_index,
                           1).integers(2**63)
    seed_mixed = substream(base, DOMAIN_STUDY_REP, cell_index, rep_index,
                           2).integers(2**63)
    seed_path = substream(base, DOMAIN_STUDY_REP, cell_index, rep_index,
                          3).integers(2**63)
    seed_cov = substream(base, DOMAIN_STUDY_REP, cell_index, rep_index,
                         4).integers(2**63)

    record = {
        "cell_index": cell_index,
        "cell": grid.cells[cell_index],
        "replicate": rep_index,
        "density": density(graph),
    }
    try:
        fit_fixed = run_chain(graph, spec_fixed,
                              replace(cfg.fit, seed=int(seed_fixed)))
        fit_mixed = run_chain(graph, spec_mixed,
                              replace(cfg.fit, seed=int(seed_mixed)))
        report = log_bayes_factor(
            graph, spec_fixed, spec_mixed, fit_fixed, fit_mixed,
            replace(cfg.path, seed=int(seed_path)),
            replace(cfg.laplace, seed=int(seed_cov)),
            threads=1)
        record["log_bf"] = report.log_bf
        record["components"] = dict(report.components)
    except (NumericalError, np.linalg.LinAlgError) as exc:
        record["error"] = str(exc)
    return record


def aggregate_cell(grid: StudyGrid, cell_index: int, records: list) -> dict:
    """Summary row for one cell; failed replicates are excluded and counted.

    Replicates at exactly zero count toward the "> 0" share.
    """
    mine = [r for r in records if r["cell_index"] == cell_index]
    ok = [r for r in mine if "log_bf" in r]
    bfs = np.array([r["log_bf"] for r in ok], dtype=float)
    out = {
        "cell_index": cell_index,
        "cell": grid.cells[cell_index],
        "n_replicates": len(mine),
        "n_failed": len(mine) - len(ok),
        "mean_density": float(np.mean([r["density"] for r in mine]))
        if mine else float("nan"),
    }
    if bfs.size:
        out.update({
            "min_log_bf": float(bfs.min()),
            "max_log_bf": float(bfs.max()),
            "frac_below_minus_decisive": float(np.mean(bfs < -DECISIVE)),
            "frac_negative": float(np.mean(bfs < 0.0)),
            "frac_positive": float(np.mean(bfs >= 0.0)),
            "frac_above_decisive": float(np.mean(bfs > DECISIVE)),
        })
    else:
        out.update({
            "min_log_bf": float("nan"),
            "max_log_bf": float("nan"),
            "frac_below_minus_decisive": float("nan"),
            "frac_negative": float("nan"),
            "frac_positive": float("nan"),
            "frac_above_decisive": float("nan"),
        })
    return out


def run_study(grid: StudyGrid, cfg: StudyConfig | None = None) -> StudyResult:
    """All replicates over all cells, reduced in deterministic order.

    Replicates are independent given their derived seeds, so they can
    run on a thread pool; a failure in one replicate is recorded in its
    row and does not abort the sweep.
    """
    if cfg is None:
        cfg = StudyConfig()
    jobs = [(ci, ri) for ci in range(len(grid.cells))
            for ri in range(grid.replicates)]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            futures = [pool.submit(_one_replicate, grid, cfg, ci, ri)
                       for ci, ri in jobs]
            records = [f.result() for f in futures]
    else:
        records = [_one_replicate(grid, cfg, ci, ri) for ci, ri in jobs]
    cells = [aggregate_cell(grid, ci, records)
             for ci in range(len(grid.cells))]
    return StudyResult(grid=grid, records=records, cells=cells)


def censored_plot_values(records: list, bound: float = 20.0) -> list:
    """log BF values clamped to [-bound, bound] for display, as
    (cell, replicate, clamped value, was_clamped) tuples."""
    out = []
    for r in records:
        if "log_bf" not in r:
            continue
        v = r["log_bf"]
        clamped = min(max(v, -bound), bound)
        out.append((r["cell"], r["replicate"], clamped, clamped != v))
    return out
