"""Command-line interface.

Subcommands: fit, simulate, bf, study, summarize.  Every run writes its
outputs plus a meta.json (resolved configuration and package version)
into --out.  Outputs are deterministic: re-running with the same seed
and thread count reproduces every file byte for byte.

Exit codes: 0 success, 1 usage or validation error, 2 numerical failure.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import NumericalError
from .evidence import LaplaceConfig, PathConfig, log_bayes_factor
from .graph import (
    STAT_KINDS,
    Graph,
    load_karate,
    read_adjacency_csv,
    read_edge_list,
    sufficient_stats,
    write_edge_list,
)
from .model import ModelSpec, ParamState, PriorHyper
from .rng import DOMAIN_SIM, normalize_seed, substream
from .sampler import ChainConfig, ChainResult, run_chain, summarize
from .simulate import SimConfig, simulate_network
from .study import StudyConfig, StudyGrid, censored_plot_values, run_study


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _read_network(token: str) -> Graph:
    if token == "karate":
        return load_karate()
    if not os.path.exists(token):
        raise ValueError(f"network file not found: {token}")
    if token.endswith(".csv"):
        return read_adjacency_csv(token)
    return read_edge_list(token)


def _parse_stats(token: str) -> tuple:
    parts = tuple(p.strip() for p in token.split(",") if p.strip())
    return parts


def _parse_floats(token: str) -> np.ndarray:
    try:
        return np.array([float(p) for p in token.split(",") if p.strip()])
    except ValueError:
        raise ValueError(f"expected a comma-separated float list, got {token!r}")


def _ensure_out(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _write_json(payload: dict, path: str):
    with open(path, "w") as f:
        json.dump(payload, f, indent=1, sort_keys=True)
        f.write("\n")


def _write_meta(out: str, subcommand: str, args: argparse.Namespace):
    # the output directory is where results live, not part of the run's
    # configuration; leaving it out keeps reruns byte-identical anywhere
    config = {k: v for k, v in sorted(vars(args).items())
              if k not in ("func", "config", "out")}
    _write_json({"version": __version__, "subcommand": subcommand,
                 "config": config}, os.path.join(out, "meta.json"))


def _write_draws_csv(result: ChainResult, path: str):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(result.columns)
        for row in result.draws:
            writer.writerow([repr(float(v)) for v in row])


def _read_draws_csv(path: str) -> ChainResult:
    if not os.path.exists(path):
        raise ValueError(f"draws file not found: {path}")
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            columns = tuple(next(reader))
        except StopIteration:
            raise ValueError(f"draws file {path} is empty") from None
        rows = [[float(v) for v in row] for row in reader if row]
    if not columns or not rows:
        raise ValueError(f"draws file {path} has no draws")
    draws = np.array(rows, dtype=float)
    if draws.shape[1] != len(columns):
        raise ValueError(f"draws file {path} has ragged rows")
    return ChainResult(draws=draws, columns=columns, accept_rates={},
                       meta={"source": os.path.basename(path)})


def _write_acf_csv(summary: dict, path: str):
    names = list(summary["acf"].keys())
    lags = summary["acf_lags"]
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["lag"] + names)
        for lag in range(1, lags + 1):
            row = [str(lag)]
            row += [repr(float(summary["acf"][name][lag - 1])) for name in names]
            writer.writerow(row)


def _hyper_from_args(args) -> PriorHyper:
    return PriorHyper(rho2=args.rho2, tau2=args.tau2,
                      ig_a=args.ig_a, ig_b=args.ig_b)


def _chain_config_from_args(args) -> ChainConfig:
    aux = SimConfig(aux_iters=args.aux_iters, sampler=args.sampler,
                    init="observed")
    return ChainConfig(
        burnin=args.burnin, main_iters=args.iters, thin=args.thin, aux=aux,
        prop_sd_theta=args.prop_sd_theta, prop_sd_phi=args.prop_sd_phi,
        prop_sd_mu=args.prop_sd_mu,
        prop_halfwidth_sigma2=args.prop_halfwidth_sigma2,
        phi_scan=args.phi_scan, seed=args.seed)


def _add_chain_flags(p):
    p.add_argument("--burnin", type=int, default=1000)
    p.add_argument("--iters", type=int, default=30000,
                   help="post-burnin iterations")
    p.add_argument("--thin", type=int, default=1)
    p.add_argument("--aux-iters", type=int, default=None,
                   help="auxiliary sampler steps per update (default: dyad count)")
    p.add_argument("--sampler", choices=["tnt", "gibbs"], default="tnt")
    p.add_argument("--prop-sd-theta", type=float, default=0.1)
    p.add_argument("--prop-sd-phi", type=float, default=0.5)
    p.add_argument("--prop-sd-mu", type=float, default=0.1)
    p.add_argument("--prop-halfwidth-sigma2", type=float, default=0.5)
    p.add_argument("--phi-scan", choices=["sequential", "random"],
                   default="sequential")


def _add_prior_flags(p):
    p.add_argument("--rho2", type=float, default=100.0)
    p.add_argument("--tau2", type=float, default=100.0)
    p.add_argument("--ig-a", type=float, default=0.001)
    p.add_argument("--ig-b", type=float, default=0.001)


def _add_evidence_flags(p):
    p.add_argument("--grid", type=int, default=1000,
                   help="path subintervals")
    p.add_argument("--draws-per-point", type=int, default=1000)
    p.add_argument("--path-aux-iters", type=int, default=None)
    p.add_argument("--no-warm-start", action="store_true")
    p.add_argument("--blocks", type=int, default=8)
    p.add_argument("--cov-sims", type=int, default=10000)
    p.add_argument("--cov-aux-iters", type=int, default=None)


def cmd_fit(args) -> int:
    graph = _read_network(args.network)
    spec = ModelSpec(stats=_parse_stats(args.stats) if args.stats else (),
                     random_effects=args.random_effects,
                     hyper=_hyper_from_args(args))
    result = run_chain(graph, spec, _chain_config_from_args(args))
    out = _ensure_out(args.out)
    _write_draws_csv(result, os.path.join(out, "draws.csv"))
    s = summarize(result, acf_lags=args.acf_lags)
    _write_json(s, os.path.join(out, "summary.json"))
    _write_acf_csv(s, os.path.join(out, "acf.csv"))
    _write_meta(out, "fit", args)
    return 0


def cmd_simulate(args) -> int:
    stats = _parse_stats(args.stats) if args.stats else ()
    phi = _parse_floats(args.phi) if args.phi else None
    spec = ModelSpec(stats=stats, random_effects=phi is not None)
    n = args.n
    theta = _parse_floats(args.theta) if args.theta else np.zeros(len(stats))
    state = ParamState(theta=theta,
                       phi=phi if phi is not None else np.zeros(n),
                       mu_phi=0.0, sigma2_phi=1.0)
    cfg = SimConfig(aux_iters=args.aux_iters, sampler=args.sampler,
                    init=args.init, init_density=args.density)
    if cfg.init == "observed":
        raise ValueError("simulate starts from 'empty' or 'random'")
    out = _ensure_out(args.out)
    kinds = stats if stats else STAT_KINDS
    rows = []
    for rep in range(args.reps):
        rng = substream(normalize_seed(args.seed), DOMAIN_SIM, rep)
        g = simulate_network(state, spec, n, cfg, rng)
        write_edge_list(g, os.path.join(out, f"sim_{rep + 1:03d}.edges"))
        rows.append([rep + 1] + [int(v) for v in sufficient_stats(g, kinds)])
    with open(os.path.join(out, "stats.csv"), "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["replicate"] + list(kinds))
        writer.writerows(rows)
    _write_meta(out, "simulate", args)
    return 0


def cmd_bf(args) -> int:
    graph = _read_network(args.network)
    hyper = _hyper_from_args(args)
    out = _ensure_out(args.out)

    if args.refit:
        from dataclasses import replace

        from .rng import DOMAIN_CHAIN

        mixed_stats = _parse_stats(args.stats)
        spec_fixed = ModelSpec(stats=("edges",) + mixed_stats, hyper=hyper)
        spec_mixed = ModelSpec(stats=mixed_stats, random_effects=True,
                               hyper=hyper)
        base = normalize_seed(args.seed)
        cfg_fit = _chain_config_from_args(args)
        fit_fixed = run_chain(graph, spec_fixed, replace(
            cfg_fit, seed=int(substream(base, DOMAIN_CHAIN, 1).integers(2**63))))
        fit_mixed = run_chain(graph, spec_mixed, replace(
            cfg_fit, seed=int(substream(base, DOMAIN_CHAIN, 2).integers(2**63))))
        _write_draws_csv(fit_fixed, os.path.join(out, "fixed_draws.csv"))
        _write_draws_csv(fit_mixed, os.path.join(out, "mixed_draws.csv"))
    else:
        if args.fit_fixed is None or args.fit_mixed is None:
            raise ValueError(
                "bf needs --fit-fixed and --fit-mixed, or --refit")
        fit_fixed = _read_draws_csv(args.fit_fixed)
        fit_mixed = _read_draws_csv(args.fit_mixed)
        fixed_stats = tuple(c[len("theta."):] for c in fit_fixed.columns
                            if c.startswith("theta."))
        mixed_stats = tuple(c[len("theta."):] for c in fit_mixed.columns
                            if c.startswith("theta."))
        spec_fixed = ModelSpec(stats=fixed_stats, hyper=hyper)
        spec_mixed = ModelSpec(stats=mixed_stats, random_effects=True,
                               hyper=hyper)

    path_cfg = PathConfig(
        grid_points=args.grid, draws_per_point=args.draws_per_point,
        sim=SimConfig(aux_iters=args.path_aux_iters, init="empty"),
        seed=args.seed, warm_start=not args.no_warm_start,
        n_blocks=args.blocks)
    laplace_cfg = LaplaceConfig(
        cov_sims=args.cov_sims,
        sim=SimConfig(aux_iters=args.cov_aux_iters, init="observed"),
        seed=args.seed)
    report = log_bayes_factor(graph, spec_fixed, spec_mixed, fit_fixed,
                              fit_mixed, path_cfg, laplace_cfg,
                              threads=args.threads)
    _write_json(report.as_dict(), os.path.join(out, "evidence.json"))
    _write_meta(out, "bf", args)
    print(f"log BF (mixed over fixed) = {report.log_bf:.3f}")
    return 0


def cmd_study(args) -> int:
    grid = StudyGrid(
        setting=args.setting,
        cells=tuple(_parse_floats(args.cells)) if args.cells else (1.0,),
        replicates=args.reps, n=args.n, mu_phi=args.mu_phi,
        theta_edges=args.theta_edges, gen_iters=args.gen_iters,
        seed=args.seed)
    fit_cfg = _chain_config_from_args(args)
    path_cfg = PathConfig(
        grid_points=args.grid, draws_per_point=args.draws_per_point,
        sim=SimConfig(aux_iters=args.path_aux_iters, init="empty"),
        warm_start=not args.no_warm_start, n_blocks=args.blocks)
    laplace_cfg = LaplaceConfig(
        cov_sims=args.cov_sims,
        sim=SimConfig(aux_iters=args.cov_aux_iters, init="observed"))
    cfg = StudyConfig(fit=fit_cfg, path=path_cfg, laplace=laplace_cfg,
                      hyper=_hyper_from_args(args), threads=args.threads)
    result = run_study(grid, cfg)

    out = _ensure_out(args.out)
    cell_fields = ["cell_index", "cell", "n_replicates", "n_failed",
                   "mean_density", "min_log_bf", "max_log_bf",
                   "frac_below_minus_decisive", "frac_negative",
                   "frac_positive", "frac_above_decisive"]
    with open(os.path.join(out, "study.csv"), "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(cell_fields)
        for cell in result.cells:
            writer.writerow([repr(cell[k]) if isinstance(cell[k], float)
                             else str(cell[k]) for k in cell_fields])
    _write_json(result.as_dict(), os.path.join(out, "replicates.json"))
    if args.plot_data:
        vals = censored_plot_values(result.records, bound=args.plot_bound)
        with open(os.path.join(out, "study_plotdata.csv"), "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["cell", "replicate", "log_bf_clamped", "clamped"])
            for cell, rep, v, was in vals:
                writer.writerow([repr(float(cell)), str(rep), repr(float(v)),
                                 str(bool(was)).lower()])
    _write_meta(out, "study", args)
    return 0


def cmd_summarize(args) -> int:
    result = _read_draws_csv(args.draws)
    s = summarize(result, acf_lags=args.acf_lags)
    out = _ensure_out(args.out)
    _write_json(s, os.path.join(out, "summary.json"))
    _write_acf_csv(s, os.path.join(out, "acf.csv"))
    _write_meta(out, "summarize", args)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="ergmix",
                     description="Bayesian network models with random "
                                 "effects via the exchange algorithm")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    default_threads = int(os.environ.get("BERGM_THREADS", "1"))

    p = sub.add_parser("fit", help="fit a model to one network")
    p.add_argument("--network", required=True,
                   help="edge list file, adjacency .csv, or 'karate'")
    p.add_argument("--stats", default="edges,triangles",
                   help="comma list drawn from edges,twostars,triangles")
    p.add_argument("--random-effects", action="store_true")
    _add_chain_flags(p)
    _add_prior_flags(p)
    p.add_argument("--acf-lags", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.add_argument("--config", default=None, help="JSON file of flag defaults")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="simulate networks at fixed parameters")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--stats", default="edges")
    p.add_argument("--theta", default=None, help="comma list of coefficients")
    p.add_argument("--phi", default=None,
                   help="comma list of nodal effects (enables random effects)")
    p.add_argument("--aux-iters", type=int, default=None,
                   help="sampler steps per network (default: dyad count)")
    p.add_argument("--sampler", choices=["tnt", "gibbs"], default="tnt")
    p.add_argument("--init", choices=["empty", "random"], default="empty")
    p.add_argument("--density", type=float, default=0.5,
                   help="density of a random initial graph")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bf", help="log Bayes factor of mixed over fixed "
                                  "from two fit outputs")
    p.add_argument("--network", required=True)
    p.add_argument("--fit-fixed", default=None, help="draws.csv of the fixed fit")
    p.add_argument("--fit-mixed", default=None, help="draws.csv of the mixed fit")
    p.add_argument("--refit", action="store_true",
                   help="fit both models here instead of reading draws files")
    p.add_argument("--stats", default="triangles",
                   help="shared statistics for --refit (fixed model adds edges)")
    _add_chain_flags(p)
    _add_evidence_flags(p)
    _add_prior_flags(p)
    p.add_argument("--threads", type=int, default=default_threads)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_bf)

    p = sub.add_parser("study", help="replicated model-comparison experiment")
    p.add_argument("--setting", choices=["A", "B", "bernoulli"], default="A")
    p.add_argument("--cells", default=None,
                   help="comma list of cell values (sigma2 for A, two-star "
                        "coefficient for B)")
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--n", type=int, default=40)
    p.add_argument("--mu-phi", type=float, default=-1.0)
    p.add_argument("--theta-edges", type=float, default=-2.0)
    p.add_argument("--gen-iters", type=int, default=None)
    _add_chain_flags(p)
    _add_evidence_flags(p)
    _add_prior_flags(p)
    p.add_argument("--plot-data", action="store_true",
                   help="also write display-censored per-replicate values")
    p.add_argument("--plot-bound", type=float, default=20.0)
    p.add_argument("--threads", type=int, default=default_threads)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("summarize", help="summaries and ACF from a draws CSV")
    p.add_argument("draws")
    p.add_argument("--acf-lags", type=int, default=50)
    p.add_argument("--out", default=".")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_summarize)

    return parser


def _apply_config_file(parser, argv):
    """Load --config JSON as flag defaults; explicit flags still win."""
    probe = _Parser(add_help=False)
    probe.add_argument("--config", default=None)
    known, _ = probe.parse_known_args(argv)
    if known.config is None:
        return
    if not os.path.exists(known.config):
        raise ValueError(f"config file not found: {known.config}")
    with open(known.config) as f:
        try:
            payload = json.load(f)
        except json.JSONDecodeError as exc:
            raise ValueError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise ValueError("config file must hold a JSON object")
    for sub_action in parser._subparsers._group_actions:
        for name, sp in sub_action.choices.items():
            if argv and name == argv[0]:
                valid = {a.dest for a in sp._actions}
                unknown = set(payload) - valid
                if unknown:
                    raise ValueError(
                        f"config keys not recognised by {name}: "
                        f"{', '.join(sorted(unknown))}")
                sp.set_defaults(**payload)


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
