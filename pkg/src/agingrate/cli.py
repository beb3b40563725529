"""Command-line interface: simulate, fit, summarize, diagnose, mdd.

Exit codes: 0 success, 2 configuration/usage error, 3 fit did not converge
(artifacts are still written), 4 chain initialization failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys

import numpy as np

from . import hmd
from .config import FitConfig, load_config
from .dataset import CohortDataset, read_dataset_csv, write_dataset_csv
from .exceptions import ConfigError, FitInitializationError, SelectionError
from .ppc import posterior_predictive_qq, write_qq_csv
from .sampler import PosteriorDraws, run_chains, write_draws_csv
from .simulate import generate_dataset
from .stationarity import adf_test, kpss_test, write_stationarity_csv
from .summaries import (
    mdd,
    mdd_plugin_percent,
    posterior_mode,
    summarize_draws,
    write_summary_csv,
    write_summary_json,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3
EXIT_INIT_FAILURE = 4

RHAT_GATE = 1.02


def _ensure_out(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _load_run_config(args) -> FitConfig:
    if not args.config:
        raise ConfigError("--config", "a config file is required for this command")
    cfg = load_config(args.config)
    if args.out:
        cfg = dataclasses.replace(cfg, out=args.out)
    sampler_overrides = {}
    if args.seed is not None:
        sampler_overrides["seed"] = args.seed
    if args.chains is not None:
        sampler_overrides["n_chains"] = args.chains
    if args.iter is not None:
        sampler_overrides["n_iter"] = args.iter
        if args.warmup is None:
            # keep the 2/3 warm-up share of the default protocol
            sampler_overrides["n_warmup"] = max(1, round(args.iter * 2 / 3))
    if args.warmup is not None:
        sampler_overrides["n_warmup"] = args.warmup
    if sampler_overrides:
        s = cfg.sampler
        n_warmup = sampler_overrides.get("n_warmup", s.n_warmup)
        if s.pilot_iters * s.pilot_refreshes >= n_warmup:
            # shrink the pilot stages into the (possibly reduced) warm-up budget
            refreshes = max(1, s.pilot_refreshes)
            pilot = max(0, int(n_warmup * 3 / (8 * refreshes)))
            sampler_overrides["pilot_iters"] = pilot
            sampler_overrides["pilot_keep"] = max(2, pilot // 2) if pilot else 2
        try:
            cfg = dataclasses.replace(cfg, sampler=dataclasses.replace(s, **sampler_overrides))
        except ValueError as exc:
            raise ConfigError("sampler", str(exc)) from exc
    if args.seed is not None and cfg.scenario is not None:
        cfg = dataclasses.replace(
            cfg, scenario=dataclasses.replace(cfg.scenario, seed=args.seed)
        )
    if args.start_age is not None:
        if cfg.data is None:
            raise ConfigError("--start-age", "only applies to HMD data configs")
        try:
            cfg = dataclasses.replace(
                cfg,
                data=dataclasses.replace(
                    cfg.data, start_age=args.start_age, min_age_groups=None
                ),
            )
        except ValueError as exc:
            raise ConfigError("data.start_age", str(exc)) from exc
    return cfg


def _load_dataset(cfg: FitConfig) -> CohortDataset:
    if cfg.scenario is not None:
        data, _ = generate_dataset(cfg.scenario)
        return data
    dc = cfg.data
    if dc.dataset is not None:
        return read_dataset_csv(dc.dataset)
    deaths = hmd.load_hmd(dc.deaths)
    exposures = hmd.load_hmd(dc.exposures)
    return hmd.build_dataset(deaths, exposures, dc.sex, dc.selection_rule())


def cmd_simulate(args) -> int:
    cfg = _load_run_config(args)
    if cfg.scenario is None:
        raise ConfigError("scenario", "simulate requires a scenario section")
    out = _ensure_out(cfg.out)
    data, truth = generate_dataset(cfg.scenario)
    write_dataset_csv(data, os.path.join(out, "dataset.csv"))
    with open(os.path.join(out, "truth.json"), "w") as fh:
        json.dump(truth.as_dict(), fh, indent=2)
        fh.write("\n")
    print(f"wrote {out}/dataset.csv ({data.n_cohorts} cohorts x {data.n_ages} ages)")
    return EXIT_OK


def _converged(draws: PosteriorDraws, rows) -> tuple[bool, float]:
    sampled = set(draws.names)
    rhats = [r.rhat for r in rows if r.name in sampled and not math.isnan(r.rhat)]
    worst = max(rhats) if rhats else float("nan")
    return bool(rhats) and worst < RHAT_GATE, worst


def cmd_fit(args) -> int:
    cfg = _load_run_config(args)
    out = _ensure_out(cfg.out)
    data = _load_dataset(cfg)
    draws = run_chains(data, cfg.sampler, cfg.priors)

    write_dataset_csv(data, os.path.join(out, "dataset.csv"))
    write_draws_csv(draws, os.path.join(out, "draws.csv"))
    rows = summarize_draws(draws, kde=cfg.kde)
    write_summary_csv(rows, os.path.join(out, "summary.csv"))
    report = mdd(draws.flat("sigma_rw"), draws.n_cohorts, kde=cfg.kde)
    write_summary_json(rows, os.path.join(out, "summary.json"), mdd_report=report)
    with open(os.path.join(out, "mdd.json"), "w") as fh:
        json.dump(report.as_dict(), fh, indent=2)
        fh.write("\n")

    qq = posterior_predictive_qq(
        draws,
        data,
        n_rep=cfg.qq.n_rep,
        seed=cfg.qq.seed,
        statistic=cfg.qq.statistic,
        envelope_mass=cfg.qq.envelope_mass,
    )
    write_qq_csv(qq, os.path.join(out, "qq.csv"))

    ok, worst = _converged(draws, rows)
    print(f"max split R-hat {worst:.4f} ({'converged' if ok else 'NOT converged'})")
    print(f"wrote draws, summary, qq and mdd artifacts under {out}/")
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


def cmd_summarize(args) -> int:
    if not args.draws:
        raise ConfigError("--draws", "a draws CSV is required")
    draws = PosteriorDraws.from_csv(args.draws)
    out = _ensure_out(args.out or os.path.dirname(os.path.abspath(args.draws)))
    rows = summarize_draws(draws)
    write_summary_csv(rows, os.path.join(out, "summary.csv"))
    report = mdd(draws.flat("sigma_rw"), draws.n_cohorts)
    write_summary_json(rows, os.path.join(out, "summary.json"), mdd_report=report)
    _, worst = _converged(draws, rows)
    print(f"wrote summary.csv and summary.json under {out}/ (max R-hat {worst:.4f})")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    if not args.draws:
        raise ConfigError("--draws", "a draws CSV is required")
    draws = PosteriorDraws.from_csv(args.draws)
    out = _ensure_out(args.out or os.path.dirname(os.path.abspath(args.draws)))

    slopes = draws.slope_draws()
    log_bt = np.log(
        np.array([posterior_mode(slopes[:, t]) for t in range(draws.n_cohorts)])
    )
    results = [
        adf_test(log_bt),
        kpss_test(log_bt),
        adf_test(np.diff(log_bt)),
        kpss_test(np.diff(log_bt)),
    ]
    labels = ["log_bt", "log_bt", "diff_log_bt", "diff_log_bt"]
    write_stationarity_csv(results, os.path.join(out, "stationarity.csv"))
    for label, r in zip(labels, results):
        verdict = "reject" if r.reject_5pct else "fail to reject"
        print(f"{r.test:4s} on {label:12s}: stat {r.statistic: .4f}  p {r.p_bracket:9s} ({verdict} at 5%)")

    if args.dataset:
        data = read_dataset_csv(args.dataset)
        qq = posterior_predictive_qq(draws, data, seed=args.seed or 0)
        write_qq_csv(qq, os.path.join(out, "qq.csv"))
        print(f"QQ envelope coverage: {qq.coverage():.3f}")
    return EXIT_OK


def cmd_mdd(args) -> int:
    if args.t_cohorts is None:
        raise ConfigError("--t-cohorts", "the cohort count T is required")
    if args.t_cohorts < 2:
        raise ConfigError("--t-cohorts", "T must be >= 2")
    if (args.sigma is None) == (args.draws is None):
        raise ConfigError("--sigma", "give exactly one of --sigma or --draws")
    if args.sigma is not None:
        if args.sigma < 0:
            raise ConfigError("--sigma", "sigma_rw must be >= 0")
        if args.sigma == 0:
            print("MDD: 0.0000% per cohort (plug-in, sigma_rw = 0)")
            return EXIT_OK
        pct = mdd_plugin_percent(args.sigma, args.t_cohorts)
        print(f"MDD: {pct:.4f}% per cohort (plug-in, sigma_rw = {args.sigma}, T = {args.t_cohorts})")
        payload = {"mdd_percent_plugin": pct, "n_cohorts": args.t_cohorts, "sigma_rw": args.sigma}
    else:
        draws = PosteriorDraws.from_csv(args.draws)
        report = mdd(draws.flat("sigma_rw"), args.t_cohorts)
        print(
            f"MDD: mode {report.mode_percent:.4f}% per cohort, 95% HPD "
            f"[{report.hpd_low_percent:.4f}, {report.hpd_high_percent:.4f}], "
            f"plug-in {report.plugin_percent:.4f}%"
        )
        payload = report.as_dict()
    if args.out:
        _ensure_out(args.out)
        with open(os.path.join(args.out, "mdd.json"), "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agingrate",
        description="Estimate the individual rate of aging from cohort mortality data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--seed", type=int, help="override the RNG seed")
        p.add_argument("--out", help="output directory")

    p_sim = sub.add_parser("simulate", help="generate a synthetic dataset from a scenario")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate, chains=None, iter=None, warmup=None, start_age=None)

    p_fit = sub.add_parser("fit", help="run the MCMC fit and write all artifacts")
    common(p_fit)
    p_fit.add_argument("--chains", type=int, help="number of chains")
    p_fit.add_argument("--iter", type=int, help="iterations per chain")
    p_fit.add_argument("--warmup", type=int, help="warm-up iterations per chain")
    p_fit.add_argument("--start-age", type=int, dest="start_age",
                       help="starting age for HMD cohort selection")
    p_fit.set_defaults(func=cmd_fit)

    p_sum = sub.add_parser("summarize", help="recompute summaries from a draws CSV")
    p_sum.add_argument("--draws", required=True)
    p_sum.add_argument("--out")
    p_sum.set_defaults(func=cmd_summarize)

    p_diag = sub.add_parser("diagnose", help="stationarity tests and QQ from a draws CSV")
    p_diag.add_argument("--draws", required=True)
    p_diag.add_argument("--dataset", help="normalized dataset CSV for the QQ check")
    p_diag.add_argument("--seed", type=int, help="replicate RNG seed")
    p_diag.add_argument("--out")
    p_diag.set_defaults(func=cmd_diagnose)

    p_mdd = sub.add_parser("mdd", help="minimum detectable drift from sigma_rw")
    p_mdd.add_argument("--sigma", type=float, help="plug-in sigma_rw value")
    p_mdd.add_argument("--draws", help="draws CSV with sigma_rw column")
    p_mdd.add_argument("--t-cohorts", type=int, dest="t_cohorts", help="cohort count T")
    p_mdd.add_argument("--out")
    p_mdd.set_defaults(func=cmd_mdd)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SelectionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FitInitializationError as exc:
        print(f"initialization failure: {exc}", file=sys.stderr)
        return EXIT_INIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
