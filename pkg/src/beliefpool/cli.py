"""Command-line front end: ``simulate``, ``rates`` and ``reproduce``.

Exit codes: 0 success, 2 configuration error, 3 numeric or convergence error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import FIGURE_IDS, ExperimentConfig, load_figure
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateBeliefError,
    DomainError,
    InapplicableError,
    InsufficientDataError,
    InternalConsistencyError,
    InvalidSpecError,
    NonPrimitiveError,
)
from .learning import run
from .rates import (
    _jsonable,
    build_rate_report,
    empirical_rate,
    exchangeable_bound,
    ga_rate,
    inept_bound,
    rank_one_exact,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
CONFIG_ERRORS = (ConfigError, InvalidSpecError, NonPrimitiveError, InapplicableError)
NUMERIC_ERRORS = (DegenerateBeliefError, ConvergenceError, InternalConsistencyError, DomainError,
                  InsufficientDataError, FloatingPointError)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def _write_series(path: Path, iters, values) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "value"])
        for i, v in zip(iters, values):
            w.writerow([int(i), repr(float(v))])


def _manifest(out: Path, command: str, resolved: dict, seed: int, files: list[Path]) -> None:
    digests = {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(files)}
    resolved = {k: v for k, v in resolved.items() if k != "outputs"}  # location does not affect results
    _write_json(out / "manifest.json", {"command": command, "version": __version__, "seed": seed,
                                        "config": resolved, "files": digests})


# -- simulate ---------------------------------------------------------------

def cmd_simulate(cfg: ExperimentConfig, out: Path, trace_trials: int = 1) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    files: list[Path] = []
    summary: dict = {"true_index": cfg.true_index, "runs": {}}
    wrong = [t for t in range(cfg.model.H) if t != cfg.true_index]
    for net_name, spec in cfg.networks.items():
        A = spec.build()
        for rule in cfg.rules:
            tag = f"{net_name}_{rule.value}"
            trace = run(rule, A, cfg.model, cfg.true_index, cfg.iterations, cfg.seed,
                        trials=cfg.trials, stride=cfg.stride)
            for t in range(min(trace_trials, cfg.trials)):
                p = out / f"{tag}_trial{t}.csv"
                d = out / f"{tag}_trial{t}_derived.csv"
                trace.to_csv(p, t)
                trace.derived_to_csv(d, t)
                files += [p, d]
            entry = {}
            for theta in wrong:
                e = {"ga_rate": ga_rate(A, cfg.model, cfg.true_index, theta)}
                if trace.length >= 100:
                    er = empirical_rate(trace, theta)
                    e.update(empirical_rate=er.pooled, stderr=er.stderr, agent_spread=er.spread,
                             per_agent=er.per_agent)
                entry[str(theta)] = e
            summary["runs"][tag] = entry
    p = out / "summary.json"
    _write_json(p, summary)
    files.append(p)
    _manifest(out, "simulate", cfg.resolved(), cfg.seed, files)
    return summary


def _print_summary(summary: dict) -> None:
    for tag, entry in summary["runs"].items():
        for theta, e in entry.items():
            if "empirical_rate" in e:
                print(f"{tag:<32s} theta={theta} rate={e['empirical_rate']:.6f} "
                      f"+/- {e['stderr']:.1e}  ga_rate={e['ga_rate']:.6f}")
            else:
                print(f"{tag:<32s} theta={theta} ga_rate={e['ga_rate']:.6f}")


# -- rates ------------------------------------------------------------------

def cmd_rates(cfg: ExperimentConfig, out: Path | None) -> dict:
    if cfg.model.H < 2:
        raise ConfigError("rate analysis needs at least one wrong hypothesis (H >= 2)")
    reports = {}
    files = []
    for net_name, spec in cfg.networks.items():
        rep = build_rate_report(spec.build(), cfg.model, cfg.true_index, cfg.seed, cfg.analysis)
        reports[net_name] = rep
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
            p = out / f"report_{net_name}.json"
            p.write_text(rep.to_json())
            files.append(p)
    if out is not None:
        _manifest(out, "rates", cfg.resolved(), cfg.seed, files)
    return reports


# -- reproduce --------------------------------------------------------------

def _reference_value(fig, ref: dict) -> float:
    kind = ref["kind"]
    if kind == "constant":
        return float(ref["value"])
    spec, model = fig.reference_inputs(ref)
    A = spec.build()
    if kind == "ga_rate":
        return ga_rate(A, model, fig.true_index, fig.theta)
    if kind == "alpha_ga_rate":
        return float(ref["alpha"]) * ga_rate(A, model, fig.true_index, fig.theta)
    if kind == "rank_one_exact":
        return rank_one_exact(A, model, fig.true_index, fig.theta,
                              samples=int(ref.get("samples", 1_000_000)), seed=fig.seed).value
    if kind == "exchangeable_B_A":
        return exchangeable_bound(A, model, fig.true_index, fig.theta,
                                  samples=int(ref.get("samples", 1_000_000)), seed=fig.seed).B_A
    if kind == "inept_bound":
        return inept_bound(A, model, fig.true_index, fig.theta, int(ref.get("agent", fig.agent)))
    raise ConfigError(f"unknown reference kind {kind!r}")


def cmd_reproduce(figure_id: str, out: Path, seed=None, trials=None, iterations=None) -> dict:
    fig = load_figure(figure_id)
    if seed is not None:
        fig.seed = seed
    if trials is not None:
        fig.trials = trials
    if iterations is not None:
        fig.iterations = iterations
    out.mkdir(parents=True, exist_ok=True)
    files = []
    summary = {"figure": figure_id, "curves": {}, "references": {}}
    last_iters = None
    for c in fig.curves:
        trace = run(c.rule, c.network.build(), c.model, fig.true_index, fig.iterations, fig.seed, trials=fig.trials)
        series = trace.neg_log_belief_over_i(fig.theta)[:, :, fig.agent].mean(axis=1)
        p = out / f"{c.name}.csv"
        _write_series(p, trace.iterations, series)
        files.append(p)
        last_iters = trace.iterations
        entry = {"final": series[-1]}
        if trace.length >= 100:
            entry["tail_slope"] = float(empirical_rate(trace, fig.theta).per_agent[fig.agent])
        summary["curves"][c.name] = entry
    ends = [int(last_iters[0]), int(last_iters[-1])] if last_iters is not None else [1, fig.iterations]
    for ref in fig.references:
        val = _reference_value(fig, ref)
        p = out / f"ref_{ref['name']}.csv"
        _write_series(p, ends, [val, val])
        files.append(p)
        summary["references"][ref["name"]] = val
    p = out / "summary.json"
    _write_json(p, summary)
    files.append(p)
    resolved = {**fig.raw, "seed": fig.seed, "trials": fig.trials, "iterations": fig.iterations}
    _manifest(out, f"reproduce {figure_id}", resolved, fig.seed, files)
    return summary


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beliefpool", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--seed", type=int, help="override the seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--trials", type=int, help="override the number of trials")
        p.add_argument("--iters", type=int, help="override the number of iterations")

    p = sub.add_parser("simulate", help="run the configured rules and write traces")
    common(p)
    p.add_argument("--trace-trials", type=int, default=1, help="trials written as full trace CSVs")
    p = sub.add_parser("rates", help="compute the rate report")
    common(p)
    p = sub.add_parser("reproduce", help="write plot data for a bundled figure config")
    common(p, config=False)
    p.add_argument("--figure", required=True, choices=FIGURE_IDS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    np.seterr(over="ignore", under="ignore")
    try:
        if args.command == "reproduce":
            out = Path(args.out or f"figure_{args.figure}")
            summary = cmd_reproduce(args.figure, out, args.seed, args.trials, args.iters)
            for name, e in summary["curves"].items():
                print(f"{name:<24s} final={e['final']:.6f}")
            for name, v in summary["references"].items():
                print(f"ref {name:<20s} {v:.6f}")
            return EXIT_OK
        cfg = ExperimentConfig.load(args.config).with_overrides(args.seed, args.trials, args.iters, args.out)
        if args.command == "simulate":
            _print_summary(cmd_simulate(cfg, Path(cfg.outputs), args.trace_trials))
        else:
            reports = cmd_rates(cfg, Path(args.out) if args.out else None)
            for name, rep in reports.items():
                print(f"[{name}]")
                print(rep.table(), end="")
        return EXIT_OK
    except CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
