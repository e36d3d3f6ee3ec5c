"""Command line entry point: ``gkdv run``, ``gkdv sweep`` and ``gkdv verify``."""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from ..container import save_trajectory
from ..solver import BlowupError
from .config import KINDS, ConfigError, ExperimentConfig, default_config, load_config
from .experiments import METRICS, SWEEP_METRIC, run_experiment
from .report import csv_text, format_value, write_csv, write_plots, write_summary

__all__ = ["main", "run", "sweep", "verify", "VERIFY_PLAN"]

# Acceptance criteria 1-12 in order, as experiment kinds run with defaults.
VERIFY_PLAN = [
    (1, "conservation"),
    (2, "scaling"),
    (3, "decay"),
    (4, "local_laws"),
    (5, "positivity"),
    (6, "morawetz_truncated"),
    (7, "interaction_kernel"),
    (8, "morawetz_interaction"),
    (9, "vp_norm"),
    (10, "small_data"),
    (11, "admissible"),
    (12, "envelope"),
]


def _load(target: str) -> ExperimentConfig:
    """A config path, or a bare kind name for the built-in defaults."""
    if Path(target).is_file():
        return load_config(target)
    if target in KINDS:
        return default_config(target)
    raise ConfigError(f"{target!r} is neither a config file nor an experiment kind {list(KINDS)}")


def _apply_cli(cfg: ExperimentConfig, out, seed) -> ExperimentConfig:
    if seed is not None:
        cfg = cfg.with_value("experiment.seed", seed)
    if out is not None:
        cfg.output["dir"] = str(out)
    return cfg


def _row(cfg, res) -> dict:
    return {"experiment_id": cfg.id, "kind": cfg.kind, "seed": cfg.seed, **res.metrics, "passed": res.passed}


def _header(kind):
    return ["experiment_id", "kind", "seed", *METRICS[kind], "passed"]


def run(cfg: ExperimentConfig, log=print) -> int:
    out = Path(cfg.output["dir"])
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    res = run_experiment(cfg)
    elapsed = time.perf_counter() - t0
    write_csv(out / "results.csv", _header(cfg.kind), [_row(cfg, res)])
    artifacts = ["results.csv", "summary.json"]
    if cfg.output.get("plots"):
        artifacts += [p.name for p in write_plots(cfg.kind, res.series, out)]
    if cfg.output.get("trajectory") and res.trajectory is not None:
        artifacts.append(save_trajectory(res.trajectory, out / "trajectory.gkdvtrj").name)
    write_summary(out / "summary.json", {"config": cfg.as_dict(), "metrics": res.metrics,
                                         "passed": res.passed, "runtime_s": elapsed,
                                         "artifacts": sorted(artifacts)})
    status = "PASS" if res.passed else "FAIL"
    log(f"{status} {cfg.id} ({cfg.kind}) " + " ".join(f"{k}={format_value(v)}" for k, v in res.metrics.items()))
    return 0 if res.passed else 1


def _aggregate(axis_values, metric_values):
    x = np.asarray(axis_values, dtype=float)
    y = np.asarray(metric_values, dtype=float)
    ok = np.isfinite(y) & np.isfinite(x)
    spread = slope = math.nan
    if ok.sum() >= 1 and np.all(y[ok] > 0):
        spread = float(y[ok].max() / y[ok].min())
    if ok.sum() >= 2 and np.all(y[ok] > 0) and np.all(x[ok] > 0) and np.unique(x[ok]).size > 1:
        slope = float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])
    return slope, spread


def sweep(cfg: ExperimentConfig, axis: str, values, log=print) -> int:
    """One member run per value; member failures are recorded in their row."""
    from .config import resolve_axis

    section, key = resolve_axis(cfg, axis)
    out = Path(cfg.output["dir"])
    out.mkdir(parents=True, exist_ok=True)
    header = [key, *_header(cfg.kind), "sweep_slope", "sweep_spread", "error"]
    rows, metric = [], SWEEP_METRIC[cfg.kind]
    for v in values:
        row = {key: v, "experiment_id": f"{cfg.id}[{key}={format_value(v)}]", "kind": cfg.kind, "seed": cfg.seed}
        try:
            member = cfg.with_value(f"{section}.{key}", v)
            res = run_experiment(member)
            row.update(res.metrics)
            row["passed"] = res.passed
        except (ValueError, BlowupError, FloatingPointError) as exc:
            row.update({m: math.nan for m in METRICS[cfg.kind]})
            row["passed"] = False
            row["error"] = str(exc).replace("\n", " ")
        rows.append(row)
        log(f"{'PASS' if row['passed'] else 'FAIL'} {row['experiment_id']} {metric}={format_value(row.get(metric))}")
    slope, spread = _aggregate([r[key] for r in rows], [r.get(metric, math.nan) for r in rows]) if rows else (math.nan, math.nan)
    for r in rows:
        r["sweep_slope"] = slope
        r["sweep_spread"] = spread
    write_csv(out / "results.csv", header, rows)
    write_summary(out / "summary.json", {"config": cfg.as_dict(), "axis": f"{section}.{key}",
                                         "values": list(values), "metric": metric,
                                         "sweep_slope": slope, "sweep_spread": spread})
    log(f"sweep {section}.{key}: {metric} slope={format_value(slope)} spread={format_value(spread)}")
    return 0


def verify(out=None, seed=None, log=print) -> int:
    """Run criteria 1-12 on defaults, then check byte-identical CSV on a repeated seeded run."""
    base = Path(out) if out is not None else Path("results") / "verify"
    all_ok = True
    for number, kind in VERIFY_PLAN:
        cfg = _apply_cli(default_config(kind), base / kind, seed)
        cfg.output["plots"] = False
        t0 = time.perf_counter()
        try:
            res = run_experiment(cfg)
            ok = res.passed
            detail = " ".join(f"{k}={format_value(v)}" for k, v in res.metrics.items())
            Path(cfg.output["dir"]).mkdir(parents=True, exist_ok=True)
            write_csv(Path(cfg.output["dir"]) / "results.csv", _header(kind), [_row(cfg, res)])
        except Exception as exc:  # a crashing criterion is a failing criterion
            ok, detail = False, f"error: {exc}"
        all_ok &= ok
        log(f"criterion {number:2d} {kind:22s} {'PASS' if ok else 'FAIL'} ({time.perf_counter() - t0:.1f}s) {detail}")
    same = True
    for kind in ("positivity", "local_laws"):
        texts = []
        for _ in range(2):
            cfg = _apply_cli(default_config(kind), base / "determinism", seed if seed is not None else 12345)
            res = run_experiment(cfg)
            texts.append(csv_text(_header(kind), [_row(cfg, res)]).encode())
        same &= texts[0] == texts[1]
    all_ok &= same
    log(f"criterion 13 {'determinism':22s} {'PASS' if same else 'FAIL'} byte-identical CSV on repeated seeded run")
    log("verify: " + ("all criteria passed" if all_ok else "FAILURES present"))
    return 0 if all_ok else 1


def _parse_values(text: str):
    items = [t for t in text.replace(",", " ").split() if t]
    out = []
    for t in items:
        try:
            out.append(int(t) if t.lstrip("-").isdigit() else float(t))
        except ValueError:
            out.append(t)
    return out


def _u64(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--seed", type=_u64, default=argparse.SUPPRESS, help="unsigned 64-bit seed")
    p = argparse.ArgumentParser(prog="gkdv", parents=[common],
                                description="Experiments for the defocusing quintic gKdV equation.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run one experiment")
    r.add_argument("config", help="INI config path or experiment kind")
    s = sub.add_parser("sweep", parents=[common], help="run an experiment over a list of values")
    s.add_argument("config", help="INI config path or experiment kind")
    s.add_argument("--axis", required=True, help="config key, as section.key or a unique bare key")
    s.add_argument("--values", required=True, help="comma-separated list (may be empty)")
    sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = getattr(args, "out", None)
    seed = getattr(args, "seed", None)
    try:
        if args.command == "verify":
            return verify(out, seed)
        cfg = _apply_cli(_load(args.config), out, seed)
        if args.command == "run":
            return run(cfg)
        return sweep(cfg, args.axis, _parse_values(args.values))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BlowupError as exc:
        print(f"numerical guard tripped: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
