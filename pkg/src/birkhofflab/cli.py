"""Command-line surface: experiment configs, ensembles, durable CSV/JSON output.

Subcommands: ``run`` (ensemble of orbits, per-orbit checkpoint CSV plus a
JSON summary), ``predict`` (one-line exponent prediction), ``sbc``
(hit-count series), ``escape`` (escape-time table), ``sweep`` (one run per
k, exponent-vs-k table).

Configs are flat ``key = value`` text; unknown keys are hard errors so a
typo in alpha/k/gamma cannot pass silently.  Every error names the line it
came from.  ``master_seed`` is mandatory: runs are reproducible by
contract, and each orbit's scalar seed (splitmix64 output of the master
seed at the orbit index) is recorded in its CSV rows for replay.  The
``BIRKHOFFLAB_WORKERS`` env var sets the worker-pool size only; results
are identical for any worker count.
"""

import argparse
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import _rng, accumulate, measure
from .accumulate import (
    DEFAULT_CHECKPOINT_RATIO,
    DEFAULT_DELTA,
    DEFAULT_ETA,
    RunResult,
    pointwise_exponent,
    run_orbit,
    trimmed_sum,
)
from .dynamics import SystemDescriptor, system_from_name
from .measure import ScheduleKind, build_schedule, predicted_exponent
from .observables import ObservableKind, ObservableSpec

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_OVERFLOW = 3

CSV_COLUMNS = [
    "run_id",
    "seed",
    "n",
    "S_n",
    "log_Sn_over_log_n",
    "M_n",
    "hits",
    "E_n",
    "sbc_ratio",
    "qsbc_residual",
    "trimmed_b8",
    "aaronson_ratio",
    "last_hit_index",
]


class ConfigError(Exception):
    """Invalid experiment configuration; message carries the source line."""


def _fmt(x: float) -> str:
    """Full 17-significant-digit decimal rendering (exact round-trip)."""
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_DEFAULTS = {
    "system": None,
    "alpha": 0.0,
    "p": None,
    "k": 1.0,
    "observable": "power",
    "schedule": "radius_power",
    "c": 0.25,
    "beta": 0.0,
    "gamma": 2.0,
    "n_max": None,
    "ensemble_size": 1,
    "master_seed": None,
    "checkpoint_ratio": DEFAULT_CHECKPOINT_RATIO,
    "delta": DEFAULT_DELTA,
    "eta": DEFAULT_ETA,
    "tolerance": 0.3,
    "csv": "runs.csv",
    "summary": "summary.json",
}

_REQUIRED = ("system", "p", "n_max", "master_seed")

_SYSTEM_NAMES = ("lsv", "doubling", "tent", "logistic", "catmap")


@dataclass
class ExperimentConfig:
    """Typed, validated experiment description plus its raw echo."""

    system: SystemDescriptor
    p: tuple
    observable: ObservableSpec
    schedule_kind: ScheduleKind
    c: float
    beta: float
    gamma: float
    n_max: int
    ensemble_size: int
    master_seed: int
    checkpoint_ratio: float
    delta: float
    eta: float
    tolerance: float
    csv_path: str
    summary_path: str
    echo: Dict[str, object] = field(default_factory=dict)
    point_warnings: List[str] = field(default_factory=list)


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, Tuple[str, int]]:
    """Flat key=value parser; returns {key: (raw value, line number)}."""
    entries: Dict[str, Tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("%s line %d: expected 'key = value'" % (source, lineno))
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _DEFAULTS:
            raise ConfigError("%s line %d: unknown key %r" % (source, lineno, key))
        if key in entries:
            raise ConfigError("%s line %d: duplicate key %r" % (source, lineno, key))
        if not value:
            raise ConfigError("%s line %d: empty value for %r" % (source, lineno, key))
        entries[key] = (value, lineno)
    return entries


def _convert(key, raw, where):
    try:
        if key in ("n_max", "ensemble_size", "master_seed"):
            return int(raw)
        if key in ("system", "observable", "schedule", "csv", "summary"):
            return str(raw)
        if key == "p":
            parts = [float(v) for v in str(raw).split(",")]
            return tuple(parts) if len(parts) > 1 else parts[0]
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError("%s: cannot parse %r as a value for %r" % (where, raw, key)) from None


def build_config(entries: Dict[str, Tuple[str, int]], source: str = "<config>") -> ExperimentConfig:
    """Validate every module precondition, naming the offending config line."""
    values = dict(_DEFAULTS)
    lines = {}
    for key, (raw, lineno) in entries.items():
        where = "%s line %s" % (source, lineno) if lineno else source
        values[key] = _convert(key, raw, where) if isinstance(raw, str) else raw
        lines[key] = where

    def where(key):
        return lines.get(key, source)

    for key in _REQUIRED:
        if values[key] is None:
            raise ConfigError("%s: missing required key %r" % (source, key))

    if values["system"] not in _SYSTEM_NAMES:
        raise ConfigError(
            "%s: system must be one of %s" % (where("system"), ", ".join(_SYSTEM_NAMES))
        )
    try:
        system = system_from_name(values["system"], float(values["alpha"]))
    except ValueError as exc:
        raise ConfigError("%s: %s" % (where("alpha"), exc)) from None

    try:
        p = system.validate_point(values["p"])
    except ValueError as exc:
        raise ConfigError("%s: %s" % (where("p"), exc)) from None

    if values["observable"] not in ("power", "log"):
        raise ConfigError("%s: observable must be 'power' or 'log'" % where("observable"))
    try:
        if values["observable"] == "power":
            obs = ObservableSpec.power(p, values["k"], system)
        else:
            obs = ObservableSpec.log(p, system)
    except ValueError as exc:
        raise ConfigError("%s: %s" % (where("k"), exc)) from None

    try:
        sched_kind = ScheduleKind(values["schedule"])
    except ValueError:
        raise ConfigError(
            "%s: schedule must be one of %s"
            % (where("schedule"), ", ".join(s.value for s in ScheduleKind))
        ) from None

    if values["n_max"] < 1_000:
        raise ConfigError("%s: n_max must be >= 1000" % where("n_max"))
    if values["ensemble_size"] < 1:
        raise ConfigError("%s: ensemble_size must be >= 1" % where("ensemble_size"))
    if not float(values["checkpoint_ratio"]) > 1.0:
        raise ConfigError("%s: checkpoint_ratio must exceed 1" % where("checkpoint_ratio"))
    if not 0.0 < float(values["delta"]) < 0.5:
        raise ConfigError("%s: delta must lie in (0, 0.5)" % where("delta"))
    if not float(values["eta"]) > 0.0:
        raise ConfigError("%s: eta must be positive" % where("eta"))

    # schedule parameter ranges (the model itself is built lazily at run time)
    kind_where = where("gamma") if sched_kind is ScheduleKind.KIM_NON_BC else where("c")
    try:
        _validate_schedule_params(sched_kind, system, p, values)
    except ValueError as exc:
        raise ConfigError("%s: %s" % (kind_where, exc)) from None

    echo = {k: values[k] for k in _DEFAULTS}
    echo["p"] = list(p) if len(p) > 1 else p[0]

    return ExperimentConfig(
        system=system,
        p=p,
        observable=obs,
        schedule_kind=sched_kind,
        c=float(values["c"]),
        beta=float(values["beta"]),
        gamma=float(values["gamma"]),
        n_max=int(values["n_max"]),
        ensemble_size=int(values["ensemble_size"]),
        master_seed=int(values["master_seed"]),
        checkpoint_ratio=float(values["checkpoint_ratio"]),
        delta=float(values["delta"]),
        eta=float(values["eta"]),
        tolerance=float(values["tolerance"]),
        csv_path=str(values["csv"]),
        summary_path=str(values["summary"]),
        echo=echo,
        point_warnings=system.point_warnings(p),
    )


def _validate_schedule_params(kind, system, p, values):
    if kind is ScheduleKind.RADIUS_POWER and not values["c"] > 0:
        raise ValueError("radius_power schedules need c > 0")
    if kind is ScheduleKind.MEASURE_HARMONIC:
        if not values["c"] > 0:
            raise ValueError("measure_harmonic schedules need c > 0")
        if values["beta"] < 0:
            raise ValueError("measure_harmonic schedules need beta >= 0")
    if kind is ScheduleKind.KIM_NON_BC:
        from .dynamics import SystemId

        if system.id is not SystemId.LSV or p[0] != 0.0:
            raise ValueError("the kim schedule targets the LSV origin (p=0)")
        limit = 1.0 / (1.0 - system.alpha)
        if not 1.0 < values["gamma"] <= limit:
            raise ValueError("kim schedules need 1 < gamma <= 1/(1-alpha) = %g" % limit)


def load_config(path: Optional[str], overrides: Dict[str, str]) -> ExperimentConfig:
    entries: Dict[str, Tuple[str, int]] = {}
    if path:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                entries = parse_config_text(fh.read(), source=path)
        except OSError as exc:
            raise ConfigError("cannot read config %s: %s" % (path, exc)) from None
    for key, raw in overrides.items():
        if raw is None:
            continue
        if key not in _DEFAULTS:
            raise ConfigError("unknown option %r" % key)
        entries[key] = (str(raw), 0)
    source = path or "<flags>"
    return build_config(entries, source=source)


# ---------------------------------------------------------------------------
# ensemble execution and output
# ---------------------------------------------------------------------------

def worker_count() -> int:
    raw = os.environ.get("BIRKHOFFLAB_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_ensemble(cfg: ExperimentConfig) -> List[RunResult]:
    """Run every orbit of the ensemble; results ordered by orbit index."""
    # build the measure model once, single-threaded, before any pool spins up
    schedule = build_schedule(
        cfg.schedule_kind, cfg.system, cfg.p, cfg.n_max,
        c=cfg.c, beta=cfg.beta, gamma=cfg.gamma,
    )
    seeds = [_rng.orbit_seed(cfg.master_seed, i) for i in range(cfg.ensemble_size)]

    def one(i):
        return run_orbit(
            cfg.system, cfg.observable, schedule, cfg.n_max, seeds[i],
            checkpoint_ratio=cfg.checkpoint_ratio, delta=cfg.delta, eta=cfg.eta,
        )

    workers = worker_count()
    if workers == 1 or cfg.ensemble_size == 1:
        return [one(i) for i in range(cfg.ensemble_size)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(cfg.ensemble_size)))


def csv_rows(run_id: int, result: RunResult):
    """Checkpoint rows for one completed orbit, in CSV column order."""
    rows = []
    for i, rec in enumerate(result.checkpoints):
        sbc = result.sbc_ratio_series[i]
        qsbc = result.qsbc_residual_series[i]
        rows.append(
            [
                str(run_id),
                str(result.seed),
                str(rec.n),
                _fmt(rec.S_n),
                _fmt(pointwise_exponent(rec)),
                _fmt(rec.M_n),
                str(rec.hits),
                _fmt(rec.E_n),
                _fmt(sbc),
                _fmt(qsbc),
                _fmt(trimmed_sum(rec, 8)),
                _fmt(rec.aaronson_ratio),
                str(rec.last_hit_index),
            ]
        )
    return rows


def write_csv(path: str, results: List[RunResult]) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for run_id, result in enumerate(results):
        if result.status != "ok":
            continue
        for row in csv_rows(run_id, result):
            lines.append(",".join(row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


def _quantiles(values: np.ndarray) -> Dict[str, float]:
    if values.size == 0 or np.all(np.isnan(values)):
        return {q: math.nan for q in ("q10", "q25", "q50", "q75", "q90")}
    qs = np.nanpercentile(values, [10, 25, 50, 75, 90])
    return {"q10": qs[0], "q25": qs[1], "q50": qs[2], "q75": qs[3], "q90": qs[4]}


def build_summary(cfg: ExperimentConfig, results: List[RunResult]) -> dict:
    """Ensemble summary over completed orbits; failures listed, never dropped."""
    completed = [r for r in results if r.status == "ok"]
    failed = [
        {
            "run_id": i,
            "seed": r.seed,
            "status": r.status,
            "steps_completed": r.steps_completed,
        }
        for i, r in enumerate(results)
        if r.status != "ok"
    ]

    prediction = None
    notes = list(cfg.point_warnings)
    if cfg.observable.kind is ObservableKind.POWER_DISTANCE:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            pred = predicted_exponent(cfg.system, cfg.p, cfg.observable.k)
        notes.extend(str(w.message) for w in caught)
        prediction = {
            "exponent": pred.exponent,
            "regime": pred.regime_label.value,
            "k": pred.k,
            "D": pred.D,
            "alpha": pred.alpha,
            "integrable": pred.integrable,
        }

    summary = {
        "config": dict(cfg.echo),
        "calibration_seed": measure.CALIBRATION_SEED,
        "prediction": prediction,
        "warnings": notes,
        "orbits": {
            "requested": cfg.ensemble_size,
            "completed": len(completed),
            "failed": failed,
        },
    }

    if completed:
        ckpt_ns = [rec.n for rec in completed[0].checkpoints]
        pw = np.array(
            [[pointwise_exponent(rec) for rec in r.checkpoints] for r in completed]
        )
        summary["checkpoints"] = ckpt_ns
        with warnings.catch_warnings():
            # the n=1 checkpoint has no pointwise exponent for any orbit
            warnings.simplefilter("ignore", RuntimeWarning)
            summary["pointwise_median"] = np.nanmedian(pw, axis=0).tolist()
            summary["pointwise_iqr"] = [
                np.nanpercentile(pw, 25, axis=0).tolist(),
                np.nanpercentile(pw, 75, axis=0).tolist(),
            ]
        slopes = np.array([r.exponent_estimate for r in completed])
        finals = np.array([r.exponent_pointwise for r in completed])
        summary["median_trailing_slope"] = float(np.median(slopes))
        summary["median_final_pointwise"] = float(np.median(finals))
        # trailing-decade slope of the per-checkpoint ensemble-median of
        # log S_n: far less skewed than per-orbit slopes for sums dominated
        # by a few record terms
        log_s = np.log(
            np.array([[rec.S_n for rec in r.checkpoints] for r in completed])
        )
        med_curve = np.median(log_s, axis=0)
        ns = np.asarray(ckpt_ns, dtype=np.float64)
        window = ns * 10.0 >= ns[-1]
        if window.sum() >= 4:
            lx = np.log(ns[window])
            ly = med_curve[window]
            lx_c = lx - lx.mean()
            summary["trailing_slope_of_median"] = float(
                np.dot(lx_c, ly - ly.mean()) / np.dot(lx_c, lx_c)
            )
        else:
            summary["trailing_slope_of_median"] = summary["median_final_pointwise"]
        summary["sbc_ratio_quantiles"] = _quantiles(
            np.array([r.sbc_ratio_series[-1] for r in completed])
        )
        summary["qsbc_residual_quantiles"] = _quantiles(
            np.array([r.qsbc_residual_series[-1] for r in completed])
        )
        summary["occupation_fraction_median"] = float(
            np.nanmedian(np.array([r.occupation_fraction for r in completed]))
        )
        summary["tolerance"] = cfg.tolerance
        if prediction is not None and not prediction["integrable"]:
            summary["passed"] = bool(
                abs(summary["trailing_slope_of_median"] - prediction["exponent"])
                <= cfg.tolerance
            )
        else:
            summary["passed"] = None
    return summary


def write_summary(path: str, summary: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_json_safe(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")


def execute_run(cfg: ExperimentConfig) -> int:
    results = run_ensemble(cfg)
    write_csv(cfg.csv_path, results)
    summary = build_summary(cfg, results)
    write_summary(cfg.summary_path, summary)
    failed = sum(1 for r in results if r.status != "ok")
    if failed * 10 > cfg.ensemble_size:
        print(
            "warning: %d/%d orbits aborted" % (failed, cfg.ensemble_size),
            file=sys.stderr,
        )
        return EXIT_OVERFLOW
    return EXIT_OK


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

_OVERRIDE_KEYS = [k for k in _DEFAULTS if k not in ()]


def _add_config_arguments(sub):
    sub.add_argument("--config", help="flat key=value config file")
    for key in _OVERRIDE_KEYS:
        sub.add_argument("--%s" % key.replace("_", "-"), dest="cfg_%s" % key)


def _collect_overrides(args) -> Dict[str, str]:
    return {
        key: getattr(args, "cfg_%s" % key)
        for key in _OVERRIDE_KEYS
        if getattr(args, "cfg_%s" % key, None) is not None
    }


def cmd_run(args) -> int:
    cfg = load_config(args.config, _collect_overrides(args))
    return execute_run(cfg)


def cmd_predict(args) -> int:
    try:
        system = system_from_name(args.system, args.alpha)
        p = system.validate_point(
            tuple(float(v) for v in args.p.split(",")) if "," in args.p else float(args.p)
        )
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            pred = predicted_exponent(system, p, args.k)
        for w in caught:
            print("warning: %s" % w.message, file=sys.stderr)
        for note in system.point_warnings(p):
            print("warning: %s" % note, file=sys.stderr)
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    label = pred.regime_label.value + (", integrable" if pred.integrable else "")
    print("exponent %g (%s)" % (pred.exponent, label))
    return EXIT_OK


def cmd_sbc(args) -> int:
    cfg = load_config(args.config, _collect_overrides(args))
    results = run_ensemble(cfg)
    lines = ["run_id,seed,n,hits,E_n,sbc_ratio"]
    for run_id, r in enumerate(results):
        if r.status != "ok":
            continue
        for i, rec in enumerate(r.checkpoints):
            lines.append(
                "%d,%d,%d,%d,%s,%s"
                % (
                    run_id,
                    r.seed,
                    rec.n,
                    rec.hits,
                    _fmt(rec.E_n),
                    _fmt(r.sbc_ratio_series[i]),
                )
            )
    with open(cfg.csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    finals = [
        r.sbc_ratio_series[-1]
        for r in results
        if r.status == "ok" and r.sbc_ratio_series.size
    ]
    inside = sum(1 for v in finals if 0.85 <= v <= 1.15)
    print(
        "sbc: %d orbits, %d/%d final hit/E_n ratios within [0.85, 1.15]"
        % (len(results), inside, len(finals))
    )
    failed = sum(1 for r in results if r.status != "ok")
    return EXIT_OVERFLOW if failed * 10 > cfg.ensemble_size else EXIT_OK


def _fit_loglog(xs, ys) -> float:
    lx = [math.log(v) for v in xs]
    ly = [math.log(max(v, 1)) for v in ys]
    xbar = sum(lx) / len(lx)
    ybar = sum(ly) / len(ly)
    sxx = sum((v - xbar) ** 2 for v in lx)
    sxy = sum((a - xbar) * (b - ybar) for a, b in zip(lx, ly))
    return sxy / sxx


def cmd_escape(args) -> int:
    try:
        gammas = [float(v) for v in args.gammas.split(",")]
        ms = [int(v) for v in args.ms.split(",")]
    except ValueError:
        print("error: --gammas and --ms take comma-separated numbers", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rows = []
        for gamma in gammas:
            for m in ms:
                rows.append((m, gamma, accumulate.escape_time(args.alpha, m, gamma, args.eps0)))
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    print("m,gamma,escape_time")
    for m, gamma, steps in rows:
        print("%d,%s,%d" % (m, _fmt(gamma), steps))
    for gamma in gammas:
        pts = [(m, steps) for m, g, steps in rows if g == gamma]
        if len(pts) >= 2:
            slope = _fit_loglog([p[0] for p in pts], [p[1] for p in pts])
            print("fitted_slope,gamma=%s,%s" % (_fmt(gamma), _fmt(slope)))
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        ks = [float(v) for v in args.ks.split(",")]
    except ValueError:
        print("error: --ks takes comma-separated numbers", file=sys.stderr)
        return EXIT_CONFIG
    overrides = _collect_overrides(args)
    worst = EXIT_OK
    print("k,predicted_exponent,median_trailing_slope,median_final_pointwise")
    for k in ks:
        per_k = dict(overrides)
        per_k["k"] = repr(k)
        cfg = load_config(args.config, per_k)
        stem = "k%s" % ("%g" % k).replace(".", "_")
        cfg.csv_path = _suffixed(cfg.csv_path, stem)
        cfg.summary_path = _suffixed(cfg.summary_path, stem)
        code = execute_run(cfg)
        worst = max(worst, code)
        with open(cfg.summary_path, "r", encoding="utf-8") as fh:
            summary = json.load(fh)
        print(
            "%s,%s,%s,%s"
            % (
                _fmt(k),
                _fmt((summary.get("prediction") or {}).get("exponent", math.nan) or math.nan),
                _fmt(summary.get("median_trailing_slope", math.nan)),
                _fmt(summary.get("median_final_pointwise", math.nan)),
            )
        )
    return worst


def _suffixed(path: str, stem: str) -> str:
    root, ext = os.path.splitext(path)
    return "%s_%s%s" % (root, stem, ext)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="birkhofflab",
        description="Birkhoff-sum growth and shrinking-target experiments on chaotic maps",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    run_p = subs.add_parser("run", help="run an orbit ensemble from a config")
    _add_config_arguments(run_p)
    run_p.set_defaults(func=cmd_run)

    pred_p = subs.add_parser("predict", help="print the predicted growth exponent")
    pred_p.add_argument("system", choices=_SYSTEM_NAMES)
    pred_p.add_argument("--alpha", type=float, default=0.0)
    pred_p.add_argument("--p", required=True)
    pred_p.add_argument("--k", type=float, required=True)
    pred_p.set_defaults(func=cmd_predict)

    sbc_p = subs.add_parser("sbc", help="emit hit-count series per orbit")
    _add_config_arguments(sbc_p)
    sbc_p.set_defaults(func=cmd_sbc)

    esc_p = subs.add_parser("escape", help="escape-time scaling table")
    esc_p.add_argument("--alpha", type=float, required=True)
    esc_p.add_argument("--gammas", required=True)
    esc_p.add_argument("--ms", required=True)
    esc_p.add_argument("--eps0", type=float, default=0.25)
    esc_p.set_defaults(func=cmd_escape)

    sweep_p = subs.add_parser("sweep", help="run once per k and tabulate exponents")
    _add_config_arguments(sweep_p)
    sweep_p.add_argument("--ks", required=True)
    sweep_p.set_defaults(func=cmd_sweep)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
