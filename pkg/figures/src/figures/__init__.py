"""Convergence figures for growth-exponent runs.

Reads the per-orbit checkpoint CSV and JSON summary written by
``birkhofflab run`` and draws empirical log S_n / log n against n
(log-scaled) with the predicted limit as a dotted horizontal line.  The
prediction is always taken from the machine-readable summary, never
re-entered by hand, so figure and theory cannot drift apart.

    figures --summary runs.json --csv runs.csv --out figures/

Rendering is pure: the same inputs produce byte-identical images
(fixed dpi and fonts, no timestamps or randomness).
"""

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import List, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__version__ = "0.1.0"

REQUIRED_COLUMNS = ("run_id", "n", "log_Sn_over_log_n")

DPI = 120
FIGSIZE = (7.0, 4.5)


class FigureError(Exception):
    """Unusable inputs: missing columns, empty CSV, absent prediction."""


@dataclass
class FigureSpec:
    """One figure: which CSVs, which summary, where the image goes."""

    csv_paths: List[str]
    summary_path: str
    out_path: str
    mode: str = "median"  # "median" or "orbits"
    log_x: bool = True


def load_summary(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def predicted_exponent(summary: dict) -> float:
    pred = summary.get("prediction")
    if not pred or pred.get("exponent") is None:
        raise FigureError("summary carries no predicted exponent")
    return float(pred["exponent"])


def load_series(csv_path: str):
    """Per-orbit (n, log S_n/log n) series keyed by run_id."""
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise FigureError("%s: empty CSV" % csv_path)
        missing = [c for c in REQUIRED_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise FigureError("%s: missing columns %s" % (csv_path, ", ".join(missing)))
        series = {}
        for row in reader:
            rid = int(row["run_id"])
            n = int(row["n"])
            v = float(row["log_Sn_over_log_n"])
            series.setdefault(rid, []).append((n, v))
    if not series:
        raise FigureError("%s: no data rows" % csv_path)
    out = {}
    for rid, pts in series.items():
        pts.sort()
        ns = np.array([p[0] for p in pts], dtype=float)
        vs = np.array([p[1] for p in pts], dtype=float)
        keep = ~np.isnan(vs)
        out[rid] = (ns[keep], vs[keep])
    return out


def _title(summary: dict) -> str:
    cfg = summary.get("config", {})
    p = cfg.get("p")
    p_txt = ",".join("%g" % v for v in p) if isinstance(p, list) else "%g" % p
    return "%s  p=%s  k=%g" % (cfg.get("system", "?"), p_txt, cfg.get("k", float("nan")))


def build_figure(spec: FigureSpec):
    """Assemble the matplotlib figure; separated from I/O for testability."""
    summary = load_summary(spec.summary_path)
    exponent = predicted_exponent(summary)

    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    for csv_path in spec.csv_paths:
        series = load_series(csv_path)
        if spec.mode == "orbits":
            for rid in sorted(series):
                ns, vs = series[rid]
                ax.plot(ns, vs, color="C0", alpha=0.25, linewidth=0.8)
        else:
            ns_ref = None
            stack = []
            for rid in sorted(series):
                ns, vs = series[rid]
                if ns_ref is None:
                    ns_ref = ns
                if ns.shape == ns_ref.shape and np.array_equal(ns, ns_ref):
                    stack.append(vs)
            med = np.median(np.vstack(stack), axis=0)
            ax.plot(ns_ref, med, color="C0", linewidth=1.6,
                    label="ensemble median (%d orbits)" % len(stack))

    ax.axhline(exponent, color="k", linestyle=":", linewidth=1.4,
               label="predicted limit %g" % exponent)
    if spec.log_x:
        ax.set_xscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("log S$_n$ / log n")
    ax.set_title(_title(summary))
    ax.legend(loc="lower right", fontsize=9)
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> str:
    """Write the image; byte-identical for identical inputs."""
    fig = build_figure(spec)
    out_dir = os.path.dirname(spec.out_path)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    # strip the Software tag so the PNG bytes depend only on the inputs
    fig.savefig(spec.out_path, dpi=DPI, metadata={"Software": None})
    plt.close(fig)
    return spec.out_path


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="figures", description="growth-exponent convergence figures"
    )
    parser.add_argument("--summary", required=True, help="run summary JSON")
    parser.add_argument("--csv", required=True, nargs="+", help="run CSV path(s)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--mode", choices=("median", "orbits"), default="median")
    parser.add_argument("--name", default=None, help="image file name")
    args = parser.parse_args(argv)

    name = args.name
    if name is None:
        stem = os.path.splitext(os.path.basename(args.csv[0]))[0]
        name = stem + ".png"
    spec = FigureSpec(
        csv_paths=list(args.csv),
        summary_path=args.summary,
        out_path=os.path.join(args.out, name),
        mode=args.mode,
    )
    try:
        path = render(spec)
    except (FigureError, OSError, json.JSONDecodeError) as exc:
        print("figures: %s" % exc, file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
