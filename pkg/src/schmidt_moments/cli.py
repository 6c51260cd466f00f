"""Command-line experiment runner.

Every subcommand writes one CSV table, a JSON manifest and (where it makes
sense) an SVG plot into ``--out-dir``. Options can come from a JSON file
given with ``--config``; explicit flags override the file.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import platform
import sys
import time
from dataclasses import asdict, fields, is_dataclass
from pathlib import Path
from typing import Any, Callable, Optional

import mpmath
import numpy as np
import scipy

from . import __version__
from . import experiments as ex
from . import svg
from .ensembles import KINDS, EnsembleSpec, isotropic_state

EXPERIMENTS = ("certify", "ratio", "triangle", "isotropic", "negativity", "shadow-bench", "threshold")
# kinds named in config files, mapped onto subcommands
EXPERIMENT_ALIASES = {
    "certify": "certify",
    "detection-ratio": "ratio",
    "triangle-scan": "triangle",
    "isotropic-check": "isotropic",
    "negativity-curve": "negativity",
    "shadow-benchmark": "shadow-bench",
    "threshold-compare": "threshold",
}
DEFAULT_SAMPLES = 5000


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration


def _int_list(text: str) -> list[int]:
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _float_list(text: str) -> list[float]:
    return [float(p) for p in str(text).split(",") if p.strip()]


DEFAULTS: dict[str, dict[str, Any]] = {
    "certify": {"schmidt": "0.8,0.0666666666667,0.0666666666667,0.0666666666667", "d_A": 4, "d_B": 4, "n_max": 16, "r_max": None},
    "ratio": {
        "ensemble": {"kind": "fixed-sn-pure", "d_A": 8, "d_B": 8, "r": 6},
        "criteria": ["reduction", "moment:3", "moment:5", "moment:7", "moment:9"],
        "ks": [1, 2, 3, 4, 5],
        "samples": DEFAULT_SAMPLES,
        "full_scale": False,
    },
    "triangle": {"grid": 60, "orders": [3, 4, 5, 6, 7], "k": 2, "high_precision": False},
    "isotropic": {"dims": list(range(2, 9)), "points": 21},
    "negativity": {"r": 4, "d_A": 4, "d_B": 4, "ks": [1, 2, 3], "points": 101},
    "shadow-bench": {"d": 4, "F": 0.9, "M": 2000, "L": 1000, "samples": 200, "k": 1, "triple_budget": None},
    "threshold": {"cases": [[2, 2, 2], [3, 4, 4], [4, 4, 4], [4, 8, 8]]},
}
COMMON = {"seed": 0, "out_dir": "results", "threads": 1, "slack": 0.0}


def _expect(cond: bool, path: str, msg: str, value: Any) -> None:
    if not cond:
        raise ConfigError(f"{path}: {msg}, got {value!r}")


def _check_int(cfg: dict, key: str, lo: int = 1, path: str = "config") -> None:
    v = cfg.get(key)
    if v is None:
        return
    _expect(isinstance(v, int) and not isinstance(v, bool) and v >= lo, f"{path}.{key}", f"expected integer >= {lo}", v)


def validate(cmd: str, cfg: dict) -> dict:
    """Check field types and ranges; errors name the offending field path."""
    for key in ("seed",):
        _check_int(cfg, key, 0)
    for key in ("threads", "samples", "grid", "n_max", "r_max", "M", "L", "points", "d", "d_A", "d_B", "r", "k"):
        _check_int(cfg, key, 1)
    _expect(isinstance(cfg["slack"], (int, float)) and cfg["slack"] >= 0, "config.slack", "expected nonnegative number", cfg["slack"])
    if cmd == "ratio":
        ens = cfg["ensemble"]
        _expect(isinstance(ens, dict), "config.ensemble", "expected an object", ens)
        _expect(ens.get("kind") in KINDS, "config.ensemble.kind", f"expected one of {list(KINDS)}", ens.get("kind"))
        for key in ("d_A", "d_B", "r", "K"):
            _check_int(ens, key, 1, "config.ensemble")
        for key in ("eps", "F"):
            v = ens.get(key)
            if v is not None:
                _expect(isinstance(v, (int, float)) and 0 <= v <= 1, f"config.ensemble.{key}", "expected number in [0, 1]", v)
        try:
            EnsembleSpec.from_dict(ens)
        except (TypeError, ValueError) as err:
            raise ConfigError(f"config.ensemble: {err}") from None
        _expect(isinstance(cfg["criteria"], list) and cfg["criteria"], "config.criteria", "expected a nonempty list", cfg["criteria"])
        for i, c in enumerate(cfg["criteria"]):
            try:
                ex.parse_criterion(c)
            except ValueError as err:
                raise ConfigError(f"config.criteria[{i}]: {err}") from None
        for i, k in enumerate(cfg["ks"]):
            _expect(isinstance(k, int) and k >= 1, f"config.ks[{i}]", "expected integer >= 1", k)
    if cmd == "shadow-bench":
        _expect(0 <= cfg["F"] <= 1, "config.F", "expected number in [0, 1]", cfg["F"])
    if cmd == "triangle":
        for i, N in enumerate(cfg["orders"]):
            _expect(isinstance(N, int) and N >= 3, f"config.orders[{i}]", "expected integer >= 3", N)
    return cfg


def resolve(cmd: str, args: argparse.Namespace) -> dict:
    cfg: dict[str, Any] = {**COMMON, **DEFAULTS[cmd]}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"config: cannot read {args.config}: {err}") from None
        _expect(isinstance(data, dict), "config", "expected a JSON object", type(data).__name__)
        kind = data.pop("experiment", None)
        if kind is not None:
            _expect(EXPERIMENT_ALIASES.get(kind, kind) == cmd, "config.experiment", f"does not match subcommand {cmd!r}", kind)
        unknown = set(data) - set(cfg)
        _expect(not unknown, "config", f"unknown fields {sorted(unknown)}", sorted(unknown))
        cfg.update(data)
    for key, value in vars(args).items():
        if key in ("cmd", "config", "func") or value is None:
            continue
        cfg[key] = value
    if cmd == "ratio":
        ens = dict(cfg["ensemble"])
        for key in ("kind", "d_A", "d_B", "r", "eps", "K", "F"):
            v = cfg.pop(f"ens_{key}", None)
            if v is not None:
                ens[key] = v
        if cfg.get("full_scale"):
            ens["d_A"] = ens["d_B"] = 16
        cfg["ensemble"] = ens
    return validate(cmd, cfg)


# ---------------------------------------------------------------------------
# output


def fmt(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else f"{float(v):.12g}"
    if v is None:
        return ""
    return str(v)


def write_csv(path: Path, rows: list, header: Optional[list[str]] = None) -> None:
    if rows and is_dataclass(rows[0]):
        header = header or [f.name for f in fields(rows[0])]
        rows = [[getattr(r, h) for h in header] for r in rows]
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def write_manifest(out: Path, cmd: str, cfg: dict, outputs: list[str], wall: float, summary: dict) -> None:
    manifest = {
        "experiment": cmd,
        "config": cfg,
        "seed": cfg.get("seed"),
        "outputs": outputs,
        "summary": summary,
        "wall_time_s": round(wall, 3),
        "versions": {
            "schmidt_moments": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "mpmath": mpmath.__version__,
        },
    }
    (out / f"{cmd}_manifest.json").write_text(json.dumps(manifest, indent=2, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    raise TypeError(type(o).__name__)


# ---------------------------------------------------------------------------
# subcommands; each returns (csv rows, header or None, svg text or None, summary)


def run_certify(cfg: dict):
    coeffs = _float_list(cfg["schmidt"]) if isinstance(cfg["schmidt"], str) else list(cfg["schmidt"])
    rho = ex.schmidt_state(coeffs, cfg["d_A"], cfg["d_B"])
    best, rows = ex.certify_state(rho, cfg["n_max"], cfg["r_max"])
    return rows, None, None, {"best_lower_bound": best}


def run_ratio(cfg: dict):
    spec = EnsembleSpec.from_dict(cfg["ensemble"])
    rows = ex.detection_ratio(spec, cfg["criteria"], cfg["ks"], cfg["samples"], cfg["seed"], cfg["threads"], cfg["slack"])
    series = {}
    for c in cfg["criteria"]:
        pts = [(r.k, r.ratio) for r in rows if r.criterion == c]
        series[c] = ([p[0] for p in pts], [p[1] for p in pts])
    plot = svg.line_chart(series, f"Detection ratio ({spec.kind})", "k", "ratio")
    fp = sum(r.false_positives for r in rows)
    return rows, None, plot, {"false_positives": fp}


def run_triangle(cfg: dict):
    cells = ex.triangle_scan(cfg["grid"], cfg["orders"], cfg["k"], cfg["high_precision"])
    fr = ex.triangle_fractions(cells)
    top = max(cfg["orders"])
    plot = svg.scatter_map([(c.x1, c.x2, c.detected) for c in cells if c.N == top], f"B_{top} detection, k={cfg['k']}", "x1", "x2")
    return cells, None, plot, {"fractions": {str(k): v for k, v in fr.items()}}


def run_isotropic(cfg: dict):
    F = np.linspace(0.0, 1.0, cfg["points"])
    rows = ex.isotropic_check(cfg["dims"], F)
    max_err = max(
        max(abs(r.norm1 - r.norm1_closed), abs(r.norm2sq - r.norm2sq_closed), abs(r.norm4quad - r.norm4quad_closed)) for r in rows
    )
    mismatches = sum(r.third_order_detected != (r.k <= r.schmidt_number - 1) for r in rows)
    return rows, None, None, {"max_closed_form_error": max_err, "third_order_mismatches": mismatches}


def run_negativity(cfg: dict):
    eps = np.linspace(0.0, 1.0, cfg["points"])
    pts = ex.negativity_curve(cfg["r"], cfg["d_A"], cfg["d_B"], cfg["ks"], eps)
    series = {}
    for k in cfg["ks"]:
        sel = [p for p in pts if p.k == k]
        series[f"k={k}"] = ([p.eps for p in sel], [p.dense for p in sel])
    plot = svg.line_chart(series, "Reduction negativity under depolarizing noise", "eps", "negativity")
    err = max(abs(p.dense - p.closed_form) for p in pts)
    return pts, None, plot, {"max_closed_form_error": err}


def run_shadow(cfg: dict):
    rho = isotropic_state(cfg["d"], cfg["F"])
    reps, summ, extra = ex.shadow_benchmark(
        rho, cfg["M"], cfg["L"], cfg["samples"], cfg["seed"], cfg["k"], cfg["slack"], cfg["threads"], cfg["triple_budget"]
    )
    header = ["rep"] + [f"{n}_hat" for n in ex.SHADOW_FIELDS] + [f"{n}_se" for n in ex.SHADOW_FIELDS] + ["third_order_detected"]
    rows = [[r.rep, *r.values, *r.std_errors, r.third_order_detected] for r in reps]
    summary = {s.name: {k: v for k, v in asdict(s).items() if k != "name"} for s in summ}
    summary.update(extra)
    summary["third_order_detection_rate"] = sum(r.third_order_detected for r in reps) / len(reps)
    return rows, header, None, summary


def run_threshold(cfg: dict):
    rows = ex.threshold_compare([tuple(c) for c in cfg["cases"]])
    return rows, None, None, {"max_abs_diff": max(abs(r.root - r.closed_form) for r in rows)}


RUNNERS: dict[str, Callable] = {
    "certify": run_certify,
    "ratio": run_ratio,
    "triangle": run_triangle,
    "isotropic": run_isotropic,
    "negativity": run_negativity,
    "shadow-bench": run_shadow,
    "threshold": run_threshold,
}


def run(cmd: str, cfg: dict) -> dict:
    """Run one experiment and write its artifacts; returns the summary."""
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    rows, header, plot, summary = RUNNERS[cmd](cfg)
    wall = time.perf_counter() - t0
    stem = cmd.replace("-", "_")
    outputs = [f"{stem}.csv"]
    write_csv(out / f"{stem}.csv", rows, header)
    if plot:
        (out / f"{stem}.svg").write_text(plot)
        outputs.append(f"{stem}.svg")
    write_manifest(out, stem, cfg, outputs, wall, summary)
    return summary


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="schmidt-moments", description="Schmidt-number certification experiments")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file with experiment fields")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--samples", type=int, help="Monte-Carlo samples (repetitions for shadow-bench)")
        sp.add_argument("--out-dir", dest="out_dir")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--slack", type=float, help="extra PSD allowance for estimated moments")
        return sp

    sp = common(sub.add_parser("certify", help="best certified Schmidt-number bound of a Schmidt-diagonal state"))
    sp.add_argument("--schmidt", help="comma-separated Schmidt coefficients (normalized automatically)")
    sp.add_argument("--d-A", dest="d_A", type=int)
    sp.add_argument("--d-B", dest="d_B", type=int)
    sp.add_argument("--n-max", dest="n_max", type=int)
    sp.add_argument("--r-max", dest="r_max", type=int)

    sp = common(sub.add_parser("ratio", help="detection ratios over a random ensemble"))
    sp.add_argument("--kind", dest="ens_kind", choices=KINDS)
    sp.add_argument("--d-A", dest="ens_d_A", type=int)
    sp.add_argument("--d-B", dest="ens_d_B", type=int)
    sp.add_argument("--r", dest="ens_r", type=int)
    sp.add_argument("--eps", dest="ens_eps", type=float)
    sp.add_argument("--K", dest="ens_K", type=int)
    sp.add_argument("--F", dest="ens_F", type=float)
    sp.add_argument("--criteria", type=lambda s: [c.strip() for c in s.split(",") if c.strip()])
    sp.add_argument("--ks", type=_int_list, help="map indices, e.g. 1..5")
    sp.add_argument("--full-scale", dest="full_scale", action="store_true", default=None, help="use d_A = d_B = 16")

    sp = common(sub.add_parser("triangle", help="two-qutrit detectable-region scan"))
    sp.add_argument("--grid", type=int)
    sp.add_argument("--orders", type=_int_list)
    sp.add_argument("--k", type=int)
    sp.add_argument("--high-precision", dest="high_precision", action="store_true", default=None)

    sp = common(sub.add_parser("isotropic", help="isotropic-state closed forms and third-order verdicts"))
    sp.add_argument("--dims", type=_int_list)
    sp.add_argument("--points", type=int)

    sp = common(sub.add_parser("negativity", help="negativity of depolarized maximally entangled states"))
    sp.add_argument("--r", type=int)
    sp.add_argument("--d-A", dest="d_A", type=int)
    sp.add_argument("--d-B", dest="d_B", type=int)
    sp.add_argument("--ks", type=_int_list)
    sp.add_argument("--points", type=int)

    sp = common(sub.add_parser("shadow-bench", help="classical-shadow estimator statistics"))
    sp.add_argument("--d", type=int)
    sp.add_argument("--F", type=float)
    sp.add_argument("--M", type=int)
    sp.add_argument("--L", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--triple-budget", dest="triple_budget", type=int)

    sp = common(sub.add_parser("threshold", help="numeric noise threshold vs closed form"))
    sp.add_argument("--cases", type=lambda s: [_int_list(c) for c in s.split(";")], help="r,d_A,d_B;...")
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args.cmd, args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    summary = run(args.cmd, cfg)
    print(json.dumps(summary, indent=2, default=_json_default))
    return 0


if __name__ == "__main__":
    sys.exit(main())
