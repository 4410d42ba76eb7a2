"""Command-line front end: ``dopedclifford {predict,simulate,validate,threshold}``.

Every output starts with the full run configuration (including seed and
library version), so ``--config <previous output>`` reproduces a run.
Exit status: 0 success, 1 validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import time
from fractions import Fraction

from . import __version__
from . import closed_forms as cf

CSV_COLUMNS = ("probe", "d", "dA", "k", "theta", "state", "value", "value_float",
               "mc_mean", "mc_stderr", "z", "samples", "seed")
CONFIG_PREFIX = "# config: "

PREDICT_PROBES = ("otoc8", "otoc8-trace", "purity-mean", "purity-fluct", "purity-second-moment")
SIMULATE_PROBES = ("otoc8", "otoc8-trace", "purity-fluct")
THRESHOLD_PROBES = ("otoc8", "otoc8-trace", "purity")
OTOC_MAX_N = 6
PURITY_MAX_N = 14


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- parsing

_THETA = re.compile(r"^\s*(?:(?P<num>[0-9.]+)\s*\*?\s*)?pi\s*(?:/\s*(?P<den>[0-9.]+))?\s*$")


def parse_theta(text) -> float:
    """A float or an expression ``[a*]pi[/b]``."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _THETA.match(str(text))
    if m:
        num = float(m.group("num") or 1)
        den = float(m.group("den") or 1)
        return num * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"cannot parse theta {text!r}") from None


def parse_k_values(text) -> list:
    """``"0..8"``, ``"0,1,2,4"``, ``"inf"`` or a mix like ``"0..3,inf"``."""
    if isinstance(text, list):
        return text
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if part in ("inf", "oo", "haar"):
            out.append(math.inf)
        elif ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out or any(k != math.inf and k < 0 for k in out):
        raise UsageError(f"invalid k specification {text!r}")
    return out


def parse_n_values(text) -> list[int]:
    vals = [k for k in parse_k_values(text) if k != math.inf]
    if not vals:
        raise UsageError(f"invalid N specification {text!r}")
    return vals


def parse_state(text, trq=None):
    if trq is not None:
        return Fraction(trq)
    if text in ("zero", "stabilizer", "random-product"):
        return "zero" if text == "stabilizer" else text
    raise UsageError(f"unknown state {text!r}")


# ------------------------------------------------------------- serialising

def _k_text(k):
    return "inf" if k == math.inf else str(k)


def _exact_text(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return repr(float(v))


def _exact_json(v):
    if isinstance(v, Fraction):
        return {"num": str(v.numerator), "den": str(v.denominator)}
    return float(v)


def write_output(config: dict, rows: list[dict], fmt: str, stream, extra: dict | None = None):
    if fmt == "json":
        doc = {"config": config, "version": __version__, "rows": [], **(extra or {})}
        for r in rows:
            doc["rows"].append({c: (_exact_json(r[c]) if c == "value" and r.get(c) is not None
                                    else (_k_text(r[c]) if c == "k" and r.get(c) is not None else r.get(c)))
                                for c in r})
        json.dump(doc, stream, indent=2, sort_keys=False, default=str)
        stream.write("\n")
        return
    stream.write(CONFIG_PREFIX + json.dumps(config, sort_keys=True) + "\n")
    columns = CSV_COLUMNS if not rows or set(rows[0]) <= set(CSV_COLUMNS) else list(rows[0])
    writer = csv.DictWriter(stream, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for r in rows:
        out = {}
        for c in columns:
            v = r.get(c)
            if v is None:
                out[c] = ""
            elif c == "value":
                out[c] = _exact_text(v)
            elif c == "k":
                out[c] = _k_text(v)
            elif isinstance(v, float):
                out[c] = repr(v)
            else:
                out[c] = v
        writer.writerow(out)


def read_config(path: str) -> dict:
    """Recover the run configuration from a previous CSV or JSON output (or a bare JSON config)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    first = text.splitlines()[0] if text else ""
    if first.startswith(CONFIG_PREFIX):
        return json.loads(first[len(CONFIG_PREFIX):])
    doc = json.loads(text)
    return doc.get("config", doc)


# ---------------------------------------------------------------- commands

def _dims(cfg):
    if cfg.get("N") is not None:
        return 2 ** int(cfg["N"])
    if cfg.get("d") is not None:
        return int(cfg["d"])
    raise UsageError("give --N or --d")


def _prediction_row(p: cf.ProbePrediction, probe_name: str) -> dict:
    return {
        "probe": probe_name, "d": p.d, "dA": p.d_a, "k": p.k,
        "theta": p.theta, "state": p.state, "value": p.value, "value_float": float(p.value),
    }


def cmd_predict(cfg: dict) -> tuple[list[dict], dict]:
    probe = cfg["probe"]
    theta = parse_theta(cfg.get("theta", "pi/4"))
    state = parse_state(cfg.get("state", "zero"), cfg.get("trq"))
    rows, notes = [], {}
    if probe == "purity-mean":
        d_a, d_b = cfg.get("dA"), cfg.get("dB")
        if d_a is None or d_b is None:
            d = _dims(cfg)
            d_a = d_a or math.isqrt(d)
            d_b = d_b or d // d_a
        value = cf.purity_average(int(d_a), int(d_b))
        rows.append({"probe": probe, "d": int(d_a) * int(d_b), "dA": int(d_a), "value": value,
                     "value_float": float(value)})
        return rows, notes
    d = _dims(cfg)
    inner = {"purity-fluct": "purity-variance"}.get(probe, probe)
    for k in parse_k_values(cfg.get("k", "0")):
        p = cf.predict(inner, d, k, theta=theta, d_a=cfg.get("dA"), state=state)
        row = _prediction_row(p, probe)
        if p.formal:
            notes["formal"] = f"d={d} < 16: OTOC closed form evaluated formally"
        rows.append(row)
    return rows, notes


def _reference_value(probe, d, k, theta, state, n_a, n):
    if probe == "otoc8":
        return cf.otoc8_doped(d, k)
    if probe == "otoc8-trace":
        return cf.otoc8_trace_doped(d, k)
    return cf.purity_fluct_exact(n_a, n - n_a, k, theta, _trq_for(state, d))


def _trq_for(state, d):
    if state == "zero":
        return Fraction(1, d)
    if state == "random-product":
        return cf.random_product_trq(d)
    return state


def cmd_simulate(cfg: dict) -> tuple[list[dict], dict]:
    from .circuits import DopedCircuitSpec
    from .montecarlo import mc_otoc8, mc_purity_fluct

    probe = cfg["probe"]
    if cfg.get("N") is None:
        raise UsageError("simulate needs --N")
    n = int(cfg["N"])
    samples = int(cfg.get("samples", 0))
    if samples <= 0:
        raise UsageError("--samples must be positive")
    seed = int(cfg.get("seed", 0))
    theta = parse_theta(cfg.get("theta", "pi/4"))
    theta_mod = theta % (2 * math.pi)
    state = parse_state(cfg.get("state", "zero"), cfg.get("trq"))
    placement = cfg.get("placement", "uniform")
    batches = int(cfg.get("batches", 32))
    workers = cfg.get("workers")
    d = 2 ** n
    if probe in ("otoc8", "otoc8-trace"):
        if not 4 <= n <= OTOC_MAX_N:
            raise UsageError(f"OTOC simulation needs 4 <= N <= {OTOC_MAX_N}")
        if abs(theta - math.pi / 4) > 1e-12:
            raise UsageError("OTOC closed forms are for the T gate (theta = pi/4)")
    elif probe == "purity-fluct":
        if n > PURITY_MAX_N:
            raise UsageError(f"purity simulation needs N <= {PURITY_MAX_N}")
    else:
        raise UsageError(f"unknown probe {probe!r}")
    n_a = int(cfg.get("NA") if cfg.get("NA") is not None else n // 2)
    rows = []
    for k in parse_k_values(cfg.get("k", "0")):
        if k == math.inf:
            raise UsageError("simulation needs finite k")
        spec = DopedCircuitSpec(n, k, theta_mod, seed, "fixed" if placement == "fixed" else "uniform")
        if probe == "purity-fluct":
            res = mc_purity_fluct(spec, n_a, state, samples, batches, workers)
        else:
            res = mc_otoc8(spec, None, samples, batches, workers)
        ref = _reference_value(probe, d, k, theta, state, n_a, n)
        rows.append({
            "probe": probe, "d": d, "dA": 2 ** n_a if probe == "purity-fluct" else None, "k": k,
            "theta": theta, "state": (state if isinstance(state, str) else "custom") if probe == "purity-fluct" else None,
            "value": ref, "value_float": float(ref), "mc_mean": res.mean, "mc_stderr": res.stderr,
            "z": res.z(ref), "samples": samples, "seed": seed,
        })
    return rows, {}


def cmd_threshold(cfg: dict) -> tuple[list[dict], dict]:
    probe = cfg["probe"]
    r = float(cfg.get("r", 1))
    theta = parse_theta(cfg.get("theta", "pi/4"))
    state = parse_state(cfg.get("state", "zero"), cfg.get("trq"))
    ns = parse_n_values(cfg.get("N_range", "4..12"))
    try:
        curve = cf.threshold_curve(ns, r, probe, theta, state)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [{"N": n, "d": d, "probe": probe, "r": r, "k_star": k} for n, d, k in curve]
    notes = {}
    if len(ns) >= 2:
        fit = cf.fit_affine([n for n, _, _ in curve], [k for _, _, k in curve])
        notes = {"fit": {"slope_per_log2_d": fit.slope, "intercept": fit.intercept,
                         "max_residual": fit.max_residual}}
    return rows, notes


def cmd_validate(cfg: dict) -> tuple[list[dict], dict]:
    from .validation import run_validation

    report = run_validation(cfg.get("level", "fast"), seed=int(cfg.get("seed", 0)))
    rows = [{"check": c["name"], "passed": c["passed"], "seconds": round(c["seconds"], 3),
             "detail": c["detail"]} for c in report["checks"]]
    return rows, {"passed": report["passed"]}


COMMANDS = {"predict": cmd_predict, "simulate": cmd_simulate, "threshold": cmd_threshold,
            "validate": cmd_validate}


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dopedclifford", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--output", "-o", help="write to this file instead of stdout")
        sp.add_argument("--config", help="re-run the configuration embedded in a previous output")

    sp = sub.add_parser("predict", help="closed-form predictions")
    sp.add_argument("--probe", choices=PREDICT_PROBES, default="otoc8")
    sp.add_argument("--N", type=int)
    sp.add_argument("--d", type=int)
    sp.add_argument("--dA", type=int)
    sp.add_argument("--dB", type=int)
    sp.add_argument("--k", default="0", help="e.g. 0..8, 0,1,2,4 or inf")
    sp.add_argument("--theta", default="pi/4")
    sp.add_argument("--state", default="zero", choices=("zero", "stabilizer", "random-product"))
    sp.add_argument("--trq", help="explicit tr(Q psi^4) as a fraction, overrides --state")
    common(sp)

    sp = sub.add_parser("simulate", help="Monte-Carlo estimates with error bars")
    sp.add_argument("--probe", choices=SIMULATE_PROBES, default="otoc8")
    sp.add_argument("--N", type=int)
    sp.add_argument("--NA", type=int, help="subsystem qubits for purity (default N/2)")
    sp.add_argument("--k", default="0")
    sp.add_argument("--theta", default="pi/4")
    sp.add_argument("--state", default="zero", choices=("zero", "stabilizer", "random-product"))
    sp.add_argument("--trq", help=argparse.SUPPRESS)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--batches", type=int, default=32)
    sp.add_argument("--placement", choices=("uniform", "fixed"), default="uniform")
    sp.add_argument("--workers", type=int, help="worker threads (default: $DOPEDCLIFFORD_THREADS or 1)")
    common(sp)

    sp = sub.add_parser("threshold", help="doping thresholds k*(d, r)")
    sp.add_argument("--probe", choices=THRESHOLD_PROBES, default="otoc8")
    sp.add_argument("--N", dest="N_range", default="4..12", help="qubit counts, e.g. 4..12")
    sp.add_argument("--r", type=float, default=1.0)
    sp.add_argument("--theta", default="pi/4")
    sp.add_argument("--state", default="zero", choices=("zero", "stabilizer", "random-product"))
    sp.add_argument("--trq", help=argparse.SUPPRESS)
    common(sp)

    sp = sub.add_parser("validate", help="run the invariant suites")
    sp.add_argument("--level", choices=("fast", "full"), default="fast")
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    return p


_RUNTIME_KEYS = ("format", "output", "config", "command", "workers")


def _config_from_args(args) -> dict:
    if args.config:
        cfg = read_config(args.config)
        if cfg.get("command") not in (None, args.command):
            raise UsageError(f"config is for command {cfg.get('command')!r}")
    else:
        cfg = {k: v for k, v in vars(args).items() if k not in _RUNTIME_KEYS and v is not None}
    cfg["command"] = args.command
    cfg["version"] = __version__
    if args.command == "simulate" and getattr(args, "workers", None) is not None:
        cfg_workers = args.workers
    else:
        cfg_workers = None
    return cfg | ({"workers": cfg_workers} if cfg_workers else {})


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        started = time.time()
        rows, notes = COMMANDS[args.command](cfg)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    saved = {k: v for k, v in cfg.items() if k != "workers"}
    for key, msg in notes.items():
        if key == "formal":
            print(f"note: {msg}", file=sys.stderr)
    extra = {k: v for k, v in notes.items() if k != "formal"}
    extra["elapsed_seconds"] = round(time.time() - started, 3) if args.format == "json" else None
    extra = {k: v for k, v in extra.items() if v is not None}
    buf = io.StringIO()
    write_output(saved, rows, args.format, buf, extra)
    if args.format == "csv":
        for key, value in extra.items():
            buf.write(f"# {key}: " + json.dumps(value, sort_keys=True) + "\n")
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    if args.command == "validate" and not notes.get("passed", False):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
