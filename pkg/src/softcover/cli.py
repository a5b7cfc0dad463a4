"""Command-line front end: exponents, rate sweeps, finite-n enumeration, simulation, bounds suite."""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import bounds, simulator, typespace
from .errors import ConvergenceError, SoftCoverError
from .exponents import (
    aleph_dual,
    alpha_dual,
    beta_exponent,
    beth_exponent,
    daleth_exponent,
    gamma_exponent,
    gimel_exponent,
    rate_sweep,
    sweep_to_csv,
    zeta_exponent,
)
from .exponents.result import _jsonable
from .exponents.sweep import COLUMNS, SOLVERS
from .measures import Channel, Distribution, LogBase, mutual_information, mutual_varentropy

EXIT_OK, EXIT_USAGE, EXIT_CONVERGENCE = 0, 2, 3
RATE_TOL = 1e-12
CHANNEL_TOL = 1e-9

# raw exponent names accepted by `exponent --which`, on top of the sweep column names
RAW = {
    "alpha": alpha_dual, "beta": beta_exponent, "gamma": gamma_exponent, "zeta": zeta_exponent,
    "aleph": aleph_dual, "beth": beth_exponent, "gimel": gimel_exponent, "daleth": daleth_exponent,
}


class UsageError(Exception):
    """Invalid flag value; the message names the flag."""


# ---------------------------------------------------------------- parsing helpers

def load_channel(path: str):
    """Read a channel file and return ``(input Distribution, Channel, base or None)``."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"--channel: cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--channel: {path} line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise UsageError(f"--channel: {path}: top level must be an object")
    for key in ("input_dist", "channel"):
        if key not in doc:
            raise UsageError(f"--channel: {path}: missing field '{key}'")
    try:
        p_raw = np.asarray(doc["input_dist"], dtype=float)
        w_raw = np.asarray(doc["channel"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"--channel: {path}: non-numeric entries ({exc})") from exc
    if p_raw.ndim != 1:
        raise UsageError(f"--channel: {path}: field 'input_dist' must be a flat list")
    if w_raw.ndim != 2 or w_raw.shape[0] != p_raw.size:
        raise UsageError(f"--channel: {path}: field 'channel' must have one row per input letter")
    if np.any(p_raw < 0) or abs(p_raw.sum() - 1) > CHANNEL_TOL:
        raise UsageError(f"--channel: {path}: field 'input_dist' sums to {p_raw.sum()!r}")
    sums = w_raw.sum(axis=1)
    for x, s in enumerate(sums):
        if np.any(w_raw[x] < 0) or abs(s - 1) > CHANNEL_TOL:
            raise UsageError(f"--channel: {path}: field 'channel' row {x} sums to {s!r}")
    base = doc.get("base")
    if base is not None:
        try:
            base = LogBase.parse(base)
        except (ValueError, SoftCoverError) as exc:
            raise UsageError(f"--channel: {path}: field 'base' must be 'bits' or 'nats'") from exc
    return Distribution.normalized(p_raw), Channel.normalized(w_raw), base


def parse_rates(spec: str) -> list[float]:
    """``start:stop:step`` inclusive of both ends within 1e-12, or a comma list."""
    try:
        if ":" not in spec:
            return [float(v) for v in spec.split(",")]
        start, stop, step = (float(v) for v in spec.split(":"))
    except ValueError as exc:
        raise UsageError(f"--rates: cannot parse '{spec}'") from exc
    if not step > 0 or stop < start:
        raise UsageError(f"--rates: need step > 0 and stop >= start, got '{spec}'")
    count = int(math.floor((stop - start) / step + RATE_TOL / step)) + 1
    rates = [start + k * step for k in range(count)]
    # round to the step's decimal precision so abscissae print cleanly
    digits = max(0, -int(math.floor(math.log10(step))) + 6)
    return [round(r, digits) for r in rates]


def _base(args, file_base):
    if args.base is not None:
        return LogBase.parse(args.base)
    return file_base or LogBase.BITS


def _emit(text: str, out: str | None):
    if out in (None, "-"):
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _dump(doc) -> str:
    return json.dumps(_jsonable(doc), indent=2, allow_nan=False, default=str) + "\n"


def _config(args, base) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",)}
    cfg["base"] = base.value
    return cfg


# ---------------------------------------------------------------- subcommands

def cmd_exponent(args):
    p, w, fb = load_channel(args.channel)
    base = _base(args, fb)
    name = args.which
    if name in RAW:
        solver, scale = RAW[name], 1.0
    elif name in SOLVERS:
        solver, scale = SOLVERS[name]
    else:
        raise UsageError(f"--which: unknown exponent '{name}'; choose from {sorted(set(RAW) | set(COLUMNS))}")
    res = solver(p, w, args.rate, base=base)
    doc = res.to_json()
    doc["exponent"] = name
    doc["value"] = scale * res.value
    doc["config"] = _config(args, base)
    return _dump(doc)


def cmd_sweep(args):
    p, w, fb = load_channel(args.channel)
    base = _base(args, fb)
    rates = parse_rates(args.rates)
    try:
        rows, diags = rate_sweep(p, w, rates, args.which, base=base)
    except ValueError as exc:
        raise UsageError(f"--which/--rates: {exc}") from exc
    failed = [(r["rate"], c) for r, d in zip(rows, diags) for c, v in d.items() if "error" in v]
    for rate, col in failed:
        print(f"warning: {col} failed at rate {rate}", file=sys.stderr)
    if args.format == "csv":
        return sweep_to_csv(rows, args.which)
    return _dump({"config": _config(args, base), "rows": rows, "diagnostics": diags})


def cmd_mi(args):
    p, w, fb = load_channel(args.channel)
    base = _base(args, fb)
    unit = base.nats_per_unit
    doc = {
        "mutual_information": mutual_information(p, w) / unit,
        "varentropy": mutual_varentropy(p, w) / unit ** 2,
        "config": _config(args, base),
    }
    return _dump(doc)


def cmd_finite_n(args):
    p, w, fb = load_channel(args.channel)
    base = _base(args, fb)
    nx, ny = w.input_size, w.output_size
    if args.kind == "iid":
        val, arg = typespace.alpha_finite_n(p, w, args.rate, args.n, base=base)
        const = typespace.finite_n_constants(args.n, nx, ny, args.rate, val, args.delta, args.r, base,
                                             ceil_aware=args.ceil_aware)
    else:
        try:
            ptype = typespace.TypeDescriptor.from_distribution(p, args.n)
        except SoftCoverError as exc:
            raise UsageError(f"--n: input distribution is not an {args.n}-type ({exc})") from exc
        val, arg = typespace.aleph_finite_n(ptype, w, args.rate, args.n, base=base)
        const = typespace.cc_finite_n_constants(args.n, nx, ny, args.rate, val, args.delta, args.r, base,
                                                ceil_aware=args.ceil_aware)
    doc = {
        "n": args.n,
        "alpha_n": val,
        "kappa_n": const.kappa_n,
        "upsilon_n": const.upsilon_n,
        "upsilon_vacuous": const.upsilon_vacuous,
        "minimizing_type": np.asarray(arg.counts).tolist(),
        "rho_n": const.rho_n,
        "phi_n": const.phi_n,
        "delta": const.delta,
        "r": const.r,
        "config": _config(args, base),
    }
    return _dump(doc)


def cmd_simulate(args):
    p, w, fb = load_channel(args.channel)
    base = _base(args, fb)
    run = simulator.poissonized_estimate if args.poisson else simulator.estimate_exponent
    est = run(p, w, args.n, args.rate, args.replicas, seed=args.seed, kind=args.kind, base=base)
    doc = {"config": _config(args, base), "estimate": est.to_json(),
           "tv": est.tvs.tolist(), "seeds": [[s.codebook_seed, s.replica] for s in est.samples]}
    return _dump(doc)


def cmd_check_bounds(args):
    t0 = time.perf_counter()
    doc = bounds.run_suite()
    doc["runtime_s"] = time.perf_counter() - t0
    doc["config"] = {"command": "check-bounds"}
    return _dump(doc)


# ---------------------------------------------------------------- argument parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="softcover", description=__doc__,
                                 epilog="Re-run any emitted JSON with: softcover --from-config FILE")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, rate=True):
        sp.add_argument("--channel", required=True, help="channel JSON file")
        sp.add_argument("--base", choices=["bits", "nats"], default=None,
                        help="output unit (default: file's base, else bits)")
        if rate:
            sp.add_argument("--rate", type=float, required=True, help="rate in the chosen base")
        sp.add_argument("--out", default="-", help="output path, '-' for stdout")

    sp = sub.add_parser("exponent", help="one exponent at one rate (JSON)")
    common(sp)
    sp.add_argument("--which", default="alpha", help="exponent name, e.g. alpha, half_zeta, aleph")
    sp.set_defaults(func=cmd_exponent)

    sp = sub.add_parser("sweep", help="exponents over a rate grid")
    common(sp, rate=False)
    sp.add_argument("--rates", required=True, help="start:stop:step (inclusive) or a comma list")
    sp.add_argument("--which", default="alpha,beta,gamma,half_zeta", help="comma-separated columns")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("mi", help="mutual information and varentropy")
    common(sp, rate=False)
    sp.set_defaults(func=cmd_mi)

    sp = sub.add_parser("finite-n", help="finite-blocklength exponent by type enumeration")
    common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--kind", choices=simulator.KINDS, default="iid")
    sp.add_argument("--delta", type=float, default=0.5)
    sp.add_argument("--r", type=float, default=None, help="default: midpoint of (exponent_n, R/2)")
    sp.add_argument("--ceil-aware", action=argparse.BooleanOptionalAction, default=True,
                    help="constants for M = ceil(b^(nR)) (default) or the idealized M = b^(nR)")
    sp.set_defaults(func=cmd_finite_n)

    sp = sub.add_parser("simulate", help="Monte Carlo mean exact TV of random codebooks")
    common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--replicas", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--kind", choices=simulator.KINDS, default="iid")
    sp.add_argument("--poisson", action="store_true", help="Poisson number of codewords")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("check-bounds", help="run the inequality grid suite")
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_check_bounds)
    return ap


def config_to_argv(cfg: dict) -> list[str]:
    """Rebuild the argument vector from an echoed ``config`` block."""
    cfg = dict(cfg)
    argv = [cfg.pop("command")]
    for key, val in cfg.items():
        flag = "--" + key.replace("_", "-")
        if val is None:
            continue
        if isinstance(val, bool):
            if key == "ceil_aware":
                argv.append(flag if val else "--no-ceil-aware")
            elif val:
                argv.append(flag)
            continue
        argv += [flag, repr(val) if isinstance(val, float) else str(val)]
    return argv


def _expand_config(argv):
    """Replace ``--from-config FILE`` with the arguments stored in that file's config block."""
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] != "--from-config":
        return argv
    if len(argv) < 2:
        raise UsageError("--from-config: missing file")
    try:
        with open(argv[1], encoding="utf-8") as fh:
            doc = json.load(fh)
        cfg = doc.get("config", doc)
        return config_to_argv(cfg) + argv[2:]
    except (OSError, json.JSONDecodeError, KeyError, AttributeError) as exc:
        raise UsageError(f"--from-config: cannot use {argv[1]}: {exc}") from exc


def main(argv=None) -> int:
    try:
        argv = _expand_config(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    args = build_parser().parse_args(argv)
    try:
        text = args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        diag = {"error": str(exc), "residual": exc.residual,
                "last_iterate": np.asarray(exc.last_iterate).tolist() if exc.last_iterate is not None else None,
                "config": {k: v for k, v in vars(args).items() if k != "func"}}
        _emit(_dump(diag), args.out)
        print(f"error: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (SoftCoverError, ValueError) as exc:
        print(f"error: {_flag_hint(exc)}{exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(text, args.out)
    return EXIT_OK


def _flag_hint(exc) -> str:
    msg = str(exc).lower()
    for flag in ("rate", "delta", "replicas", "seed", "kind", "base", "n", "r"):
        if msg.startswith(flag) or f" {flag} " in msg or f"{flag} =" in msg or f"{flag} must" in msg:
            return f"--{flag}: "
    return ""


if __name__ == "__main__":
    sys.exit(main())
