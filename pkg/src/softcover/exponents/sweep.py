"""Evaluate several exponents over a grid of rates."""

from __future__ import annotations

import io
import os
from concurrent.futures import ThreadPoolExecutor

from ..errors import SoftCoverError
from ..measures import LogBase
from .cc import aleph_dual, beth_exponent, daleth_exponent, gimel_exponent
from .iid import alpha_dual, beta_exponent, gamma_exponent, zeta_exponent

COLUMNS = ("alpha", "beta", "gamma", "half_zeta", "aleph", "half_beth", "half_gimel", "half_daleth")

# column name -> (solver, scale applied to the solver value)
SOLVERS = {
    "alpha": (alpha_dual, 1.0),
    "beta": (beta_exponent, 1.0),
    "gamma": (gamma_exponent, 1.0),
    "half_zeta": (zeta_exponent, 0.5),
    "aleph": (aleph_dual, 1.0),
    "half_beth": (beth_exponent, 0.5),
    "half_gimel": (gimel_exponent, 0.5),
    "half_daleth": (daleth_exponent, 0.5),
}


def thread_count(default: int = 1) -> int:
    """Worker cap taken from SOFTCOVER_THREADS."""
    raw = os.environ.get("SOFTCOVER_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return default


def parse_which(which) -> list[str]:
    names = [s.strip() for s in which.split(",")] if isinstance(which, str) else list(which)
    unknown = [n for n in names if n not in SOLVERS]
    if unknown:
        raise ValueError(f"unknown exponent names {unknown}; choose from {list(COLUMNS)}")
    return [c for c in COLUMNS if c in names]


def _row(p, w, rate, cols, base):
    row, diag = {"rate": rate}, {}
    for c in cols:
        solver, scale = SOLVERS[c]
        try:
            res = solver(p, w, rate, base=base)
            row[c] = scale * res.value
            diag[c] = res.diagnostics
        except (SoftCoverError, ArithmeticError) as exc:
            row[c] = None
            diag[c] = {"error": f"{type(exc).__name__}: {exc}"}
    return row, diag


def rate_sweep(p, w, rates, which=COLUMNS, base="nats", threads=None):
    """One row per rate with the requested exponent columns.

    Cells whose solver fails are ``None``; the matching diagnostics entry carries the error.
    Returns ``(rows, diagnostics)``.
    """
    rates = [float(r) for r in rates]
    if any(b <= a for a, b in zip(rates, rates[1:])):
        raise ValueError("rates must be strictly increasing")
    cols = parse_which(which)
    base = LogBase.parse(base)
    workers = threads if threads is not None else thread_count()
    if workers > 1 and len(rates) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(lambda r: _row(p, w, r, cols, base), rates))
    else:
        out = [_row(p, w, r, cols, base) for r in rates]
    return [o[0] for o in out], [o[1] for o in out]


def _fmt(x) -> str:
    return "" if x is None else format(x, ".12g")


def sweep_to_csv(rows, which=COLUMNS) -> str:
    cols = parse_which(which)
    buf = io.StringIO()
    buf.write(",".join(["rate"] + cols) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(row.get(k)) for k in ["rate"] + cols) + "\n")
    return buf.getvalue()
