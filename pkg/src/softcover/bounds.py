"""Binomial and Poisson inequalities that the achievability proofs lean on, checked exactly."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy
from scipy.stats import poisson

from .errors import DomainError

HOLD_TOL = 1e-12
TAIL_MASS = 1e-15


@dataclass(frozen=True)
class BoundReport:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + HOLD_TOL

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    def to_json(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "holds": self.holds, "slack": self.slack}


def binomial_abs_mean_dev_bound(M: int, p: float, l: float = 1.0) -> BoundReport:
    """E|Z - EZ| for Z = (l/M) Binomial(M, p), against l min{2p, sqrt(p/M)}."""
    if M < 1 or not 0 <= p <= 1 or l < 0:
        raise DomainError("need M >= 1, p in [0, 1], l >= 0")
    k = np.arange(M + 1)
    # log-domain pmf; scipy's binom.pmf overflows for subnormal p
    log_pmf = gammaln(M + 1) - gammaln(k + 1) - gammaln(M - k + 1) + xlogy(k, p) + xlog1py(M - k, -p)
    lhs = float(l / M * np.sum(np.exp(log_pmf) * np.abs(k - M * p)))
    rhs = l * min(2 * p, math.sqrt(p / M))
    return BoundReport(lhs, rhs)


def a_epsilon(eps: float) -> float:
    """e^eps / (1+eps)^(1+eps)."""
    return math.exp(eps - (1 + eps) * math.log1p(eps))


def _poisson_upper(mu: float) -> int:
    """Index beyond which the Poisson(mu) tail of k P(k) is below TAIL_MASS (Chernoff)."""
    k = int(mu) + 1
    while True:
        # P[N >= k] <= exp(-mu) (e mu / k)^k for k > mu; the k-weighted tail is at most mu times that
        log_tail = -mu + k * (1 + math.log(mu) - math.log(k)) + math.log(max(mu, 1.0)) + math.log(2)
        if log_tail < math.log(TAIL_MASS):
            return k
        k += max(1, int(math.sqrt(mu)))


def poisson_tail_bound(mu: float, delta: float) -> BoundReport:
    """E[M 1{M > (1+delta) mu}] for M ~ Poisson(mu), against mu a_{delta - 1/mu}^mu."""
    if not mu > 1:
        raise DomainError(f"mu must exceed 1, got {mu}")
    if not 1 / mu < delta < 1:
        raise DomainError(f"delta must lie in (1/mu, 1) = ({1 / mu:.6g}, 1), got {delta}")
    start = math.floor((1 + delta) * mu) + 1
    stop = max(_poisson_upper(mu), start + 1)
    k = np.arange(start, stop + 1)
    lhs = float(np.sum(k * poisson.pmf(k, mu)))
    rhs = mu * math.exp(mu * math.log(a_epsilon(delta - 1 / mu)))
    return BoundReport(lhs, rhs)


def poisson_abs_mean_dev(xi: float):
    """Closed form of E|N - xi| for N ~ Poisson(xi), and the lower bound min{2 xi, sqrt(xi)}/4.

    Returns ``(exact, lower)``.
    """
    if not xi > 0:
        raise DomainError(f"xi must be positive, got {xi}")
    f = math.floor(xi)
    exact = 2.0 * math.exp((f + 1) * math.log(xi) - xi - math.lgamma(f + 1))
    lower = 0.25 * min(2 * xi, math.sqrt(xi))
    return exact, lower


def poisson_abs_mean_dev_direct(xi: float) -> float:
    """E|N - xi| by truncated summation of the Poisson law."""
    stop = _poisson_upper(xi) + 10
    k = np.arange(stop + 1)
    terms = poisson.pmf(k, xi) * np.abs(k - xi)
    return float(math.fsum(terms))


def poisson_mode_mass(mu: float) -> BoundReport:
    """P[M = ceil(mu)] for M ~ Poisson(mu) versus 1/(8 sqrt(ceil(mu))).

    The roles are swapped relative to the other reports: ``lhs`` is the bound
    and ``rhs`` the exact mass, so ``holds`` asserts the mass exceeds the bound.
    """
    if not mu >= 1:
        raise DomainError(f"mu must be at least 1, got {mu}")
    c = math.ceil(mu)
    mass = math.exp(c * math.log(mu) - mu - math.lgamma(c + 1))
    return BoundReport(1 / (8 * math.sqrt(c)), mass)


def poissonized_tv_concentration_bound(mu: float, t: float):
    """Both forms of the Poissonized concentration bound: ``(tight, loose)`` with tight <= loose."""
    if not mu > 0 or not t > 0:
        raise DomainError("mu and t must be positive")
    tight = 2 * math.exp(-mu * -math.expm1(-t * t / 2))
    loose = 2 * math.exp(-mu * t * t / (2 + t * t))
    return tight, loose


def robbins_factorial(k: int) -> BoundReport:
    """ln k! against ln of k^k e^(-k + 1/(12k)) sqrt(2 pi k)."""
    if k < 1:
        raise DomainError("k must be positive")
    lhs = float(gammaln(k + 1))
    rhs = k * math.log(k) - k + 1 / (12 * k) + 0.5 * math.log(2 * math.pi * k)
    return BoundReport(lhs, rhs)


BINOMIAL_GRID = {"M": range(1, 51), "p": np.round(np.arange(0, 1.0001, 0.05), 10)}
POISSON_MUS = (1.5, 2, 5, 10, 50)
XI_GRID = np.round(np.arange(0.1, 20.0001, 0.1), 10)


def run_suite() -> dict:
    """Evaluate every report over the standard grids; the summary lists any failures."""
    sections = {}

    fails = [(M, float(p)) for M in BINOMIAL_GRID["M"] for p in BINOMIAL_GRID["p"]
             if not binomial_abs_mean_dev_bound(M, float(p)).holds]
    sections["binomial_abs_mean_dev"] = {"checked": 50 * len(BINOMIAL_GRID["p"]), "failures": fails}

    fails, checked = [], 0
    for mu in POISSON_MUS:
        for delta in np.linspace(1 / mu, 1, 12)[1:-1]:
            checked += 1
            if not poisson_tail_bound(mu, float(delta)).holds:
                fails.append((mu, float(delta)))
    sections["poisson_tail"] = {"checked": checked, "failures": fails}

    fails, worst = [], 0.0
    for xi in XI_GRID:
        exact, lower = poisson_abs_mean_dev(float(xi))
        worst = max(worst, abs(exact - poisson_abs_mean_dev_direct(float(xi))))
        if exact < lower:
            fails.append(float(xi))
    sections["poisson_abs_mean_dev"] = {"checked": len(XI_GRID), "failures": fails,
                                        "max_closed_form_error": worst, "closed_form_ok": worst <= 1e-12}

    fails = [mu for mu in list(POISSON_MUS) + [1, 100, 1e4] if not poisson_mode_mass(mu).holds]
    sections["poisson_mode_mass"] = {"checked": len(POISSON_MUS) + 3, "failures": fails}

    fails = []
    for mu in POISSON_MUS:
        for t in (0.01, 0.1, 0.5, 1.0, 2.0):
            tight, loose = poissonized_tv_concentration_bound(mu, t)
            if tight > loose + HOLD_TOL:
                fails.append((mu, t))
    sections["poissonized_concentration"] = {"checked": 5 * len(POISSON_MUS), "failures": fails}

    fails = [k for k in range(1, 171) if not robbins_factorial(k).holds]
    sections["robbins"] = {"checked": 170, "failures": fails}

    ok = all(not s["failures"] for s in sections.values()) and sections["poisson_abs_mean_dev"]["closed_form_ok"]
    return {"all_pass": ok, "sections": sections}
