"""Exponents of the i.i.d. random-codebook ensemble: alpha (exact), beta, gamma, zeta."""

from __future__ import annotations

import numpy as np
from scipy.special import xlogy

from ..errors import DegenerateChannelError, DomainError, SizeError
from ..measures import (
    Channel,
    JointDistribution,
    LogBase,
    _log_mgf,
    _pw,
    _tilde_log,
    as_joint,
    mutual_information,
    sibson_mi,
)
from ._search import maximize_interval, zoom_maximize_2d
from ._simplex import minimize_on_simplex
from .result import ExponentResult

BETA_BOX = ((0.0, 32.0), (-32.0, 1.0))


def _setup(p, w, rate, base, check_degenerate=True):
    pa, wa = _pw(p, w)
    base = LogBase.parse(base)
    if not rate > 0:
        raise DomainError(f"rate must be positive, got {rate}")
    if check_degenerate and Channel(wa).is_degenerate(pa):
        raise DegenerateChannelError("channel output does not depend on the input; exponents are infinite")
    return pa, wa, base.to_nats(float(rate)), base


def _kl_batch(q, ref):
    """Row-batched D(q || ref) for arrays shaped (..., X, Y); inf off the support of ref."""
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = xlogy(q, q) - xlogy(q, ref)
    terms = np.where((q > 0) & (ref <= 0), np.inf, terms)
    return terms.sum(axis=(-2, -1))


def _alpha_primal(q, p, w, R):
    joint = p[:, None] * w
    qy = q.sum(axis=-2)
    d_joint = _kl_batch(q, joint)
    d_prod = _kl_batch(q, p[:, None] * qy[..., None, :])
    return d_joint + 0.5 * np.maximum(R - d_prod, 0.0)


def alpha_primal_objective(q, p, w, rate, base="nats") -> float:
    """D(Q||P_XY) + 1/2 [R - D(Q || P_X Q_Y)]_+ evaluated at the joint ``q``."""
    pa, wa = _pw(p, w)
    q = as_joint(q).probs
    if q.shape != wa.shape:
        raise DomainError("joint distribution shape does not match the channel")
    base = LogBase.parse(base)
    return float(base.from_nats(_alpha_primal(q, pa, wa, base.to_nats(rate))))


def _tilted(p, w, lam):
    """Joint Q* with Q*_{X|Y} ∝ P_X W^lam and Q*_Y ∝ (sum_x P_X W^lam)^(1/lam)."""
    joint = p[:, None] * w
    py = joint.sum(axis=0)
    cols = py > 0
    with np.errstate(divide="ignore"):
        lw = np.log(w[:, cols])
        lp = np.log(p)
    lt = lp[:, None] + lam * lw
    col_norm = np.logaddexp.reduce(lt, axis=0)
    cond = np.exp(lt - col_norm)
    qy = np.exp(col_norm / lam - np.logaddexp.reduce(col_norm / lam))
    q = np.zeros_like(w)
    q[:, cols] = cond * qy
    return q / q.sum()


def tilted_optimizer(p, w, lambda_star: float) -> JointDistribution:
    """Minimizer of the primal alpha objective reconstructed from the dual parameter."""
    if not 1.0 <= lambda_star <= 2.0:
        raise DomainError(f"lambda_star must lie in [1, 2], got {lambda_star}")
    pa, wa = _pw(p, w)
    return JointDistribution(_tilted(pa, wa, lambda_star))


def alpha_dual(p, w, rate, base="nats") -> ExponentResult:
    """Exact soft-covering exponent of the i.i.d. ensemble via its Sibson dual.

    max over mu in [0,1] of (mu/2)(R - I^s_{2/(2-mu)}); lambda* = 2/(2-mu*).
    """
    pa, wa, R, base = _setup(p, w, rate, base)
    mi = mutual_information(pa, wa)
    if R <= mi:
        q = JointDistribution(pa[:, None] * wa)
        return ExponentResult("alpha", float(rate), base, 0.0, 1.0, q,
                              {"method": "rate below mutual information", "certificate_gap": 0.0})

    def f(mu):
        return 0.5 * mu * (R - sibson_mi(pa, wa, 2.0 / (2.0 - mu)))

    mu, val, evals = maximize_interval(f)
    lam = 2.0 / (2.0 - mu)
    q = _tilted(pa, wa, lam)
    primal = float(_alpha_primal(q, pa, wa, R))
    diag = {"method": "golden-section on Sibson dual", "evaluations": evals, "mu_star": mu,
            "certificate_gap": base.from_nats(primal - val)}
    return ExponentResult("alpha", float(rate), base, base.from_nats(max(val, 0.0)), lam,
                          JointDistribution(q), diag)


def alpha_primal_bruteforce(p, w, rate, grid_step=2e-3, base="nats", max_points=200_000) -> float:
    """Direct minimization of the primal alpha objective over the joint simplex (oracle)."""
    pa, wa, R, base = _setup(p, w, rate, base)
    if wa.size > 9:
        raise SizeError(f"brute force limited to |X||Y| <= 9, got {wa.size}")
    if not 0 < grid_step <= 0.1:
        raise DomainError(f"grid_step must lie in (0, 0.1], got {grid_step}")
    joint = pa[:, None] * wa
    sup = joint.ravel() > 0
    shape = wa.shape

    def embed(x):
        q = np.zeros((x.shape[0], wa.size))
        q[:, sup] = x
        return q.reshape((-1,) + shape)

    def fun(x):
        return _alpha_primal(embed(x), pa, wa, R)

    pieces = [lambda x: float(_kl_batch(embed(x[None])[0], joint)),
              lambda x: float(_alpha_primal_smooth(embed(x[None])[0], pa, wa, R))]
    _, val, _ = minimize_on_simplex(fun, int(sup.sum()), grid_step, pieces, max_points=max_points)
    return float(base.from_nats(val))


def _alpha_primal_smooth(q, p, w, R):
    qy = q.sum(axis=0)
    return _kl_batch(q, p[:, None] * w) + 0.5 * (R - _kl_batch(q, p[:, None] * qy[None, :]))


def _renyi_curve(pa, wa, lam):
    """D_{1+lam}(P_XY || P_X P_Y) vectorized, continuous at lam = 0."""
    lam = np.asarray(lam, float)
    mi = mutual_information(pa, wa)
    safe = np.where(np.abs(lam) < 1e-9, 1.0, lam)
    return np.where(np.abs(lam) < 1e-9, mi, _log_mgf(pa, wa, safe) / safe)


def gamma_exponent(p, w, rate, base="nats") -> ExponentResult:
    """max over lam in [0,1] of lam/(1+lam) (R - D_{1+lam}(P_XY || P_X P_Y))."""
    pa, wa, R, base = _setup(p, w, rate, base)
    mu, val, evals = maximize_interval(lambda t: t / (1 + t) * (R - float(_renyi_curve(pa, wa, t))))
    return ExponentResult("gamma", float(rate), base, base.from_nats(max(val, 0.0)), mu, None,
                          {"method": "golden-section", "evaluations": evals})


def zeta_exponent(p, w, rate, base="nats") -> ExponentResult:
    """max over lam in [0,1] of lam (R - D_{1+lam}(P_XY || P_X P_Y))."""
    pa, wa, R, base = _setup(p, w, rate, base)
    mu, val, evals = maximize_interval(lambda t: t * (R - float(_renyi_curve(pa, wa, t))))
    return ExponentResult("zeta", float(rate), base, base.from_nats(max(val, 0.0)), mu, None,
                          {"method": "golden-section", "evaluations": evals})


def zeta_primal_objective(q, p, w, rate, base="nats") -> float:
    """D(Q||P_XY) + [R - E_Q i(X;Y)]_+ with the information density of P_XY."""
    pa, wa = _pw(p, w)
    base = LogBase.parse(base)
    q = as_joint(q).probs
    return float(base.from_nats(_zeta_primal(q, pa, wa, base.to_nats(rate))))


def _zeta_parts(q, p, w):
    """D(Q||P_XY) and E_Q[i(X;Y)] for a batch of joints."""
    joint = p[:, None] * w
    py = joint.sum(axis=0)
    pos = joint > 0
    dens = np.zeros_like(w)
    dens[pos] = np.log(w[pos]) - np.log(np.broadcast_to(py, w.shape)[pos])
    return _kl_batch(q, joint), np.sum(q * dens, axis=(-2, -1))


def _zeta_primal(q, p, w, R):
    div, mean = _zeta_parts(q, p, w)
    return div + np.maximum(R - mean, 0.0)


def zeta_primal_bruteforce(p, w, rate, grid_step=2e-3, base="nats", max_points=200_000) -> float:
    """Simplex-grid oracle for the primal form of zeta."""
    pa, wa, R, base = _setup(p, w, rate, base)
    if wa.size > 9:
        raise SizeError(f"brute force limited to |X||Y| <= 9, got {wa.size}")
    joint = pa[:, None] * wa
    sup = joint.ravel() > 0

    def embed(x):
        q = np.zeros((x.shape[0], wa.size))
        q[:, sup] = x
        return q.reshape((-1,) + wa.shape)

    def fun(x):
        return _zeta_primal(embed(x), pa, wa, R)

    def lin(x):
        div, mean = _zeta_parts(embed(x[None])[0], pa, wa)
        return float(div + R - mean)

    pieces = [lambda x: float(_kl_batch(embed(x[None])[0], joint)), lin]
    _, val, _ = minimize_on_simplex(fun, int(sup.sum()), grid_step, pieces, max_points=max_points)
    return float(base.from_nats(val))


def beta_objective(p, w, rate, lam, lam_prime, base="nats"):
    """lam/(2 lam + 1 - lam') (R - (1 - lam') D_{1+lam} - lam' tilde-D_{1+lam'})."""
    pa, wa = _pw(p, w)
    base = LogBase.parse(base)
    val = _beta_grid(pa, wa, base.to_nats(rate), np.atleast_1d(lam), np.atleast_1d(lam_prime))
    return base.from_nats(val.squeeze()[()])


def _beta_grid(pa, wa, R, lams, lps):
    d = _renyi_curve(pa, wa, lams)[:, None]
    safe = np.where(np.abs(lps) < 1e-9, 1.0, lps)
    g = np.where(np.abs(lps) < 1e-9, 0.0, _tilde_log(pa, wa, safe))[None, :]
    lam, lp = lams[:, None], lps[None, :]
    denom = 2 * lam + 1 - lp
    # the only zero of the denominator is the corner lam = 0, lam' = 1, where the objective tends to 0
    safe = np.where(denom > 0, denom, 1.0)
    return np.where(denom > 0, lam / safe * (R - (1 - lp) * d - g), 0.0)


def beta_exponent(p, w, rate, base="nats", box=BETA_BOX) -> ExponentResult:
    """max over lam >= 0, lam' <= 1 (truncated to ``box``) of the beta objective."""
    pa, wa, R, base = _setup(p, w, rate, base)
    # the diagonal lam' = lam dominates the gamma objective, so seed it there
    g = gamma_exponent(pa, wa, R)
    seeds = [(g.optimizer_param, g.optimizer_param)]
    lam, lp, val, levels = zoom_maximize_2d(lambda a, b: _beta_grid(pa, wa, R, a, b), box,
                                            coarse=129, seeds=seeds)
    diag = {"method": "grid with dyadic zoom", "levels": levels, "box": [list(b) for b in box]}
    (l0, l1), (m0, m1) = box
    if val > 0 and (lam >= l1 - 1e-9 or lp <= m0 + 1e-9):
        diag["warning"] = "optimizer on the truncation boundary"
    return ExponentResult("beta", float(rate), base, base.from_nats(max(val, 0.0)), (lam, lp), None, diag)
