"""Exponents of the constant-composition ensemble: aleph (exact), beth, gimel, daleth."""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

from ..errors import ConvergenceError, DomainError
from ..measures import (
    Channel,
    LogBase,
    _csiszar,
    _pw,
    as_channel,
    mutual_information,
    sibson_mi,
)
from ._search import maximize_interval, zoom_minimize_2d
from .iid import _kl_batch, _setup
from .result import ExponentResult

IPF_TOL = 1e-12
IPF_MAX_SWEEPS = 50_000
MULTISTART = 32


def _joint_parts(q, p, w):
    """D(P Q || P W) and D(P Q || P Q_Y) for a batch of channels ``q`` shaped (..., X, Y)."""
    joint = p[:, None] * q
    qy = joint.sum(axis=-2)
    return _kl_batch(joint, p[:, None] * w), _kl_batch(joint, p[:, None] * qy[..., None, :])


def _aleph_primal(q, p, w, R):
    d1, d2 = _joint_parts(q, p, w)
    return d1 + 0.5 * np.maximum(R - d2, 0.0)


def _gimel_primal(q, p, w, R):
    d1, d2 = _joint_parts(q, p, w)
    return d1 + np.maximum(R - d2, 0.0)


def _check_cond(q_cond, w):
    q = as_channel(q_cond).rows
    if q.shape != w.shape:
        raise DomainError("conditional distribution shape does not match the channel")
    return q


def aleph_primal_objective(q_cond, p_type, w, rate, base="nats") -> float:
    """D(P Q || P W) + 1/2 [R - D(P Q || P Q_Y)]_+ for the channel ``q_cond``."""
    pa, wa = _pw(p_type, w)
    base = LogBase.parse(base)
    q = _check_cond(q_cond, wa)
    return float(base.from_nats(_aleph_primal(q, pa, wa, base.to_nats(rate))))


def gimel_primal_objective(q_cond, p_type, w, rate, base="nats") -> float:
    """D(P Q || P W) + [R - D(P Q || P Q_Y)]_+ for the channel ``q_cond``."""
    pa, wa = _pw(p_type, w)
    base = LogBase.parse(base)
    q = _check_cond(q_cond, wa)
    return float(base.from_nats(_gimel_primal(q, pa, wa, base.to_nats(rate))))


def _aleph_certificate(p, w, lam, s):
    """Q*_{Y|X} ∝ W^lam S^(1-lam)."""
    q = np.zeros_like(w)
    cols = s > 0
    with np.errstate(divide="ignore"):
        lq = lam * np.log(w[:, cols]) + (1 - lam) * np.log(s[cols])
    lq -= np.logaddexp.reduce(lq, axis=1, keepdims=True)
    q[:, cols] = np.exp(lq)
    return q / q.sum(axis=1, keepdims=True)


def aleph_dual(p_type, w, rate, base="nats") -> ExponentResult:
    """Exact exponent of the constant-composition ensemble via its Csiszar dual.

    max over mu in [0,1] of (mu/2)(R - I^c_{2/(2-mu)}); lambda* = 2/(2-mu*).
    """
    pa, wa, R, base = _setup(p_type, w, rate, base)
    if R <= mutual_information(pa, wa):
        return ExponentResult("aleph", float(rate), base, 0.0, 1.0, Channel(wa),
                              {"method": "rate below mutual information", "certificate_gap": 0.0})
    warm = {"s": None}
    inner_iters = [0]

    def csiszar(order):
        if order - 1.0 < 1e-9:
            return mutual_information(pa, wa), pa @ wa
        val, s, it = _csiszar(pa, wa, order, init=warm["s"])
        warm["s"] = s
        inner_iters[0] += it
        return val, s

    def f(mu):
        return 0.5 * mu * (R - csiszar(2.0 / (2.0 - mu))[0])

    mu, val, evals = maximize_interval(f)
    lam = 2.0 / (2.0 - mu)
    _, s = csiszar(lam)
    q = _aleph_certificate(pa, wa, lam, s)
    primal = float(_aleph_primal(q, pa, wa, R))
    diag = {"method": "golden-section on Csiszar dual", "evaluations": evals, "mu_star": mu,
            "inner_iterations": inner_iters[0], "certificate_gap": base.from_nats(primal - val),
            "s_star": s}
    return ExponentResult("aleph", float(rate), base, base.from_nats(max(val, 0.0)), lam,
                          Channel(q), diag)


def _ipf(ref, row, col, tol=IPF_TOL, max_sweeps=IPF_MAX_SWEEPS):
    """I-projection of ``ref`` onto matrices with the given marginals (batched over leading axes).

    Returns ``(matrix, residual, sweeps)``.
    """
    m = np.broadcast_to(ref, col.shape[:-1] + ref.shape).copy()
    resid = np.inf
    for sweep in range(1, max_sweeps + 1):
        cs = m.sum(axis=-2)
        m *= np.divide(col, cs, out=np.zeros_like(cs), where=cs > 0)[..., None, :]
        rs = m.sum(axis=-1)
        m *= np.divide(row, rs, out=np.zeros_like(rs), where=rs > 0)[..., :, None]
        err = np.abs(m.sum(axis=-2) - col).max(axis=-1)
        resid = float(err.max())
        if resid <= tol:
            break
    return m, err, sweep


def _projection_newton(ref, row, col, tol=1e-13, max_iter=100):
    """Same I-projection as :func:`_ipf`, via damped Newton on its concave dual.

    The projection has the form row(x) pi_x(y) with pi_x ∝ W(y|x) exp(v_y); v solves
    max_v col.v - sum_x row(x) ln sum_y W(y|x) exp(v_y). Columns of zero target
    mass are frozen. Returns ``(matrix, residual, iterations)``.
    """
    pos = row > 0
    rw, w = row[pos], ref[pos] / row[pos][:, None]
    active = col > 0
    ny = col.shape[-1]
    v = np.where(active, 0.0, -np.inf)
    with np.errstate(divide="ignore"):
        lw = np.log(w)
    ones = active.astype(float)

    def dual(v):
        lz = np.logaddexp.reduce(lw + v[..., None, :], axis=-1)
        lin = np.sum(col * np.where(active, v, 0.0), axis=-1)
        vs = np.sum(np.where(active, v, 0.0), axis=-1)
        return lin - lz @ rw - 0.5 * vs ** 2, lz

    val, lz = dual(v)
    eye = np.eye(ny)
    for it in range(1, max_iter + 1):
        pi = np.exp(lw + v[..., None, :] - lz[..., None])
        marg = np.einsum("x,...xy->...y", rw, pi)
        vs = np.sum(np.where(active, v, 0.0), axis=-1)
        grad = np.where(active, col - marg - vs[..., None], 0.0)
        resid = np.max(np.abs(np.where(active, col - marg, 0.0)), axis=-1)
        if np.all(resid <= tol):
            break
        hess = np.einsum("x,...xy,...xz->...yz", rw, pi, pi) - np.einsum("...y,yz->...yz", marg, eye)
        hess = hess - ones[..., :, None] * ones[..., None, :]
        mask2 = ones[..., :, None] * ones[..., None, :]
        hess = hess * mask2 - (1 - mask2) * eye
        step = np.linalg.solve(hess, -grad[..., None])[..., 0]
        step = np.where(active, step, 0.0)
        t = np.ones(v.shape[:-1])
        for _ in range(40):
            trial = np.where(active, v + t[..., None] * step, -np.inf)
            tv, tlz = dual(trial)
            ok = (tv >= val - 1e-15) | (t < 1e-12)
            if np.all(ok):
                break
            t = np.where(ok, t, t / 2)
        v, val, lz = trial, tv, tlz
    pi = np.exp(lw + v[..., None, :] - lz[..., None])
    m = np.zeros(col.shape[:-1] + ref.shape)
    m[..., pos, :] = rw[:, None] * pi
    err = np.abs(m.sum(axis=-2) - col).max(axis=-1)
    return m, err, it


def _g_batch(q, p, w, max_sweeps=IPF_MAX_SWEEPS, strict=True, method="ipf"):
    joint_q = p[:, None] * q
    qy = joint_q.sum(axis=-2)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.sum(np.where(qy > 0, qy * np.log(np.where(qy > 0, qy, 1.0)), 0.0), axis=-1)
        loglik = np.where(joint_q > 0, np.log(np.where(w > 0, w, 1.0)), 0.0)
    cross = np.sum(joint_q * loglik, axis=-2).sum(axis=-1)
    cross = np.where(np.any((joint_q > 0) & (w <= 0), axis=(-2, -1)), -np.inf, cross)
    ref = p[:, None] * w
    if method == "newton":
        proj, err, _ = _projection_newton(ref, p, qy)
    else:
        proj, err, _ = _ipf(ref, p, qy, max_sweeps=max_sweeps)
    bad = err > IPF_TOL * 10
    if strict and np.any(bad):
        raise ConvergenceError("iterative proportional fitting did not converge",
                               last_iterate=proj, residual=float(err.max()))
    inner = _kl_batch(proj, ref)
    return np.where(bad, np.nan, h + cross + inner)


def g_function(q_cond, p_type, w, method="ipf") -> float:
    """G(Q) = H(Q_Y) + E[ln W(Y|X)] + min over R with output Q_Y of D(P R || P W).

    The inner projection uses iterative proportional fitting (``method="ipf"``)
    or Newton's method on its dual (``method="newton"``).
    """
    pa, wa = _pw(p_type, w)
    q = _check_cond(q_cond, wa)
    return float(_g_batch(q, pa, wa, method=method))


def _beth_primal(q, p, w, R, strict=True, method="ipf"):
    d1 = _kl_batch(p[:, None] * q, p[:, None] * w)
    g = _g_batch(q, p, w, strict=strict, method=method)
    val = d1 + np.maximum(R - g, 0.0)
    return np.where(np.isnan(val), np.inf, val)


def beth_primal_objective(q_cond, p_type, w, rate, base="nats") -> float:
    pa, wa = _pw(p_type, w)
    base = LogBase.parse(base)
    q = _check_cond(q_cond, wa)
    return float(base.from_nats(_beth_primal(q, pa, wa, base.to_nats(rate))))


def _outer_search(objective, p, w, starts=MULTISTART, seed=0):
    """Minimize ``objective`` (batched over channels) over all channels X -> Y.

    Binary-by-binary channels use a 2-D grid with dyadic zoom; larger ones use
    seeded multi-start Powell runs on row-softmax logits.
    Returns ``(channel, value, diagnostics)``.
    """
    nx, ny = w.shape
    if (nx, ny) == (2, 2):
        def grid(a, b):
            q = np.empty((a.size, b.size, 2, 2))
            q[..., 0, 0], q[..., 0, 1] = a[:, None], 1 - a[:, None]
            q[..., 1, 0], q[..., 1, 1] = b[None, :], 1 - b[None, :]
            return objective(q)

        a, b, val, levels = zoom_minimize_2d(grid, ((0.0, 1.0), (0.0, 1.0)), coarse=65,
                                             seeds=[(w[0, 0], w[1, 0])])
        # the zoom can stall in the narrow valley along the kink; polish with restarted simplex runs
        def scalar2(v):
            a, b = v
            if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
                return np.inf
            return float(grid(np.array([a]), np.array([b]))[0, 0])

        x = np.array([a, b])
        for _ in range(3):
            res = minimize(scalar2, x, method="Nelder-Mead",
                           options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 4000})
            if res.fun < val:
                x, val = res.x, float(res.fun)
        q = np.array([[x[0], 1 - x[0]], [x[1], 1 - x[1]]])
        return q, float(val), {"method": "2-D grid with dyadic zoom and simplex polish", "levels": levels}

    def to_channel(z):
        z = z.reshape(nx, ny)
        e = np.exp(z - z.max(axis=1, keepdims=True))
        return e / e.sum(axis=1, keepdims=True)

    def scalar(z):
        v = float(objective(to_channel(z)))
        return v if np.isfinite(v) else 1e300

    rng = np.random.default_rng(seed)
    with np.errstate(divide="ignore"):
        z_w = np.log(np.clip(w, 1e-300, None)).ravel()
    inits = [z_w] + [rng.normal(scale=2.0, size=nx * ny) for _ in range(starts - 1)]
    best_q, best_v, runs = to_channel(z_w), scalar(z_w), []
    for z0 in inits:
        res = minimize(scalar, z0, method="Powell", options={"xtol": 1e-10, "ftol": 1e-14, "maxfev": 20_000})
        runs.append(float(res.fun))
        if res.fun < best_v:
            best_q, best_v = to_channel(res.x), float(res.fun)
    return best_q, best_v, {"method": "multi-start Powell", "starts": len(inits), "run_values": runs}


def beth_exponent(p_type, w, rate, base="nats", starts=MULTISTART) -> ExponentResult:
    """min over Q_{Y|X} of D(P Q || P W) + [R - G(Q)]_+."""
    pa, wa, R, base = _setup(p_type, w, rate, base)
    if R <= mutual_information(pa, wa):
        return ExponentResult("beth", float(rate), base, 0.0, None, Channel(wa),
                              {"method": "rate below mutual information"})
    # the search uses the Newton projection; the winner is re-evaluated with IPF
    q, val, diag = _outer_search(
        lambda q: _beth_primal(q, pa, wa, R, strict=False, method="newton"), pa, wa, starts)
    diag["search_value"] = base.from_nats(val)
    val = float(_beth_primal(q, pa, wa, R))
    return ExponentResult("beth", float(rate), base, base.from_nats(max(val, 0.0)), None,
                          Channel(q), diag)


def gimel_exponent(p_type, w, rate, base="nats", starts=MULTISTART) -> ExponentResult:
    """min over Q_{Y|X} of D(P Q || P W) + [R - D(P Q || P Q_Y)]_+."""
    pa, wa, R, base = _setup(p_type, w, rate, base)
    if R <= mutual_information(pa, wa):
        return ExponentResult("gimel", float(rate), base, 0.0, None, Channel(wa),
                              {"method": "rate below mutual information"})
    q, val, diag = _outer_search(lambda q: _gimel_primal(q, pa, wa, R), pa, wa, starts)
    return ExponentResult("gimel", float(rate), base, base.from_nats(max(val, 0.0)), None,
                          Channel(q), diag)


def daleth_exponent(p_type, w, rate, base="nats") -> ExponentResult:
    """max over mu in [0,1] of mu (R - I^s_{1/(1-mu)}), with the order-infinity limit at mu = 1."""
    pa, wa, R, base = _setup(p_type, w, rate, base)

    def f(mu):
        order = np.inf if mu >= 1.0 else 1.0 / (1.0 - mu)
        return mu * (R - sibson_mi(pa, wa, order))

    mu, val, evals = maximize_interval(f)
    return ExponentResult("daleth", float(rate), base, base.from_nats(max(val, 0.0)), mu, None,
                          {"method": "golden-section", "evaluations": evals})


def gimel_dual_value(p_type, w, rate, base="nats", mu_max=0.95) -> float:
    """max over mu in [0, mu_max] of mu (R - I^c_{1/(1-mu)}); a lower bound on gimel."""
    pa, wa, R, base = _setup(p_type, w, rate, base)

    def f(mu):
        if mu < 1e-9:
            return 0.0
        return mu * (R - _csiszar(pa, wa, 1.0 / (1.0 - mu), max_iter=100_000)[0])

    _, val, _ = maximize_interval(f, 0.0, mu_max)
    return float(base.from_nats(max(val, 0.0)))


__all__ = [
    "aleph_dual", "aleph_primal_objective", "beth_exponent", "beth_primal_objective",
    "daleth_exponent", "g_function", "gimel_dual_value", "gimel_exponent", "gimel_primal_objective",
]
