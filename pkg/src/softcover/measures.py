"""Probability objects on finite alphabets and the information measures built on them.

Everything here works in nats. ``LogBase`` converts at the boundary.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import ConvergenceError, DimensionError, DomainError, ValidationError

SUM_TOL = 1e-12
DEGENERACY_TOL = 1e-12
# orders closer than this to the singular point are evaluated by continuity
SINGULAR_TOL = 1e-9


class LogBase(str, enum.Enum):
    BITS = "bits"
    NATS = "nats"

    @property
    def nats_per_unit(self) -> float:
        return float(np.log(2.0)) if self is LogBase.BITS else 1.0

    def to_nats(self, x):
        return x * self.nats_per_unit

    def from_nats(self, x):
        return x / self.nats_per_unit

    @classmethod
    def parse(cls, value) -> "LogBase":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown log base {value!r}; expected 'bits' or 'nats'") from None


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector over ``{0, ..., alphabet_size - 1}``."""

    probs: np.ndarray

    def __post_init__(self):
        p = _frozen(self.probs)
        if p.ndim != 1 or p.size < 1:
            raise ValidationError("a distribution needs a nonempty 1-D probability vector")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ValidationError("probabilities must be finite and nonnegative")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise ValidationError(f"probabilities sum to {p.sum():.15g}, not 1")
        object.__setattr__(self, "probs", p)

    @classmethod
    def normalized(cls, weights, tol: float = np.inf) -> "Distribution":
        """Rescale ``weights`` to sum to one, rejecting a total further than ``tol`` from 1."""
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        if not np.isfinite(total) or total <= 0 or abs(total - 1.0) > tol:
            raise ValidationError(f"weights sum to {total!r}, outside tolerance {tol}")
        return cls(w / total)

    @classmethod
    def uniform(cls, size: int) -> "Distribution":
        return cls(np.full(size, 1.0 / size))

    @property
    def alphabet_size(self) -> int:
        return self.probs.size

    @property
    def support(self) -> np.ndarray:
        return self.probs > 0

    def __len__(self):
        return self.alphabet_size

    def __repr__(self):
        return f"Distribution({np.array2string(self.probs, precision=6)})"


@dataclass(frozen=True, eq=False)
class Channel:
    """Stochastic matrix with entry ``(x, y) = W(y|x)``."""

    rows: np.ndarray

    def __post_init__(self):
        w = _frozen(self.rows)
        if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
            raise ValidationError("a channel needs a nonempty 2-D row-stochastic matrix")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValidationError("channel entries must be finite and nonnegative")
        bad = np.abs(w.sum(axis=1) - 1.0) > SUM_TOL
        if np.any(bad):
            raise ValidationError(f"channel rows {np.flatnonzero(bad).tolist()} do not sum to 1")
        object.__setattr__(self, "rows", w)

    @classmethod
    def normalized(cls, rows, tol: float = np.inf) -> "Channel":
        w = np.asarray(rows, dtype=float)
        if w.ndim != 2:
            raise ValidationError("channel must be a matrix")
        totals = w.sum(axis=1)
        if np.any(totals <= 0) or np.any(np.abs(totals - 1.0) > tol):
            raise ValidationError(f"channel row sums {totals.tolist()} outside tolerance {tol}")
        return cls(w / totals[:, None])

    @classmethod
    def bsc(cls, crossover: float) -> "Channel":
        e = float(crossover)
        return cls([[1 - e, e], [e, 1 - e]])

    @property
    def input_size(self) -> int:
        return self.rows.shape[0]

    @property
    def output_size(self) -> int:
        return self.rows.shape[1]

    def output(self, p) -> Distribution:
        p = as_distribution(p)
        _check_input(p, self)
        return Distribution.normalized(p.probs @ self.rows)

    def is_degenerate(self, p=None) -> bool:
        """True when every row in the support of ``p`` equals the induced output law."""
        if p is None:
            p = Distribution.uniform(self.input_size)
        p = as_distribution(p)
        _check_input(p, self)
        py = p.probs @ self.rows
        rows = self.rows[p.support]
        return bool(np.max(np.abs(rows - py)) <= DEGENERACY_TOL)

    def reverse(self, p) -> "Channel":
        """Backward channel ``P_{X|Y}`` as a channel from Y to X.

        Rows for outputs of zero probability are set uniform; they carry no mass.
        """
        p = as_distribution(p)
        _check_input(p, self)
        joint = p.probs[:, None] * self.rows
        py = joint.sum(axis=0)
        rev = np.full((self.output_size, self.input_size), 1.0 / self.input_size)
        pos = py > 0
        rev[pos] = (joint[:, pos] / py[pos]).T
        return Channel(rev / rev.sum(axis=1, keepdims=True))

    def __repr__(self):
        return f"Channel({np.array2string(self.rows, precision=6)})"


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Probability matrix over X x Y."""

    probs: np.ndarray

    def __post_init__(self):
        q = _frozen(self.probs)
        if q.ndim != 2 or q.size < 1:
            raise ValidationError("a joint distribution needs a nonempty matrix")
        if not np.all(np.isfinite(q)) or np.any(q < 0):
            raise ValidationError("joint probabilities must be finite and nonnegative")
        if abs(q.sum() - 1.0) > SUM_TOL:
            raise ValidationError(f"joint probabilities sum to {q.sum():.15g}, not 1")
        object.__setattr__(self, "probs", q)

    @classmethod
    def from_channel(cls, p, w) -> "JointDistribution":
        p, w = as_distribution(p), as_channel(w)
        _check_input(p, w)
        return cls(p.probs[:, None] * w.rows)

    @property
    def input_size(self) -> int:
        return self.probs.shape[0]

    @property
    def output_size(self) -> int:
        return self.probs.shape[1]

    def marginal_x(self) -> Distribution:
        return Distribution.normalized(self.probs.sum(axis=1))

    def marginal_y(self) -> Distribution:
        return Distribution.normalized(self.probs.sum(axis=0))

    def conditional(self) -> Channel:
        """``Q_{Y|X}``; rows with zero input mass are filled with the Y-marginal."""
        qx = self.probs.sum(axis=1)
        rows = np.tile(self.probs.sum(axis=0), (self.input_size, 1))
        pos = qx > 0
        rows[pos] = self.probs[pos] / qx[pos, None]
        return Channel(rows / rows.sum(axis=1, keepdims=True))

    def __repr__(self):
        return f"JointDistribution({np.array2string(self.probs, precision=6)})"


def as_distribution(p) -> Distribution:
    return p if isinstance(p, Distribution) else Distribution(p)


def as_channel(w) -> Channel:
    return w if isinstance(w, Channel) else Channel(w)


def as_joint(q) -> JointDistribution:
    return q if isinstance(q, JointDistribution) else JointDistribution(q)


def _check_input(p: Distribution, w: Channel):
    if p.alphabet_size != w.input_size:
        raise DimensionError(
            f"input distribution has {p.alphabet_size} symbols, channel expects {w.input_size}"
        )


def _pw(p, w):
    p, w = as_distribution(p), as_channel(w)
    _check_input(p, w)
    return p.probs, w.rows


def _kl(a: np.ndarray, b: np.ndarray) -> float:
    """D(a||b) for arrays of any shape; +inf off the support of b."""
    pos = a > 0
    if np.any(b[pos] <= 0):
        return np.inf
    return float(np.sum(a[pos] * np.log(a[pos] / b[pos])))


def entropy(p) -> float:
    q = as_distribution(p).probs
    q = q[q > 0]
    return float(-np.sum(q * np.log(q)))


def relative_entropy(p, q) -> float:
    p, q = as_distribution(p), as_distribution(q)
    if p.alphabet_size != q.alphabet_size:
        raise DimensionError("relative entropy needs equal alphabet sizes")
    return max(_kl(p.probs, q.probs), 0.0)


def conditional_relative_entropy(p_cond, q_cond, weights) -> float:
    """Weighted average of row-wise divergences: sum_b weights(b) D(p(.|b) || q(.|b))."""
    a, b = as_channel(p_cond).rows, as_channel(q_cond).rows
    wts = as_distribution(weights).probs
    if a.shape != b.shape or a.shape[0] != wts.size:
        raise DimensionError("conditional relative entropy needs matching shapes")
    return max(_kl(wts[:, None] * a, wts[:, None] * b), 0.0)


def total_variation(p, q) -> float:
    """Unnormalized l1 distance, in [0, 2]."""
    a, b = np.asarray(getattr(p, "probs", p), float), np.asarray(getattr(q, "probs", q), float)
    if a.shape != b.shape:
        raise DimensionError("total variation needs equal lengths")
    return float(np.sum(np.abs(a - b)))


def information_density_table(p, w) -> np.ndarray:
    """Table of ln(w(y|x)/p_Y(y)); -inf where w(y|x) = 0, nan where p_Y(y) = 0."""
    p, w = _pw(p, w)
    py = p @ w
    out = np.full(w.shape, np.nan)
    cols = py > 0
    with np.errstate(divide="ignore"):
        out[:, cols] = np.log(w[:, cols]) - np.log(py[cols])
    return out


def _density_terms(p: np.ndarray, w: np.ndarray):
    """Joint probabilities and information densities restricted to the joint support."""
    joint = p[:, None] * w
    py = joint.sum(axis=0)
    pos = joint > 0
    dens = np.log(w[pos]) - np.log(np.broadcast_to(py, w.shape)[pos])
    return joint[pos], dens


def mutual_information(p, w) -> float:
    p, w = _pw(p, w)
    j, d = _density_terms(p, w)
    return max(float(np.sum(j * d)), 0.0)


def mutual_varentropy(p, w) -> float:
    """Variance of the information density under P_X P_{Y|X}."""
    p, w = _pw(p, w)
    j, d = _density_terms(p, w)
    mean = np.sum(j * d)
    return max(float(np.sum(j * (d - mean) ** 2)), 0.0)


def _log_mgf(p: np.ndarray, w: np.ndarray, lam):
    """ln E[exp(lam * i(X;Y))], vectorized over ``lam``."""
    j, d = _density_terms(p, w)
    lam = np.asarray(lam, float)
    return logsumexp(np.log(j) + lam[..., None] * d, axis=-1)


def renyi_divergence_joint(p, w, order: float) -> float:
    """D_order(P_XY || P_X P_Y)."""
    if order <= 0:
        raise DomainError(f"Renyi order must be positive, got {order}")
    p, w = _pw(p, w)
    lam = order - 1.0
    if abs(lam) < SINGULAR_TOL:
        return mutual_information(p, w)
    return float(_log_mgf(p, w, lam) / lam)


def _tilde_log(p: np.ndarray, w: np.ndarray, lam):
    """lam * tilde-D_{1+lam}, i.e. 2 ln E[ E[exp(lam i)|Y]^(1/2) ], vectorized over ``lam``."""
    joint = p[:, None] * w
    py = joint.sum(axis=0)
    cols = py > 0
    joint, w, py = joint[:, cols], w[:, cols], py[cols]
    pos = joint > 0
    with np.errstate(divide="ignore"):
        dens = np.where(pos, np.log(np.where(pos, w, 1.0)) - np.log(py), 0.0)
        log_post = np.where(pos, np.log(np.where(pos, joint, 1.0)) - np.log(py), -np.inf)
    lam = np.asarray(lam, float)
    inner = logsumexp(log_post + lam[..., None, None] * dens, axis=-2)
    return 2.0 * logsumexp(np.log(py) + 0.5 * inner, axis=-1)


def tilde_renyi(p, w, order_param: float) -> float:
    """tilde-D_{1+lam'} = (2/lam') ln E[ E[exp(lam' i)|Y]^(1/2) ] for lam' <= 1."""
    if order_param > 1:
        raise DomainError(f"order parameter must be <= 1, got {order_param}")
    p, w = _pw(p, w)
    if abs(order_param) < SINGULAR_TOL:
        return mutual_information(p, w)
    return float(_tilde_log(p, w, order_param) / order_param)


def sibson_mi(p, w, order: float) -> float:
    """Sibson's mutual information of the given order; ``order = inf`` is allowed."""
    if not order > 0:
        raise DomainError(f"Sibson order must be positive, got {order}")
    p, w = _pw(p, w)
    if abs(order - 1.0) < SINGULAR_TOL:
        return mutual_information(p, w)
    sup = p > 0
    lp, lw = np.log(p[sup]), w[sup]
    if np.isinf(order):
        peak = lw.max(axis=0)
        return max(float(np.log(np.sum(peak))), 0.0)
    with np.errstate(divide="ignore"):
        lw = np.log(lw)
    cols = np.any(np.isfinite(lw), axis=0)
    norms = logsumexp(lp[:, None] + order * lw[:, cols], axis=0) / order
    return max(float(order / (order - 1.0) * logsumexp(norms)), 0.0)


def renyi_divergence(p, q, order: float) -> float:
    """D_order(p || q) between two distributions (order > 0, order != 1 by closed form)."""
    a, b = as_distribution(p).probs, as_distribution(q).probs
    if a.size != b.size:
        raise DimensionError("Renyi divergence needs equal alphabet sizes")
    if order <= 0:
        raise DomainError(f"Renyi order must be positive, got {order}")
    if abs(order - 1.0) < SINGULAR_TOL:
        return relative_entropy(a, b)
    pos = a > 0
    if order > 1 and np.any(b[pos] == 0):
        return np.inf
    pos &= b > 0
    if not np.any(pos):
        return np.inf
    val = logsumexp(order * np.log(a[pos]) + (1 - order) * np.log(b[pos])) / (order - 1)
    return max(float(val), 0.0)


def _csiszar_objective(p: np.ndarray, lw: np.ndarray, order: float, log_s: np.ndarray) -> float:
    vals = logsumexp(order * lw + (1 - order) * log_s, axis=1) / (order - 1)
    return float(p @ vals)


def _csiszar(p: np.ndarray, w: np.ndarray, order: float, init=None,
             tol: float = 1e-12, max_iter: int = 10_000):
    """Core Csiszar solver on arrays; returns (value, minimizer over the full output alphabet)."""
    sup = p > 0
    ps = p[sup]
    ws = w[sup]
    py = ps @ ws
    cols = py > 0
    ws = ws[:, cols]
    with np.errstate(divide="ignore"):
        lw = np.log(ws)
    s = py[cols] if init is None else np.asarray(init, float)[cols]
    if np.any(s <= 0):
        s = py[cols]
    log_s = np.log(s / s.sum())
    lp = np.log(ps)[:, None]
    # damped multiplicative step: a geometric mix of the iterate and the fixed-point map
    step = 1.0 / order
    resid = np.inf
    for it in range(1, max_iter + 1):
        lq = order * lw + (1 - order) * log_s
        lq -= logsumexp(lq, axis=1, keepdims=True)
        mixed = logsumexp(lq + lp, axis=0)
        nxt = (1 - step) * log_s + step * mixed
        nxt -= logsumexp(nxt)
        resid = float(np.max(np.abs(np.exp(nxt) - np.exp(log_s))))
        log_s = nxt
        if resid <= tol:
            break
    else:
        full = np.zeros(w.shape[1])
        full[cols] = np.exp(log_s)
        raise ConvergenceError(
            f"Csiszar iteration did not reach tolerance {tol} in {max_iter} steps",
            last_iterate=full, residual=resid)
    full = np.zeros(w.shape[1])
    full[cols] = np.exp(log_s)
    value = max(_csiszar_objective(ps, lw, order, log_s), 0.0)
    return value, full / full.sum(), it


def csiszar_mi(p, w, order: float, tol: float = 1e-12, max_iter: int = 10_000, init=None):
    """Csiszar's mutual information min_S E_X[D_order(W(.|X) || S)] for order > 1.

    Returns ``(value, minimizer)`` where the minimizer is a ``Distribution`` on Y.
    """
    if not order > 1:
        raise DomainError(f"Csiszar order must exceed 1, got {order}")
    pa, wa = _pw(p, w)
    if order - 1.0 < SINGULAR_TOL:
        return mutual_information(pa, wa), Distribution.normalized(pa @ wa)
    value, s, _ = _csiszar(pa, wa, order, init=init, tol=tol, max_iter=max_iter)
    return value, Distribution.normalized(s)
