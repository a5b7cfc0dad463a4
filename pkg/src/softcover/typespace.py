"""Method-of-types combinatorics and the finite-blocklength exponents.

All cardinalities are kept in the log domain (log-gamma) so nothing overflows.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.special import gammaln

from .errors import ConstraintError, DomainError, SizeError
from .measures import Distribution, LogBase, _pw, as_channel
from .exponents.cc import _aleph_primal
from .exponents.iid import _alpha_primal

ENUMERATION_LIMIT = 10_000_000
_CHUNK = 200_000


@dataclass(frozen=True, eq=False)
class TypeDescriptor:
    """An n-type stored as integer counts over the alphabet."""

    counts: tuple

    def __post_init__(self):
        c = tuple(int(v) for v in np.asarray(self.counts).ravel())
        if not c or min(c) < 0 or sum(c) < 1:
            raise ConstraintError("type counts must be nonnegative with a positive total")
        object.__setattr__(self, "counts", c)

    @classmethod
    def from_distribution(cls, p, n: int) -> "TypeDescriptor":
        """Exact n-type of ``p``; fails when ``n p`` is not integral."""
        scaled = np.asarray(getattr(p, "probs", p), float) * n
        rounded = np.rint(scaled)
        if np.max(np.abs(scaled - rounded)) > 1e-9:
            raise ConstraintError(f"distribution is not an {n}-type")
        return cls(tuple(int(v) for v in rounded))

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def alphabet_size(self) -> int:
        return len(self.counts)

    @property
    def denominator(self) -> int:
        """Smallest m for which this is an m-type."""
        g = 0
        for c in self.counts:
            g = math.gcd(g, c)
        return self.n // g

    def distribution(self) -> Distribution:
        return Distribution.normalized(np.array(self.counts, float))

    def __eq__(self, other):
        return isinstance(other, TypeDescriptor) and self.counts == other.counts

    def __hash__(self):
        return hash(self.counts)

    def __repr__(self):
        return f"TypeDescriptor({self.counts})"


@dataclass(frozen=True, eq=False)
class JointTypeDescriptor:
    """A joint n-type on X x Y stored as an integer count matrix."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64)
        if c.ndim != 2 or c.size == 0 or np.any(c < 0) or c.sum() < 1:
            raise ConstraintError("joint type counts must be a nonnegative matrix with positive total")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def marginal_x(self) -> TypeDescriptor:
        return TypeDescriptor(tuple(self.counts.sum(axis=1)))

    def marginal_y(self) -> TypeDescriptor:
        return TypeDescriptor(tuple(self.counts.sum(axis=0)))

    def probs(self) -> np.ndarray:
        return self.counts / self.n

    def __eq__(self, other):
        return isinstance(other, JointTypeDescriptor) and np.array_equal(self.counts, other.counts)

    def __hash__(self):
        return hash(self.counts.tobytes())

    def __repr__(self):
        return f"JointTypeDescriptor({self.counts.tolist()})"


def count_types(n: int, alphabet: int) -> int:
    """Number of n-types on an alphabet (exact integer)."""
    return math.comb(n + alphabet - 1, alphabet - 1)


def log_count_types(n: int, alphabet: int) -> float:
    return float(gammaln(n + alphabet) - gammaln(n + 1) - gammaln(alphabet))


def _compositions(n: int, parts: int) -> Iterator[tuple]:
    if parts == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, parts - 1):
            yield (first,) + rest


def enumerate_types(n: int, alphabet: int) -> Iterator[TypeDescriptor]:
    """Every n-type on the alphabet once, in lexicographic order of the counts."""
    if n < 1 or alphabet < 1:
        raise DomainError("n and alphabet size must be positive")
    for c in _compositions(n, alphabet):
        yield TypeDescriptor(c)


def _composition_chunks(n: int, parts: int, chunk: int = _CHUNK):
    it = _compositions(n, parts)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.asarray(block, dtype=np.int64)


def _log_multinomial(counts, axis=-1):
    counts = np.asarray(counts, float)
    return gammaln(counts.sum(axis=axis) + 1) - gammaln(counts + 1).sum(axis=axis)


def log_type_class_size(t: TypeDescriptor) -> float:
    """ln |T_Q| = ln(n! / prod counts!)."""
    return float(_log_multinomial(np.array(t.counts)))


def _as_joint_type(q) -> JointTypeDescriptor:
    return q if isinstance(q, JointTypeDescriptor) else JointTypeDescriptor(q)


def log_conditional_type_probability(q_joint, p) -> float:
    """ln P[X^n in T_{Q_{X|Y}}(y^n)] for i.i.d. X^n ~ p; -inf off the support of p."""
    q = _as_joint_type(q_joint).counts
    pa = np.asarray(getattr(p, "probs", p), float)
    if pa.size != q.shape[0]:
        raise DomainError("input distribution does not match the joint type")
    nx = q.sum(axis=1)
    if np.any((nx > 0) & (pa <= 0)):
        return -np.inf
    pos = nx > 0
    log_seq = float(np.sum(nx[pos] * np.log(pa[pos])))
    log_cls = float(np.sum(_log_multinomial(q.T)))
    return log_seq + log_cls


def conditional_type_probability(q_joint, p) -> float:
    """exp(-n E[ln 1/p(X)]) times the conditional type-class size given y^n."""
    return float(np.exp(log_conditional_type_probability(q_joint, p)))


def log_cc_conditional_type_probability(q_joint, p_type: TypeDescriptor) -> float:
    q = _as_joint_type(q_joint)
    if q.marginal_x().counts != tuple(p_type.counts):
        raise ConstraintError("the X-marginal of the joint type must equal the composition")
    return (float(_log_multinomial(q.counts.ravel())) - log_type_class_size(p_type)
            - log_type_class_size(q.marginal_y()))


def cc_conditional_type_probability(q_joint, p_type: TypeDescriptor) -> float:
    """|T_{Q_XY}| / (|T_{P_X}| |T_{Q_Y}|): chance a uniform codeword of the composition lands in the class."""
    return float(np.exp(log_cc_conditional_type_probability(q_joint, p_type)))


def frak_y(M: float, q_joint, p) -> float:
    """min{2 p_Q, M^(-1/2) p_Q^(1/2)} with p_Q the conditional type probability."""
    if not M > 0:
        raise DomainError("M must be positive")
    lp = log_conditional_type_probability(q_joint, p)
    return float(np.exp(min(np.log(2.0) + lp, -0.5 * np.log(M) + 0.5 * lp)))


def alpha_finite_n(p, w, rate, n: int, base="nats"):
    """Minimum of the primal alpha objective over joint n-types.

    Returns ``(value, minimizing JointTypeDescriptor)`` with the value in ``base``.
    """
    pa, wa = _pw(p, w)
    base = LogBase.parse(base)
    R = base.to_nats(float(rate))
    d = wa.size
    if count_types(n, d) > ENUMERATION_LIMIT:
        raise SizeError(f"{count_types(n, d)} joint {n}-types exceed the enumeration guard")
    best, arg = np.inf, None
    for block in _composition_chunks(n, d):
        q = block.reshape((-1,) + wa.shape) / n
        vals = _alpha_primal(q, pa, wa, R)
        k = int(np.argmin(vals))
        if vals[k] < best:
            best, arg = float(vals[k]), block[k].reshape(wa.shape)
    return float(base.from_nats(best)), JointTypeDescriptor(arg)


def conditional_types(p_type: TypeDescriptor, output_size: int, n: int):
    """All conditional n-types Q_{Y|X} compatible with the composition, as count matrices."""
    m = p_type.n
    if n % m:
        raise ConstraintError(f"n = {n} is not a multiple of the composition length {m}")
    per_x = [c * (n // m) for c in p_type.counts]
    lists = [np.asarray(list(_compositions(k, output_size)), np.int64) for k in per_x]
    total = math.prod(len(v) for v in lists)
    if total > ENUMERATION_LIMIT:
        raise SizeError(f"{total} conditional types exceed the enumeration guard")
    idx = np.stack(np.meshgrid(*[np.arange(len(v)) for v in lists], indexing="ij"), -1).reshape(-1, len(lists))
    return np.stack([lists[x][idx[:, x]] for x in range(len(lists))], axis=1)


def aleph_finite_n(p_type: TypeDescriptor, w, rate, n: int, base="nats"):
    """Minimum of the primal aleph objective over conditional n-types with the given composition.

    Returns ``(value, minimizing JointTypeDescriptor)``.
    """
    wa = as_channel(w).rows
    if p_type.alphabet_size != wa.shape[0]:
        raise DomainError("composition does not match the channel input alphabet")
    base = LogBase.parse(base)
    R = base.to_nats(float(rate))
    counts = conditional_types(p_type, wa.shape[1], n)
    pa = np.array(p_type.counts, float) / p_type.n
    nx = np.array(counts.sum(axis=2), float)
    with np.errstate(invalid="ignore", divide="ignore"):
        q = np.where(nx[..., None] > 0, counts / np.where(nx > 0, nx, 1)[..., None], wa)
    vals = _aleph_primal(q, pa, wa, R)
    k = int(np.argmin(vals))
    return float(base.from_nats(vals[k])), JointTypeDescriptor(counts[k])


def a_epsilon(eps):
    """e^eps / (1+eps)^(1+eps); equals 1 at eps = 0 and decreases on (0, 1)."""
    eps = np.asarray(eps, float)
    return np.exp(eps - (1 + eps) * np.log1p(eps))


@dataclass(frozen=True)
class FiniteNConstants:
    """Finite-blocklength constants; logarithmic quantities are in ``base``."""

    n: int
    base: LogBase
    kappa_n: float
    rho_n: float
    phi_n: float
    upsilon_n: float
    a_eps: float
    mu_n: float
    delta: float
    r: float
    ceil_aware: bool = False
    constant_composition: bool = False

    @property
    def upsilon_vacuous(self) -> bool:
        return not self.phi_n < 1

    @property
    def eta_n(self) -> float:
        """Constant-composition name for the lower-bound constant."""
        return self.kappa_n


def _constants(n, lower, rho, alph_y, rate, exponent_n, delta, r, base, ceil_aware, cc):
    if n < 1:
        raise DomainError("n must be positive")
    base = LogBase.parse(base)
    R, e_n, rr = (base.to_nats(float(v)) for v in (rate, exponent_n, r))
    if not R > 0:
        raise DomainError("rate must be positive")
    # mu = exp(nR) overflows for large n; keep it in the log domain
    log_mu = n * R
    inv_mu = math.exp(-log_mu)
    mu = math.exp(log_mu) if log_mu < 700 else math.inf
    if not inv_mu < delta < 1:
        raise DomainError(f"delta must lie in (exp(-nR), 1) = ({inv_mu:.3g}, 1), got {delta}")
    if not e_n < rr < R / 2:
        raise DomainError(f"r must lie in (exponent, R/2) = ({base.from_nats(e_n):.6g}, "
                          f"{base.from_nats(R / 2):.6g}), got {r}")
    if ceil_aware:
        lower += 0.5 * math.log(2.0) / n
    eps = delta - inv_mu
    a = float(a_epsilon(eps))
    # |Y|^n a^mu, which underflows long before it matters
    log_tail = n * math.log(alph_y) + (mu * math.log(a) if a < 1 else 0.0)
    tail = math.exp(min(log_tail, 700.0))
    phi = math.exp(min(n * (e_n + rho), 700.0)) * (
        math.exp(-0.5 * log_mu) + tail + 2 * (1 + delta) * math.exp(-n * rr))
    ups = rho + (phi / (1 - phi) if phi < 1 else math.inf) / n + math.log1p(delta) / n
    return FiniteNConstants(n, base, base.from_nats(lower), base.from_nats(rho), phi, base.from_nats(ups),
                            a, mu, delta, float(r), ceil_aware, cc)


def finite_n_constants(n, alph_x, alph_y, rate, alpha_n, delta=0.5, r=None, base="nats",
                       ceil_aware=False) -> FiniteNConstants:
    """Constants of the i.i.d. finite-blocklength sandwich.

    ``r`` defaults to the midpoint of (alpha_n, R/2). With ``ceil_aware`` the lower
    constant accounts for M = ceil(exp(nR)) instead of exp(nR).
    """
    if r is None:
        r = 0.5 * (alpha_n + rate / 2)
    lower = (alph_x * alph_y / n) * math.log(n + 1) + math.log(2.0) / n
    rho = ((alph_x + 1) * alph_y / n) * math.log(n + 1) + math.log(4.0) / n
    return _constants(n, lower, rho, alph_y, rate, alpha_n, delta, r, base, ceil_aware, False)


def cc_finite_n_constants(n, alph_x, alph_y, rate, aleph_n, delta=0.5, r=None, base="nats",
                          ceil_aware=False) -> FiniteNConstants:
    """Constant-composition twin of :func:`finite_n_constants` (kappa_n holds eta_n here)."""
    if r is None:
        r = 0.5 * (aleph_n + rate / 2)
    lower = (alph_x * (2 + 3 * alph_y) / (2 * n)) * math.log(n + 1)
    rho = ((alph_x + 2 * alph_x * alph_y + alph_y) / (2 * n)) * math.log(n + 1) + math.log(4.0) / n
    return _constants(n, lower, rho, alph_y, rate, aleph_n, delta, r, base, ceil_aware, True)
