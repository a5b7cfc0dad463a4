"""Monte Carlo random codebooks with exact total-variation evaluation at small n."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import ConstraintError, DomainError, SizeError
from .exponents.sweep import thread_count
from .measures import LogBase, as_channel, as_distribution
from .typespace import TypeDescriptor

MAX_N = 14
MAX_OUTPUTS = 2 ** 24
DESK_OUTPUTS = 16_384
MAX_M = 20_000
MAX_REPLICAS = 500
MAX_TYPE_CLASS = 1_000_000
_OUT_CHUNK = 2048

KINDS = ("iid", "cc")


@dataclass(frozen=True, eq=False)
class Codebook:
    codewords: np.ndarray
    kind: str
    seed: int
    replica: int = 0
    composition: tuple | None = None

    @property
    def M(self) -> int:
        return self.codewords.shape[0]

    @property
    def n(self) -> int:
        return self.codewords.shape[1]


@dataclass(frozen=True)
class TvSample:
    tv: float
    codebook_seed: int
    replica: int
    n: int
    M: int


@dataclass(frozen=True)
class ExponentEstimate:
    n: int
    M: int | None
    replicas: int
    mean_tv: float
    std_tv: float
    empirical_exponent: float
    ci95_low: float
    ci95_high: float
    base: LogBase
    kind: str = "iid"
    poisson: bool = False
    samples: list = field(default_factory=list, repr=False)

    @property
    def tvs(self) -> np.ndarray:
        return np.array([s.tv for s in self.samples])

    @property
    def sizes(self) -> np.ndarray:
        return np.array([s.M for s in self.samples])

    @property
    def standard_error(self) -> float:
        return self.std_tv / math.sqrt(self.replicas)

    def to_json(self) -> dict:
        return {
            "n": self.n, "M": self.M, "replicas": self.replicas, "kind": self.kind,
            "poisson": self.poisson, "base": self.base.value, "mean_tv": self.mean_tv,
            "std_tv": self.std_tv, "empirical_exponent": _finite_or_str(self.empirical_exponent),
            "ci95_low": _finite_or_str(self.ci95_low), "ci95_high": _finite_or_str(self.ci95_high),
            "samples": [{"replica": s.replica, "seed": s.codebook_seed, "M": s.M, "tv": s.tv}
                        for s in self.samples],
        }


def _finite_or_str(x):
    return x if math.isfinite(x) else str(x)


def replica_generator(seed: int, replica: int) -> np.random.Generator:
    """Counter-based Philox stream keyed by (seed, replica)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(replica),))
    return np.random.Generator(np.random.Philox(ss))


def _composition_counts(p, n: int) -> np.ndarray:
    if isinstance(p, TypeDescriptor):
        if n % p.n:
            raise ConstraintError(f"n = {n} is not a multiple of the composition length {p.n}")
        return np.array(p.counts, np.int64) * (n // p.n)
    try:
        return np.array(TypeDescriptor.from_distribution(p, n).counts, np.int64)
    except ConstraintError:
        raise ConstraintError(f"the composition is not an {n}-type; n must be a multiple of its denominator") from None


def sample_codebook(p, n: int, M: int, kind: str = "iid", seed: int = 0, replica: int = 0,
                    rng: np.random.Generator | None = None) -> Codebook:
    """Draw M codewords of length n.

    ``iid``: symbols independent with law p. ``cc``: each codeword a uniform
    permutation of the fixed multiset whose counts are the n-type of p.
    """
    if M < 1:
        raise DomainError("a codebook needs at least one codeword")
    if n < 1:
        raise DomainError("blocklength must be positive")
    if kind not in KINDS:
        raise DomainError(f"kind must be one of {KINDS}")
    rng = rng if rng is not None else replica_generator(seed, replica)
    if kind == "iid":
        probs = as_distribution(p.distribution() if isinstance(p, TypeDescriptor) else p).probs
        words = rng.choice(probs.size, size=(M, n), p=probs)
        comp = None
    else:
        counts = _composition_counts(p, n)
        base_word = np.repeat(np.arange(counts.size), counts)
        words = rng.permuted(np.tile(base_word, (M, 1)), axis=1)
        comp = tuple(int(c) for c in counts)
    return Codebook(words.astype(np.int64), kind, int(seed), int(replica), comp)


def all_outputs(ny: int, n: int) -> np.ndarray:
    """Every y^n in lexicographic order as an (ny^n, n) index array."""
    return np.array(list(product(range(ny), repeat=n)), dtype=np.int64).reshape(-1, n)


def _likelihoods(words: np.ndarray, w: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Matrix of W^n(y^n | x^n) for every (codeword, output) pair.

    Each log-likelihood is sum over (x, y) of N_xy log W(y|x), with the pair counts
    N_xy gathered by one matrix product of one-hot encodings.
    """
    nx, ny = w.shape
    n = words.shape[1]
    onehot_x = np.zeros((words.shape[0], n * nx))
    onehot_x[np.arange(words.shape[0])[:, None], np.arange(n) * nx + words] = 1.0
    zero = w <= 0
    with np.errstate(divide="ignore"):
        lw = np.where(zero, 0.0, np.log(np.where(zero, 1.0, w)))
    # table[(i, x), k] = log W(y_k,i | x)
    table = lw[:, ys].transpose(2, 0, 1).reshape(n * nx, -1)
    ll = onehot_x @ table
    if np.any(zero):
        blocked = onehot_x @ zero[:, ys].transpose(2, 0, 1).reshape(n * nx, -1).astype(float)
        ll = np.where(blocked > 0, -np.inf, ll)
    return np.exp(ll)


def _check_outputs(ny: int, n: int, limit: int = MAX_OUTPUTS):
    if ny ** n > limit:
        raise SizeError(f"|Y|^n = {ny ** n} exceeds the exhaustive-output guard {limit}")


def _induced(words, w, ys):
    """(1/M) sum_j W^n(y | x_j) for each row of ``ys``, chunked over outputs."""
    out = np.empty(ys.shape[0])
    for s in range(0, ys.shape[0], _OUT_CHUNK):
        out[s:s + _OUT_CHUNK] = _likelihoods(words, w, ys[s:s + _OUT_CHUNK]).mean(axis=0)
    return out


def _iid_output(py: np.ndarray, ys: np.ndarray) -> np.ndarray:
    return np.prod(py[ys], axis=1)


def type_class_sequences(counts) -> np.ndarray:
    """Every sequence with the given symbol counts."""
    counts = np.asarray(counts, np.int64)
    n = int(counts.sum())
    size = math.factorial(n) // math.prod(math.factorial(int(c)) for c in counts)
    if size > MAX_TYPE_CLASS:
        raise SizeError(f"type class of size {size} exceeds the guard {MAX_TYPE_CLASS}")
    seqs = [()]
    left = [tuple(int(c) for c in counts)]
    for _ in range(n):
        nxt, nleft = [], []
        for s, rem in zip(seqs, left):
            for x, c in enumerate(rem):
                if c:
                    nxt.append(s + (x,))
                    nleft.append(rem[:x] + (c - 1,) + rem[x + 1:])
        seqs, left = nxt, nleft
    return np.array(seqs, dtype=np.int64)


def reference_output(p, w, n: int, kind: str = "iid", ys=None) -> np.ndarray:
    """Target output law on Y^n: P_Y^n for i.i.d. codebooks, the composition's output for cc."""
    w = as_channel(w).rows
    ys = all_outputs(w.shape[1], n) if ys is None else ys
    if kind == "iid":
        probs = as_distribution(p.distribution() if isinstance(p, TypeDescriptor) else p).probs
        return _iid_output(probs @ w, ys)
    return _induced(type_class_sequences(_composition_counts(p, n)), w, ys)


def exact_tv(cb: Codebook, w, p, reference=None, ys=None) -> TvSample:
    """sum over all y^n of |P_{Y^n|C}(y^n) - reference(y^n)|."""
    ch = as_channel(w)
    w = ch.rows
    _check_outputs(w.shape[1], cb.n)
    if ch.is_degenerate(p.distribution() if isinstance(p, TypeDescriptor) else p):
        # every codeword induces the same output law, so the distance is exactly zero
        return TvSample(0.0, cb.seed, cb.replica, cb.n, cb.M)
    ys = all_outputs(w.shape[1], cb.n) if ys is None else ys
    ref = reference_output(p, w, cb.n, cb.kind, ys) if reference is None else reference
    tv = float(np.sum(np.abs(_induced(cb.codewords, w, ys) - ref)))
    return TvSample(min(max(tv, 0.0), 2.0), cb.seed, cb.replica, cb.n, cb.M)


def l_statistic(cb: Codebook, w, p, y) -> float:
    """P_{Y^n|C}(y) / P_{Y^n}(y), with the convention L = 1 when P_{Y^n}(y) = 0."""
    w = as_channel(w).rows
    y = np.asarray(y, np.int64).reshape(1, -1)
    ref = reference_output(p, w, cb.n, cb.kind, y)[0]
    if ref <= 0:
        return 1.0
    return float(_induced(cb.codewords, w, y)[0] / ref)


def codebook_size(rate, n: int, base="bits") -> int:
    """M = ceil(b^(nR)) in the configured base."""
    return int(math.ceil(math.exp(n * LogBase.parse(base).to_nats(rate)) - 1e-9))


def _check_job(n, M, replicas, ny):
    if n > MAX_N:
        raise SizeError(f"n = {n} exceeds the desk-scale guard {MAX_N}")
    _check_outputs(ny, n, DESK_OUTPUTS)
    if M > MAX_M:
        raise SizeError(f"M = {M} exceeds the desk-scale guard {MAX_M}")
    if not 2 <= replicas <= MAX_REPLICAS:
        raise SizeError(f"replica count must lie in [2, {MAX_REPLICAS}]")


def _summarize(samples, n, M, base, kind, poisson):
    tvs = np.array([s.tv for s in samples])
    k = tvs.size
    mean = float(np.sum(tvs) / k)
    std = float(np.std(tvs, ddof=1)) if k > 1 else 0.0
    half = 1.96 * std / math.sqrt(k)
    unit = base.nats_per_unit

    def expo(m):
        return math.inf if m <= 0 else -math.log(m) / (n * unit)

    return ExponentEstimate(n, M, k, mean, std, expo(mean), expo(mean + half), expo(mean - half),
                            base, kind, poisson, list(samples))


def _replica_ids(replicas, seeds):
    if seeds is None:
        return list(range(replicas))
    seeds = [int(s) for s in seeds]
    if len(set(seeds)) != len(seeds):
        raise DomainError("replica seeds collide; every replica needs its own seed")
    return seeds


def _run(p, w, n, rate, replicas, seed, kind, base, poisson, seeds):
    w = as_channel(w)
    base = LogBase.parse(base)
    mean_size = math.exp(n * base.to_nats(rate))
    M = codebook_size(rate, n, base)
    ids = _replica_ids(replicas, seeds)
    _check_job(n, M if not poisson else int(mean_size + 6 * math.sqrt(mean_size) + 1), len(ids), w.output_size)
    ys = all_outputs(w.output_size, n)
    ref = reference_output(p, w, n, kind, ys)

    def one(rid):
        rng = replica_generator(seed, rid)
        m = int(rng.poisson(mean_size)) if poisson else M
        if m == 0:
            # empty codebook: no induced law; count it as the maximal distance
            return TvSample(2.0, int(seed), rid, n, 0)
        cb = sample_codebook(p, n, m, kind, seed, rid, rng=rng)
        return exact_tv(cb, w, p, reference=ref, ys=ys)

    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(one, ids))
    else:
        samples = [one(r) for r in ids]
    return _summarize(samples, n, None if poisson else M, base, kind, poisson)


def estimate_exponent(p, w, n: int, rate, replicas: int, seed: int = 0, kind: str = "iid",
                      base="bits", seeds=None) -> ExponentEstimate:
    """Mean exact TV over independent codebooks with M = ceil(b^(nR)) codewords."""
    return _run(p, w, n, rate, replicas, seed, kind, base, False, seeds)


def poissonized_estimate(p, w, n: int, rate, replicas: int, seed: int = 0, kind: str = "iid",
                         base="bits", seeds=None) -> ExponentEstimate:
    """As :func:`estimate_exponent` with a Poisson(b^(nR)) number of codewords per replica."""
    return _run(p, w, n, rate, replicas, seed, kind, base, True, seeds)


def mcdiarmid_bound(M: float, t: float) -> float:
    """2 exp(-M t^2 / 2)."""
    return 2.0 * math.exp(-M * t * t / 2.0)


def concentration_check(p, w, n: int, rate, replicas: int, t_grid, seed: int = 0, kind: str = "iid",
                        base="bits", estimate: ExponentEstimate | None = None):
    """Empirical deviation frequencies against the McDiarmid tail bound.

    Each row: t, fraction of replicas with |tv - mean| >= t, the bound, the
    binomial slack 3 sqrt(bound (1 - bound) / K) + 1/K, and whether the row holds.
    """
    if replicas < 100:
        raise DomainError("the concentration check needs at least 100 replicas")
    est = estimate or estimate_exponent(p, w, n, rate, replicas, seed, kind, base)
    tvs = est.tvs
    k = tvs.size
    rows = []
    for t in t_grid:
        frac = float(np.mean(np.abs(tvs - est.mean_tv) >= t))
        bound = mcdiarmid_bound(est.M, t)
        b = min(bound, 1.0)
        slack = 3.0 * math.sqrt(b * (1 - b) / k) + 1.0 / k
        rows.append({"t": float(t), "fraction": frac, "bound": bound, "slack": slack,
                     "holds": frac <= bound + slack})
    return rows


__all__ = [
    "Codebook", "ExponentEstimate", "TvSample", "all_outputs", "codebook_size", "concentration_check",
    "estimate_exponent", "exact_tv", "l_statistic", "mcdiarmid_bound", "poissonized_estimate",
    "reference_output", "replica_generator", "sample_codebook", "type_class_sequences",
]
