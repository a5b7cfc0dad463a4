import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import LN2, P_BSC, RATE, W_BSC
from softcover.errors import ConstraintError, DomainError
from softcover.exponents import aleph_dual, alpha_dual
from softcover.typespace import (
    JointTypeDescriptor,
    TypeDescriptor,
    a_epsilon,
    aleph_finite_n,
    alpha_finite_n,
    cc_conditional_type_probability,
    cc_finite_n_constants,
    conditional_type_probability,
    conditional_types,
    count_types,
    enumerate_types,
    finite_n_constants,
    frak_y,
    log_count_types,
    log_type_class_size,
)


def joint_kl(q, ref):
    return oracles.kl(q, ref)


# ---------------------------------------------------------------- types and counting

def test_type_enumeration_examples():
    assert len(list(enumerate_types(4, 2))) == 5 == count_types(4, 2)
    assert [t.counts for t in enumerate_types(1, 3)] == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]
    assert log_count_types(4, 2) == pytest.approx(math.log(5), abs=1e-12)


def test_enumeration_is_lexicographic_and_unique():
    ts = [t.counts for t in enumerate_types(5, 3)]
    assert ts == sorted(ts) and len(set(ts)) == len(ts) == count_types(5, 3)


@pytest.mark.parametrize("n,alphabet", [(n, a) for a in (2, 3) for n in range(1, 13)])
def test_type_class_sizes_partition_sequences(n, alphabet):
    total = np.logaddexp.reduce([log_type_class_size(t) for t in enumerate_types(n, alphabet)])
    assert total == pytest.approx(n * math.log(alphabet), rel=1e-9)


def test_type_class_size_examples():
    assert log_type_class_size(TypeDescriptor((2, 2))) == pytest.approx(math.log(6), abs=1e-13)
    assert log_type_class_size(TypeDescriptor((0, 5))) == 0.0
    exact = oracles.count_sequences_with_counts(3, (3, 2, 1))
    assert exact == 60
    assert log_type_class_size(TypeDescriptor((3, 2, 1))) == pytest.approx(math.log(exact), abs=1e-12)


def test_type_descriptor_helpers():
    t = TypeDescriptor.from_distribution((0.4, 0.6), 10)
    assert t.counts == (4, 6) and t.n == 10 and t.denominator == 5
    with pytest.raises(ConstraintError):
        TypeDescriptor.from_distribution((0.4, 0.6), 3)
    j = JointTypeDescriptor([[1, 2], [0, 3]])
    assert j.marginal_x().counts == (3, 3) and j.marginal_y().counts == (1, 5)


def test_joint_types_decompose_into_conditional_types():
    for n in range(1, 9):
        total = 0
        for qy in enumerate_types(n, 2):
            total += math.prod(count_types(c, 2) for c in qy.counts)
        assert total == count_types(n, 4)


# ---------------------------------------------------------------- type probabilities

def test_conditional_type_probability_examples():
    # n = 1: the point joint type (x, y) has probability p(x)
    for x, y in itertools.product(range(2), range(2)):
        q = np.zeros((2, 2), int)
        q[x, y] = 1
        assert conditional_type_probability(q, P_BSC) == pytest.approx(P_BSC[x], abs=1e-15)
    # uniform p: class size over |X|^n
    q = np.array([[2, 1], [1, 2]])
    size = math.comb(3, 2) * math.comb(3, 1)
    assert conditional_type_probability(q, (0.5, 0.5)) == pytest.approx(size / 2 ** 6, abs=1e-15)


def test_conditional_type_probability_bruteforce():
    y = (0, 1, 1, 0, 1, 1)
    ny = (2, 4)
    for c0 in range(ny[0] + 1):
        for c1 in range(ny[1] + 1):
            q = np.array([[c0, c1], [ny[0] - c0, ny[1] - c1]])
            expect = oracles.conditional_type_prob_bruteforce(P_BSC, y, q)
            assert conditional_type_probability(q, P_BSC) == pytest.approx(expect, rel=1e-12)


def test_cc_conditional_type_probability():
    q = np.array([[1, 0], [0, 1]])
    assert cc_conditional_type_probability(q, TypeDescriptor((1, 1))) == pytest.approx(0.5, abs=1e-15)
    assert cc_conditional_type_probability(np.array([[0, 0], [0, 3]]), TypeDescriptor((0, 3))) == 1.0
    comp = (2, 4)
    y = (0, 0, 1, 1, 1, 0)
    seen = 0.0
    for c00 in range(3):
        for c01 in range(3):
            q = np.array([[c00, c01], [3 - c00, 3 - c01]])
            if q.min() < 0 or q[0].sum() != comp[0]:
                continue
            expect = oracles.cc_conditional_type_prob_bruteforce(comp, y, q)
            got = cc_conditional_type_probability(q, TypeDescriptor(comp))
            assert got == pytest.approx(expect, rel=1e-12)
            seen += got
    assert seen == pytest.approx(1, abs=1e-12)


def test_cc_counting_identity():
    # count of x^n with composition P and joint type Q against y^n equals |T_Q| / |T_{Q_Y}|
    for n in range(2, 9):
        for comp in enumerate_types(n, 2):
            y = tuple([0] * (n // 2) + [1] * (n - n // 2))
            ny = (n // 2, n - n // 2)
            for c00 in range(min(ny[0], comp.counts[0]) + 1):
                c01 = comp.counts[0] - c00
                if not 0 <= c01 <= ny[1]:
                    continue
                q = JointTypeDescriptor([[c00, c01], [ny[0] - c00, ny[1] - c01]])
                count = cc_conditional_type_probability(q, comp) * math.exp(log_type_class_size(comp))
                brute = oracles.cc_conditional_type_prob_bruteforce(comp.counts, y, q.counts) * \
                    oracles.count_sequences_with_counts(2, comp.counts)
                assert count == pytest.approx(brute, rel=1e-10)


def test_conditional_types_sum_to_codebook_size():
    rng = np.random.default_rng(4)
    n, M = 6, 25
    book = rng.choice(2, size=(M, n), p=P_BSC)
    y = rng.choice(2, size=n)
    tally = {}
    for x in book:
        q = np.zeros((2, 2), int)
        np.add.at(q, (x, y), 1)
        tally[q.tobytes()] = tally.get(q.tobytes(), 0) + 1
    assert sum(tally.values()) == M


# ---------------------------------------------------------------- frak Y

def test_frak_y_examples():
    q = np.array([[1, 0], [0, 0]])
    assert frak_y(1.0, q, (1.0, 0.0)) == pytest.approx(1.0, abs=1e-15)
    p_q = conditional_type_probability(np.array([[2, 1], [1, 2]]), P_BSC)
    assert frak_y(1e30, np.array([[2, 1], [1, 2]]), P_BSC) == pytest.approx(math.sqrt(p_q / 1e30), rel=1e-12)
    assert frak_y(1e-30, np.array([[2, 1], [1, 2]]), P_BSC) == pytest.approx(2 * p_q, rel=1e-12)


def test_frak_y_sandwich_on_all_joint_six_types():
    n, R = 6, RATE * LN2
    M = math.exp(n * R)
    kappa = (4 / n) * math.log(n + 1) + math.log(2) / n
    for counts in itertools.product(range(n + 1), repeat=4):
        if sum(counts) != n:
            continue
        q = np.array(counts).reshape(2, 2)
        qj = q / n
        d = joint_kl(qj, np.outer(P_BSC, qj.sum(axis=0)))
        f = d + 0.5 * max(R - d, 0.0)
        mid = -math.log(0.5 * frak_y(M, q, P_BSC)) / n
        assert f - 1e-12 <= mid <= f + kappa + 1e-12


# ---------------------------------------------------------------- finite-n exponents

def test_alpha_finite_n_single_letter():
    val, arg = alpha_finite_n(P_BSC, W_BSC, RATE, 1, base="bits")
    pxy = np.array(P_BSC)[:, None] * np.array(W_BSC)
    best = min(-math.log2(pxy[x, y]) + 0.5 * max(RATE + math.log2(P_BSC[x]), 0)
               for x in range(2) for y in range(2))
    assert val == pytest.approx(best, abs=1e-12)
    assert val == pytest.approx(0.8675, abs=1e-4)
    assert arg.counts.tolist() == [[0, 0], [0, 1]]


def test_alpha_finite_n_plug_in_type():
    # with crossover 1/4 and uniform input, P_XY is an 8-type
    p, w = (0.5, 0.5), ((0.75, 0.25), (0.25, 0.75))
    from softcover.measures import mutual_information

    R = mutual_information(p, w) + 0.05
    val, _ = alpha_finite_n(p, w, R, 8)
    assert val <= 0.5 * (R - mutual_information(p, w)) + 1e-12


def test_alpha_finite_n_converges():
    alpha = alpha_dual(P_BSC, W_BSC, RATE, base="bits").value
    gaps = [abs(alpha_finite_n(P_BSC, W_BSC, RATE, n, base="bits")[0] - alpha) for n in (4, 8, 12, 16, 20)]
    assert gaps[-1] < gaps[0]


def test_aleph_finite_n_examples():
    comp = TypeDescriptor((1, 1))
    assert len(conditional_types(comp, 2, 2)) == 4
    p_u = (0.5, 0.5)
    assert len(conditional_types(TypeDescriptor((2, 2)), 2, 4)) == 9
    val, arg = aleph_finite_n(comp, W_BSC, RATE, 2, base="bits")
    assert arg.marginal_x().counts == (1, 1)
    exact = aleph_dual(p_u, W_BSC, RATE, base="bits").value
    # off-diagonal counts only pay off once n is comparable to 1/crossover
    gaps = [abs(aleph_finite_n(comp, W_BSC, RATE, n, base="bits")[0] - exact) for n in (2, 40, 100, 400)]
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < gaps[0] / 10
    with pytest.raises(ConstraintError):
        conditional_types(comp, 2, 3)


def test_aleph_finite_n_plug_in_upper_bound():
    from softcover.exponents import aleph_primal_objective
    from softcover.measures import mutual_information

    comp = TypeDescriptor((2, 3))
    I = mutual_information((0.4, 0.6), W_BSC)
    R = I + 0.2
    gaps = []
    for n in (5, 50, 400):
        per_x = np.array(comp.counts) * (n // 5)
        # nearest conditional n-type to the channel, row by row
        k = np.rint(np.array(W_BSC)[:, 0] * per_x).astype(int)
        q = np.stack([k / per_x, 1 - k / per_x], axis=1)
        plug = aleph_primal_objective(q, (0.4, 0.6), W_BSC, R)
        val, _ = aleph_finite_n(comp, W_BSC, R, n)
        assert val <= plug + 1e-12
        gaps.append(abs(plug - 0.5 * (R - I)))
    assert gaps[-1] < gaps[0] and gaps[-1] < 1e-3


# ---------------------------------------------------------------- constants

def test_kappa_and_eta_formulas():
    c = finite_n_constants(10, 2, 2, RATE, 0.05, base="bits")
    assert c.kappa_n == pytest.approx(0.4 * math.log2(11) + 0.1, abs=1e-12)
    e = cc_finite_n_constants(10, 2, 2, RATE, 0.05, base="bits")
    assert e.eta_n == pytest.approx(0.8 * math.log2(11), abs=1e-12)
    assert e.upsilon_vacuous and e.phi_n >= 1
    etas = [cc_finite_n_constants(n, 2, 2, RATE, 0.05, base="bits").eta_n for n in (10, 100, 1000)]
    assert etas[0] > etas[1] > etas[2] > 0


def test_ceil_aware_kappa():
    plain = finite_n_constants(10, 2, 2, RATE, 0.05, base="bits")
    ceil = finite_n_constants(10, 2, 2, RATE, 0.05, base="bits", ceil_aware=True)
    assert ceil.kappa_n - plain.kappa_n == pytest.approx(0.5 / 10, abs=1e-12)


def test_upsilon_nonvacuous_at_large_n():
    c = finite_n_constants(4000, 2, 2, RATE, 0.0204, base="bits")
    assert not c.upsilon_vacuous and 0 < c.upsilon_n < 0.05


def test_constant_domains():
    with pytest.raises(DomainError):
        finite_n_constants(10, 2, 2, RATE, 0.05, delta=1.5, base="bits")
    with pytest.raises(DomainError):
        finite_n_constants(10, 2, 2, RATE, 0.05, r=0.5, base="bits")


def test_a_epsilon():
    assert float(a_epsilon(0.0)) == 1.0
    assert float(a_epsilon(1.0)) == pytest.approx(math.e / 4, abs=1e-15)
    vals = a_epsilon(np.linspace(0.01, 0.99, 50))
    assert np.all(np.diff(vals) < 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 9), st.integers(1, 3))
def test_type_class_sizes_match_exhaustive_count(n, alphabet):
    for t in enumerate_types(n, alphabet):
        if n <= 6:
            exact = oracles.count_sequences_with_counts(alphabet, t.counts)
            assert math.exp(log_type_class_size(t)) == pytest.approx(exact, rel=1e-12)
