import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

import oracles
from conftest import LN2, P_BSC, RATE, W_BSC
from softcover.errors import DegenerateChannelError, DomainError, SizeError
from softcover.exponents import (
    aleph_dual,
    aleph_primal_objective,
    alpha_dual,
    alpha_primal_bruteforce,
    alpha_primal_objective,
    beta_exponent,
    beta_objective,
    beth_exponent,
    beth_primal_objective,
    daleth_exponent,
    g_function,
    gamma_exponent,
    gimel_dual_value,
    gimel_exponent,
    gimel_primal_objective,
    rate_sweep,
    sweep_to_csv,
    tilted_optimizer,
    zeta_exponent,
    zeta_primal_bruteforce,
    zeta_primal_objective,
)
from softcover.measures import Channel, mutual_information, mutual_varentropy, renyi_divergence_joint

I_BSC = mutual_information(P_BSC, W_BSC)
PXY = np.array(P_BSC)[:, None] * np.array(W_BSC)
PY = PXY.sum(axis=0)


@pytest.fixture(scope="module")
def bsc_cc():
    """Constant-composition exponents on the reference instance, computed once."""
    return {
        "aleph": aleph_dual(P_BSC, W_BSC, RATE, base="bits"),
        "beth": beth_exponent(P_BSC, W_BSC, RATE, base="bits"),
        "gimel": gimel_exponent(P_BSC, W_BSC, RATE, base="bits"),
        "daleth": daleth_exponent(P_BSC, W_BSC, RATE, base="bits"),
    }


def random_instance(seed, shape=(2, 2)):
    rng = np.random.default_rng(seed)
    p, w = oracles.random_input(rng, shape[0]), oracles.random_channel(rng, *shape, floor=0.05)
    return p, w, mutual_information(p, w)


# ---------------------------------------------------------------- alpha

def test_alpha_reference_values():
    assert alpha_dual(P_BSC, W_BSC, RATE, base="bits").value == pytest.approx(2.0429e-2, abs=1e-5)
    rev = Channel(W_BSC).reverse(P_BSC)
    assert alpha_dual(PY, rev, RATE, base="bits").value == pytest.approx(2.0585e-2, abs=1e-5)


def test_alpha_zero_at_mutual_information():
    assert alpha_dual(P_BSC, W_BSC, I_BSC).value == 0.0


def test_alpha_primal_plug_ins():
    R = I_BSC + 0.1
    assert alpha_primal_objective(PXY, P_BSC, W_BSC, R) == pytest.approx(0.5 * (R - I_BSC), abs=1e-14)
    prod = np.outer(P_BSC, PY)
    expect = oracles.kl(prod, PXY) + R / 2
    assert alpha_primal_objective(prod, P_BSC, W_BSC, R) == pytest.approx(expect, abs=1e-14)


def test_tilted_optimizer_certificate():
    res = alpha_dual(P_BSC, W_BSC, RATE, base="bits")
    q = tilted_optimizer(P_BSC, W_BSC, res.lambda_star)
    assert q.probs.sum() == pytest.approx(1, abs=1e-12)
    assert q.marginal_x().probs.sum() == pytest.approx(1, abs=1e-12)
    assert alpha_primal_objective(q, P_BSC, W_BSC, RATE, base="bits") == pytest.approx(res.value, abs=1e-6)
    assert np.allclose(tilted_optimizer(P_BSC, W_BSC, 1.0).probs, PXY, atol=1e-15)


def test_alpha_bruteforce_matches_dual():
    res = alpha_dual(P_BSC, W_BSC, RATE, base="bits")
    assert alpha_primal_bruteforce(P_BSC, W_BSC, RATE, grid_step=1e-3, base="bits") == pytest.approx(res.value, abs=1e-4)
    assert alpha_primal_bruteforce(P_BSC, W_BSC, I_BSC * 0.9) == pytest.approx(0, abs=1e-9)


def test_degenerate_channels_rejected():
    deg = ((0.2, 0.8), (0.2, 0.8))
    for solver in (alpha_dual, gamma_exponent, zeta_exponent, beta_exponent, aleph_dual, daleth_exponent):
        with pytest.raises(DegenerateChannelError):
            solver((0.5, 0.5), deg, 0.3)
    with pytest.raises(DegenerateChannelError):
        alpha_primal_bruteforce((0.5, 0.5), deg, 0.3)


def test_bruteforce_size_guard():
    with pytest.raises(SizeError):
        alpha_primal_bruteforce(np.full(4, 0.25), 0.5 * np.eye(4) + 0.125, 1.0)


def test_rate_must_be_positive():
    with pytest.raises(DomainError):
        alpha_dual(P_BSC, W_BSC, 0.0)


def test_alpha_monotone_in_rate():
    rates = np.linspace(I_BSC + 1e-3, I_BSC + 0.3, 12)
    vals = [alpha_dual(P_BSC, W_BSC, r).value for r in rates]
    assert np.all(np.diff(vals) >= -1e-12)
    assert vals[0] > 0


def test_near_capacity_ratio_converges():
    var = mutual_varentropy(P_BSC, W_BSC)
    gaps = []
    for eps in (0.02, 0.01, 0.005):
        ratio = alpha_dual(P_BSC, W_BSC, I_BSC + eps).value / (eps ** 2 / (2 * var))
        gaps.append(abs(ratio - 1))
    assert gaps[0] > gaps[1] > gaps[2]


# ---------------------------------------------------------------- beta, gamma, zeta

def test_beta_gamma_zeta_reference_values():
    assert beta_exponent(P_BSC, W_BSC, RATE, base="bits").value == pytest.approx(2.0331e-2, abs=5e-5)
    assert gamma_exponent(P_BSC, W_BSC, RATE, base="bits").value == pytest.approx(2.0116e-2, abs=1e-5)
    assert 0.5 * zeta_exponent(P_BSC, W_BSC, RATE, base="bits").value == pytest.approx(1.3767e-2, abs=1e-5)


def test_beta_on_diagonal_dominates_gamma():
    # on the diagonal the beta objective dominates the gamma objective pointwise, since tilde-D <= D
    R = RATE * LN2
    for lam in np.linspace(0.05, 1.0, 20):
        gam = lam / (1 + lam) * (R - renyi_divergence_joint(P_BSC, W_BSC, 1 + lam))
        assert beta_objective(P_BSC, W_BSC, R, lam, lam) >= gam - 1e-14
    g = gamma_exponent(P_BSC, W_BSC, RATE)
    assert beta_exponent(P_BSC, W_BSC, RATE).value >= g.value - 1e-12


def test_rates_below_mutual_information_give_zero():
    r = 0.9 * I_BSC
    for solver in (alpha_dual, beta_exponent, gamma_exponent, zeta_exponent, aleph_dual,
                   beth_exponent, gimel_exponent, daleth_exponent):
        assert solver(P_BSC, W_BSC, r).value == pytest.approx(0, abs=1e-12)
    corners = [beta_objective(P_BSC, W_BSC, r, a, b) for a in (0, 32) for b in (-32, 1)]
    assert max(corners) <= 1e-12


def test_gamma_golden_section_matches_dense_grid():
    R = RATE * LN2
    lam = np.linspace(0, 1, 200001)
    curve = np.array([renyi_divergence_joint(P_BSC, W_BSC, 1 + t) for t in lam[::1000]])
    # exact dense evaluation uses the log-MGF closed form
    j = PXY.ravel()
    dens = np.log((np.array(W_BSC) / PY).ravel())
    mgf = np.log(np.exp(np.log(j)[None, :] + lam[:, None] * dens[None, :]).sum(axis=1))
    vals = lam / (1 + lam) * (R - np.where(lam > 0, mgf / np.where(lam > 0, lam, 1), I_BSC))
    assert np.allclose(curve, np.where(lam[::1000] > 0, mgf[::1000] / np.where(lam[::1000] > 0, lam[::1000], 1),
                                       I_BSC), atol=1e-12)
    assert gamma_exponent(P_BSC, W_BSC, R).value == pytest.approx(vals.max(), abs=1e-8)


def test_zeta_primal_vs_dual():
    z = zeta_exponent(P_BSC, W_BSC, RATE).value
    assert zeta_primal_bruteforce(P_BSC, W_BSC, RATE, grid_step=1e-3) == pytest.approx(z, abs=1e-4)
    R = I_BSC + 0.1
    assert zeta_primal_objective(PXY, P_BSC, W_BSC, R) == pytest.approx(R - I_BSC, abs=1e-14)


def test_exponents_below_half_rate():
    R = I_BSC + 0.3
    for solver in (alpha_dual, beta_exponent, gamma_exponent, aleph_dual):
        assert 0 <= solver(P_BSC, W_BSC, R).value < R / 2
    assert 0 <= zeta_exponent(P_BSC, W_BSC, R).value / 2 < R / 2


# ---------------------------------------------------------------- constant composition

def test_constant_composition_reference_values(bsc_cc):
    aleph = bsc_cc["aleph"].value
    assert min(abs(aleph - 2.2216e-2), abs(aleph - 2.21595e-2)) <= 1e-4
    assert 0.5 * bsc_cc["beth"].value == pytest.approx(1.60663e-2, abs=2e-4)
    assert 0.5 * bsc_cc["gimel"].value == pytest.approx(1.10797e-2, abs=5e-5)
    assert 0.5 * bsc_cc["daleth"].value == pytest.approx(1.02143e-2, abs=1e-5)


def test_aleph_certificate(bsc_cc):
    res = bsc_cc["aleph"]
    assert aleph_primal_objective(res.optimizer_dist, P_BSC, W_BSC, RATE, base="bits") == pytest.approx(
        res.value, abs=1e-6)
    assert aleph_dual(P_BSC, W_BSC, I_BSC).value == 0.0


def test_aleph_primal_plug_ins():
    R = I_BSC + 0.1
    assert aleph_primal_objective(W_BSC, P_BSC, W_BSC, R) == pytest.approx(0.5 * (R - I_BSC), abs=1e-14)
    const = np.tile(PY, (2, 1))
    expect = oracles.kl(np.outer(P_BSC, PY), PXY) + R / 2
    assert aleph_primal_objective(const, P_BSC, W_BSC, R) == pytest.approx(expect, abs=1e-14)


def test_aleph_dominates_both_alpha_directions(bsc_cc):
    a = alpha_dual(P_BSC, W_BSC, RATE, base="bits").value
    a_rev = alpha_dual(PY, Channel(W_BSC).reverse(P_BSC), RATE, base="bits").value
    assert bsc_cc["aleph"].value >= max(a, a_rev) - 1e-8


def test_g_function_plug_ins():
    assert g_function(W_BSC, P_BSC, W_BSC) == pytest.approx(I_BSC, abs=1e-10)
    rng = np.random.default_rng(11)
    for _ in range(5):
        q = oracles.random_channel(rng, 2, 3)
        w = oracles.random_channel(rng, 2, 3)
        p = oracles.random_input(rng, 2)
        upper = mutual_information(p, q)
        assert g_function(q, p, w) <= upper + 1e-10


def _g_oracle(q, p, w):
    """2x2 G via a one-parameter scan of the transportation polytope."""
    q, w, p = np.asarray(q), np.asarray(w), np.asarray(p)
    qy = p @ q
    ref = p[:, None] * w
    lo, hi = max(0.0, p[0] - qy[1]), min(p[0], qy[0])

    def f(t):
        r = np.array([[t, p[0] - t], [qy[0] - t, p[1] - qy[0] + t]])
        return oracles.kl(r, ref)

    grid = np.linspace(lo, hi, 20001)
    k = int(np.argmin([f(t) for t in grid]))
    res = minimize_scalar(f, bounds=(grid[max(k - 1, 0)], grid[min(k + 1, 20000)]), method="bounded",
                          options={"xatol": 1e-14})
    cross = float(np.sum(p[:, None] * q * np.log(w)))
    return oracles.entropy(qy) + cross + min(res.fun, f(grid[k]))


def test_g_function_matches_transport_grid():
    rng = np.random.default_rng(5)
    for _ in range(5):
        q, w = oracles.random_channel(rng, 2, 2), oracles.random_channel(rng, 2, 2)
        p = oracles.random_input(rng, 2)
        expect = _g_oracle(q, p, w)
        assert g_function(q, p, w) == pytest.approx(expect, abs=1e-6)
        assert g_function(q, p, w, method="newton") == pytest.approx(expect, abs=1e-6)


def test_beth_and_gimel_plug_ins(bsc_cc):
    R = RATE * LN2
    assert beth_primal_objective(W_BSC, P_BSC, W_BSC, R) == pytest.approx(R - I_BSC, abs=1e-10)
    assert gimel_primal_objective(W_BSC, P_BSC, W_BSC, R) == pytest.approx(R - I_BSC, abs=1e-14)
    beth = bsc_cc["beth"]
    assert beth_primal_objective(beth.optimizer_dist, P_BSC, W_BSC, RATE, base="bits") == pytest.approx(
        beth.value, abs=1e-12)


def test_gimel_dual_lower_bounds_primal(bsc_cc):
    dual = gimel_dual_value(P_BSC, W_BSC, RATE, base="bits")
    assert dual <= bsc_cc["gimel"].value + 1e-7
    assert dual == pytest.approx(bsc_cc["gimel"].value, abs=1e-5)


def test_daleth_golden_section_matches_grid():
    from softcover.measures import sibson_mi

    R = RATE * LN2
    mus = np.linspace(0, 1, 20001)
    vals = [m * (R - sibson_mi(P_BSC, W_BSC, math.inf if m >= 1 else 1 / (1 - m))) for m in mus]
    assert daleth_exponent(P_BSC, W_BSC, R).value == pytest.approx(max(vals), abs=1e-8)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_constant_composition_chain_random(seed):
    p, w, mi = random_instance(seed)
    R = mi + 0.15
    aleph = aleph_dual(p, w, R).value
    beth = beth_exponent(p, w, R).value / 2
    gimel = gimel_exponent(p, w, R).value / 2
    daleth = daleth_exponent(p, w, R).value / 2
    assert aleph >= beth - 1e-7 >= gimel - 2e-7 >= daleth - 3e-7 >= -3e-7
    assert aleph >= alpha_dual(p, w, R).value - 1e-8
    assert aleph < R / 2


def test_outer_search_larger_alphabet():
    p, w, mi = random_instance(9, (2, 3))
    R = mi + 0.1
    gimel = gimel_exponent(p, w, R, starts=6).value / 2
    assert daleth_exponent(p, w, R).value / 2 <= gimel + 1e-7 <= aleph_dual(p, w, R).value + 1e-7


# ---------------------------------------------------------------- sweep

def test_sweep_single_rate_matches_solvers():
    rows, diags = rate_sweep(P_BSC, W_BSC, [RATE], "alpha,gamma,half_zeta", base="bits")
    assert rows[0]["alpha"] == alpha_dual(P_BSC, W_BSC, RATE, base="bits").value
    assert rows[0]["half_zeta"] == 0.5 * zeta_exponent(P_BSC, W_BSC, RATE, base="bits").value
    csv = sweep_to_csv(rows, "alpha,gamma,half_zeta")
    header, line = csv.strip().split("\n")
    assert header == "rate,alpha,gamma,half_zeta"
    assert all("e" in v or "." in v for v in line.split(","))


def test_sweep_iid_ordering():
    rates = I_BSC / LN2 + np.arange(0.001, 0.26, 0.02)
    rows, _ = rate_sweep(P_BSC, W_BSC, rates, "alpha,beta,gamma,half_zeta", base="bits")
    for r in rows:
        assert r["alpha"] >= r["beta"] - 1e-9 >= r["gamma"] - 2e-9 >= r["half_zeta"] - 3e-9 >= -3e-9


def test_sweep_rejects_unordered_rates():
    with pytest.raises(ValueError):
        rate_sweep(P_BSC, W_BSC, [0.9, 0.8], "alpha")
    with pytest.raises(ValueError):
        rate_sweep(P_BSC, W_BSC, [0.9], "omega")
