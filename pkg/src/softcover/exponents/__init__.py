"""Soft-covering exponents for i.i.d. and constant-composition random codebooks."""

from .cc import (
    aleph_dual,
    aleph_primal_objective,
    beth_exponent,
    beth_primal_objective,
    daleth_exponent,
    g_function,
    gimel_dual_value,
    gimel_exponent,
    gimel_primal_objective,
)
from .iid import (
    alpha_dual,
    alpha_primal_bruteforce,
    alpha_primal_objective,
    beta_exponent,
    beta_objective,
    gamma_exponent,
    tilted_optimizer,
    zeta_exponent,
    zeta_primal_bruteforce,
    zeta_primal_objective,
)
from .result import ExponentResult
from .sweep import COLUMNS, rate_sweep, sweep_to_csv

__all__ = [
    "COLUMNS",
    "ExponentResult",
    "aleph_dual",
    "aleph_primal_objective",
    "alpha_dual",
    "alpha_primal_bruteforce",
    "alpha_primal_objective",
    "beta_exponent",
    "beta_objective",
    "beth_exponent",
    "beth_primal_objective",
    "daleth_exponent",
    "g_function",
    "gamma_exponent",
    "gimel_dual_value",
    "gimel_exponent",
    "gimel_primal_objective",
    "rate_sweep",
    "sweep_to_csv",
    "tilted_optimizer",
    "zeta_exponent",
    "zeta_primal_bruteforce",
    "zeta_primal_objective",
]
