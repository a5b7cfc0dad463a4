"""Brute-force minimization over a probability simplex.

Used only as an independent oracle: a uniform grid, a pairwise-transfer
pattern search from the best grid point, and an epigraph SLSQP polish.
Every candidate is a feasible point, so the result upper-bounds the minimum.
"""

import itertools
import math

import numpy as np
from scipy.optimize import minimize


def simplex_grid(dim: int, k: int) -> np.ndarray:
    """All points of the simplex in ``dim`` coordinates with denominators ``k``."""
    if dim == 1:
        return np.ones((1, 1))
    pts = []
    for bars in itertools.combinations(range(k + dim - 1), dim - 1):
        edges = (-1,) + bars + (k + dim - 1,)
        pts.append([edges[i + 1] - edges[i] - 1 for i in range(dim)])
    return np.asarray(pts, float) / k


def grid_denominator(dim: int, grid_step: float, max_points: int) -> int:
    """Largest denominator not finer than ``1/grid_step`` whose grid fits in ``max_points``."""
    k = max(1, int(round(1.0 / grid_step)))
    while k > 1 and math.comb(k + dim - 1, dim - 1) > max_points:
        k -= 1
    return k


def _pattern_search(fun, x, fx, h, halvings):
    d = x.size
    pairs = [(i, j) for i in range(d) for j in range(d) if i != j]
    moves = np.zeros((len(pairs), d))
    for r, (i, j) in enumerate(pairs):
        moves[r, i], moves[r, j] = -1.0, 1.0
    for _ in range(halvings):
        if h < 1e-15:
            break
        while True:
            cand = x + h * moves
            ok = np.all(cand >= 0, axis=1)
            if not np.any(ok):
                break
            vals = np.full(len(pairs), np.inf)
            vals[ok] = fun(cand[ok])
            r = int(np.argmin(vals))
            if vals[r] < fx - 1e-16:
                x, fx = np.clip(cand[r], 0, None), vals[r]
            else:
                break
        h /= 2
    return x, fx


def _epigraph_polish(pieces, x0):
    """min t s.t. t >= piece(x) for each smooth piece, x in the simplex."""
    d = x0.size
    t0 = max(p(x0) for p in pieces)
    cons = [{"type": "eq", "fun": lambda z: np.sum(z[:d]) - 1.0}]
    for piece in pieces:
        cons.append({"type": "ineq", "fun": lambda z, piece=piece: z[d] - piece(z[:d])})
    res = minimize(lambda z: z[d], np.append(x0, t0), method="SLSQP",
                   bounds=[(0.0, 1.0)] * d + [(None, None)], constraints=cons,
                   options={"ftol": 1e-15, "maxiter": 500})
    x = np.clip(res.x[:d], 0, None)
    return x / x.sum()


def minimize_on_simplex(fun, dim, grid_step, pieces=None, halvings=200, max_points=200_000):
    """Return ``(best_point, best_value, denominator)``.

    ``fun`` maps an ``(m, dim)`` batch of simplex points to ``m`` values;
    ``pieces`` are optional smooth functions whose pointwise max is ``fun``.
    """
    k = grid_denominator(dim, grid_step, max_points)
    pts = simplex_grid(dim, k)
    vals = fun(pts)
    b = int(np.argmin(vals))
    x, fx = _pattern_search(fun, pts[b].copy(), float(vals[b]), 1.0 / k, halvings)
    if pieces:
        try:
            y = _epigraph_polish(pieces, x)
            fy = float(fun(y[None, :])[0])
            if fy < fx:
                x, fx = _pattern_search(fun, y, fy, 1e-4, halvings)
        except (ValueError, FloatingPointError):
            pass
    return x, float(fx), k
