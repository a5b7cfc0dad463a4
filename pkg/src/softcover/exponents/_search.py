"""Small deterministic maximizers used by the exponent solvers."""

import numpy as np

INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


def maximize_interval(f, lo=0.0, hi=1.0, grid=101, tol=1e-12, max_iter=200):
    """Maximize a scalar function on [lo, hi].

    A coarse grid picks the bracket around the best sample, golden-section
    search refines it, and the best point ever evaluated is returned as
    ``(x, f(x), evaluations)``.
    """
    xs = np.linspace(lo, hi, grid)
    vals = np.array([f(x) for x in xs])
    evals = grid
    k = int(np.argmax(vals))
    best_x, best_f = float(xs[k]), float(vals[k])
    a, b = float(xs[max(k - 1, 0)]), float(xs[min(k + 1, grid - 1)])

    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    evals += 2
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        evals += 1
    for x, fx in ((c, fc), (d, fd)):
        if fx > best_f:
            best_x, best_f = float(x), float(fx)
    return best_x, best_f, evals


def zoom_maximize_2d(f_grid, box, coarse=65, fine=9, tol=1e-11, seeds=(), max_levels=80):
    """Maximize a vectorized 2-D function on a box by grid search with dyadic zoom.

    ``f_grid(xs, ys)`` returns the matrix of values on the tensor grid. The
    window around the incumbent halves at every level until narrower than ``tol``.
    Returns ``(x, y, value, levels)``.
    """
    (x0, x1), (y0, y1) = box
    xs, ys = np.linspace(x0, x1, coarse), np.linspace(y0, y1, coarse)
    vals = f_grid(xs, ys)
    i, j = np.unravel_index(np.nanargmax(vals), vals.shape)
    bx, by, bv = xs[i], ys[j], vals[i, j]
    for sx, sy in seeds:
        v = f_grid(np.array([sx]), np.array([sy]))[0, 0]
        if v > bv:
            bx, by, bv = sx, sy, v
    hx, hy = (x1 - x0) / (coarse - 1), (y1 - y0) / (coarse - 1)
    levels = 0
    while max(hx, hy) > tol and levels < max_levels:
        xs = np.clip(np.linspace(bx - hx, bx + hx, fine), x0, x1)
        ys = np.clip(np.linspace(by - hy, by + hy, fine), y0, y1)
        vals = f_grid(xs, ys)
        i, j = np.unravel_index(np.nanargmax(vals), vals.shape)
        if vals[i, j] >= bv:
            bx, by, bv = xs[i], ys[j], vals[i, j]
        hx, hy = hx / 2, hy / 2
        levels += 1
    return float(bx), float(by), float(bv), levels


def zoom_minimize_2d(f_grid, box, **kw):
    x, y, v, levels = zoom_maximize_2d(lambda a, b: -f_grid(a, b), box, **kw)
    return x, y, -v, levels
