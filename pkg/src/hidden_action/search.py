"""Scalar maximization on an interval: coarse grid bracket + golden section."""

from __future__ import annotations

import math
from typing import Callable

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200) -> float:
    """Golden-section search for the maximizer of a unimodal f on [lo, hi]."""
    a, b = lo, hi
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        # >= keeps the left point on ties, which biases toward smaller x
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
    return x1 if f1 >= f2 else x2


def _is_unimodal(values: list[float]) -> bool:
    i = 0
    n = len(values)
    while i + 1 < n and values[i + 1] >= values[i]:
        i += 1
    while i + 1 < n and values[i + 1] <= values[i]:
        i += 1
    return i == n - 1


def grid_golden_max(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    coarse_n: int = 17,
    fine_n: int = 20_001,
    tol: float = 1e-12,
) -> float:
    """Maximize f on [lo, hi]; ties resolve toward the smaller argument.

    A coarse grid locates the bracket around the best grid point and golden
    section refines inside it. If the coarse grid shows f is not unimodal the
    result comes from a fine grid scan instead.
    """
    if hi <= lo:
        return lo
    step = (hi - lo) / (coarse_n - 1)
    xs = [lo + i * step for i in range(coarse_n)]
    xs[-1] = hi
    ys = [f(x) for x in xs]
    if not _is_unimodal(ys):
        fine_step = (hi - lo) / (fine_n - 1)
        best_x, best_y = lo, f(lo)
        for i in range(1, fine_n):
            x = lo + i * fine_step
            y = f(x)
            if y > best_y:
                best_x, best_y = x, y
        return best_x
    k = max(range(coarse_n), key=lambda i: (ys[i], -i))
    a = xs[max(k - 1, 0)]
    b = xs[min(k + 1, coarse_n - 1)]
    x = golden_max(f, a, b, tol=tol)
    # endpoints of the bracket can beat the interior estimate at a boundary optimum
    best_x, best_y = x, f(x)
    for cand in (a, b):
        y = f(cand)
        if y > best_y or (y == best_y and cand < best_x):
            best_x, best_y = cand, y
    return best_x
