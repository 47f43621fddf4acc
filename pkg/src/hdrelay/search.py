"""Scalar searches used by the outer P_U optimizations."""

from __future__ import annotations

import math
from typing import Callable

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200
) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``.

    The bracket is shrunk until its width is at most ``tol``. The end
    points are also compared so a maximum sitting on the boundary is kept.
    """
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
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
    x, fx = (c, fc) if fc >= fd else (d, fd)
    for edge in (lo, hi):
        fe = f(edge)
        if fe > fx:
            x, fx = edge, fe
    return x, fx


def bisect_sign_change(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200
) -> tuple[float, float]:
    """Bracket the root of ``f`` with ``f(lo) > 0 >= f(hi)``.

    Returns the final ``(lo, hi)`` bracket of width at most ``tol``.
    """
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo, hi
