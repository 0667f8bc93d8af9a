"""Bracketing and safeguarded-secant root finding for increasing functions."""

from __future__ import annotations

from typing import Callable

from .errors import BracketFailure

_EPS = 2.220446049250313e-16


def bracket_increasing(
    f: Callable[[float], float],
    target: float,
    s0: float,
    max_steps: int,
) -> tuple[float, float, float, float]:
    """Find ``lo < hi`` with ``f(lo) < target <= f(hi)`` by doubling/halving from ``s0``.

    Returns ``(lo, f_lo, hi, f_hi)``.
    """
    s = float(s0)
    fs = f(s)
    if fs >= target:
        hi, f_hi = s, fs
        for _ in range(max_steps):
            s *= 0.5
            fs = f(s)
            if fs < target:
                return s, fs, hi, f_hi
            hi, f_hi = s, fs
        raise BracketFailure(f"f stays >= {target!r} down to s={s!r}")
    lo, f_lo = s, fs
    for _ in range(max_steps):
        s *= 2.0
        fs = f(s)
        if fs >= target:
            return lo, f_lo, s, fs
        lo, f_lo = s, fs
    raise BracketFailure(
        f"f(s) < {target!r} after {max_steps} doublings (s={s!r}); "
        "f may not tend to infinity for this weight pair"
    )


def solve_increasing(
    f: Callable[[float], float],
    target: float,
    lo: float,
    f_lo: float,
    hi: float,
    f_hi: float,
    *,
    rel_tol: float = 1e-10,
    max_iter: int = 300,
) -> float:
    """Solve ``f(s) = target`` inside a valid bracket.

    Secant (false-position) steps are taken while they shrink the bracket
    fast enough; otherwise the step falls back to bisection.  Stops once the
    residual is below ``0.1 * rel_tol * |target|`` or the bracket has
    collapsed to a few ulps.
    """
    g_lo, g_hi = f_lo - target, f_hi - target
    res_tol = 0.1 * rel_tol * abs(target)
    best, g_best = (lo, g_lo) if abs(g_lo) < abs(g_hi) else (hi, g_hi)
    width_prev = hi - lo
    for _ in range(max_iter):
        if abs(g_best) <= res_tol or hi - lo <= 4.0 * _EPS * abs(hi):
            return best
        s = hi - g_hi * (hi - lo) / (g_hi - g_lo)
        margin = 1e-3 * (hi - lo)
        if not (lo + margin < s < hi - margin) or (hi - lo) > 0.5 * width_prev:
            s = 0.5 * (lo + hi)
        width_prev = hi - lo
        g = f(s) - target
        if abs(g) < abs(g_best):
            best, g_best = s, g
        if g < 0:
            lo, g_lo = s, g
        else:
            hi, g_hi = s, g
    return best
