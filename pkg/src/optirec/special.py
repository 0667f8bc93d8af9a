"""Lower incomplete gamma function."""

from __future__ import annotations

import math

_TINY = 1e-300


def lower_incomplete_gamma(a: float, x: float, *, rel_tol: float = 1e-12,
                           max_iter: int = 10_000) -> float:
    """Unregularised lower incomplete gamma ``γ(a, x) = ∫₀ˣ u^{a-1} e^{-u} du``.

    Uses the power series for ``x < a + 1`` and the Lentz continued fraction
    for the upper function otherwise.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 0.0
    log_pref = a * math.log(x) - x
    if x < a + 1.0:
        term = 1.0 / a
        total = term
        ap = a
        for _ in range(max_iter):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * rel_tol:
                break
        else:
            raise ArithmeticError("incomplete gamma series did not converge")
        return total * math.exp(log_pref)
    # Upper function Γ(a, x) by modified Lentz, then γ = Γ(a) - Γ(a, x).
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, max_iter):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < rel_tol:
            break
    else:
        raise ArithmeticError("incomplete gamma continued fraction did not converge")
    upper = math.exp(log_pref) * h
    return math.gamma(a) - upper
