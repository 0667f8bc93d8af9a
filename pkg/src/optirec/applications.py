"""Closed-form recovery problems: derivatives on W_2^r and the heat equation.

Both reduce to the general multiplier problem with ``nu(t) = t^{2r}``; the
derivative problem has ``|mu(t)| = |t|^k`` and everything is explicit, the
heat problem has ``|mu(t)| = exp(-t^2 T)`` and only the cutoff equation needs
a root solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .optimal_core import DEFAULT_CONFIG, RecoveryProblem, SolverConfig
from .quadrature import integrate
from .roots import bracket_increasing, solve_increasing
from .special import lower_incomplete_gamma
from .weights import DerivativePair, HeatPair


def _check_delta(delta):
    if not (delta > 0 and math.isfinite(delta)):
        raise DomainError(f"delta must be positive and finite, got {delta!r}")


@dataclass(frozen=True)
class DerivativeProblem:
    """Recover ``x^{(k)}`` for ``||x^{(r)}|| <= 1`` from noisy ``Fx``."""

    r: int
    k: int
    delta: float

    def __post_init__(self):
        DerivativePair(self.r, self.k)
        _check_delta(self.delta)

    @property
    def pair(self) -> DerivativePair:
        return DerivativePair(self.r, self.k)

    def recovery_problem(self) -> RecoveryProblem:
        return RecoveryProblem(self.pair, self.delta)

    def cutoff(self, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
        return derivative_cutoff(self)

    def error(self, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
        return derivative_error(self)

    def alpha(self, t, cutoff: float | None = None):
        return derivative_alpha(self, t, cutoff)

    def multiplier(self, omega, cutoff: float | None = None):
        """Complex multiplier ``(i omega)^k alpha(omega)`` of the optimal method."""
        omega = np.asarray(omega, dtype=float)
        return (1j * omega) ** self.k * derivative_alpha(self, omega, cutoff)

    def to_dict(self) -> dict:
        return {"problem": "derivative", "r": self.r, "k": self.k, "delta": self.delta}


@dataclass(frozen=True)
class HeatProblem:
    """Recover ``u(T, .)`` for ``u_t = u_xx`` with ``||u_0^{(r)}|| <= 1`` from noisy ``Fu_0``."""

    r: int
    T: float
    delta: float

    def __post_init__(self):
        HeatPair(self.r, self.T)
        _check_delta(self.delta)

    @property
    def pair(self) -> HeatPair:
        return HeatPair(self.r, self.T)

    def recovery_problem(self) -> RecoveryProblem:
        return RecoveryProblem(self.pair, self.delta)

    def cutoff(self, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
        return heat_cutoff(self, cfg)

    def error(self, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
        return heat_error(self, cfg)

    def alpha(self, t, cutoff: float | None = None):
        return heat_alpha(self, t, cutoff)

    def multiplier(self, omega, cutoff: float | None = None):
        omega = np.asarray(omega, dtype=float)
        return np.exp(-omega * omega * self.T) * heat_alpha(self, omega, cutoff)

    def to_dict(self) -> dict:
        return {"problem": "heat", "r": self.r, "T": self.T, "delta": self.delta}


def problem_from_dict(d: dict):
    """Parse ``{"problem": "derivative", "r": 2, "k": 1, "delta": 0.1}`` or the heat analogue."""
    kind = d.get("problem")
    try:
        if kind == "derivative":
            return DerivativeProblem(int(d["r"]), int(d["k"]), float(d["delta"]))
        if kind == "heat":
            return HeatProblem(int(d["r"]), float(d["T"]), float(d["delta"]))
    except KeyError as exc:
        raise DomainError(f"problem {kind!r} is missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise DomainError(f"invalid problem field: {exc}") from None
    raise DomainError(f"unknown problem kind {kind!r}")


# -- derivatives -------------------------------------------------------------

def _derivative_scale(p: DerivativeProblem) -> float:
    # c = 2 delta^2 (r-k) / ((2r+1)(r+k+1)); t_delta = c^{-1/(2r+1)}
    r, k = p.r, p.k
    return 2.0 * p.delta ** 2 * (r - k) / ((2 * r + 1) * (r + k + 1))


def derivative_cutoff(p: DerivativeProblem) -> float:
    return _derivative_scale(p) ** (-1.0 / (2 * p.r + 1))


def derivative_error(p: DerivativeProblem) -> float:
    r, k = p.r, p.k
    base = 2.0 * p.delta ** 2 * (r - k) / (r + k + 1)
    return ((2 * r + 1) ** ((2 * k + 1) / (2 * (2 * r + 1)))
            / math.sqrt(2 * k + 1)
            * base ** ((r - k) / (2 * r + 1)))


def derivative_alpha(p: DerivativeProblem, t, cutoff: float | None = None):
    """``(1 - (|t| / t_delta)^{r-k})_+``."""
    td = derivative_cutoff(p) if cutoff is None else cutoff
    a = np.abs(np.asarray(t, dtype=float)) / td
    out = np.where(a >= 1.0, 0.0, 1.0 - a ** (p.r - p.k))
    return out if out.ndim else float(out)


# -- heat equation -----------------------------------------------------------

def heat_moment(p: HeatProblem, s: float) -> float:
    """``∫_0^s t^r exp(-t^2 T) dt``."""
    if p.r == 1:
        return -math.expm1(-s * s * p.T) / (2.0 * p.T)
    a = 0.5 * (p.r + 1)
    return lower_incomplete_gamma(a, s * s * p.T) / (2.0 * p.T ** a)


def heat_f(p: HeatProblem, s: float) -> float:
    """``2 s^r e^{s^2 T} ∫_0^s t^r e^{-t^2 T} dt - 2 s^{2r+1} / (2r+1)``."""
    if not (s > 0 and math.isfinite(s)):
        raise DomainError(f"s must lie in (0, inf), got {s!r}")
    r = p.r
    return (2.0 * s ** r * math.exp(s * s * p.T) * heat_moment(p, s)
            - 2.0 * s ** (2 * r + 1) / (2 * r + 1))


def heat_cutoff(p: HeatProblem, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    target = p.delta ** -2
    s0 = min(1.0, p.delta ** (2.0 / (2 * p.r + 1)))
    lo, f_lo, hi, f_hi = bracket_increasing(lambda s: heat_f(p, s), target, s0,
                                            cfg.max_bracket_doublings)
    return solve_increasing(lambda s: heat_f(p, s), target, lo, f_lo, hi, f_hi,
                            rel_tol=cfg.root_rel_tol)


def heat_alpha(p: HeatProblem, t, cutoff: float | None = None):
    """``(1 - |t|^r e^{t^2 T} / (t_delta^r e^{t_delta^2 T}))_+``."""
    td = heat_cutoff(p) if cutoff is None else cutoff
    a = np.abs(np.asarray(t, dtype=float))
    with np.errstate(over="ignore"):
        out = 1.0 - (a / td) ** p.r * np.exp((a * a - td * td) * p.T)
    out = np.where(a >= td, 0.0, np.clip(out, 0.0, 1.0))
    return out if out.ndim else float(out)


def heat_error(p: HeatProblem, cfg: SolverConfig = DEFAULT_CONFIG,
               cutoff: float | None = None) -> float:
    """``delta * sqrt(∫_{|t|<=t_delta} e^{-2 t^2 T} alpha(t) dt)``."""
    td = heat_cutoff(p, cfg) if cutoff is None else cutoff

    def g(t):
        return np.exp(-2.0 * t * t * p.T) * heat_alpha(p, t, td)

    val = integrate(g, -td, td, rel_tol=cfg.quad_rel_tol, max_depth=cfg.quad_max_depth,
                    breakpoints=(0.0,))
    return p.delta * math.sqrt(val)
