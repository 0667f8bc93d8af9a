"""Optimal recovery of a multiplier operator on a weighted L2 ball.

Given an admissible pair ``(|mu|, nu)`` and a noise level ``delta``, the
optimal method keeps the frequencies ``|t| <= t_delta`` where ``t_delta``
solves ``f(t_delta) = delta**-2`` and shrinks them by

    alpha(t) = (1 - inv_ratio(t) * ratio(t_delta))_+ ,

with ``ratio = |mu| / sqrt(nu)``.  Its worst-case root-mean-square error is

    E = delta * sqrt( ∫_{|t|<=t_delta} |mu|^2 (1 - inv_ratio * ratio(t_delta)) dt ).

Every integrand here is written through ``sqrt(nu) * |mu|`` so that no
evaluation hits the ``0 * inf`` of the raw ratio at the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .quadrature import integrate
from .roots import bracket_increasing, solve_increasing
from .weights import WeightPair

ESSSUP_GRID_POINTS = 65_537


@dataclass(frozen=True)
class SolverConfig:
    quad_rel_tol: float = 1e-10
    root_rel_tol: float = 1e-10
    max_bracket_doublings: int = 200
    quad_max_depth: int = 60

    def __post_init__(self):
        if not (self.quad_rel_tol > 0 and self.root_rel_tol > 0):
            raise DomainError("solver tolerances must be positive")
        if self.max_bracket_doublings < 1 or self.quad_max_depth < 1:
            raise DomainError("solver iteration limits must be positive")

    @classmethod
    def from_dict(cls, d: dict | None) -> "SolverConfig":
        if not d:
            return cls()
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise DomainError(f"unknown solver option(s): {sorted(unknown)}")
        return cls(**d)


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class RecoveryProblem:
    pair: WeightPair
    delta: float

    def __post_init__(self):
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise DomainError(f"delta must be positive and finite, got {self.delta!r}")


@dataclass(frozen=True)
class OptimalFilter:
    """Solved optimal method: cutoff, ratio at the cutoff and optimal error."""

    cutoff: float
    ratio_at_cutoff: float
    error: float
    problem: RecoveryProblem = field(repr=False)

    def alpha(self, t):
        return filter_alpha(self, t)

    def extremal(self, t):
        return extremal_function(self, t)


def _quad(func, a, b, cfg: SolverConfig, breakpoints=()):
    return integrate(func, a, b, rel_tol=cfg.quad_rel_tol,
                     max_depth=cfg.quad_max_depth, breakpoints=breakpoints)


def cutoff_integrand(problem: RecoveryProblem, s: float, t):
    """``(ratio(t) / ratio(s) - 1) * nu(t)``, the integrand of ``f(s)``.

    Evaluated as ``inv_ratio(s) * sqrt(nu(t)) |mu(t)| - nu(t)``, whose value
    at ``t = 0`` is the analytic limit 0 for the built-in pairs.
    """
    if not (s > 0 and math.isfinite(s)):
        raise DomainError(f"s must lie in (0, inf), got {s!r}")
    pair = problem.pair
    return pair.inv_ratio(s) * pair.root_nu_abs_mu(t) - pair.nu(t)


def f_general(problem: RecoveryProblem, s: float, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """``f(s) = ∫_{|t|<=s} (ratio(t)/ratio(s) - 1) nu(t) dt`` by quadrature over ``[0, s]``."""
    if not (s > 0 and math.isfinite(s)):
        raise DomainError(f"s must lie in (0, inf), got {s!r}")
    pair = problem.pair
    scale = pair.inv_ratio(s)

    def g(t):
        return scale * pair.root_nu_abs_mu(t) - pair.nu(t)

    return 2.0 * _quad(g, 0.0, s, cfg)


def optimal_error(problem: RecoveryProblem, cutoff: float,
                  cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    pair = problem.pair
    q = pair.ratio(cutoff)

    def g(t):
        return pair.abs_mu(t) ** 2 - q * pair.root_nu_abs_mu(t)

    val = 2.0 * _quad(g, 0.0, cutoff, cfg)
    return problem.delta * math.sqrt(max(val, 0.0))


def solve_cutoff(problem: RecoveryProblem, cfg: SolverConfig = DEFAULT_CONFIG,
                 s0: float = 1.0) -> OptimalFilter:
    """Solve ``f(t_delta) = delta**-2`` and assemble the optimal filter.

    Raises:
        BracketFailure: if no bracket is found within ``max_bracket_doublings``.
        QuadratureFailure: propagated from the evaluation of ``f``.
    """
    target = problem.delta ** -2

    def f(s):
        return f_general(problem, s, cfg)

    lo, f_lo, hi, f_hi = bracket_increasing(f, target, s0, cfg.max_bracket_doublings)
    cutoff = solve_increasing(f, target, lo, f_lo, hi, f_hi, rel_tol=cfg.root_rel_tol)
    return OptimalFilter(
        cutoff=cutoff,
        ratio_at_cutoff=float(problem.pair.ratio(cutoff)),
        error=optimal_error(problem, cutoff, cfg),
        problem=problem,
    )


def filter_alpha(filt: OptimalFilter, t):
    """Optimal multiplier ``(1 - inv_ratio(t) * ratio(t_delta))_+``; exactly 0 for ``|t| >= t_delta``."""
    t = np.asarray(t, dtype=float)
    a = 1.0 - filt.problem.pair.inv_ratio(t) * filt.ratio_at_cutoff
    a = np.where(np.abs(t) >= filt.cutoff, 0.0, np.clip(a, 0.0, 1.0))
    return a if a.ndim else float(a)


def extremal_function(filt: OptimalFilter, t):
    """Worst-case element ``delta * sqrt((ratio(t)/ratio(t_delta) - 1)_+)``.

    Supported on ``[-t_delta, t_delta]``.  It is ``+inf`` at ``t = 0`` when
    the ratio has a pole there (derivative and heat pairs); the pole is
    integrable against ``nu`` so ``∫ nu |x̂|^2 = 1`` still holds.
    """
    t = np.asarray(t, dtype=float)
    pair = filt.problem.pair
    with np.errstate(invalid="ignore", over="ignore"):
        inner = pair.ratio(t) / filt.ratio_at_cutoff - 1.0
    inner = np.where(np.abs(t) >= filt.cutoff, 0.0, np.maximum(inner, 0.0))
    x = filt.problem.delta * np.sqrt(inner)
    return x if x.ndim else float(x)


def extremal_norm(filt: OptimalFilter, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """``∫ nu |x̂|^2 dt`` from point values of :func:`extremal_function`.

    Uses ``t = u^2`` on ``[0, t_delta]`` to flatten the pole at the origin.
    """
    pair = filt.problem.pair

    def g(u):
        t = u * u
        return 2.0 * u * pair.nu(t) * extremal_function(filt, t) ** 2

    return 2.0 * _quad(g, 0.0, math.sqrt(filt.cutoff), cfg)


def error_identity_integral(filt: OptimalFilter, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """``delta^2 ∫_{|t|<=t_delta} |mu|^2 alpha dt`` over the full symmetric interval."""
    pair = filt.problem.pair

    def g(t):
        return pair.abs_mu(t) ** 2 * filter_alpha(filt, t)

    return filt.problem.delta ** 2 * _quad(g, -filt.cutoff, filt.cutoff, cfg,
                                           breakpoints=(0.0,))


def method_error_bound(
    problem: RecoveryProblem,
    alpha: Callable[[np.ndarray], np.ndarray],
    cfg: SolverConfig = DEFAULT_CONFIG,
    *,
    extent: float | None = None,
    breakpoints: Sequence[float] = (),
) -> float:
    """Worst-case error bound of the multiplier method ``y -> alpha * mu * y``.

    Returns ``sqrt(esssup |mu|^2/nu |1 - alpha|^2 + delta^2 ∫ |mu|^2 |alpha|^2)``.
    The esssup is a maximum over 65537 grid points of ``[-extent, extent]``
    (``extent`` defaults to ``pair.domain_hint``); at a point where the ratio
    is infinite the term counts as ``+inf`` unless ``alpha`` equals 1 there.
    The integral is truncated to the same interval and seeded with
    log-spaced breakpoints towards 0.
    """
    pair = problem.pair
    L = float(pair.domain_hint if extent is None else extent)
    grid = np.linspace(-L, L, ESSSUP_GRID_POINTS)
    q = pair.ratio(grid)
    gap = np.abs(1.0 - np.asarray(alpha(grid), dtype=complex))
    finite = np.isfinite(q)
    sup_terms = np.where(finite, (np.where(finite, q, 0.0) * gap) ** 2, 0.0)
    if np.any(~finite & (gap > 0)):
        return math.inf
    sup = float(sup_terms.max())

    def g(t):
        return pair.abs_mu(t) ** 2 * np.abs(np.asarray(alpha(t), dtype=complex)) ** 2

    # log-spaced seeds so a narrow support near the origin cannot be missed
    seeds = L * np.exp2(-np.arange(0, 52, 0.5))
    pts = sorted({0.0, *seeds, *(-seeds), *[float(p) for p in breakpoints],
                  *[-float(p) for p in breakpoints]})
    var = _quad(g, -L, L, cfg, breakpoints=pts)
    return math.sqrt(sup + problem.delta ** 2 * var)
