"""Finite-dimensional lower bound for the optimal error.

``[-A, A]`` is cut into ``2N`` cells of width ``A/N``.  Cells are indexed in
interleaved order: position ``2(j-1)`` is the positive cell
``[(j-1)A/N, jA/N)`` and position ``2(j-1)+1`` its mirror
``[-jA/N, -(j-1)A/N)``, ``j = 1..N``.  For every non-increasing ``tau`` with
``sum nu_j tau_j^2 <= 1``,

    E^2 >= sum_j delta^2 / (delta^2 + tau_j^2) * mu_j * tau_j^2,

where ``mu_j`` and ``nu_j`` are the cell integrals of ``|mu|^2`` and ``nu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConstraintViolation, DomainError, QuadratureFailure
from .optimal_core import (DEFAULT_CONFIG, OptimalFilter, RecoveryProblem, SolverConfig,
                           extremal_function, solve_cutoff)
from .quadrature import integrate, integrate_cells
from .weights import WeightPair

CONSTRAINT_SLACK = 1e-12


@dataclass(frozen=True)
class DiscreteGrid:
    A: float
    N: int

    def __post_init__(self):
        if not (self.A > 0 and math.isfinite(self.A)):
            raise DomainError("A must be positive")
        if not (isinstance(self.N, (int, np.integer)) and self.N >= 1):
            raise DomainError("N must be an integer >= 1")

    @property
    def width(self) -> float:
        return self.A / self.N

    @property
    def size(self) -> int:
        return 2 * self.N

    def positive_edges(self) -> np.ndarray:
        return self.width * np.arange(self.N + 1)

    def cell_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Lower/upper bounds of every cell in interleaved order."""
        e = self.positive_edges()
        lo = np.empty(self.size)
        hi = np.empty(self.size)
        lo[0::2], hi[0::2] = e[:-1], e[1:]
        lo[1::2], hi[1::2] = -e[1:], -e[:-1]
        return lo, hi

    def cell_index(self, t) -> np.ndarray:
        """Interleaved cell index containing each ``t`` (``-1`` outside ``[-A, A]``)."""
        t = np.asarray(t, dtype=float)
        h = self.width
        pos = np.minimum(np.floor(t / h), self.N - 1).astype(np.int64)
        neg = np.ceil(-t / h).astype(np.int64)
        idx = np.where(t >= 0, 2 * pos, 2 * (neg - 1) + 1)
        return np.where((t < -self.A) | (t > self.A), -1, idx)


def cell_moments(grid: DiscreteGrid, pair: WeightPair,
                 cfg: SolverConfig = DEFAULT_CONFIG) -> tuple[np.ndarray, np.ndarray]:
    """Cell integrals of ``|mu|^2`` and ``nu``, interleaved."""
    e = grid.positive_edges()
    kw = dict(rel_tol=cfg.quad_rel_tol, max_depth=cfg.quad_max_depth)
    mu_pos = integrate_cells(lambda t: pair.abs_mu(t) ** 2, e, **kw)
    nu_pos = integrate_cells(pair.nu, e, **kw)
    mu_neg = integrate_cells(lambda t: pair.abs_mu(t) ** 2, -e[::-1], **kw)[::-1]
    nu_neg = integrate_cells(pair.nu, -e[::-1], **kw)[::-1]
    mu = np.empty(grid.size)
    nu = np.empty(grid.size)
    mu[0::2], mu[1::2] = mu_pos, mu_neg
    nu[0::2], nu[1::2] = nu_pos, nu_neg
    return mu, nu


def discrete_lower_bound(grid: DiscreteGrid, pair: WeightPair, tau, delta: float, *,
                         moments: tuple[np.ndarray, np.ndarray] | None = None,
                         cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """``sum delta^2 / (delta^2 + tau_j^2) mu_j tau_j^2`` for an admissible ``tau``.

    ``tau`` shorter than ``2N`` is padded with zeros.

    Raises:
        ConstraintViolation: ``tau`` increases somewhere, is negative, or
            ``sum nu_j tau_j^2 > 1 + 1e-12``.
    """
    tau = np.asarray(tau, dtype=float)
    if tau.ndim != 1 or tau.size > grid.size:
        raise DomainError(f"tau must be a vector of length <= {grid.size}")
    tau = np.concatenate([tau, np.zeros(grid.size - tau.size)])
    if np.any(tau < 0) or np.any(np.diff(tau) > 0):
        raise ConstraintViolation("tau must be non-negative and non-increasing")
    mu, nu = cell_moments(grid, pair, cfg) if moments is None else moments
    energy = float(np.sum(nu * tau * tau))
    if energy > 1.0 + CONSTRAINT_SLACK:
        raise ConstraintViolation(f"sum nu_j tau_j^2 = {energy!r} exceeds 1")
    t2 = tau * tau
    return float(np.sum(delta * delta / (delta * delta + t2) * mu * t2))


def pole_cell_average(filt: OptimalFilter, h: float, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """Mean of the extremal function over ``[0, h]``.

    Computed with ``t = u^2``; if the pole is too strong for the mean to
    exist the value at ``h/2`` is returned instead.
    """
    def g(u):
        return 2.0 * u * extremal_function(filt, u * u)

    try:
        val = integrate(g, 0.0, math.sqrt(h), rel_tol=cfg.quad_rel_tol,
                        max_depth=cfg.quad_max_depth,
                        breakpoints=(math.sqrt(min(h, filt.cutoff)),))
    except QuadratureFailure:
        return float(extremal_function(filt, 0.5 * h))
    return val / h


def extremal_tau(grid: DiscreteGrid, filt: OptimalFilter,
                 moments: tuple[np.ndarray, np.ndarray],
                 cfg: SolverConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Cell-midpoint samples of the extremal function, rescaled onto the constraint.

    The two cells touching the origin use the cell average instead of the
    midpoint value.
    """
    lo, hi = grid.cell_bounds()
    tau = np.asarray(extremal_function(filt, 0.5 * (lo + hi)), dtype=float)
    tau[:2] = pole_cell_average(filt, grid.width, cfg)
    _, nu = moments
    energy = float(np.sum(nu * tau * tau))
    if energy > 0:
        tau = tau / math.sqrt(energy)
    return tau


@dataclass(frozen=True)
class CertificateEntry:
    A: float
    N: int
    bound: float
    ratio: float

    def to_dict(self) -> dict:
        return {"A": self.A, "N": int(self.N), "bound": self.bound, "ratio": self.ratio}


@dataclass(frozen=True)
class Certificate:
    problem: RecoveryProblem
    cutoff: float
    theoretical_error_sq: float
    entries: tuple[CertificateEntry, ...]

    @property
    def ratios(self) -> np.ndarray:
        return np.array([e.ratio for e in self.entries])


def certificate(problem: RecoveryProblem, grid_schedule: Sequence[tuple[float, int]] | Iterable,
                cfg: SolverConfig = DEFAULT_CONFIG,
                filt: OptimalFilter | None = None) -> Certificate:
    """Evaluate the x̂-induced discrete bound on each ``(A, N)`` of the schedule."""
    schedule = [(float(A), int(N)) for A, N in grid_schedule]
    if not schedule:
        raise DomainError("grid schedule must not be empty")
    filt = solve_cutoff(problem, cfg) if filt is None else filt
    e2 = filt.error ** 2
    entries = []
    for A, N in schedule:
        grid = DiscreteGrid(A, N)
        mom = cell_moments(grid, problem.pair, cfg)
        tau = extremal_tau(grid, filt, mom, cfg)
        bound = discrete_lower_bound(grid, problem.pair, tau, problem.delta, moments=mom, cfg=cfg)
        entries.append(CertificateEntry(A, N, bound, bound / e2))
    return Certificate(problem, filt.cutoff, e2, tuple(entries))
