"""Admissible random perturbations of Fourier data and Monte Carlo campaigns.

Noise normalisation
-------------------
With ``Fx = ∫ x e^{-iwt} dt`` the time-domain norm is ``(1/2pi) ∫ |Fx|^2``.
The class ``||x^{(r)}|| <= 1`` and the recovery error are therefore those of
the multiplier problem for the normalised data ``Fx / sqrt(2pi)``, and the
noise level ``delta`` of a recovery problem is the pointwise standard
deviation of that normalised data.  :func:`measurement_model` converts
``delta`` into a :class:`GaussianPointwise` model acting on ``Fx`` itself
(standard deviation ``sqrt(2pi) * delta``).  :func:`sample_noisy_spectrum`
applies a model literally to whatever spectrum it is given.

Randomness is drawn from a Philox stream keyed by ``(seed, trial)``; within
a trial the draws are consumed in frequency-index order, so results do not
depend on how trials are scheduled.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np
from numpy.polynomial import hermite_e

from .applications import DerivativeProblem, HeatProblem
from .errors import DomainError, InsufficientTrials
from .lowerbound import DiscreteGrid
from .optimal_core import OptimalFilter, extremal_function, solve_cutoff
from .quadrature import integrate
from .spectral import (FrequencyGrid, SignalSamples, Spectrum, _inverse_raw, forward_transform,
                       inverse_transform, recovery_multiplier)

SQRT_2PI = math.sqrt(2.0 * math.pi)
MIN_TRIALS = 100
BATCH_SIZE = 64

Method = Union[DerivativeProblem, HeatProblem]


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(trial)])))


# -- noise models ----------------------------------------------------------------

@dataclass(frozen=True)
class GaussianPointwise:
    """Hermitian complex Gaussian noise with ``E|z(w)|^2 = delta^2`` at every grid point."""

    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise DomainError("delta must be positive")

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Noise vector on an ``n``-point centred grid.

        Index ``n//2 + m`` and ``n//2 - m`` carry conjugate values; the
        self-paired indices 0 and ``n//2`` get real noise of variance
        ``delta^2``.
        """
        half = n // 2
        g = rng.standard_normal(n)
        z = np.empty(n, dtype=complex)
        pos = (g[2:half + 1] + 1j * g[half + 1:]) * (self.delta / math.sqrt(2.0))
        z[half + 1:] = pos
        z[1:half] = np.conj(pos[::-1])
        z[half] = self.delta * g[0]
        z[0] = self.delta * g[1]
        return z


def measurement_model(delta: float) -> GaussianPointwise:
    """Gaussian model on ``Fx`` whose normalised data ``Fx/sqrt(2pi)`` has variance ``delta^2``."""
    return GaussianPointwise(SQRT_2PI * delta)


def sample_noisy_spectrum(clean: Spectrum, model, seed: int, trial: int = 0) -> Spectrum:
    """``clean`` plus one deterministic draw of ``model`` keyed by ``(seed, trial)``."""
    noise = model.draw(clean.grid.n, trial_rng(seed, trial)) if isinstance(model, GaussianPointwise) \
        else model.perturbation(clean.grid, trial_rng(seed, trial))
    hermitian = clean.hermitian and isinstance(model, GaussianPointwise)
    return clean.with_values(clean.values + noise, hermitian=hermitian)


@dataclass(frozen=True)
class EtaDistribution:
    """Staircase random element with mean ``sum s_j tau_j e_j`` and cell variance ``delta^2``.

    With ``p_j = delta^2 / (delta^2 + tau_j^2)`` the outcome that keeps the
    first ``J`` cells, ``sum_{i<J} s_i tau_i / (1 - p_i) e_i``, has probability
    ``p_{J+1} - p_J`` (``p_0 = 0``, ``p_{m+1} = 1``).
    """

    tau: np.ndarray
    signs: np.ndarray
    delta: float

    @property
    def size(self) -> int:
        return self.tau.size

    @property
    def p(self) -> np.ndarray:
        d2 = self.delta * self.delta
        return d2 / (d2 + self.tau * self.tau)

    @property
    def levels(self) -> np.ndarray:
        return self.signs * self.tau / (1.0 - self.p)

    def outcome_table(self) -> tuple[np.ndarray, np.ndarray]:
        """``(probabilities, values)``; row ``J`` of ``values`` keeps the first ``J`` cells."""
        m = self.size
        probs = np.diff(np.concatenate([[0.0], self.p, [1.0]]))
        keep = np.arange(m)[None, :] < np.arange(m + 1)[:, None]
        return probs, np.where(keep, self.levels[None, :], 0.0)

    def mean(self) -> np.ndarray:
        probs, vals = self.outcome_table()
        return probs @ vals

    def variance(self) -> np.ndarray:
        probs, vals = self.outcome_table()
        mean = probs @ vals
        return probs @ (vals - mean) ** 2

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """Cell values of ``size`` independent draws (shape ``(size, m)``)."""
        u = rng.random(size)
        J = np.searchsorted(self.p, u, side="right")
        keep = np.arange(self.size) < np.asarray(J)[..., None]
        return np.where(keep, self.levels, 0.0)


def eta_distribution(tau, signs, delta: float) -> EtaDistribution:
    """The adversarial distribution for a non-increasing positive ``tau``.

    Raises:
        DomainError: ``tau`` not positive and non-increasing, or ``signs`` not ``±1``.
    """
    tau = np.asarray(tau, dtype=float)
    signs = np.asarray(signs, dtype=float)
    if tau.ndim != 1 or tau.size == 0 or signs.shape != tau.shape:
        raise DomainError("tau and signs must be non-empty vectors of equal length")
    if np.any(tau <= 0) or np.any(np.diff(tau) > 0):
        raise DomainError("tau must be positive and non-increasing")
    if not np.all(np.abs(signs) == 1):
        raise DomainError("signs must be +1 or -1")
    if not delta > 0:
        raise DomainError("delta must be positive")
    return EtaDistribution(tau, signs, float(delta))


@dataclass(frozen=True)
class AdversarialEta:
    """Noise ``eta(x_tau) - x_tau`` laid onto a frequency grid through the cells of ``cells``.

    Not hermitian: mirrored cells receive independent values.
    """

    delta: float
    tau: np.ndarray
    cells: DiscreteGrid
    signs: np.ndarray | None = None

    def distribution(self) -> EtaDistribution:
        s = np.ones_like(np.asarray(self.tau, float)) if self.signs is None else self.signs
        return eta_distribution(self.tau, s, self.delta)

    def perturbation(self, grid: FrequencyGrid, rng: np.random.Generator) -> np.ndarray:
        dist = self.distribution()
        cell_noise = dist.sample(rng) - dist.signs * dist.tau
        idx = self.cells.cell_index(grid.omega)
        full = np.concatenate([cell_noise, np.zeros(self.cells.size - dist.size)])
        return np.where(idx >= 0, full[np.maximum(idx, 0)], 0.0).astype(complex)


# -- test signals ----------------------------------------------------------------

class TestSignal:
    """A function known through its Fourier transform ``Fx``.

    ``target`` returns ``Lambda x`` on the time grid; the default computes it
    spectrally from the sampled ``Fx``.
    """

    __test__ = False  # not a pytest class
    breakpoints: tuple[float, ...] = ()
    extent: float = 50.0

    def fourier(self, omega):
        raise NotImplementedError

    def spectrum(self, grid: FrequencyGrid) -> Spectrum:
        return Spectrum(grid, self.fourier(grid.omega), hermitian=True)

    def target(self, method: Method, grid: FrequencyGrid) -> np.ndarray:
        spec = self.spectrum(grid)
        return inverse_transform(spec.with_values(method_operator(method, grid.omega) * spec.values)).values

    def scaled(self, factor: float) -> "TestSignal":
        raise NotImplementedError


def method_operator(method: Method, omega) -> np.ndarray:
    """The exact multiplier of ``Lambda``: ``(i w)^k`` or ``exp(-w^2 T)``."""
    omega = np.asarray(omega, dtype=float)
    if isinstance(method, DerivativeProblem):
        return (1j * omega) ** method.k
    return np.exp(-omega * omega * method.T).astype(complex)


@dataclass(frozen=True)
class GaussianSignal(TestSignal):
    """``amplitude * exp(-(t - shift)^2 / (2 width^2))``; targets are analytic."""

    amplitude: float = 1.0
    width: float = 1.0
    shift: float = 0.0

    @property
    def extent(self) -> float:
        return 40.0 / self.width

    def fourier(self, omega):
        omega = np.asarray(omega, dtype=float)
        s = self.width
        return (self.amplitude * s * SQRT_2PI * np.exp(-0.5 * (s * omega) ** 2)
                * np.exp(-1j * omega * self.shift))

    def target(self, method: Method, grid: FrequencyGrid) -> np.ndarray:
        t = -grid.t_max + (2.0 * grid.t_max / grid.n) * np.arange(grid.n) - self.shift
        s = self.width
        if isinstance(method, DerivativeProblem):
            k = method.k
            he = hermite_e.hermeval(t / s, [0] * k + [1])
            return self.amplitude * (-1) ** k * s ** -k * he * np.exp(-0.5 * (t / s) ** 2)
        s2 = math.sqrt(s * s + 2.0 * method.T)
        return self.amplitude * s / s2 * np.exp(-0.5 * (t / s2) ** 2)

    def scaled(self, factor: float) -> "GaussianSignal":
        return replace(self, amplitude=self.amplitude * factor)


@dataclass(frozen=True)
class BumpSignal(TestSignal):
    """Band-limited ``Fx(w) = amplitude * (1 - (w/band)^2)^3_+``."""

    amplitude: float = 1.0
    band: float = 1.0

    @property
    def extent(self) -> float:
        return self.band

    @property
    def breakpoints(self):
        return (0.0,)

    def fourier(self, omega):
        u = np.asarray(omega, dtype=float) / self.band
        return (self.amplitude * np.clip(1.0 - u * u, 0.0, None) ** 3).astype(complex)

    def scaled(self, factor: float) -> "BumpSignal":
        return replace(self, amplitude=self.amplitude * factor)


@dataclass(frozen=True)
class ExtremalSignal(TestSignal):
    """``Fx = scale * sqrt(2pi) * x̂`` for the solved optimal filter.

    The grid point at the origin, where ``x̂`` has a pole, carries the cell
    average of ``x̂`` over ``[-dw/2, dw/2]``.
    """

    filt: OptimalFilter = field(repr=False)
    scale: float = 1.0

    @property
    def extent(self) -> float:
        return self.filt.cutoff

    @property
    def breakpoints(self):
        return (0.0,)

    def fourier(self, omega):
        return (self.scale * SQRT_2PI * extremal_function(self.filt, omega)).astype(complex)

    def spectrum(self, grid: FrequencyGrid) -> Spectrum:
        from .lowerbound import pole_cell_average

        w = grid.omega
        vals = self.fourier(np.where(w == 0, 1.0, w))
        vals[grid.n // 2] = self.scale * SQRT_2PI * pole_cell_average(self.filt, 0.5 * grid.spacing)
        return Spectrum(grid, vals, hermitian=True)

    def scaled(self, factor: float) -> "ExtremalSignal":
        return replace(self, scale=self.scale * factor)


@dataclass(frozen=True)
class SampledSignal(TestSignal):
    """Arbitrary time samples; ``Fx`` and ``Lambda x`` come from the scaled DFT."""

    samples: SignalSamples = field(repr=False)

    def grid(self) -> FrequencyGrid:
        return FrequencyGrid.for_time_grid(self.samples.n, self.samples.t_max)

    def spectrum(self, grid: FrequencyGrid | None = None) -> Spectrum:
        spec = forward_transform(self.samples)
        if grid is not None and grid != spec.grid:
            raise DomainError("sampled signal lives on a different grid")
        return spec

    def scaled(self, factor: float) -> "SampledSignal":
        s = self.samples
        return SampledSignal(SignalSamples(s.n, s.t_max, s.values * factor))


def class_norm_sq(signal: TestSignal, pair) -> float:
    """``(1/2pi) ∫ nu |Fx|^2 dw``, i.e. ``||x^{(r)}||^2`` for the built-in pairs."""
    L = signal.extent

    def g(w):
        return pair.nu(w) * np.abs(signal.fourier(w)) ** 2

    return integrate(g, -L, L, rel_tol=1e-10, breakpoints=signal.breakpoints) / (2.0 * math.pi)


def scale_to_class(signal: TestSignal, pair, level: float = 1.0) -> TestSignal:
    """Rescale ``signal`` so that its class norm equals ``level``."""
    return signal.scaled(math.sqrt(level / class_norm_sq(signal, pair)))


def expected_error_sq(method: Method, signal: TestSignal, delta: float | None = None,
                      cutoff: float | None = None) -> float:
    """Continuum ``E||Lambda x - phi(y)||^2`` for this signal, by quadrature.

    ``(1/2pi) ∫ |mu|^2 |1 - alpha|^2 |Fx|^2 + delta^2 ∫ |mu|^2 alpha^2``.
    """
    td = method.cutoff() if cutoff is None else cutoff
    delta = method.delta if delta is None else delta
    pair = method.pair
    L = max(signal.extent, td)
    pts = (0.0, td, -td, *signal.breakpoints)

    def bias(w):
        return (pair.abs_mu(w) * (1.0 - method.alpha(w, td)) * np.abs(signal.fourier(w))) ** 2

    def var(w):
        return (pair.abs_mu(w) * method.alpha(w, td)) ** 2

    b = integrate(bias, -L, L, rel_tol=1e-10, breakpoints=pts) / (2.0 * math.pi)
    v = integrate(var, -td, td, rel_tol=1e-10, breakpoints=(0.0,))
    return b + delta * delta * v


def expected_discrete_error_sq(method: Method, signal: TestSignal, grid: FrequencyGrid,
                               delta: float | None = None, cutoff: float | None = None) -> float:
    """Exact expectation of the simulated squared error on ``grid`` under Gaussian noise."""
    td = method.cutoff() if cutoff is None else cutoff
    delta = method.delta if delta is None else delta
    m = recovery_multiplier(grid, method, td)
    spec = signal.spectrum(grid)
    target = signal.target(method, grid)
    dt = 2.0 * grid.t_max / grid.n
    rec = inverse_transform(spec.with_values(m * spec.values)).values
    bias = float(np.sum(np.abs(rec - target) ** 2) * dt)
    return bias + delta * delta * float(np.sum(np.abs(m) ** 2) * grid.spacing)


def discretization_allowance(method: Method, signal: TestSignal, grid: FrequencyGrid,
                             delta: float | None = None, cutoff: float | None = None) -> float:
    """``|sqrt(discrete expected mse) - sqrt(continuum expected mse)|`` for this signal."""
    d = expected_discrete_error_sq(method, signal, grid, delta, cutoff)
    c = expected_error_sq(method, signal, delta, cutoff)
    return abs(math.sqrt(d) - math.sqrt(c))


# -- Monte Carlo -----------------------------------------------------------------

@dataclass(frozen=True)
class SimulationReport:
    trials: int
    empirical_rmse: float
    rmse_stderr: float
    theoretical_error: float
    seed: int
    problem: dict
    delta: float
    grid: FrequencyGrid
    signal: str = ""

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "delta": self.delta,
            "trials": self.trials,
            "seed": self.seed,
            "empirical_rmse": self.empirical_rmse,
            "rmse_stderr": self.rmse_stderr,
            "theoretical_error": self.theoretical_error,
            "grid": {"n": self.grid.n, "freq_max": self.grid.freq_max},
        }


def _thread_count(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("OPTIREC_THREADS", "0") or 0)
    return threads if threads > 0 else (os.cpu_count() or 1)


def _merge(a, b):
    """Chan et al. pairwise update of ``(count, mean, m2)``."""
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    d = mb - ma
    return n, ma + d * nb / n, sa + sb + d * d * na * nb / n


def monte_carlo_error(
    problem: Method,
    signal: TestSignal | SignalSamples,
    model=None,
    trials: int = 1000,
    seed: int = 0,
    *,
    grid: FrequencyGrid | None = None,
    threads: int | None = None,
) -> SimulationReport:
    """Empirical root-mean-square error of the optimal method on ``signal``.

    ``model`` expresses noise on the normalised data ``Fx/sqrt(2pi)`` and
    defaults to ``GaussianPointwise(problem.delta)``.

    Raises:
        InsufficientTrials: ``trials < 100``.
        GridTooNarrow: the filter support does not fit in the grid.
    """
    if trials < MIN_TRIALS:
        raise InsufficientTrials(f"at least {MIN_TRIALS} trials are required, got {trials}")
    if isinstance(signal, SignalSamples):
        signal = SampledSignal(signal)
    if grid is None:
        if not isinstance(signal, SampledSignal):
            raise DomainError("a frequency grid is required for analytic signals")
        grid = signal.grid()
    model = GaussianPointwise(problem.delta) if model is None else model
    td = problem.cutoff()
    mult = recovery_multiplier(grid, problem, td)
    clean = signal.spectrum(grid)
    target = signal.target(problem, grid)
    dt = 2.0 * grid.t_max / grid.n
    base = mult * clean.values
    real_out = isinstance(model, GaussianPointwise)

    def run_batch(start: int):
        stop = min(start + BATCH_SIZE, trials)
        noise = np.empty((stop - start, grid.n), dtype=complex)
        for i, trial in enumerate(range(start, stop)):
            rng = trial_rng(seed, trial)
            if isinstance(model, GaussianPointwise):
                noise[i] = model.draw(grid.n, rng)
            else:
                noise[i] = model.perturbation(grid, rng)
        rec = _inverse_raw(base + SQRT_2PI * mult * noise, grid)
        if real_out:
            rec = rec.real
        err = np.sum(np.abs(rec - target) ** 2, axis=1) * dt
        mean = float(np.mean(err))
        return err.size, mean, float(np.sum((err - mean) ** 2))

    starts = range(0, trials, BATCH_SIZE)
    nthreads = _thread_count(threads)
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as pool:
            parts = list(pool.map(run_batch, starts))
    else:
        parts = [run_batch(s) for s in starts]
    acc = parts[0]
    for part in parts[1:]:
        acc = _merge(acc, part)
    n, mse, m2 = acc
    rmse = math.sqrt(mse)
    sd = math.sqrt(m2 / (n - 1))
    stderr = sd / math.sqrt(n) / (2.0 * rmse) if rmse > 0 else 0.0
    return SimulationReport(
        trials=n,
        empirical_rmse=rmse,
        rmse_stderr=stderr,
        theoretical_error=problem.error(),
        seed=int(seed),
        problem=problem.to_dict(),
        delta=problem.delta,
        grid=grid,
        signal=type(signal).__name__,
    )


def worst_case_family(problem: Method) -> list[TestSignal]:
    """Ten admissible signals with ``||x^{(r)}|| <= 1`` used for dominance checks."""
    filt = solve_cutoff(problem.recovery_problem())
    pair = problem.pair
    raw: Sequence[tuple[TestSignal, float]] = [
        (ExtremalSignal(filt), 1.0),
        (ExtremalSignal(filt), 0.5),
        (GaussianSignal(width=0.5), 1.0),
        (GaussianSignal(width=1.0), 1.0),
        (GaussianSignal(width=2.0, shift=3.0), 1.0),
        (GaussianSignal(width=4.0), 0.25),
        (BumpSignal(band=0.5 * filt.cutoff), 1.0),
        (BumpSignal(band=filt.cutoff), 1.0),
        (BumpSignal(band=2.0 * filt.cutoff), 0.8),
        (GaussianSignal(width=1.5, shift=-5.0), 0.0625),
    ]
    return [sig if isinstance(sig, ExtremalSignal) and level == 1.0
            else scale_to_class(sig, pair, level) for sig, level in raw]
