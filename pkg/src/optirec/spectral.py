"""Sampled Fourier data and the optimal recovery methods on uniform grids.

Convention: ``Fx(w) = ∫ x(t) e^{-i w t} dt``, so ``||x||^2 = (1/2pi) ∫ |Fx|^2``.
Time samples live on ``t_j = -t_max + j dt`` and frequencies on
``w_m = -freq_max + m dw`` with ``dt * dw = 2 pi / n``; index ``n // 2`` is
the origin on both grids.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .applications import DerivativeProblem, HeatProblem
from .errors import DomainError, GridTooNarrow, HermitianViolation

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-9

Method = Union[DerivativeProblem, HeatProblem]


def _check_n(n: int):
    if n < 8 or n & (n - 1):
        raise DomainError(f"sample count must be a power of two >= 8, got {n}")


@dataclass(frozen=True)
class FrequencyGrid:
    n: int
    freq_max: float

    def __post_init__(self):
        _check_n(self.n)
        if not (self.freq_max > 0 and math.isfinite(self.freq_max)):
            raise DomainError("freq_max must be positive")

    @property
    def spacing(self) -> float:
        return 2.0 * self.freq_max / self.n

    @property
    def omega(self) -> np.ndarray:
        return -self.freq_max + self.spacing * np.arange(self.n)

    @property
    def t_max(self) -> float:
        return math.pi * self.n / (2.0 * self.freq_max)

    @classmethod
    def for_time_grid(cls, n: int, t_max: float) -> "FrequencyGrid":
        return cls(n, math.pi * n / (2.0 * t_max))


@dataclass(frozen=True)
class Spectrum:
    grid: FrequencyGrid
    values: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.n,):
            raise DomainError(f"expected {self.grid.n} spectral values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("spectrum contains non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def omega(self) -> np.ndarray:
        return self.grid.omega

    def hermitian_defect(self) -> float:
        """Largest ``|X(-w) - conj(X(w))|`` over the grid, relative to ``max |X|``."""
        v = self.values
        mirror = np.empty_like(v)
        mirror[0] = v[0]
        mirror[1:] = v[:0:-1]
        scale = max(float(np.max(np.abs(v))), 1e-300)
        return float(np.max(np.abs(v - np.conj(mirror)))) / scale

    def with_values(self, values, hermitian: bool | None = None) -> "Spectrum":
        return Spectrum(self.grid, values, self.hermitian if hermitian is None else hermitian)

    def zero_padded(self, factor: int = 2) -> "Spectrum":
        """Same data on a grid ``factor`` times wider with equal spacing."""
        n2 = self.grid.n * factor
        out = np.zeros(n2, dtype=complex)
        start = n2 // 2 - self.grid.n // 2
        out[start:start + self.grid.n] = self.values
        return Spectrum(FrequencyGrid(n2, self.grid.freq_max * factor), out, self.hermitian)


@dataclass(frozen=True)
class SignalSamples:
    n: int
    t_max: float
    values: np.ndarray
    imag_residue: float = field(default=0.0, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != (self.n,):
            raise DomainError(f"expected {self.n} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("signal contains non-finite values")
        if not (self.t_max > 0):
            raise DomainError("t_max must be positive")
        object.__setattr__(self, "values", v)

    @property
    def spacing(self) -> float:
        return 2.0 * self.t_max / self.n

    @property
    def t(self) -> np.ndarray:
        return -self.t_max + self.spacing * np.arange(self.n)

    @classmethod
    def from_function(cls, func, n: int, t_max: float) -> "SignalSamples":
        t = -t_max + (2.0 * t_max / n) * np.arange(n)
        return cls(n, t_max, np.asarray(func(t)))


def l2_norm_sq(sig: SignalSamples) -> float:
    """Riemann sum ``sum |x_j|^2 dt``."""
    return float(np.sum(np.abs(sig.values) ** 2) * sig.spacing)


def spectral_norm_sq(spec: Spectrum) -> float:
    """``(1/2pi) sum |X_m|^2 dw``, equal to :func:`l2_norm_sq` of the inverse."""
    return float(np.sum(np.abs(spec.values) ** 2) * spec.grid.spacing / (2.0 * math.pi))


def forward_transform(sig: SignalSamples, hermitian: bool | None = None) -> Spectrum:
    """Scaled DFT approximating ``Fx`` on the centred frequency grid.

    Real input produces a spectrum flagged hermitian unless told otherwise.
    """
    _check_n(sig.n)
    grid = FrequencyGrid.for_time_grid(sig.n, sig.t_max)
    x = np.asarray(sig.values)
    X = sig.spacing * np.fft.fftshift(np.fft.fft(np.fft.ifftshift(x)))
    if hermitian is None:
        hermitian = not np.iscomplexobj(x)
    return Spectrum(grid, X, hermitian)


def _inverse_raw(values: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    dt = 2.0 * grid.t_max / grid.n
    return np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(values, axes=-1), axis=-1), axes=-1) / dt


def _realify(x: np.ndarray) -> tuple[np.ndarray, float]:
    scale = max(float(np.max(np.abs(x))), 1e-300)
    residue = float(np.max(np.abs(x.imag))) / scale
    if residue > HERMITIAN_TOL:
        raise HermitianViolation(
            f"imaginary residue {residue:.3e} exceeds {HERMITIAN_TOL:g} for a hermitian spectrum"
        )
    return x.real.copy(), residue


def inverse_transform(spec: Spectrum) -> SignalSamples:
    """Inverse of :func:`forward_transform`.

    For hermitian-flagged spectra the output is real; the discarded
    imaginary residue (relative to ``max |x|``) is kept on the result and
    logged at debug level.

    Raises:
        HermitianViolation: flagged spectrum whose residue exceeds 1e-9.
    """
    x = _inverse_raw(spec.values, spec.grid)
    residue = 0.0
    if spec.hermitian:
        x, residue = _realify(x)
        if residue:
            log.debug("discarded imaginary residue %.3e", residue)
    return SignalSamples(spec.grid.n, spec.grid.t_max, x, residue)


def recovery_multiplier(grid: FrequencyGrid, method: Method, cutoff: float | None = None) -> np.ndarray:
    """Complex multiplier of the optimal method sampled on ``grid``.

    Raises:
        GridTooNarrow: if the filter support ``[-t_delta, t_delta]`` exceeds the grid.
    """
    td = method.cutoff() if cutoff is None else cutoff
    if td > grid.freq_max:
        raise GridTooNarrow(
            f"cutoff t_delta={td:.6g} exceeds freq_max={grid.freq_max:.6g}"
        )
    return method.multiplier(grid.omega, td)


def apply_recovery(spec: Spectrum, method: Method, cutoff: float | None = None) -> SignalSamples:
    """``F^{-1}(multiplier * y)``: the optimal derivative or heat recovery from data ``y``."""
    m = recovery_multiplier(spec.grid, method, cutoff)
    return inverse_transform(spec.with_values(m * spec.values))


def method_bias_sq(spec: Spectrum, method: Method, cutoff: float | None = None) -> float:
    """Discrete ``(1/2pi) ∫ |mu|^2 |1 - alpha|^2 |Fx|^2`` for noiseless data ``spec``."""
    td = method.cutoff() if cutoff is None else cutoff
    w = spec.grid.omega
    gap = np.abs(method.pair.abs_mu(w) * (1.0 - method.alpha(w, td)))
    return float(np.sum((gap * np.abs(spec.values)) ** 2) * spec.grid.spacing / (2.0 * math.pi))


# -- CSV I/O -------------------------------------------------------------------

class CSVFormatError(DomainError):
    pass


def _read_rows(path: Path, header: list[str]):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise CSVFormatError(f"{path}: empty file") from None
        if [h.strip() for h in first] != header:
            raise CSVFormatError(f"{path}: row 1: expected header {','.join(header)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CSVFormatError(f"{path}: row {lineno}: expected {len(header)} fields")
            try:
                vals = [float(v) for v in row]
            except ValueError:
                raise CSVFormatError(f"{path}: row {lineno}: non-numeric field") from None
            if not all(math.isfinite(v) for v in vals):
                raise CSVFormatError(f"{path}: row {lineno}: non-finite value")
            rows.append(vals)
    if not rows:
        raise CSVFormatError(f"{path}: no data rows")
    return np.array(rows)


def _uniform_axis(path, axis: np.ndarray, name: str) -> tuple[int, float]:
    n = axis.size
    _check_n(n)
    step = (axis[-1] - axis[0]) / (n - 1)
    expected = axis[0] + step * np.arange(n)
    if step <= 0 or np.max(np.abs(axis - expected)) > 1e-9 * max(abs(axis[0]), step):
        raise CSVFormatError(f"{path}: {name} column is not an increasing uniform grid")
    half = -axis[0]
    if abs(half - step * n / 2) > 1e-9 * half:
        raise CSVFormatError(f"{path}: {name} grid must span [-a, a) with the origin at index n/2")
    return n, half


def read_spectrum_csv(path, hermitian: bool = True) -> Spectrum:
    """Read ``omega,re,im`` rows in increasing frequency on the exact centred grid."""
    path = Path(path)
    data = _read_rows(path, ["omega", "re", "im"])
    n, fmax = _uniform_axis(path, data[:, 0], "omega")
    return Spectrum(FrequencyGrid(n, fmax), data[:, 1] + 1j * data[:, 2], hermitian)


def write_spectrum_csv(path, spec: Spectrum):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega", "re", "im"])
        for om, v in zip(spec.omega, spec.values):
            w.writerow([f"{om:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])


def read_signal_csv(path) -> SignalSamples:
    path = Path(path)
    data = _read_rows(path, ["t", "value"])
    n, tmax = _uniform_axis(path, data[:, 0], "t")
    return SignalSamples(n, tmax, data[:, 1])


def write_signal_csv(path_or_file, sig: SignalSamples):
    own = isinstance(path_or_file, (str, Path))
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh)
        w.writerow(["t", "value"])
        vals = np.real_if_close(sig.values)
        for t, v in zip(sig.t, np.real(vals)):
            w.writerow([f"{t:.17g}", f"{v:.17g}"])
    finally:
        if own:
            fh.close()
