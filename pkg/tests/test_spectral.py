import math

import numpy as np
import pytest

from optirec.applications import DerivativeProblem, HeatProblem
from optirec.errors import DomainError, GridTooNarrow, HermitianViolation
from optirec.spectral import (CSVFormatError, FrequencyGrid, SignalSamples, Spectrum,
                              apply_recovery, forward_transform, inverse_transform, l2_norm_sq,
                              method_bias_sq, read_signal_csv, read_spectrum_csv,
                              recovery_multiplier, spectral_norm_sq, write_signal_csv,
                              write_spectrum_csv)


def gaussian_samples(n=2048, t_max=25.0, shift=0.0):
    return SignalSamples.from_function(lambda t: np.exp(-(t - shift) ** 2 / 2), n, t_max)


def test_grid_geometry():
    g = FrequencyGrid(16, 4.0)
    assert g.spacing == 0.5
    assert g.omega[8] == 0.0 and g.omega[0] == -4.0
    assert g.spacing * (2 * g.t_max / g.n) == pytest.approx(2 * math.pi / g.n)
    assert FrequencyGrid.for_time_grid(16, g.t_max) == g
    for bad in (6, 12, 0):
        with pytest.raises(DomainError):
            FrequencyGrid(bad, 1.0)
    with pytest.raises(DomainError):
        FrequencyGrid(8, -1.0)


def test_shifted_gaussian_pair():
    sig = gaussian_samples(shift=1.5)
    spec = forward_transform(sig)
    w = spec.omega
    exact = math.sqrt(2 * math.pi) * np.exp(-w * w / 2) * np.exp(-1.5j * w)
    assert np.max(np.abs(spec.values - exact)) < 1e-12
    assert spec.hermitian and spec.hermitian_defect() < 1e-14


def test_parseval_and_roundtrip_for_complex_signal():
    rng = np.random.default_rng(3)
    sig = SignalSamples(256, 7.0, rng.standard_normal(256) + 1j * rng.standard_normal(256))
    spec = forward_transform(sig)
    assert not spec.hermitian
    assert spectral_norm_sq(spec) == pytest.approx(l2_norm_sq(sig), rel=1e-13)
    back = inverse_transform(spec)
    assert np.max(np.abs(back.values - sig.values)) < 1e-13


def test_flagged_non_hermitian_spectrum_raises():
    g = FrequencyGrid(64, 5.0)
    vals = np.exp(-g.omega ** 2) * (1 + 0.1j * g.omega)  # odd imaginary part breaks symmetry
    vals = vals + 0.05 * np.exp(-(g.omega - 1) ** 2)
    with pytest.raises(HermitianViolation):
        inverse_transform(Spectrum(g, vals, hermitian=True))
    out = inverse_transform(Spectrum(g, vals))
    assert np.iscomplexobj(out.values)


def test_residue_recorded_for_hermitian_spectrum():
    spec = forward_transform(gaussian_samples())
    back = inverse_transform(spec)
    assert not np.iscomplexobj(back.values)
    assert 0.0 <= back.imag_residue < 1e-12


def test_spectrum_validation():
    g = FrequencyGrid(8, 1.0)
    with pytest.raises(DomainError):
        Spectrum(g, np.zeros(7))
    with pytest.raises(DomainError):
        Spectrum(g, np.full(8, np.nan))
    with pytest.raises(DomainError):
        SignalSamples(8, 1.0, np.zeros(9))


def test_recovered_derivative_error_equals_bias():
    p = DerivativeProblem(2, 1, 0.3)
    sig = SignalSamples.from_function(lambda t: np.exp(-t * t / 2), 4096, 60.0)
    spec = forward_transform(sig)
    rec = apply_recovery(spec, p)
    exact = -sig.t * np.exp(-sig.t ** 2 / 2)
    dist_sq = float(np.sum((rec.values - exact) ** 2) * sig.spacing)
    assert dist_sq == pytest.approx(method_bias_sq(spec, p), rel=1e-9)
    assert dist_sq > 0


def test_heat_recovery_of_gaussian_matches_analytic_evolution():
    # tiny delta: cutoff far beyond the Gaussian's band, so the method is the heat semigroup
    p = HeatProblem(1, 0.5, 1e-12)
    sig = SignalSamples.from_function(lambda t: np.exp(-t * t / 2), 1024, 40.0)
    grid = FrequencyGrid.for_time_grid(1024, 40.0)
    rec = apply_recovery(forward_transform(sig), p, cutoff=0.99 * grid.freq_max)
    exact = np.exp(-sig.t ** 2 / (2 * 2.0)) / math.sqrt(2.0)
    assert np.max(np.abs(rec.values - exact)) < 1e-9


def test_grid_too_narrow():
    p = DerivativeProblem(1, 0, 1.0)
    with pytest.raises(GridTooNarrow):
        recovery_multiplier(FrequencyGrid(64, 0.5 * p.cutoff()), p)


def test_zero_padding_preserves_norm_and_spacing():
    spec = forward_transform(gaussian_samples(n=256, t_max=12.0))
    wide = spec.zero_padded(4)
    assert wide.grid.n == 1024 and wide.grid.spacing == spec.grid.spacing
    assert spectral_norm_sq(wide) == pytest.approx(spectral_norm_sq(spec), rel=1e-15)
    np.testing.assert_array_equal(wide.values[384:640], spec.values)


def test_csv_roundtrip_is_exact(tmp_path):
    rng = np.random.default_rng(1)
    g = FrequencyGrid(32, 3.7)
    spec = Spectrum(g, rng.standard_normal(32) + 1j * rng.standard_normal(32))
    write_spectrum_csv(tmp_path / "s.csv", spec)
    back = read_spectrum_csv(tmp_path / "s.csv", hermitian=False)
    assert back.grid.n == 32 and back.grid.freq_max == pytest.approx(3.7, rel=1e-15)
    np.testing.assert_array_equal(back.values, spec.values)

    sig = SignalSamples(16, 2.5, rng.standard_normal(16))
    write_signal_csv(tmp_path / "x.csv", sig)
    back = read_signal_csv(tmp_path / "x.csv")
    np.testing.assert_array_equal(back.values, sig.values)
    assert back.t_max == pytest.approx(2.5, rel=1e-15)


@pytest.mark.parametrize("body, match", [
    ("", "empty"),
    ("w,re,im\n", "header"),
    ("omega,re,im\n", "no data"),
    ("omega,re,im\n-1,0,0\n-0.75,0,0\n-0.5,zero,0\n", "row 4"),
    ("omega,re,im\n-1,0,0\n-0.75,0\n", "row 3"),
    ("omega,re,im\n-1,0,0\n-0.75,nan,0\n", "row 3"),
])
def test_csv_errors_name_the_row(tmp_path, body, match):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(CSVFormatError, match=match):
        read_spectrum_csv(path)


def test_csv_grid_must_be_uniform_and_centred(tmp_path):
    w = -2.0 + 0.5 * np.arange(8)
    rows = "\n".join(f"{x},0,0" for x in w)
    (tmp_path / "ok.csv").write_text("omega,re,im\n" + rows + "\n")
    assert read_spectrum_csv(tmp_path / "ok.csv").grid == FrequencyGrid(8, 2.0)
    bent = w.copy()
    bent[3] += 0.1
    (tmp_path / "u.csv").write_text("omega,re,im\n" + "\n".join(f"{x},0,0" for x in bent))
    with pytest.raises(CSVFormatError, match="uniform"):
        read_spectrum_csv(tmp_path / "u.csv")
    (tmp_path / "c.csv").write_text("omega,re,im\n" + "\n".join(f"{x + 0.5},0,0" for x in w))
    with pytest.raises(CSVFormatError, match="origin"):
        read_spectrum_csv(tmp_path / "c.csv")
