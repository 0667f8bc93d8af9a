import numpy as np
import pytest
from scipy import integrate as sp_integrate

from optirec.applications import DerivativeProblem, HeatProblem
from optirec.errors import ConstraintViolation, DomainError
from optirec.lowerbound import (DiscreteGrid, cell_moments, certificate, discrete_lower_bound,
                                extremal_tau, pole_cell_average)
from optirec.optimal_core import extremal_function, solve_cutoff


def test_grid_and_interleaved_cells():
    g = DiscreteGrid(3.0, 3)
    lo, hi = g.cell_bounds()
    np.testing.assert_allclose(lo, [0, -1, 1, -2, 2, -3])
    np.testing.assert_allclose(hi, [1, 0, 2, -1, 3, -2])
    pts = np.array([0.0, 0.5, 1.0, -0.5, -1.0, 2.9, 3.0, -3.0, 3.1, -3.1])
    np.testing.assert_array_equal(g.cell_index(pts), [0, 0, 2, 1, 1, 4, 4, 5, -1, -1])
    for bad in ((0.0, 2), (1.0, 0), (1.0, 1.5)):
        with pytest.raises(DomainError):
            DiscreteGrid(*bad)


def test_cell_moments_against_scipy():
    pair = HeatProblem(2, 0.5, 1.0).pair
    g = DiscreteGrid(2.0, 5)
    mu, nu = cell_moments(g, pair)
    lo, hi = g.cell_bounds()
    for j in range(g.size):
        assert mu[j] == pytest.approx(sp_integrate.quad(lambda t: float(pair.abs_mu(t)) ** 2,
                                                        lo[j], hi[j], epsrel=1e-13)[0], rel=1e-11)
        assert nu[j] == pytest.approx(sp_integrate.quad(lambda t: float(pair.nu(t)), lo[j], hi[j],
                                                        epsrel=1e-13)[0], rel=1e-11)
    np.testing.assert_allclose(mu[0::2], mu[1::2], rtol=1e-14)


def test_refinement_additivity():
    pair = DerivativeProblem(3, 1, 1.0).pair
    coarse = cell_moments(DiscreteGrid(1.5, 4), pair)
    fine = cell_moments(DiscreteGrid(1.5, 8), pair)
    for c, f in zip(coarse, fine):
        # fine cells 2j and 2j+1 of each half line merge into coarse cell j
        merged_pos = f[0::2].reshape(-1, 2).sum(axis=1)
        merged_neg = f[1::2].reshape(-1, 2).sum(axis=1)
        np.testing.assert_allclose(merged_pos, c[0::2], rtol=1e-12)
        np.testing.assert_allclose(merged_neg, c[1::2], rtol=1e-12)


@pytest.mark.parametrize("problem", [DerivativeProblem(1, 0, 1.0), DerivativeProblem(2, 1, 0.2),
                                     HeatProblem(1, 0.5, 0.3)])
def test_random_admissible_tau_sandwich(problem):
    rng = np.random.default_rng(7)
    e2 = problem.error() ** 2
    for _ in range(1000 // 3 + 1):
        N = int(rng.integers(1, 40))
        g = DiscreteGrid(float(rng.uniform(0.1, 3.0)) * problem.cutoff(), N)
        mom = cell_moments(g, problem.pair)
        m = int(rng.integers(1, g.size + 1))
        tau = np.sort(rng.exponential(size=m))[::-1]
        energy = float(np.sum(mom[1][:m] * tau ** 2))
        tau *= rng.uniform(0.0, 1.0) / np.sqrt(energy)
        bound = discrete_lower_bound(g, problem.pair, tau, problem.delta, moments=mom)
        assert 0.0 <= bound <= e2 * (1 + 1e-12)


def test_padding_invariance():
    p = DerivativeProblem(2, 0, 0.5)
    g = DiscreteGrid(p.cutoff(), 6)
    tau = np.array([0.9, 0.7, 0.7, 0.2])
    base = discrete_lower_bound(g, p.pair, tau, p.delta)
    for pad in range(1, 9):
        assert discrete_lower_bound(g, p.pair, np.concatenate([tau, np.zeros(pad)]), p.delta) == base


def test_constraint_violations():
    p = DerivativeProblem(1, 0, 1.0)
    g = DiscreteGrid(1.0, 2)
    with pytest.raises(ConstraintViolation):
        discrete_lower_bound(g, p.pair, [0.1, 0.2], p.delta)
    with pytest.raises(ConstraintViolation):
        discrete_lower_bound(g, p.pair, [0.1, -0.1], p.delta)
    with pytest.raises(ConstraintViolation):
        discrete_lower_bound(g, p.pair, [100.0, 100.0], p.delta)
    with pytest.raises(DomainError):
        discrete_lower_bound(g, p.pair, np.ones(5), p.delta)


def test_extremal_tau_saturates_constraint():
    p = DerivativeProblem(2, 1, 0.1)
    filt = solve_cutoff(p.recovery_problem())
    g = DiscreteGrid(1.5 * filt.cutoff, 64)
    mom = cell_moments(g, p.pair)
    tau = extremal_tau(g, filt, mom)
    assert np.sum(mom[1] * tau ** 2) == pytest.approx(1.0, rel=1e-13)
    assert np.all(np.diff(tau) <= 0)


def test_pole_cell_average_against_scipy():
    filt = solve_cutoff(DerivativeProblem(1, 0, 1.0).recovery_problem())
    h = 0.05
    ref = sp_integrate.quad(lambda t: float(extremal_function(filt, t)), 0, h, epsrel=1e-12)[0] / h
    assert pole_cell_average(filt, h) == pytest.approx(ref, rel=1e-9)
    # r - k = 2: 1/sqrt(t^2)-type pole has no finite mean, fall back to the midpoint value
    filt3 = solve_cutoff(DerivativeProblem(3, 1, 1.0).recovery_problem())
    assert pole_cell_average(filt3, h) == pytest.approx(extremal_function(filt3, h / 2))


@pytest.mark.parametrize("problem", [DerivativeProblem(2, 1, 0.1), HeatProblem(1, 1.0, 1.0)])
def test_certificate_monotone_and_below_one(problem):
    rp = problem.recovery_problem()
    td = problem.cutoff()
    cert = certificate(rp, [(2 * td, N) for N in (32, 64, 128, 256)])
    assert cert.cutoff == pytest.approx(td, rel=1e-9)
    assert np.all(np.diff(cert.ratios) >= 0) and np.all(cert.ratios <= 1 + 1e-9)
    assert cert.ratios[-1] > 0.95
    assert cert.entries[0].to_dict()["N"] == 32
    with pytest.raises(DomainError):
        certificate(rp, [])
