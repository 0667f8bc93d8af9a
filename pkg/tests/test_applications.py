import math

import mpmath as mp
import numpy as np
import pytest

from optirec.applications import (DerivativeProblem, HeatProblem, derivative_alpha, heat_alpha,
                                  heat_cutoff, heat_error, heat_f, heat_moment, problem_from_dict)
from optirec.errors import DomainError

mp.mp.dps = 40


def mp_f(nu, ratio, s):
    """``∫_{|t|<=s} (ratio(t)/ratio(s) - 1) nu(t) dt`` straight from the definition."""
    q = ratio(s)
    return 2 * mp.quad(lambda t: (ratio(t) / q - 1) * nu(t), [0, s])


def mp_solution(nu, abs_mu, ratio, delta, guess):
    td = mp.findroot(lambda s: mp_f(nu, ratio, s) - mp.mpf(delta) ** -2, guess)
    q = ratio(td)
    e2 = 2 * mp.quad(lambda t: abs_mu(t) ** 2 * (1 - q / ratio(t)), [0, td])
    return float(td), float(mp.mpf(delta) * mp.sqrt(e2))


def heat_weights(r, T):
    return (lambda t: t ** (2 * r), lambda t: mp.exp(-t * t * T),
            lambda t: mp.exp(-t * t * T) / t ** r)


def test_derivative_cutoff_reference_value():
    # t_delta = 3^{1/3} for r=1, k=0, delta=1
    assert DerivativeProblem(1, 0, 1.0).cutoff() == pytest.approx(1.442250, abs=1e-6)
    assert DerivativeProblem(1, 0, 1.0).error() == pytest.approx(1.200937, abs=1e-6)


@pytest.mark.parametrize("r, k, delta", [(2, 1, 0.1), (1, 0, 1.0), (3, 0, 0.01), (4, 2, 3.0)])
def test_derivative_closed_forms_against_mpmath(r, k, delta):
    nu = lambda t: t ** (2 * r)
    mu = lambda t: t ** k
    ratio = lambda t: t ** (k - r)
    p = DerivativeProblem(r, k, delta)
    td, err = mp_solution(nu, mu, ratio, delta, p.cutoff() * 1.01)
    assert p.cutoff() == pytest.approx(td, rel=1e-13)
    assert p.error() == pytest.approx(err, rel=1e-13)


def test_derivative_error_corrected_value():
    assert DerivativeProblem(2, 1, 0.1).error() == pytest.approx(0.32428314389336604, rel=1e-14)


def test_derivative_error_scaling_law():
    # E ~ delta^{2(r-k)/(2r+1)}
    for r, k in [(1, 0), (3, 1), (5, 2)]:
        e1 = DerivativeProblem(r, k, 1e-3).error()
        e2 = DerivativeProblem(r, k, 1e-1).error()
        assert math.log(e2 / e1) / math.log(100) == pytest.approx(2 * (r - k) / (2 * r + 1), rel=1e-12)


def test_heat_f_reference_value():
    nu, _, ratio = heat_weights(1, 1)
    oracle = float(mp_f(nu, ratio, mp.mpf(1)))
    assert oracle == pytest.approx(1.0516151617923786, rel=1e-15)
    assert heat_f(HeatProblem(1, 1.0, 1.0), 1.0) == pytest.approx(oracle, rel=1e-13)


@pytest.mark.parametrize("r, T, delta", [(1, 1.0, 1.0), (2, 0.5, 0.1), (3, 0.1, 1.0)])
def test_heat_solution_against_mpmath(r, T, delta):
    p = HeatProblem(r, T, delta)
    td, err = mp_solution(*heat_weights(r, T), delta, p.cutoff())
    assert p.cutoff() == pytest.approx(td, rel=1e-10)
    assert p.error() == pytest.approx(err, rel=1e-9)


def test_heat_cutoff_reference_value():
    assert HeatProblem(1, 1.0, 1.0).cutoff() == pytest.approx(0.98975443082180811, rel=1e-11)


@pytest.mark.parametrize("r", [1, 2, 3, 4])
@pytest.mark.parametrize("s", [0.01, 0.7, 3.0])
def test_heat_moment_against_mpmath(r, s):
    T = 0.8
    p = HeatProblem(r, T, 1.0)
    exact = float(mp.quad(lambda t: t ** r * mp.exp(-t * t * T), [0, s]))
    assert heat_moment(p, s) == pytest.approx(exact, rel=1e-12)


def test_alpha_shapes():
    p = DerivativeProblem(3, 1, 0.2)
    td = p.cutoff()
    assert derivative_alpha(p, 0.0) == 1.0
    assert derivative_alpha(p, [td, -td, 2 * td]).tolist() == [0.0, 0.0, 0.0]
    assert derivative_alpha(p, -0.5 * td) == pytest.approx(0.75)
    h = HeatProblem(2, 0.3, 0.1)
    tdh = h.cutoff()
    assert heat_alpha(h, 0.0, tdh) == 1.0 and heat_alpha(h, tdh, tdh) == 0.0
    assert heat_alpha(h, -0.3 * tdh, tdh) == heat_alpha(h, 0.3 * tdh, tdh)
    # huge |t| must not overflow into nan
    assert heat_alpha(h, 1e4, tdh) == 0.0


def test_heat_error_explicit_cutoff():
    p = HeatProblem(1, 0.5, 0.3)
    assert heat_error(p, cutoff=heat_cutoff(p)) == p.error()


def test_multipliers():
    p = DerivativeProblem(2, 1, 0.1)
    w = np.array([-1.0, 0.5])
    np.testing.assert_allclose(p.multiplier(w), 1j * w * p.alpha(w))
    h = HeatProblem(1, 0.5, 0.1)
    np.testing.assert_allclose(h.multiplier(w), np.exp(-0.5 * w * w) * h.alpha(w))


def test_problem_dict_roundtrip_and_validation():
    for p in (DerivativeProblem(2, 1, 0.1), HeatProblem(1, 0.5, 0.1)):
        assert problem_from_dict(p.to_dict()) == p
    for bad in ({"problem": "derivative", "r": 2, "k": 1}, {"problem": "heat", "r": 1, "T": "x", "delta": 1},
                {"problem": "wave"}, {"problem": "derivative", "r": 0, "k": 0, "delta": 1}):
        with pytest.raises(DomainError):
            problem_from_dict(bad)
    with pytest.raises(DomainError):
        DerivativeProblem(1, 0, 0.0)
    with pytest.raises(DomainError):
        heat_f(HeatProblem(1, 1.0, 1.0), 0.0)
