import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from optirec.errors import QuadratureFailure
from optirec.quadrature import (GAUSS_WEIGHTS, KRONROD_WEIGHTS, NODES, _GAUSS_IDX, integrate,
                                integrate_cells)


@pytest.mark.parametrize("deg", range(0, 24))
def test_kronrod_rule_exact_to_degree_23(deg):
    exact = (1 - (-1) ** (deg + 1)) / (deg + 1)
    assert np.dot(KRONROD_WEIGHTS, NODES ** deg) == pytest.approx(exact, abs=1e-14)


@pytest.mark.parametrize("deg", range(0, 14))
def test_gauss_rule_exact_to_degree_13(deg):
    exact = (1 - (-1) ** (deg + 1)) / (deg + 1)
    assert np.dot(GAUSS_WEIGHTS, NODES[_GAUSS_IDX] ** deg) == pytest.approx(exact, abs=1e-14)


@pytest.mark.parametrize("func, a, b, bps", [
    (np.exp, -1.0, 3.0, ()),
    (lambda t: np.sqrt(np.abs(t)), -2.0, 5.0, (0.0,)),
    (lambda t: np.log(np.abs(t)), -1.0, 1.0, (0.0,)),
    (lambda t: 1.0 / (1.0 + t * t), -1e3, 1e3, (0.0,)),
])
def test_matches_scipy_quad(func, a, b, bps):
    ref, _ = sp_integrate.quad(lambda x: float(func(np.array([x]))[0]), a, b,
                               points=list(bps) or None, epsabs=0, epsrel=1e-12, limit=500)
    assert integrate(func, a, b, rel_tol=1e-11, breakpoints=bps) == pytest.approx(ref, rel=1e-10)


def test_oscillatory_closed_form():
    z = -1 + 40j
    exact = ((np.exp(10 * z) - 1) / z).real
    got = integrate(lambda t: np.cos(40 * t) * np.exp(-t), 0.0, 10.0, rel_tol=1e-12)
    assert got == pytest.approx(exact, rel=1e-11)


def test_reversed_limits_flip_sign():
    assert integrate(np.exp, 2.0, 0.0) == pytest.approx(-(math.e ** 2 - 1), rel=1e-13)
    assert integrate(np.exp, 1.0, 1.0) == 0.0


def test_cells_sum_to_whole():
    edges = np.linspace(0.0, 3.0, 17)
    cells = integrate_cells(lambda t: t ** 5 * np.exp(-t), edges)
    assert cells.shape == (16,)
    assert cells.sum() == pytest.approx(integrate(lambda t: t ** 5 * np.exp(-t), 0.0, 3.0), rel=1e-12)
    # each cell to its own tolerance, including a tiny first one
    assert cells[0] == pytest.approx(sp_integrate.quad(lambda t: t ** 5 * math.exp(-t), 0, edges[1])[0],
                                     rel=1e-10)


def test_non_finite_integrand_raises():
    with pytest.raises(QuadratureFailure):
        integrate(lambda t: np.where(t > 0.5, np.nan, t), 0.0, 1.0)


def test_non_integrable_singularity_exhausts_depth():
    with pytest.raises(QuadratureFailure):
        integrate(lambda t: 1.0 / t, 0.0, 1.0, max_depth=20)
