"""Admissible weight pairs (|mu|, nu).

A pair defines the class ``W = {x : ∫ nu |x|^2 <= 1}`` and the multiplier
operator ``x -> mu * x``.  Only ``|mu|`` is represented; the phase of the
multiplier (``i^k`` for derivatives) is applied by :mod:`optirec.spectral`.

All evaluators accept scalars or numpy arrays and are vectorised.  The
critical ratio ``|mu| / sqrt(nu)`` is evaluated in closed form for the
built-in families, so ``t = 0`` yields ``+inf`` instead of ``0/0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, InvalidWeights

ArrayFunc = Callable[[np.ndarray], np.ndarray]

MONOTONE_CHECK_POINTS = 4096
MONOTONE_CHECK_TOL = 1e-10


class WeightPair:
    """Common interface of all weight pairs.

    Subclasses implement :meth:`nu`, :meth:`abs_mu`, :meth:`ratio` and
    :meth:`root_nu_abs_mu`.  The last one is ``sqrt(nu) * |mu|``
    (equivalently ``nu * ratio``), which is finite everywhere and lets the
    core integrands avoid the singular ratio altogether.
    """

    domain_hint: float

    def nu(self, t):
        raise NotImplementedError

    def abs_mu(self, t):
        raise NotImplementedError

    def ratio(self, t):
        raise NotImplementedError

    def root_nu_abs_mu(self, t):
        raise NotImplementedError

    def inv_ratio(self, t):
        """``sqrt(nu) / |mu|``, with value 0 wherever the ratio is infinite."""
        with np.errstate(divide="ignore"):
            out = 1.0 / np.asarray(self.ratio(t), dtype=float)
        return out if out.ndim else float(out)

    def to_dict(self) -> dict:
        raise TypeError(f"{type(self).__name__} is not serialisable")


@dataclass(frozen=True)
class DerivativePair(WeightPair):
    """``nu(t) = t^{2r}``, ``|mu(t)| = |t|^k`` (recovery of the k-th derivative on W_2^r)."""

    r: int
    k: int
    domain_hint: float = 1e3

    def __post_init__(self):
        if not (isinstance(self.r, (int, np.integer)) and self.r >= 1):
            raise DomainError(f"r must be an integer >= 1, got {self.r!r}")
        if not (isinstance(self.k, (int, np.integer)) and 0 <= self.k < self.r):
            raise DomainError(f"k must be an integer with 0 <= k < r, got k={self.k!r}, r={self.r}")
        if not self.domain_hint > 0:
            raise DomainError("domain_hint must be positive")

    def nu(self, t):
        return np.abs(np.asarray(t, dtype=float)) ** (2 * self.r)

    def abs_mu(self, t):
        return np.abs(np.asarray(t, dtype=float)) ** self.k

    def ratio(self, t):
        a = np.abs(np.asarray(t, dtype=float))
        with np.errstate(divide="ignore"):
            out = a ** float(self.k - self.r)
        return out if out.ndim else float(out)

    def inv_ratio(self, t):
        out = np.abs(np.asarray(t, dtype=float)) ** float(self.r - self.k)
        return out if out.ndim else float(out)

    def root_nu_abs_mu(self, t):
        return np.abs(np.asarray(t, dtype=float)) ** (self.r + self.k)

    def to_dict(self) -> dict:
        return {"kind": "derivative", "r": int(self.r), "k": int(self.k)}


@dataclass(frozen=True)
class HeatPair(WeightPair):
    """``nu(t) = t^{2r}``, ``|mu(t)| = exp(-t^2 T)`` (heat evolution up to time T)."""

    r: int
    T: float
    domain_hint: float = field(default=0.0)

    def __post_init__(self):
        if not (isinstance(self.r, (int, np.integer)) and self.r >= 1):
            raise DomainError(f"r must be an integer >= 1, got {self.r!r}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise DomainError(f"T must be positive, got {self.T!r}")
        if self.domain_hint <= 0:
            # exp(-t^2 T) < e^{-40} beyond this point
            object.__setattr__(self, "domain_hint", math.sqrt(40.0 / self.T))

    def nu(self, t):
        return np.abs(np.asarray(t, dtype=float)) ** (2 * self.r)

    def abs_mu(self, t):
        return np.exp(-np.square(np.asarray(t, dtype=float)) * self.T)

    def ratio(self, t):
        a = np.abs(np.asarray(t, dtype=float))
        with np.errstate(divide="ignore"):
            out = np.exp(-a * a * self.T) / a ** self.r
        return out if out.ndim else float(out)

    def inv_ratio(self, t):
        a = np.abs(np.asarray(t, dtype=float))
        out = a ** self.r * np.exp(a * a * self.T)
        return out if out.ndim else float(out)

    def root_nu_abs_mu(self, t):
        a = np.abs(np.asarray(t, dtype=float))
        return a ** self.r * np.exp(-a * a * self.T)

    def to_dict(self) -> dict:
        return {"kind": "heat", "r": int(self.r), "T": float(self.T)}


@dataclass(frozen=True, eq=False)
class CustomPair(WeightPair):
    """User-supplied even weights.

    Without an explicit ``ratio_func`` the ratio is ``abs_mu / sqrt(nu)``
    with the guard ``ratio = +inf`` wherever ``nu == 0``.  The constructor
    screens evenness, positivity and the monotone ratio on 4096 log-spaced
    points of ``[1e-6, domain_hint]`` and raises :class:`InvalidWeights`.
    """

    abs_mu_func: ArrayFunc
    nu_func: ArrayFunc
    ratio_func: Optional[ArrayFunc] = None
    domain_hint: float = 1e3

    def __post_init__(self):
        if not self.domain_hint > 1e-6:
            raise DomainError("domain_hint must exceed 1e-6")
        self._screen()

    def _screen(self):
        t = np.geomspace(1e-6, self.domain_hint, MONOTONE_CHECK_POINTS)
        nu_p, nu_m = self.nu(t), self.nu(-t)
        mu_p, mu_m = self.abs_mu(t), self.abs_mu(-t)
        if not (np.allclose(nu_p, nu_m, rtol=1e-12, atol=0)
                and np.allclose(mu_p, mu_m, rtol=1e-12, atol=0)):
            raise InvalidWeights("weights must be even functions")
        if np.any(nu_p <= 0) or np.any(mu_p < 0):
            raise InvalidWeights("nu must be positive and |mu| non-negative away from 0")
        q = np.asarray(self.ratio(t), dtype=float)
        finite = np.isfinite(q)
        qa, qb = q[:-1], q[1:]
        both = finite[:-1] & finite[1:]
        rising = both & (qb > qa * (1 + MONOTONE_CHECK_TOL) + MONOTONE_CHECK_TOL)
        # an infinite value may only precede, never follow, a finite one
        rising |= finite[:-1] & ~finite[1:]
        if rising.any():
            i = int(np.argmax(rising))
            raise InvalidWeights(
                f"|mu|/sqrt(nu) increases between t={t[i]:.6g} and t={t[i + 1]:.6g}"
            )

    def nu(self, t):
        return np.asarray(self.nu_func(np.asarray(t, dtype=float)), dtype=float)

    def abs_mu(self, t):
        return np.abs(np.asarray(self.abs_mu_func(np.asarray(t, dtype=float)), dtype=float))

    def ratio(self, t):
        t = np.asarray(t, dtype=float)
        if self.ratio_func is not None:
            out = np.asarray(self.ratio_func(t), dtype=float)
        else:
            nu = self.nu(t)
            mu = self.abs_mu(t)
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where(nu > 0, mu / np.sqrt(np.where(nu > 0, nu, 1.0)), np.inf)
        return out if out.ndim else float(out)

    def root_nu_abs_mu(self, t):
        return np.sqrt(self.nu(t)) * self.abs_mu(t)


def eval_nu(pair: WeightPair, t):
    return pair.nu(t)


def eval_abs_mu(pair: WeightPair, t):
    return pair.abs_mu(t)


def eval_ratio(pair: WeightPair, t):
    return pair.ratio(t)


def pair_from_dict(d: dict) -> WeightPair:
    """Build a pair from its JSON form, e.g. ``{"kind": "heat", "r": 1, "T": 0.5}``."""
    kind = d.get("kind")
    try:
        if kind == "derivative":
            return DerivativePair(int(d["r"]), int(d["k"]))
        if kind == "heat":
            return HeatPair(int(d["r"]), float(d["T"]))
    except KeyError as exc:
        raise DomainError(f"weight pair {kind!r} is missing field {exc.args[0]!r}") from None
    raise DomainError(f"unknown weight pair kind {kind!r}")
