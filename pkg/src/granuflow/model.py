"""Phase-plane model: states, flux, eigenstructure, admissible domain.

The system tracks a rolling-layer thickness h >= 0 and a standing-layer
slope p > 0.  Written in conservation form it reads

    h_t + (-h p)_x   = (p - 1) h
    p_t + ((p-1)h)_x = 0

so the conservative flux is G(h,p) = (-hp, (p-1)h); its Jacobian is the
matrix A(h,p) whose eigenvalues/eigenvectors are implemented below.  The
convective flux pair (hp, (p-1)h) is kept as `flux` for reporting, while
Rankine-Hugoniot computations use `flux_conservative`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class State(NamedTuple):
    """A point (h, p) of the phase plane."""

    h: float
    p: float


class DegenerateEigenvectorError(ValueError):
    """Raised when an eigenvector denominator degenerates (lam1=0 or lam2=-1)."""


@dataclass(frozen=True)
class DomainBox:
    """Compact box K = [0, delta0] x [1 - delta_p, 1 + delta_p].

    Both parameters must stay below 1/9 so that every bound used by the
    shock-curve analysis (in particular 1 - delta_p - delta0 > 2*sqrt(delta0))
    is available on K.
    """

    delta0: float = 0.05
    delta_p: float = 0.1

    def __post_init__(self):
        if not (0 < self.delta0 < 1 / 9):
            raise ValueError(f"delta0 must lie in (0, 1/9), got {self.delta0}")
        if not (0 < self.delta_p < 1 / 9):
            raise ValueError(f"delta_p must lie in (0, 1/9), got {self.delta_p}")
        if not (self.delta0 < self.p0 < 1.0):
            raise ValueError("need 0 < delta0 < p0 < 1")
        if 1 - self.delta_p - self.delta0 <= 2 * np.sqrt(self.delta0):
            raise ValueError("need 1 - delta_p - delta0 > 2*sqrt(delta0)")

    @property
    def p0(self) -> float:
        return 1.0 - self.delta_p

    @property
    def p1(self) -> float:
        return 1.0 + self.delta_p

    def contains(self, h, p, slack: float = 0.0) -> bool:
        h = np.asarray(h)
        p = np.asarray(p)
        return bool(
            np.all(h >= -slack)
            & np.all(h <= self.delta0 + slack)
            & np.all(p >= self.p0 - slack)
            & np.all(p <= self.p1 + slack)
        )

    def sample(self, rng: np.random.Generator, n: int):
        """n random states uniform over K, as (h, p) arrays."""
        return rng.uniform(0.0, self.delta0, n), rng.uniform(self.p0, self.p1, n)


def in_omega(h, p) -> bool:
    return bool(np.all(np.asarray(h) >= 0) and np.all(np.asarray(p) > 0))


def flux(h, p=None):
    """Convective flux pair (h*p, (p-1)*h)."""
    if p is None:
        h, p = h
    return h * p, (p - 1.0) * h


def flux_conservative(h, p=None):
    """Flux of the conservation form u_t + G(u)_x = 0: G = (-hp, (p-1)h)."""
    if p is None:
        h, p = h
    return -h * p, (p - 1.0) * h


def jacobian(h, p=None):
    """Jacobian A(h,p) of the conservative flux."""
    if p is None:
        h, p = h
    return np.array([[-p, -h], [p - 1.0, h]])


def _disc(h, p):
    return np.sqrt((p - h) ** 2 + 4.0 * h)


def lambda1(h, p):
    """Slow characteristic speed (h - p - sqrt((p-h)^2 + 4h)) / 2."""
    return 0.5 * (h - p - _disc(h, p))


def lambda2(h, p):
    """Fast characteristic speed (h - p + sqrt((p-h)^2 + 4h)) / 2."""
    return 0.5 * (h - p + _disc(h, p))


def eigenvalues(h, p=None):
    if p is None:
        h, p = h
    return lambda1(h, p), lambda2(h, p)


def eigenvectors(h, p=None):
    """Right eigenvectors r1 = (1, -(l1+1)/l1), r2 = (-l2/(l2+1), 1)."""
    if p is None:
        h, p = h
    l1, l2 = eigenvalues(h, p)
    if np.any(l1 == 0):
        raise DegenerateEigenvectorError("lambda1 = 0: r1 denominator degenerates")
    if np.any(l2 == -1):
        raise DegenerateEigenvectorError("lambda2 = -1: r2 denominator degenerates")
    r1 = np.array([np.ones_like(l1), -(l1 + 1.0) / l1])
    r2 = np.array([-l2 / (l2 + 1.0), np.ones_like(l2)])
    return r1, r2


def gnl_indicator(s, family: int = 1):
    """Directional derivative of lambda_k along r_k.

    Family 1 gives -2(l1+1)/(l2-l1): zero exactly on p = 1, sign of (p-1).
    Family 2 gives -2 l2 /(l2-l1): zero exactly on h = 0, sign of (-h).
    """
    h, p = s
    l1, l2 = eigenvalues(h, p)
    if family == 1:
        return -2.0 * (l1 + 1.0) / (l2 - l1)
    if family == 2:
        return -2.0 * l2 / (l2 - l1)
    raise ValueError(f"family must be 1 or 2, got {family}")
