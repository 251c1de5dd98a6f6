"""Entropy-admissible Riemann solver and rarefaction partitioning.

The solver finds the middle state by a 1D root solve in the family-1 size
g1: the composed wave-curve map g1 -> T2(p_r - p_mid; T1(g1; left)) matches
the right state's p-component identically, so the scalar mismatch is in h.
The 1-curve's p-component is monotone in g1, which keeps the bracket simple.

Admissibility on each branch:
  family 1: shock iff (p_left - 1) * g <= 0 (contact on p = 1), else rarefaction;
  family 2: shock iff g >= 0 (contact on h = 0), else rarefaction.

For the epsilon-scheme the rarefaction branch of a wave curve is evaluated as
a chain of n equal Hugoniot jumps (n = ceil(|g|/eps)); the fan solved with
`eps` set then composes exactly with its own partition, so a tracked solution
built from these fans satisfies the Rankine-Hugoniot relations front by front.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .model import State, lambda1, lambda2
from .wavecurves import (_hug1_s, _hug2_s, _rar1_s, _rar2_s, hugoniot1,
                         hugoniot2, rarefaction1, rarefaction2, riemann_H,
                         riemann_P, speed1, speed2)

_DROP_TOL = 1e-14


class RiemannSolveError(RuntimeError):
    """No intersection of the wave curves inside the admissible domain."""


@dataclass
class WaveFront:
    family: int            # 1 or 2
    kind: str              # "shock" | "contact" | "rarefaction"
    x: float
    left: State
    right: State
    gamma: float           # size in original coordinates
    rho: float             # size in Riemann coordinates
    speed: float
    substeps: int = 1      # Hugoniot chain length used for a rarefaction branch

    def endpoint_speeds(self):
        lam = lambda1 if self.family == 1 else lambda2
        return lam(*self.left), lam(*self.right)


@dataclass
class RiemannFan:
    left: State
    right: State
    middle: State
    waves: list

    def compose_residual(self):
        """Max abs mismatch when chaining the fan's jumps from left to right."""
        cur = self.left
        for w in self.waves:
            if not np.allclose(w.left, cur, rtol=0, atol=1e-11):
                return max(abs(w.left[0] - cur[0]), abs(w.left[1] - cur[1]))
            cur = w.right
        return max(abs(cur[0] - self.right[0]), abs(cur[1] - self.right[1]))


def _is_shock1(g, p_left):
    return p_left == 1.0 or (p_left - 1.0) * g <= 0.0


def _wave1(g, h, p, n=None):
    """Point on the composite 1-wave curve (shock branch or rarefaction branch)."""
    if _is_shock1(g, p):
        return _hug1_s(g, h, p)
    if n is None:
        return _rar1_s(g, h, p)
    return _chain(_hug1_s, g, (h, p), n, 0)


def _wave2(g, h, p, n=None):
    if h == 0.0 or g >= 0.0:
        return _hug2_s(g, h, p)
    if n is None:
        return _rar2_s(g, h, p)
    return _chain(_hug2_s, g, (h, p), n, 1)


def _chain(curve, g, state, n, coord):
    """n equal Hugoniot steps; targets interpolated in the additive coordinate
    (h for family 1, p for family 2) so the chain endpoint is exact."""
    h, p = state
    start = state[coord]
    for j in range(1, n + 1):
        target = start + g * (j / n)
        d = target - (h if coord == 0 else p)
        h, p = curve(d, h, p)
    return h, p


def _solve_sizes(left, right, n1=None, n2=None, gamma_cap=4.0):
    hl, pl = left
    hr, pr = right

    def mismatch(g1):
        hm, pm = _wave1(g1, hl, pl, n1)
        return _wave2(pr - pm, hm, pm, n2)[0] - hr

    lo = -hl
    f_lo = mismatch(lo)
    if f_lo > 0:
        raise RiemannSolveError(f"no admissible middle state for {left} -> {right}")
    if f_lo == 0.0:
        g1 = lo
    else:
        hi = max(hl, 1e-3)
        while mismatch(hi) < 0:
            hi *= 2.0
            if hi > gamma_cap:
                raise RiemannSolveError(
                    f"1-curve bracket exceeded {gamma_cap} for {left} -> {right}")
        g1 = brentq(mismatch, lo, hi, xtol=1e-16, rtol=8.9e-16, maxiter=200)
    hm, pm = _wave1(g1, hl, pl, n1)
    return g1, pr - pm, State(hm, pm)


def _chain_states(curve, g, left, n, coord):
    states = [State(*left)]
    start = left[coord]
    for j in range(1, n + 1):
        target = start + g * (j / n)
        d = target - states[-1][coord]
        states.append(State(*curve(d, *states[-1])))
    return states


def solve_riemann(left, right, eps=None):
    """Solve the Riemann problem (left, right); returns a RiemannFan.

    With `eps` set, rarefaction-side branches are evaluated as equal-size
    Hugoniot chains with sub-size <= eps, so that `partition_rarefaction`
    reproduces the fan's states exactly.
    """
    left = State(*map(float, left))
    right = State(*map(float, right))
    if left == right:
        return RiemannFan(left, right, left, [])

    if eps is None:
        n1 = n2 = None
        g1, g2, mid = _solve_sizes(left, right)
    else:
        # the eps-scheme never needs the smooth branches: start from the
        # all-Hugoniot chain (n = 1) and refine the chain counts as needed
        if eps <= 0:
            raise ValueError("eps must be positive")
        n1 = n2 = 1
        for _ in range(6):
            g1, g2, mid = _solve_sizes(left, right, n1, n2)
            bump = False
            if not _is_shock1(g1, left.p) and abs(g1) / n1 > eps * (1 + 1e-12):
                n1 = max(n1 + 1, math.ceil(abs(g1) / eps))
                bump = True
            if g2 < 0 and mid.h > 0 and abs(g2) / n2 > eps * (1 + 1e-12):
                n2 = max(n2 + 1, math.ceil(abs(g2) / eps))
                bump = True
            if not bump:
                break

    waves = []
    if abs(g1) > _DROP_TOL:
        if left.p == 1.0:
            kind = "contact"
        elif (left.p - 1.0) * g1 <= 0.0:
            kind = "shock"
        else:
            kind = "rarefaction"
        waves.append(WaveFront(
            family=1, kind=kind, x=0.0, left=left, right=mid, gamma=g1,
            rho=riemann_H(*mid) - riemann_H(*left),
            speed=float(speed1(g1, *left)),
            substeps=(n1 or 1) if kind == "rarefaction" else 1))
    else:
        mid = left
    if abs(g2) > _DROP_TOL:
        if mid.h == 0.0:
            kind = "contact"
        elif g2 >= 0.0:
            kind = "shock"
        else:
            kind = "rarefaction"
        waves.append(WaveFront(
            family=2, kind=kind, x=0.0, left=mid, right=right, gamma=g2,
            rho=riemann_P(*right) - riemann_P(*mid),
            speed=float(speed2(g2, *mid)),
            substeps=(n2 or 1) if kind == "rarefaction" else 1))
    fan = RiemannFan(left, right, mid, waves)
    return fan


def partition_rarefaction(wave: WaveFront, eps: float):
    """Split a rarefaction wave into Hugoniot-chained fronts of size <= eps.

    The chain states follow the rarefaction-shock reduction: each front is an
    exact Hugoniot jump of size gamma/n travelling at its own RH speed.  When
    the wave came from an eps-aware fan the chain endpoint coincides with
    wave.right to rounding.
    """
    if wave.kind != "rarefaction":
        raise ValueError("partition_rarefaction expects a rarefaction wave")
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = max(wave.substeps, math.ceil(abs(wave.gamma) / eps - 1e-12), 1)
    curve = _hug1_s if wave.family == 1 else _hug2_s
    states = _chain_states(curve, wave.gamma, wave.left, n, 0 if wave.family == 1 else 1)
    # for an eps-aware fan the chain ends on wave.right up to rounding; snap it
    # so adjacent fronts share states bit-exactly
    end_err = max(abs(states[-1].h - wave.right.h), abs(states[-1].p - wave.right.p))
    if end_err < 1e-10 * (1.0 + abs(wave.gamma)):
        states[-1] = wave.right
    hs = np.array([s.h for s in states])
    ps = np.array([s.p for s in states])
    Hs = riemann_H(hs, ps)
    Ps = riemann_P(hs, ps)
    if wave.family == 1:
        gam = np.diff(hs)
        rho = np.diff(Hs)
        spd = speed1(gam, hs[:-1], ps[:-1])
    else:
        gam = np.diff(ps)
        rho = np.diff(Ps)
        spd = speed2(gam, hs[:-1], ps[:-1])
    return [replace(wave, x=wave.x, left=states[j], right=states[j + 1],
                    gamma=float(gam[j]), rho=float(rho[j]),
                    speed=float(np.atleast_1d(spd)[j]), substeps=1)
            for j in range(n)]


def is_admissible(wave: WaveFront, tol: float = 1e-12, eps=None) -> bool:
    """Lax check for shocks/contacts; spreading check for rarefaction waves."""
    lam_l, lam_r = wave.endpoint_speeds()
    if wave.kind in ("shock", "contact"):
        return lam_l >= wave.speed - tol and wave.speed >= lam_r - tol
    if eps is not None and abs(wave.gamma) > eps * (1 + 1e-9):
        return False
    return lam_l <= lam_r + tol


# ---------------------------------------------------------------------------
# Vectorized solver (smooth wave curves) for the sampling harness
# ---------------------------------------------------------------------------

def _wave1_vec(g, h, p):
    shock = (p == 1.0) | ((p - 1.0) * g <= 0.0)
    hs, ps = hugoniot1(np.where(shock, g, 0.0), h, p)
    hrr, prr = rarefaction1(np.where(shock, 0.0, g), h, p)
    return np.where(shock, hs, hrr), np.where(shock, ps, prr)


def _wave2_vec(g, h, p):
    shock = (h == 0.0) | (g >= 0.0)
    hs, ps = hugoniot2(np.where(shock, g, 0.0), h, p)
    hrr, prr = rarefaction2(np.where(shock, 0.0, g), h, p)
    return np.where(shock, hs, hrr), np.where(shock, ps, prr)


def solve_riemann_batch(hl, pl, hr, pr, iters: int = 110):
    """Vectorized middle-state solve by bisection on the 1-size g1.

    Returns (g1, g2, h_mid, p_mid).  Uses the smooth rarefaction branches;
    intended for the estimate-sampling harness, not for tracking.
    """
    hl, pl, hr, pr = np.broadcast_arrays(*(np.asarray(a, float) for a in (hl, pl, hr, pr)))

    def mismatch(g1):
        hm, pm = _wave1_vec(g1, hl, pl)
        return _wave2_vec(pr - pm, hm, pm)[0] - hr

    lo = -hl.copy()
    hi = np.maximum(hl, 1e-3)
    for _ in range(40):
        bad = mismatch(hi) < 0
        if not np.any(bad):
            break
        hi = np.where(bad, hi * 2.0, hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        neg = mismatch(mid) < 0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    g1 = 0.5 * (lo + hi)
    hm, pm = _wave1_vec(g1, hl, pl)
    return g1, pr - pm, hm, pm
