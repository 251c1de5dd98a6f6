"""Hugoniot and rarefaction curves, RH speeds and derivatives, Riemann coordinates.

All formulas are closed-form in the original (h, p) coordinates.  Every
function broadcasts over numpy arrays; scalars in, scalars out.

Conventions
-----------
* `hugoniot1(g; h, p)` moves along the 1-curve by g = Delta h; its p-component
  never crosses p = 1.
* `hugoniot2(g; h, p)` moves along the 2-curve by g = Delta p; its h-component
  never crosses h = 0 (the curve is vertical at h = 0).
* RH speeds coincide with characteristic speeds of mixed arguments:
  speed1 = lambda1(h+g, p_left), speed2 = lambda2(h_left, p+g).
* Riemann coordinates: H(h,p) is the h-value where the 2-rarefaction curve
  through (h,p) meets the linearly degenerate line p = 1; P(h,p) is the
  p-value where the 1-rarefaction curve meets h = 0.  Both are evaluated from
  closed-form first integrals of the rarefaction ODEs, so no ODE integration
  is needed in the hot paths.
"""

from __future__ import annotations

import math

import numpy as np

from .model import State, lambda1, lambda2

_NEWTON_ITERS = 10


class EtaDecompositionError(RuntimeError):
    """Newton failed to invert the two-shock decomposition."""


# ---------------------------------------------------------------------------
# Hugoniot curves and RH speeds
# ---------------------------------------------------------------------------

def speed1(g, h, p):
    """RH speed of the family-1 jump from (h,p) with size g = Delta h."""
    return lambda1(h + g, p)


def speed2(g, h, p):
    """RH speed of the family-2 jump from (h,p) with size g = Delta p."""
    return lambda2(h, p + g)


def hugoniot1(g, h, p):
    """Right state on the 1-Hugoniot curve from (h,p), parametrized by g = Delta h."""
    g = np.asarray(g, dtype=float) if not np.isscalar(g) else g
    hr = h + g
    if np.any(np.asarray(hr) < -1e-15):
        raise ValueError("hugoniot1 requires g >= -h (h stays nonnegative)")
    hr = np.maximum(hr, 0.0)        # snap rounding-negative h to the boundary
    s1 = lambda1(hr, p)
    return hr, p - (p - 1.0) * g / (hr - s1)


def hugoniot2(g, h, p):
    """Right state on the 2-Hugoniot curve from (h,p), parametrized by g = Delta p."""
    if np.any(np.asarray(p) + g <= 0):
        raise ValueError("hugoniot2 requires p + g > 0")
    s1 = lambda1(h, p + g)
    return h * (1.0 + g / (s1 - h)), p + g


# first derivatives of the RH speeds in the curve parametrizations, and the
# second derivatives used by the shock-curve analysis


def dspeed(family: int, wrt: str, h, p):
    """Partial derivative of speed1(h,p)/speed2(h,p) in mixed arguments.

    `wrt` is one of "h", "p", "hh", "pp" (the doubled letters select the
    second derivative).  For family 1 the arguments are (h_right, p_left),
    for family 2 (h_left, p_right), matching speed1/speed2.
    """
    D = np.sqrt((p - h) ** 2 + 4.0 * h)
    if family == 1:
        if wrt == "h":
            return 0.5 * (1.0 + (p - h - 2.0) / D)
        if wrt == "p":
            return 0.5 * ((h - p) / D - 1.0)
        if wrt == "hh":
            return -2.0 * (p - 1.0) / D ** 3
        if wrt == "pp":
            return -2.0 * h / D ** 3
    elif family == 2:
        if wrt == "h":
            return 0.5 * (1.0 + (h - p + 2.0) / D)
        if wrt == "p":
            return 0.5 * ((p - h) / D - 1.0)
        if wrt == "hh":
            return 2.0 * (p - 1.0) / D ** 3
        if wrt == "pp":
            return 2.0 * h / D ** 3
    raise ValueError(f"bad (family, wrt) = ({family}, {wrt})")


def hugoniot1_partials(g, h0, p0):
    """(dp/dg, dp/dh0, dp/dp0) of the p-component of hugoniot1."""
    h = h0 + g
    s1 = lambda1(h, p0)
    a = dspeed(1, "h", h, p0)
    b = dspeed(1, "p", h, p0)
    Dn = h - s1
    dp_dg = -(p0 - 1.0) * (Dn - g * (1.0 - a)) / Dn ** 2
    dp_dh0 = (p0 - 1.0) * g * (1.0 - a) / Dn ** 2
    dp_dp0 = 1.0 - g / Dn - (p0 - 1.0) * g * b / Dn ** 2
    return dp_dg, dp_dh0, dp_dp0


def hugoniot2_partials(g, h0, p0):
    """(dh/dg, dh/dh0, dh/dp0) of the h-component of hugoniot2."""
    pn = p0 + g
    s1 = lambda1(h0, pn)
    a = dspeed(1, "h", h0, pn)
    b = dspeed(1, "p", h0, pn)
    Dm = s1 - h0
    dh_dg = h0 * (Dm - g * b) / Dm ** 2
    dh_dh0 = 1.0 + g / Dm - h0 * g * (a - 1.0) / Dm ** 2
    dh_dp0 = -h0 * g * b / Dm ** 2
    return dh_dg, dh_dh0, dh_dp0


# ---------------------------------------------------------------------------
# Riemann coordinates
# ---------------------------------------------------------------------------
#
# Along 2-rarefaction curves the quantity
#     F2(h,p) = l1*m + (m - asinh(sqrt(l2))) / 2,   m = sqrt(l2*(l2+1)),
# is constant; along 1-rarefaction curves the corresponding first integral is
#     F1 = sqrt(l1(l1+1))*l2 + (sqrt(t(t-1)) + asinh(sqrt(t-1))) / 2   (p >= 1)
#     F1 = sqrt(-l1(l1+1))*l2 - (arcsin(sqrt(t)) - sqrt(t(1-t))) / 2   (p < 1)
# with t = -l1.  Setting these equal to their value at the intercept and
# solving the resulting scalar equations gives H and P.


def _invariant2(h, p):
    l1 = lambda1(h, p)
    l2 = lambda2(h, p)
    m = np.sqrt(np.maximum(l2 * (l2 + 1.0), 0.0))
    return l1 * m + 0.5 * (m - np.arcsinh(np.sqrt(np.maximum(l2, 0.0))))


def _invariant1(h, p):
    l1 = lambda1(h, p)
    l2 = lambda2(h, p)
    t = -l1
    above = np.asarray(p) >= 1.0
    m = np.sqrt(np.abs(l1 * (l1 + 1.0)))
    up = m * l2 + 0.5 * (np.sqrt(np.maximum(t * (t - 1.0), 0.0))
                         + np.arcsinh(np.sqrt(np.maximum(t - 1.0, 0.0))))
    tc = np.clip(t, 0.0, 1.0)
    dn = m * l2 - 0.5 * (np.arcsin(np.sqrt(tc)) - np.sqrt(tc * (1.0 - tc)))
    return np.where(above, up, dn)


def _d_invariant1_dp(h, p):
    """Analytic d/dp of _invariant1: -sign(p-1) * l1 / (2 sqrt|l1(l1+1)|)."""
    l1 = lambda1(h, p)
    m = np.sqrt(np.abs(l1 * (l1 + 1.0)))
    m = np.where(m < 1e-300, 1e-300, m)
    return np.where(np.asarray(p) >= 1.0, -l1, l1) / (2.0 * m)


def _d_invariant2_dh(h, p):
    """Analytic d/dh of _invariant2: -(l2+1) / (2 sqrt(l2(l2+1)))."""
    l2 = lambda2(h, p)
    m = np.sqrt(np.maximum(l2 * (l2 + 1.0), 1e-300))
    return -(l2 + 1.0) / (2.0 * m)


def riemann_H(h, p):
    """First Riemann coordinate: h-intercept on p = 1 of the 2-rarefaction curve."""
    if np.isscalar(h) and np.isscalar(p):
        return _riemann_H_s(float(h), float(p))
    h = np.asarray(h, dtype=float)
    p = np.asarray(p, dtype=float)
    val = _invariant2(h, p)
    # solve -(y*sqrt(1+y^2) + asinh y)/2 = val with H = y^2
    y = np.sqrt(np.maximum(h * p, 0.0))
    for _ in range(_NEWTON_ITERS):
        r = np.sqrt(1.0 + y * y)
        f = -0.5 * (y * r + np.arcsinh(y)) - val
        y = np.maximum(y - f / (-r), 0.0)
    out = y * y
    return out if out.ndim else float(out)


def riemann_P(h, p):
    """Second Riemann coordinate: p-intercept on h = 0 of the 1-rarefaction curve."""
    if np.isscalar(h) and np.isscalar(p):
        return _riemann_P_s(float(h), float(p))
    h = np.asarray(h, dtype=float)
    p = np.asarray(p, dtype=float)
    val = _invariant1(h, p)
    above = p >= 1.0
    # p >= 1: solve (y*sqrt(1+y^2) + asinh y)/2 = val, P = 1 + y^2
    y = np.sqrt(np.maximum(np.where(above, p - 1.0, 0.0), 0.0))
    for _ in range(_NEWTON_ITERS):
        r = np.sqrt(1.0 + y * y)
        f = 0.5 * (y * r + np.arcsinh(y)) - val
        y = np.maximum(y - f / r, 0.0)
    p_up = 1.0 + y * y
    # p < 1: solve -(theta - sin(theta)cos(theta))/2 = val, P = sin(theta)^2
    th = np.arcsin(np.sqrt(np.clip(np.where(above, 1.0, p), 0.0, 1.0)))
    for _ in range(_NEWTON_ITERS):
        f = -0.5 * (th - np.sin(th) * np.cos(th)) - val
        d = -np.sin(th) ** 2
        th = np.clip(th - f / np.where(np.abs(d) < 1e-300, -1e-300, d), 1e-8, np.pi / 2)
    p_dn = np.sin(th) ** 2
    out = np.where(above, p_up, p_dn)
    out = np.where(h == 0.0, p, out)
    return out if out.ndim else float(out)


def to_riemann(s) -> State:
    """Map a state to its Riemann coordinates (H, P)."""
    h, p = s
    return State(riemann_H(h, p), riemann_P(h, p))


def from_riemann(c, bracket: float = 1.0) -> State:
    """Invert (H, P) -> (h, p); round-trips to 1e-9 on K."""
    from scipy.optimize import brentq

    H, P = c
    if H == 0.0:
        return State(0.0, float(P))

    def mismatch(hh):
        return riemann_H(hh, _p_on_rar1(hh, P)) - H

    hi = max(2.0 * H, 1e-3)
    while mismatch(hi) < 0 and hi < bracket * 64:
        hi *= 2.0
    h = brentq(mismatch, 0.0, hi, xtol=1e-15, rtol=8.9e-16)
    return State(h, _p_on_rar1(h, P))


def _p_on_rar1(h, P):
    """p-value of the point with abscissa h on the 1-rarefaction curve through (0,P)."""
    val = _invariant1(0.0, P)
    if P == 1.0:
        return 1.0

    def f(p):
        return _invariant1(h, p) - val

    from scipy.optimize import brentq

    if P > 1.0:
        return brentq(f, 1.0 + 1e-15, P + 1.0, xtol=1e-16, rtol=8.9e-16)
    return brentq(f, 1e-12, 1.0 - 1e-16, xtol=1e-16, rtol=8.9e-16)


# ---------------------------------------------------------------------------
# Rarefaction curves
# ---------------------------------------------------------------------------

def rarefaction1(g, h, p):
    """Point at h+g on the 1-rarefaction curve through (h, p).

    Evaluated from the first integral of the r1 ODE; the parametrization by
    the h-coordinate matches the eigenvector normalization r1 = (1, *).
    """
    scalar = np.isscalar(g) and np.isscalar(h)
    if scalar:
        return _rar1_s(float(g), float(h), float(p))
    hn = np.asarray(h, dtype=float) + g
    val = _invariant1(h, p)
    pn = _solve_p_invariant1(hn, np.asarray(p, dtype=float), val)
    pn = np.where(np.asarray(p) == 1.0, 1.0, pn)
    if scalar:
        return float(hn), float(pn)
    return hn, pn


def _solve_p_invariant1(hn, p_init, val):
    """Newton in p for _invariant1(hn, p) = val, staying on p_init's side of 1."""
    shape = np.broadcast(hn, p_init, val).shape
    p = np.array(np.broadcast_to(p_init, shape), dtype=float, copy=True)
    above = np.broadcast_to(np.asarray(p_init) >= 1.0, shape)
    for _ in range(80):
        f = _invariant1(hn, p) - val
        dp = f / _d_invariant1_dp(hn, p)
        pn = p - dp
        # keep the iterate strictly on the starting side of the LD line
        pn = np.where(above & (pn <= 1.0), 0.5 * (p + 1.0), pn)
        pn = np.where(~above & (pn >= 1.0), 0.5 * (p + 1.0), pn)
        p = pn
        if np.all(np.abs(dp) < 1e-15):
            break
    return p


def rarefaction2(g, h, p):
    """Point at p+g on the 2-rarefaction curve through (h, p)."""
    scalar = np.isscalar(g) and np.isscalar(h)
    if scalar:
        return _rar2_s(float(g), float(h), float(p))
    pn = np.asarray(p, dtype=float) + g
    hn = _solve_h_invariant2(np.asarray(h, dtype=float), pn, _invariant2(h, p))
    hn = np.where(np.asarray(h) == 0.0, 0.0, hn)
    if scalar:
        return float(hn), float(pn)
    return hn, pn


def _solve_h_invariant2(h_init, pn, val):
    shape = np.broadcast(h_init, pn, val).shape
    h = np.array(np.broadcast_to(h_init, shape), dtype=float, copy=True)
    for _ in range(80):
        f = _invariant2(h, pn) - val
        dh = f / _d_invariant2_dh(h, pn)
        hn = h - dh
        # the target abscissa is strictly positive whenever h_init > 0
        hn = np.where(hn <= 0.0, 0.5 * h, hn)
        h = hn
        if np.all(np.abs(dh) < 1e-15 * np.maximum(np.abs(h), 1e-8)):
            break
    return h


# -- pure-float fast paths for the event loop ------------------------------

def _lam1_s(h, p):
    return 0.5 * (h - p - math.sqrt((p - h) ** 2 + 4.0 * h))


def _lam2_s(h, p):
    return 0.5 * (h - p + math.sqrt((p - h) ** 2 + 4.0 * h))


def _hug1_s(g, h, p):
    hr = h + g
    if hr < 0.0:
        hr = 0.0
    s1 = _lam1_s(hr, p)
    return hr, p - (p - 1.0) * g / (hr - s1)


def _hug2_s(g, h, p):
    return h * (1.0 + g / (_lam1_s(h, p + g) - h)), p + g


def _inv1_s(h, p):
    l1 = _lam1_s(h, p)
    l2 = _lam2_s(h, p)
    t = -l1
    m = math.sqrt(abs(l1 * (l1 + 1.0)))
    if p >= 1.0:
        return m * l2 + 0.5 * (math.sqrt(max(t * (t - 1.0), 0.0))
                               + math.asinh(math.sqrt(max(t - 1.0, 0.0))))
    tc = min(max(t, 0.0), 1.0)
    return m * l2 - 0.5 * (math.asin(math.sqrt(tc)) - math.sqrt(tc * (1.0 - tc)))


def _inv2_s(h, p):
    l1 = _lam1_s(h, p)
    l2 = _lam2_s(h, p)
    m = math.sqrt(max(l2 * (l2 + 1.0), 0.0))
    return l1 * m + 0.5 * (m - math.asinh(math.sqrt(max(l2, 0.0))))


def _rar1_s(g, h, p):
    if p == 1.0:
        return h + g, 1.0
    hn = h + g
    val = _inv1_s(h, p)
    q = p
    above = p >= 1.0
    for _ in range(80):
        l1 = _lam1_s(hn, q)
        m = math.sqrt(abs(l1 * (l1 + 1.0))) or 1e-300
        d = (-l1 if above else l1) / (2.0 * m)
        dq = (_inv1_s(hn, q) - val) / d
        qn = q - dq
        if above and qn <= 1.0 or (not above) and qn >= 1.0:
            qn = 0.5 * (q + 1.0)
        q = qn
        if abs(dq) < 1e-15:
            break
    return hn, q


def _rar2_s(g, h, p):
    if h == 0.0:
        return 0.0, p + g
    pn = p + g
    val = _inv2_s(h, p)
    hh = h
    for _ in range(80):
        l2 = _lam2_s(hh, pn)
        m = math.sqrt(max(l2 * (l2 + 1.0), 1e-300))
        d = -(l2 + 1.0) / (2.0 * m)
        dh = (_inv2_s(hh, pn) - val) / d
        hn = hh - dh
        if hn <= 0.0:
            hn = 0.5 * hh
        hh = hn
        if abs(dh) < 1e-15 * max(abs(hh), 1e-8):
            break
    return hh, pn


def _riemann_H_s(h, p):
    if h == 0.0:
        return 0.0
    val = _inv2_s(h, p)
    y = math.sqrt(max(h * p, 0.0))
    for _ in range(_NEWTON_ITERS):
        r = math.sqrt(1.0 + y * y)
        f = -0.5 * (y * r + math.asinh(y)) - val
        y = max(y - f / (-r), 0.0)
    return y * y


def _riemann_P_s(h, p):
    if h == 0.0:
        return p
    if p == 1.0:
        return 1.0
    val = _inv1_s(h, p)
    if p > 1.0:
        y = math.sqrt(p - 1.0)
        for _ in range(_NEWTON_ITERS):
            r = math.sqrt(1.0 + y * y)
            f = 0.5 * (y * r + math.asinh(y)) - val
            y = max(y - f / r, 0.0)
        return 1.0 + y * y
    th = math.asin(math.sqrt(min(max(p, 0.0), 1.0)))
    for _ in range(_NEWTON_ITERS):
        f = -0.5 * (th - math.sin(th) * math.cos(th)) - val
        d = -math.sin(th) ** 2
        th = min(max(th - f / (d if abs(d) > 1e-300 else -1e-300), 1e-8), math.pi / 2)
    return math.sin(th) ** 2


def rarefaction_curve(sigma, s, family: int):
    """Spec-level rarefaction curve op: parameter is Delta h (family 1) or Delta p (family 2)."""
    h, p = s
    if family == 1:
        return State(*rarefaction1(sigma, h, p))
    if family == 2:
        return State(*rarefaction2(sigma, h, p))
    raise ValueError(f"family must be 1 or 2, got {family}")


# ---------------------------------------------------------------------------
# Wave sizes
# ---------------------------------------------------------------------------

def wave_size_rho(family: int, left, right):
    """Size in Riemann coordinates: Delta H (family 1) or Delta P (family 2)."""
    hl, pl = left
    hr, pr = right
    if family == 1:
        return riemann_H(hr, pr) - riemann_H(hl, pl)
    return riemann_P(hr, pr) - riemann_P(hl, pl)


# ---------------------------------------------------------------------------
# Two-shock decomposition (eta)
# ---------------------------------------------------------------------------

def eta_decompose(u, w, tol: float = 1e-13, maxiter: int = 50):
    """Sizes (eta1, eta2) with w = S2(eta2; S1(eta1; u)), by damped Newton.

    Accepts scalar states or arrays (u = (h, p) with array components).
    The analytic Jacobian is assembled from the curve partials.  Raises
    EtaDecompositionError if any entry fails to converge.
    """
    uh = np.asarray(u[0], dtype=float)
    up = np.asarray(u[1], dtype=float)
    wh = np.asarray(w[0], dtype=float)
    wp = np.asarray(w[1], dtype=float)
    scalar = uh.ndim == 0 and wh.ndim == 0
    uh, up, wh, wp = np.broadcast_arrays(uh, up, wh, wp)
    e1 = (wh - uh).astype(float).copy()
    e2 = (wp - up).astype(float).copy()

    def residual(a1, a2):
        m1 = uh + a1
        m2 = hugoniot1(a1, uh, up)[1]
        r_h = hugoniot2(a2, m1, m2)[0]
        return r_h - wh, m2 + a2 - wp, m1, m2

    f1, f2, m1, m2 = residual(e1, e2)
    for _ in range(maxiter):
        if np.all(np.maximum(np.abs(f1), np.abs(f2)) < tol):
            break
        dw_dg, _, _ = hugoniot1_partials(e1, uh, up)
        dh_dg2, dh_dm1, dh_dm2 = hugoniot2_partials(e2, m1, m2)
        j11 = dh_dm1 + dh_dm2 * dw_dg
        j12 = dh_dg2
        j21 = dw_dg
        det = j11 - j12 * j21
        det = np.where(np.abs(det) < 1e-300, 1e-300, det)
        d1 = (f1 - j12 * f2) / det
        d2 = (f2 * j11 - f1 * j21) / det
        step = np.ones_like(e1)
        norm0 = np.hypot(f1, f2)
        for _ in range(25):
            t1, t2 = e1 - step * d1, e2 - step * d2
            g1, g2, n1, n2 = residual(np.maximum(t1, -uh), t2)
            better = np.hypot(g1, g2) <= norm0 + 1e-300
            if np.all(better):
                break
            step = np.where(better, step, step / 2)
        e1, e2 = np.maximum(e1 - step * d1, -uh), e2 - step * d2
        f1, f2, m1, m2 = residual(e1, e2)
    else:
        bad = np.maximum(np.abs(f1), np.abs(f2)) >= tol
        if np.any(bad):
            raise EtaDecompositionError(
                f"{int(np.sum(bad))} state pairs outside the invertibility box")
    if scalar:
        return float(e1), float(e2)
    return e1, e2
