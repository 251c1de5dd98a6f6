"""Glimm functionals V, Q, G of one solution and the Lyapunov functional Phi_z.

All wave strengths entering these functionals are measured in Riemann
coordinates; the two-shock decomposition eta connecting u(x) with v(x)+z(x)
is measured in the original coordinates.  Weights:

  Q_hh pairs of 1-waves x_a < x_b with omega = delta_bar * min(|P_a-1|, |P_b-1|)
       when both are 1-shocks on the same side of p = 1, else 0;
  Q_hp all (2-wave left of 1-wave) pairs;
  Q_pp approaching 2-wave pairs (at least one shock);
  A_11 strength-times-|p_left - 1| of 1-waves approaching eta_1, with the
       left/right selection flipped across p = 1 and by the sign of eta_1;
  A_12, A_21, A_22 plain approaching strengths;
  W_i = exp(k_iA1 * A_i1 + k_iA2 * A_i2);
  Phi_z = sum_i int |eta_i| W_i dx * exp(k_G * (G(u) + G(v))).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import wavecurves
from .model import State
from .profiles import Profile
from .wavecurves import eta_decompose, riemann_P


@dataclass
class JumpCatalog:
    """Arrays describing the jumps of one piecewise-constant solution.

    Entries must be listed in spatial order; coincident positions keep the
    list order (the interaction-potential prefix sums rely on it).
    """

    family: np.ndarray
    x: np.ndarray
    rho: np.ndarray
    p_left: np.ndarray
    P_left: np.ndarray
    is_shock: np.ndarray

    def __len__(self):
        return len(self.x)

    @classmethod
    def empty(cls):
        z = np.empty(0)
        return cls(z.astype(int), z, z.copy(), z.copy(), z.copy(), z.astype(bool))


@dataclass(frozen=True)
class Kappas:
    """Weight exponents of the Lyapunov functional plus the omega scale."""

    k1a1: float = 2.0
    k1a2: float = 1.5
    k2a1: float = 2.0
    k2a2: float = 1.5
    kG: float = 10.0
    delta_bar: float = 0.1
    mu: float = 1.2

    def validate(self):
        ks = (self.k1a1, self.k1a2, self.k2a1, self.k2a2)
        if not all(k > 1 for k in ks):
            raise ValueError("weight exponents must exceed 1")
        if not self.kG > max(ks):
            raise ValueError("kG must dominate the A-exponents")
        return self


def shock_flag(family, gamma, p_left):
    """Compressive-shock indicator by size sign: stable across the degenerate
    lines (a wave lifted off h=0 or p=1 keeps its flag, so Q cannot jump)."""
    family = np.asarray(family)
    gamma = np.asarray(gamma)
    p_left = np.asarray(p_left)
    return np.where(family == 1, (p_left - 1.0) * gamma < 0.0, gamma > 0.0)


def total_strength(cat: JumpCatalog):
    """(V, V1, V2): summed |rho| by family."""
    a = np.abs(cat.rho)
    v1 = float(np.sum(a[cat.family == 1]))
    v2 = float(np.sum(a[cat.family == 2]))
    return v1 + v2, v1, v2


def interaction_potential(cat: JumpCatalog, kappas: Kappas):
    """(Q_hh, Q_hp, Q_pp, Q) with the omega-weighted 1-1 part.

    Entries must be listed in spatial order (ties resolved by list order, as
    the tracker emits them).  Q_hh and Q_pp count each unordered pair once,
    so only Q_hp needs the positional prefix.
    """
    n = len(cat)
    if n == 0:
        return 0.0, 0.0, 0.0, 0.0
    a = np.abs(cat.rho)
    one = cat.family == 1
    two = ~one

    # Q_hh: unordered pairs of same-side 1-shocks, weight delta_bar*min(w_a, w_b)
    q_hh = 0.0
    w = np.abs(cat.P_left - 1.0)
    for side_mask in ((cat.p_left > 1.0), (cat.p_left < 1.0)):
        m = one & cat.is_shock & side_mask
        if np.sum(m) >= 2:
            ws, rs = w[m], a[m]
            order = np.argsort(ws)
            ws, rs = ws[order], rs[order]
            suffix = np.cumsum(rs[::-1])[::-1]
            q_hh += float(np.sum(ws[:-1] * rs[:-1] * suffix[1:]))
    q_hh *= kappas.delta_bar

    # Q_hp: 2-wave strictly before a 1-wave in the listing
    pref2 = np.cumsum(np.where(two, a, 0.0))
    pref2 = np.concatenate([[0.0], pref2])[:-1]        # strictly-before sums
    q_hp = float(np.sum(a[one] * pref2[one]))

    # Q_pp: unordered 2-wave pairs with at least one shock
    s2 = a[two]
    r2 = a[two & ~cat.is_shock]
    tot = 0.5 * (np.sum(s2) ** 2 - np.sum(s2 ** 2))
    rar = 0.5 * (np.sum(r2) ** 2 - np.sum(r2 ** 2))
    q_pp = float(tot - rar)
    return q_hh, q_hp, q_pp, q_hh + q_hp + q_pp


def interaction_potential_dense(cat: JumpCatalog, kappas: Kappas):
    """O(n^2) reference implementation of interaction_potential."""
    n = len(cat)
    if n == 0:
        return 0.0, 0.0, 0.0, 0.0
    a = np.abs(cat.rho)
    one = cat.family == 1
    two = ~one
    idx = np.arange(n)
    left_of = (cat.x[:, None] < cat.x[None, :]) | (
        (cat.x[:, None] == cat.x[None, :]) & (idx[:, None] < idx[None, :]))
    pair = a[:, None] * a[None, :]
    side = np.sign(cat.p_left - 1.0)
    both_shock = cat.is_shock[:, None] & cat.is_shock[None, :]
    same_side = (side[:, None] == side[None, :]) & (side[:, None] != 0)
    omega = kappas.delta_bar * np.minimum(np.abs(cat.P_left - 1.0)[:, None],
                                          np.abs(cat.P_left - 1.0)[None, :])
    m_hh = one[:, None] & one[None, :] & left_of & both_shock & same_side
    q_hh = float(np.sum(np.where(m_hh, omega * pair, 0.0)))
    m_hp = two[:, None] & one[None, :] & left_of
    q_hp = float(np.sum(np.where(m_hp, pair, 0.0)))
    some_shock = cat.is_shock[:, None] | cat.is_shock[None, :]
    m_pp = two[:, None] & two[None, :] & left_of & some_shock
    q_pp = float(np.sum(np.where(m_pp, pair, 0.0)))
    return q_hh, q_hp, q_pp, q_hh + q_hp + q_pp


def glimm(cat: JumpCatalog, kappas: Kappas):
    """G = V + Q."""
    return total_strength(cat)[0] + interaction_potential(cat, kappas)[3]


# -- incremental pair terms for the event loop ------------------------------
#
# A wave is passed as the tuple (family, rho, p_left, P_left, is_shock).

def q_pair(a, b, kappas: Kappas):
    """Pair potential of wave a located left of wave b."""
    fa, ra, pa, Pa, sa = a
    fb, rb, pb, Pb, sb = b
    prod = abs(ra * rb)
    if fa == 1 and fb == 1:
        if sa and sb and (pa - 1.0) * (pb - 1.0) > 0.0:
            return kappas.delta_bar * min(abs(Pa - 1.0), abs(Pb - 1.0)) * prod
        return 0.0
    if fa == 2 and fb == 1:
        return prod
    if fa == 2 and fb == 2 and (sa or sb):
        return prod
    return 0.0


def q_cross(arrays, w, w_is_left, kappas: Kappas):
    """Summed pair potential between every catalog entry and one wave.

    arrays = (family, rho, p_left, P_left, is_shock) as numpy arrays; the
    entries all sit on one side of the wave, selected by w_is_left.
    """
    fam, rho, pl, Pl, sh = arrays
    if len(fam) == 0:
        return 0.0
    wf, wr, wpl, wPl, wsh = w
    prod = np.abs(rho) * abs(wr)
    one = fam == 1
    two = ~one
    hh = one & (wf == 1) & sh & wsh & ((pl - 1.0) * (wpl - 1.0) > 0.0)
    q = np.sum(np.where(hh, kappas.delta_bar
                        * np.minimum(np.abs(Pl - 1.0), abs(wPl - 1.0)) * prod, 0.0))
    if w_is_left:
        q += np.sum(np.where((wf == 2) & one, prod, 0.0))
    else:
        q += np.sum(np.where(two & (wf == 1), prod, 0.0))
    q += np.sum(np.where(two & (wf == 2) & (sh | wsh), prod, 0.0))
    return float(q)


# ---------------------------------------------------------------------------
# Approach weights
# ---------------------------------------------------------------------------

def _approach_tables(cat_u, cat_v, xs, sign1, sign2, kappas):
    """A_{i,j} and W_i at interval points xs given eta signs per interval.

    All sums are prefix/suffix cumulatives over the waves sorted by position,
    read off at each x by binary search.
    """
    xs = np.asarray(xs, float)
    m = len(xs)

    def sums(cat):
        if len(cat) == 0:
            z = np.zeros(m)
            return z, z, z, z, z, z, z, z
        order = np.argsort(cat.x, kind="stable")
        x_s = cat.x[order]
        a = np.abs(cat.rho)[order]
        pl = cat.p_left[order]
        fam1 = cat.family[order] == 1
        wt = np.abs(pl - 1.0) * a
        idx = np.searchsorted(x_s, xs, side="left")   # waves strictly left of x

        def pre(vals):
            c = np.concatenate([[0.0], np.cumsum(vals)])
            return c[idx]

        tot_up = float(np.sum(np.where(fam1 & (pl > 1), wt, 0.0)))
        tot_dn = float(np.sum(np.where(fam1 & (pl < 1), wt, 0.0)))
        tot_1 = float(np.sum(np.where(fam1, a, 0.0)))
        tot_2 = float(np.sum(np.where(~fam1, a, 0.0)))
        a11_up_L = pre(np.where(fam1 & (pl > 1), wt, 0.0))
        a11_dn_L = pre(np.where(fam1 & (pl < 1), wt, 0.0))
        a11_up_R = tot_up - a11_up_L
        a11_dn_R = tot_dn - a11_dn_L
        a12 = pre(np.where(~fam1, a, 0.0))
        a21 = tot_1 - pre(np.where(fam1, a, 0.0))
        a22_L = a12
        a22_R = tot_2 - a12
        return a11_up_L, a11_up_R, a11_dn_L, a11_dn_R, a12, a21, a22_L, a22_R

    (u_up_L, u_up_R, u_dn_L, u_dn_R, u12, u21, u22_L, u22_R) = sums(cat_u)
    (v_up_L, v_up_R, v_dn_L, v_dn_R, v12, v21, v22_L, v22_R) = sums(cat_v)

    neg1 = sign1 < 0
    a11 = np.where(neg1,
                   u_up_L + u_dn_R + v_up_R + v_dn_L,
                   v_up_L + v_dn_R + u_up_R + u_dn_L)
    a12 = u12 + v12
    a21 = u21 + v21
    a22 = np.where(sign2 < 0, u22_R + v22_L, v22_R + u22_L)
    w1 = np.exp(kappas.k1a1 * a11 + kappas.k1a2 * a12)
    w2 = np.exp(kappas.k2a1 * a21 + kappas.k2a2 * a22)
    return a11, a12, a21, a22, w1, w2


def approach_weights(x, sign_eta1, sign_eta2, cat_u, cat_v, kappas):
    """(A11, A12, A21, A22, W1, W2) at a non-jump point x."""
    a11, a12, a21, a22, w1, w2 = _approach_tables(
        cat_u, cat_v, np.array([x]), np.array([sign_eta1]), np.array([sign_eta2]), kappas)
    return a11[0], a12[0], a21[0], a22[0], w1[0], w2[0]


# ---------------------------------------------------------------------------
# Phi and L1 distance
# ---------------------------------------------------------------------------

@dataclass
class FunctionalReport:
    """Phi and its factors.

    phi = integral * exp(log_boost) with log_boost = kG*(G_u + G_v); the split
    keeps interaction audits exact when the exponential factor is enormous.
    """

    V_u: float
    Q_u: float
    G_u: float
    V_v: float
    Q_v: float
    G_v: float
    phi: float
    integral: float = 0.0
    log_boost: float = 0.0
    table: dict = field(default_factory=dict)

    @property
    def log_phi(self):
        if self.integral <= 0.0:
            return -math.inf
        return math.log(self.integral) + self.log_boost


def l1_distance(a: Profile, b: Profile):
    """Exact L1 distance sum(|dh| + |dp|) over the common refinement."""
    if a.far_left != b.far_left or a.far_right != b.far_right:
        raise ValueError("far-field states differ: L1 distance is infinite")
    cuts, (sa, sb) = a.refine_with(b)
    if len(cuts) == 0:
        return 0.0
    lens = np.diff(cuts)
    dh = [abs(x.h - y.h) + abs(x.p - y.p) for x, y in zip(sa[1:-1], sb[1:-1])]
    return float(math.fsum(d * w for d, w in zip(dh, lens)))


def _raw_of_profile(prof: Profile):
    return (prof.xs, np.array([s.h for s in prof.states]),
            np.array([s.p for s in prof.states]))


def _refine_arrays(raws):
    """Common refinement of (xs, h, p) step functions: cuts + per-raw arrays."""
    cuts = np.unique(np.concatenate([r[0] for r in raws]))
    out = []
    for xs, h, p in raws:
        idx = np.zeros(len(cuts) + 1, dtype=int)
        idx[1:] = np.searchsorted(xs, cuts, side="right")
        out.append((h[idx], p[idx]))
    return cuts, out


def phi(cat_u, cat_v, prof_u: Profile, prof_v: Profile, z: Profile | None,
        kappas: Kappas) -> FunctionalReport:
    """Lyapunov functional Phi_z(u, v) from snapshots and their catalogs."""
    raw_z = _raw_of_profile(z) if z is not None else None
    return phi_raw(cat_u, cat_v, _raw_of_profile(prof_u), _raw_of_profile(prof_v),
                   raw_z, kappas)


def phi_raw(cat_u, cat_v, raw_u, raw_v, raw_z, kappas: Kappas) -> FunctionalReport:
    """Array-based Phi evaluation; raw_* = (breakpoints, h-states, p-states)."""
    if raw_z is None:
        raw_z = (np.empty(0), np.zeros(1), np.zeros(1))
    cuts, ((uh, up), (vh, vp), (zh, zp)) = _refine_arrays([raw_u, raw_v, raw_z])
    wh = vh + zh
    wp = vp + zp
    if abs(uh[0] - wh[0]) + abs(up[0] - wp[0]) > 1e-13 or \
       abs(uh[-1] - wh[-1]) + abs(up[-1] - wp[-1]) > 1e-13:
        raise ValueError("far fields of u and v+z differ: Phi is infinite")
    if len(cuts) == 0:
        integral = 0.0
        tab = {}
    else:
        e1, e2 = eta_decompose((uh, up), (wh, wp))
        lens = np.diff(cuts)
        mids = np.concatenate([[cuts[0] - 1.0], 0.5 * (cuts[1:] + cuts[:-1]), [cuts[-1] + 1.0]])
        a11, a12, a21, a22, w1, w2 = _approach_tables(
            cat_u, cat_v, mids, np.sign(e1), np.sign(e2), kappas)
        body = (np.abs(e1[1:-1]) * w1[1:-1] + np.abs(e2[1:-1]) * w2[1:-1]) * lens
        integral = float(math.fsum(body))
        tab = dict(cuts=cuts, eta1=e1, eta2=e2, W1=w1, W2=w2,
                   A11=a11, A12=a12, A21=a21, A22=a22)
    v_u, q_u = total_strength(cat_u)[0], interaction_potential(cat_u, kappas)[3]
    v_v, q_v = total_strength(cat_v)[0], interaction_potential(cat_v, kappas)[3]
    boost = kappas.kG * (v_u + q_u + v_v + q_v)
    value = integral * math.exp(min(boost, 700.0))
    return FunctionalReport(V_u=v_u, Q_u=q_u, G_u=v_u + q_u,
                            V_v=v_v, Q_v=q_v, G_v=v_v + q_v,
                            phi=value, integral=integral, log_boost=boost,
                            table=tab)


def catalog_of_profile(prof: Profile, eps=None):
    """JumpCatalog of a plain profile by solving each jump's Riemann fan."""
    from .riemann import partition_rarefaction, solve_riemann

    fams, xs, rhos, pls, Pls, shocks = [], [], [], [], [], []
    for x, sl, sr in zip(prof.xs, prof.states[:-1], prof.states[1:]):
        fan = solve_riemann(sl, sr, eps=eps)
        for w in fan.waves:
            parts = partition_rarefaction(w, eps) if (eps and w.kind == "rarefaction") else [w]
            for pw in parts:
                fams.append(pw.family)
                xs.append(x)
                rhos.append(pw.rho)
                pls.append(pw.left.p)
                Pls.append(float(riemann_P(*pw.left)))
                shocks.append(bool(shock_flag(pw.family, pw.gamma, pw.left.p)))
    return JumpCatalog(np.asarray(fams, int), np.asarray(xs, float),
                       np.asarray(rhos, float), np.asarray(pls, float),
                       np.asarray(Pls, float), np.asarray(shocks, bool))


# ---------------------------------------------------------------------------
# Calibration of the weight exponents (Conditions Sigma)
# ---------------------------------------------------------------------------

@dataclass
class SigmaCertificate:
    kappas: Kappas
    conditions: list        # (name, lhs, rhs, margin, ok)
    fitted: dict
    all_green: bool

    def pretty(self):
        lines = [f"kappas: {self.kappas}"]
        for name, lhs, rhs, margin, ok in self.conditions:
            lines.append(f"  {'PASS' if ok else 'FAIL'} {name}: lhs={lhs:.4g} rhs={rhs:.4g} margin={margin:.4g}")
        lines.append(f"certificate: {'all green' if self.all_green else 'VIOLATED'}")
        return "\n".join(lines)


def empirical_mu(box, n=20000, seed=0):
    """Fitted coordinate-equivalence constant mu for the box."""
    rng = np.random.default_rng(seed)
    h, p = box.sample(rng, n)
    g1 = rng.uniform(-1, 1, n) * np.minimum(h, box.delta0)
    h1, p1 = wavecurves.hugoniot1(g1, h, p)
    r1 = wavecurves.riemann_H(h1, p1) - wavecurves.riemann_H(h, p)
    g2 = rng.uniform(-box.delta_p, box.delta_p, n)
    h2, p2 = wavecurves.hugoniot2(g2, h, p)
    r2 = wavecurves.riemann_P(h2, p2) - wavecurves.riemann_P(h, p)
    keep1 = np.abs(g1) > 1e-9
    keep2 = np.abs(g2) > 1e-9
    q1 = r1[keep1] / g1[keep1]
    q2 = r2[keep2] / g2[keep2]
    q3 = (wavecurves.riemann_P(h, p) - 1.0) / np.where(np.abs(p - 1) < 1e-12, np.nan, p - 1)
    q3 = q3[np.isfinite(q3)]
    rat = np.concatenate([q1, q2, q3])
    return float(max(np.max(rat), np.max(1.0 / rat)) * 1.0001)


def calibrate_kappas(box, n_samples=4000, m_star=0.2, m0_star=None, seed=0,
                     delta_bar=0.1, k1a2=1.5, k2a2=1.5, margin=1.05,
                     fitted_constants=None) -> SigmaCertificate:
    """Fix the weight exponents by the ordered Conditions-Sigma steps.

    Empirical stand-ins for the analysis' O(1) constants are fitted by
    sampling the interaction estimates on the box (or passed explicitly via
    `fitted_constants`).  m_star bounds the Glimm functional of each run the
    certificate is meant to cover; m0_star the total-variation bound.
    """
    from .verify import check_interaction_estimates, fit_interaction_kink

    mu = empirical_mu(box, seed=seed)
    if fitted_constants is None:
        reps = check_interaction_estimates(box, max(n_samples, 1000), seed=seed,
                                           ladder=False)
        c_fit = max(1.0, *(r.sup_ratio for r in reps))
        kink = fit_interaction_kink(box, max(n_samples // 2, 500), seed=seed + 1)
    else:
        c_fit = max(1.0, fitted_constants.get("interaction", 1.0))
        kink = fitted_constants.get("kink", {"a_max": 1.0, "dG_ok": True,
                                             "delta_bar": delta_bar})
    if m0_star is None:
        m0_star = 2.0 * m_star
    delta_bar = kink.get("delta_bar", delta_bar)

    p0, p1 = box.p0, box.p1
    d0, dp = box.delta0, box.delta_p
    conds = []

    def _exp(x):
        return math.exp(min(x, 700.0))

    # Step 1: free constants
    # Step 2 (Sigma_1): kappa_2A1 beats the W1*-weighted gain of 1-waves
    w1_cap = _exp(2.0 * k1a2 * m_star)
    k2a1 = margin * (4.0 * mu / p0) * c_fit * w1_cap
    k2a1 = max(k2a1, 1.05)
    conds.append(("Sigma1", k2a1 * p0 / (4 * mu), c_fit * w1_cap,
                  k2a1 * p0 / (4 * mu) - c_fit * w1_cap, True))

    # Step 3 (Sigma_2): kappa_1A1 beats the W2*-weighted gain of 2-waves
    w2_cap = _exp((k2a1 + k2a2) * m_star)
    k1a1 = max(1.05, margin * 2.0 * p1 * c_fit * w2_cap)
    conds.append(("Sigma2", 1.0 / (2 * p1), c_fit * w2_cap / k1a1,
                  1.0 / (2 * p1) - c_fit * w2_cap / k1a1, True))

    # Step 4 (Sigma_3): delta_p below the exponent ratio
    rhs3 = min(0.5, k2a1 / k1a1)
    conds.append(("Sigma3", dp, rhs3, rhs3 - dp, dp < rhs3))

    # Step 5 (Sigma_4): delta_0 small enough, plus the frak-K constraints
    ok_a = c_fit * d0 < 0.5
    conds.append(("Sigma4a", c_fit * d0, 0.5, 0.5 - c_fit * d0, ok_a))
    lhs_b = c_fit * w2_cap * d0 * p1
    conds.append(("Sigma4b", lhs_b, 1.0 / (2 * p1), 1.0 / (2 * p1) - lhs_b,
                  lhs_b < 1.0 / (2 * p1)))
    frak_k = k1a1 * mu * d0 * dp
    conds.append(("frakK", frak_k, 0.25, 0.25 - frak_k, frak_k < 0.25))
    lhs_c = 1.0 - _exp(min(frak_k, 0.25)) * (k1a1 / mu ** 2) * d0 * dp
    conds.append(("frakK2", 0.5, lhs_c, lhs_c - 0.5, lhs_c > 0.5))

    # Step 6 (Sigma_5): kG dominates the interaction-time weight shifts
    a_formula = c_fit * max(1.0 + mu * d0 / delta_bar, p1 * d0 ** 2,
                            d0 * m0_star * (1.0 + p1), (d0 + 1.0) * mu + d0)
    a_emp = kink.get("a_max", 0.0)
    kmax = max(k1a1, k1a2, k2a1, k2a2)
    kG = margin * max(2.0 * a_formula * kmax, 2.0 * a_emp * kmax, kmax + 0.1)
    conds.append(("Sigma5", kG, 2.0 * max(a_formula, a_emp) * kmax,
                  kG - 2.0 * max(a_formula, a_emp) * kmax, True))
    conds.append(("GlimmFloors", 1.0 if kink.get("dG_ok", False) else 0.0, 1.0,
                  0.0, bool(kink.get("dG_ok", False))))

    kap = Kappas(k1a1=k1a1, k1a2=k1a2, k2a1=k2a1, k2a2=k2a2, kG=kG,
                 delta_bar=delta_bar, mu=mu)
    cert = SigmaCertificate(
        kappas=kap, conditions=conds,
        fitted=dict(c_fit=c_fit, mu=mu, m_star=m_star, m0_star=m0_star,
                    a_formula=a_formula, a_emp=a_emp, seed=seed),
        all_green=all(c[4] for c in conds))
    return cert
