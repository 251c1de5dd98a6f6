"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Tolerances are pinned here, verbatim from the contract; nothing is deferred
to later calibration.  Run with `pytest tests/test_acceptance.py -v -s`.
"""

import math
import time

import numpy as np
import pytest

from granuflow import verify
from granuflow.fronttrack import TrackedSolution
from granuflow.functionals import Kappas, calibrate_kappas, l1_distance
from granuflow.model import DomainBox, State, lambda1, lambda2
from granuflow.profiles import Profile
from granuflow.riemann import is_admissible, solve_riemann
from granuflow.wavecurves import (hugoniot1, hugoniot2, riemann_H, riemann_P,
                                  speed1, speed2)

BOX = DomainBox()


def report(crit, ok, detail=""):
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {crit}: {detail}")
    assert ok, f"criterion {crit}: {detail}"


# -- 1. wave-curve exactness -------------------------------------------------

def test_criterion_1_wave_curve_exactness():
    rng = np.random.default_rng(101)
    n = 10 ** 5
    h, p = BOX.sample(rng, n)
    g1 = rng.uniform(-1, 1, n) * np.minimum(h, BOX.delta0)
    g2 = rng.uniform(-0.08, 0.08, n)

    def resid(fam, g):
        if fam == 1:
            hr, pr = hugoniot1(g, h, p)
            s = speed1(g, h, p)
        else:
            hr, pr = hugoniot2(g, h, p)
            s = speed2(g, h, p)
        r1 = (-hr * pr) - (-h * p) - s * (hr - h)
        r2 = (pr - 1) * hr - (p - 1) * h - s * (pr - p)
        return np.maximum(np.abs(r1), np.abs(r2)) / (1 + np.abs(h * p))

    rh = max(np.max(resid(1, g1)), np.max(resid(2, g2)))

    hr, pr = hugoniot1(g1, h, p)
    sym1 = np.max(np.abs(lambda1(hr, p) - lambda1(h, pr)))
    hr2, pr2 = hugoniot2(g2, h, p)
    sym2 = np.max(np.abs(lambda2(h, pr2) - lambda2(hr2, p)))

    deg1 = np.max(np.abs(speed1(g1, h, np.ones(n)) + 1.0))
    deg2 = np.max(np.abs(lambda2(h, np.ones(n)) - h))
    hv, _ = hugoniot2(g2, np.zeros(n), p)
    deg3 = np.max(np.abs(hv))

    ok = rh < 1e-12 and sym1 < 1e-12 and sym2 < 1e-12 \
        and deg1 < 5e-15 and deg2 < 5e-15 and deg3 == 0.0
    report(1, ok, f"RH={rh:.2e} sym=({sym1:.2e},{sym2:.2e}) "
                  f"degenerate=({deg1:.1e},{deg2:.1e},{deg3:.1e}) n={n}")


# -- 2. Appendix B derivative suite -------------------------------------------

def test_criterion_2_derivative_suite():
    rep = verify.check_appendixB(BOX, n=10 ** 4, seed=102)
    report(2, rep.passed and rep.sup_ratio <= 1e-6,
           f"max rel err {rep.sup_ratio:.2e} over {rep.n_samples} samples")


# -- 3. Riemann solver ---------------------------------------------------------

def test_criterion_3_riemann_solver():
    from granuflow.riemann import partition_rarefaction

    rng = np.random.default_rng(103)
    worst = 0.0
    regions_ok = True
    lax_ok = True
    caps_ok = True
    for _ in range(10 ** 4):
        side = 1 if rng.random() < 0.5 else -1
        same_side = rng.random() < 0.7
        pl = 1.0 + side * rng.uniform(0, BOX.delta_p)
        pr = 1.0 + (side if same_side else -side) * rng.uniform(0, BOX.delta_p)
        left = State(rng.uniform(0, BOX.delta0), pl)
        right = State(rng.uniform(0, BOX.delta0), pr)
        fan = solve_riemann(left, right, eps=1e-3)
        worst = max(worst, fan.compose_residual())
        for w in fan.waves:
            if not is_admissible(w):
                lax_ok = False
            if w.kind == "rarefaction":
                parts = partition_rarefaction(w, 1e-3)
                if max(abs(p.gamma) for p in parts) > 1e-3 * (1 + 1e-9):
                    caps_ok = False
            if w.left.h < 0 or w.right.h < 0:
                regions_ok = False
        if same_side:
            for w in fan.waves:
                if (w.left.p - 1.0) * side < -1e-14 or (w.right.p - 1.0) * side < -1e-14:
                    regions_ok = False
    ok = worst < 1e-10 and regions_ok and lax_ok and caps_ok
    report(3, ok, f"resubstitution={worst:.2e} regions={regions_ok} "
                  f"lax={lax_ok} front_caps={caps_ok}")


# -- 4. homogeneous front tracking ---------------------------------------------

def twenty_jump_profile():
    """20 jumps, TV ~ 0.5, h <= 0.05, |p-1| <= 0.1 (random walk in K)."""
    rng = np.random.default_rng(104)
    far = State(0.02, 1.0)
    xs = np.linspace(0.0, 2.0, 20) + rng.uniform(0, 0.05, 20)
    states = []
    h, p = far
    for _ in range(19):
        h = float(np.clip(h + rng.uniform(-1, 1) * 0.02, 0.0, 0.05))
        p = float(np.clip(p + rng.uniform(-1, 1) * 0.04, 0.9, 1.1))
        states.append(State(h, p))
    states.append(far)
    prof = Profile.from_jumps(far, list(zip(xs, states))).merge_equal()
    return prof


def test_criterion_4_homogeneous_tracking():
    prof = twenty_jump_profile()
    tv = prof.total_variation()
    assert 0.3 < tv < 0.8, f"fixture TV={tv}"
    # the theorem's K strictly contains the data box: give it headroom
    run_box = DomainBox(0.08, 0.11)
    ts = TrackedSolution(prof, eps=2e-3, box=run_box)
    I0 = ts.conserved_integrals()
    ts.evolve(2.0)
    I1 = ts.conserved_integrals()
    cons_h = abs(I1[0] - I0[0]) / max(abs(I0[0]), 1e-6)
    cons_p = abs(I1[1] - I0[1]) / max(abs(I0[1]), 1e-6)
    g_ok = all(r.delta_G <= 1e-12 for r in ts.event_log)
    ok = cons_h <= 1e-12 and cons_p <= 1e-12 and g_ok and ts.box_violations == 0
    report(4, ok, f"TV={tv:.3f} events={ts.events_processed} "
                  f"cons=({cons_h:.2e},{cons_p:.2e}) G_monotone={g_ok} "
                  f"in_K={ts.box_violations == 0}")


# -- 5. interaction estimates ----------------------------------------------------

def test_criterion_5_interaction_estimates():
    n = 10 ** 4
    reps = verify.check_interaction_estimates(BOX, n, seed=105)
    reps2 = verify.check_interaction_estimates(BOX, 2 * n, seed=105)
    ok = True
    lines = []
    for r, r2 in zip(reps, reps2):
        stable = abs(r2.sup_ratio / r.sup_ratio - 1.0) <= 0.05
        ok &= r.passed and np.isfinite(r.sup_ratio) and stable and r.r2 >= 0.98
        lines.append(f"{r.estimate_id}: sup={r.sup_ratio:.3g} "
                     f"(x2: {r2.sup_ratio:.3g}) slope={r.slope:.2f} R2={r.r2:.3f}")
    report(5, ok, "; ".join(lines))


# -- 6. time-step estimates -------------------------------------------------------

def test_criterion_6_timestep_estimates():
    dts = np.geomspace(1e-2, 1e-5, 7)
    reps = verify.check_timestep_estimates(BOX, dts=dts, n=2000, seed=106)
    slopes_ok = all(abs(r.slope - 1.0) <= 0.1 and r.r2 >= 0.98 for r in reps)

    prof = twenty_jump_profile().coarsen(1e-12)
    growth = verify.check_step_glimm_growth(DomainBox(0.08, 0.11), prof, eps=2e-3,
                                            dts=(0.02, 0.01), T=0.08, seed=106)
    c_a, c_b = growth[0.02], growth[0.01]
    stable = c_b <= 3 * max(c_a, 1e-12) and c_a <= 3 * max(c_b, 1e-12)
    ok = slopes_ok and stable
    report(6, ok, f"slopes={[round(r.slope, 3) for r in reps]} "
                  f"G-growth C: {c_a:.3g} vs {c_b:.3g} (dt halved)")


# -- 7. Appendix C quartic estimates ----------------------------------------------

def test_criterion_7_appendixC():
    reps = verify.check_appendixC(BOX, n=10 ** 4, seed=107)
    by_id = {r.estimate_id: r for r in reps}
    one, two = by_id["appendixC-1wave"], by_id["appendixC-2wave"]
    vanish = verify.check_vanishing_lemma(500, seed=107, box=BOX)
    ok = (one.details["joint_size_slope"] >= 2.8
          and abs(one.details["p_factor_slope"] - 2.0) <= 0.2
          and two.details["joint_size_slope"] >= 2.8
          and abs(two.details["h_factor_slope"] - 2.0) <= 0.2
          and all(np.isfinite(r.sup_ratio) for r in reps)
          and vanish.passed)
    report(7, ok, f"1-wave: joint={one.details['joint_size_slope']:.2f} "
                  f"(p-1)^2={one.details['p_factor_slope']:.2f}; "
                  f"2-wave: joint={two.details['joint_size_slope']:.2f} "
                  f"h^2={two.details['h_factor_slope']:.2f}; "
                  f"vanishing sweeps max={vanish.sup_ratio:.1e}")


# -- 8 + 10. stability audit and L1 contraction proxy --------------------------------

@pytest.fixture(scope="module")
def stability_result():
    t0 = time.time()
    cfg = verify.StabilityConfig(box=BOX, eps_ladder=(1e-3, 5e-4), dt=1.0 / 3,
                                 T=1.0, n_jumps=3, tv_scale=0.22, seed=108)
    rep = verify.check_stability_run(cfg)
    rep.details["runtime"] = time.time() - t0
    return rep


def test_criterion_8_stability_audit(stability_result):
    rep = stability_result
    cert = rep.details["certificate"]
    per = rep.details["per_eps"]
    runtime = rep.details["runtime"]
    mono = all(r["phi_monotone"] for r in per.values())
    steps = all(np.isfinite(r["C2"]) for r in per.values())
    sandwich = all(r["sandwich_ok"] for r in per.values())
    comp = all(r["compounded_ok"] for r in per.values())
    c1s = [per[e]["C1"] for e in (1e-3, 5e-4)]
    c1_stable = (max(c1s) < 1e-9) or abs(c1s[1] / max(c1s[0], 1e-30) - 1.0) <= 0.2
    ok = (cert.all_green and mono and steps and sandwich and comp and c1_stable
          and runtime <= 300.0)
    report(8, ok, f"cert={'green' if cert.all_green else 'red'} "
                  f"phi_monotone={mono} C1={c1s} C2={per[1e-3]['C2']:.3g} "
                  f"events={[per[e]['audited_events'] for e in (1e-3, 5e-4)]} "
                  f"runtime={runtime:.0f}s")


def test_criterion_10_l1_contraction_proxy(stability_result):
    kappas = stability_result.details["kappas"]
    u0, v0 = verify.make_stability_pair(BOX, 3, seed=108, tv_scale=0.22)
    cfg = verify.StabilityConfig(box=BOX, eps_ladder=(1e-3,), dt=None, T=1.0,
                                 n_jumps=3, tv_scale=0.22, seed=108, kappas=kappas)
    ts_u, ts_v, _, _ = verify._run_pair(u0, v0, 1e-3, None, 1.0, BOX, 0.1)
    res = verify._audit_pair(ts_u, ts_v, cfg, kappas, 1e-3, [], None)
    ok = res["contraction_ok"] and res["phi_monotone"] and len(res["contraction"]) > 0
    lines = [f"t={t}: L1={l1:.3e} <= bound" for t, l1, _ in res["contraction"]]
    report(10, ok, f"C0={res['C0']:.3f} C1={res['C1']:.3g}; " + "; ".join(lines))


# -- 9. semigroup defects -------------------------------------------------------------

def test_criterion_9_semigroup_defects():
    comp, split = verify.check_semigroup_defect(BOX, seed=109)
    ok = (abs(comp.slope - 1.0) <= 0.15 and comp.r2 >= 0.98
          and abs(split.slope - 2.0) <= 0.2 and split.r2 >= 0.98)
    report(9, ok, f"composition slope={comp.slope:.3f} (R2={comp.r2:.4f}); "
                  f"splitting slope={split.slope:.3f} (R2={split.r2:.4f})")
