"""Smoke-level runs of the verification suites at reduced sample counts.

The acceptance module runs them at their contractual sizes; here we pin the
report plumbing, determinism, and the qualitative outcomes.
"""

import numpy as np
import pytest

from granuflow.model import DomainBox
from granuflow import verify


def test_interaction_estimates_are_deterministic(box):
    a = verify.check_interaction_estimates(box, 1500, seed=7)
    b = verify.check_interaction_estimates(box, 1500, seed=7)
    for ra, rb in zip(a, b):
        assert ra.sup_ratio == rb.sup_ratio
        assert ra.slope == rb.slope


def test_interaction_estimate_slopes(box):
    reps = verify.check_interaction_estimates(box, 2000, seed=0)
    by_id = {r.estimate_id: r for r in reps}
    assert abs(by_id["interaction-1-1"].slope - 3.0) <= 0.2
    assert abs(by_id["interaction-2-2"].slope - 3.0) <= 0.2
    assert abs(by_id["interaction-2-1"].slope - 2.0) <= 0.2
    for r in reps:
        assert r.passed and np.isfinite(r.sup_ratio) and r.r2 >= 0.98


def test_trivial_interaction_cases(box):
    # single wave: nothing to interact
    lhs, kernel = verify._eval_11(np.array([0.03]), np.array([1.05]),
                                  np.array([-0.01]), np.array([0.0]))[:2]
    assert lhs[0] < 1e-13
    # p = 1: all motion on the contact line
    lhs, _ = verify._eval_11(np.array([0.03]), np.array([1.0]),
                             np.array([-0.01]), np.array([-0.005]))[:2]
    assert lhs[0] < 1e-13


def test_timestep_estimates(box):
    reps = verify.check_timestep_estimates(box, n=600, seed=0)
    assert len(reps) == 4
    for r in reps:
        assert r.passed and abs(r.slope - 1.0) <= 0.1


def test_timestep_trivial_cases(box):
    from granuflow.wavecurves import hugoniot1, hugoniot2, riemann_H, riemann_P

    # p_left = 1 for a 1-front on the contact line: update is the identity
    h = np.array([0.03])
    p = np.array([1.0])
    hr, pr = hugoniot1(np.array([0.01]), h, p)
    q = verify._source_update(h, p, 0.01)
    qr = verify._source_update(hr, pr, 0.01)
    assert q[0][0] == h[0] and qr[0][0] == hr[0]
    # h_left = 0 for a 2-front: both states sit on h = 0
    hr, pr = hugoniot2(np.array([0.05]), np.array([0.0]), np.array([0.95]))
    assert hr[0] == 0.0


def test_appendixB(box):
    rep = verify.check_appendixB(box, n=2500, seed=0)
    assert rep.passed and rep.sup_ratio <= 1e-6


def test_appendixC(box):
    reps = verify.check_appendixC(box, n=1500, seed=0)
    by_id = {r.estimate_id: r for r in reps}
    one = by_id["appendixC-1wave"]
    assert one.details["joint_size_slope"] >= 2.8
    assert abs(one.details["p_factor_slope"] - 2.0) <= 0.2
    two = by_id["appendixC-2wave"]
    assert two.details["joint_size_slope"] >= 2.8
    assert abs(two.details["h_factor_slope"] - 2.0) <= 0.2
    for r in reps:
        assert r.passed


def test_vanishing_lemma(box):
    rep = verify.check_vanishing_lemma(200, seed=0, box=box)
    assert rep.passed
    assert rep.sup_ratio < 1e-12


def test_kink_fit(box):
    kink = verify.fit_interaction_kink(box, 300, seed=1)
    assert kink["dG_ok"]
    assert np.isfinite(kink["a_max"]) and kink["a_max"] > 0


def test_stability_run_small(box):
    cfg = verify.StabilityConfig(box=box, eps_ladder=(2e-3,), T=0.3,
                                 n_jumps=4, tv_scale=0.3, seed=1)
    rep = verify.check_stability_run(cfg)
    res = rep.details["per_eps"][2e-3]
    assert res["phi_monotone"]
    assert res["sandwich_ok"] and res["contraction_ok"]
    assert rep.details["certificate"].all_green


def test_semigroup_defect(box):
    reps = verify.check_semigroup_defect(box, seed=3)
    comp, split = reps
    assert abs(comp.slope - 1.0) <= 0.15 and comp.r2 >= 0.98
    assert abs(split.slope - 2.0) <= 0.2 and split.r2 >= 0.98


def test_loglog_fit():
    x = np.geomspace(1, 1e-3, 7)
    y = 3.7 * x ** 2
    sl, it, r2 = verify.loglog_fit(x, y)
    assert abs(sl - 2.0) < 1e-12 and r2 > 0.999999


def test_stability_with_offset_z(box):
    """Homogeneous pair with a constant-in-time offset: drift scales with
    eps + sigma and Phi_z stays monotone at interactions."""
    from granuflow.model import State
    from granuflow.profiles import Profile

    z = Profile.from_jumps(State(0.0, 0.0),
                           [(0.3, State(0.004, 0.0)), (0.8, State(0.0, 0.0))])
    cfg = verify.StabilityConfig(box=box, eps_ladder=(2e-3,), T=0.5, n_jumps=4,
                                 tv_scale=0.25, seed=11, z=z)
    rep = verify.check_stability_run(cfg)
    res = rep.details["per_eps"][2e-3]
    assert res["phi_monotone"]
    assert abs(res["sigma"] - 0.008) < 1e-12
    assert res["compounded_ok"]
