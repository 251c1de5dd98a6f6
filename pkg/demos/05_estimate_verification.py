"""Numerical stress tests of the interaction and time-step estimates.

Every bound is checked as: finite sup of residual/kernel ratios, plus the
scaling exponent the kernel predicts under size shrinkage.

Run:  python demos/05_estimate_verification.py
"""

from granuflow.model import DomainBox
from granuflow import verify

box = DomainBox()

print("== pairwise interaction estimates (sizes in Riemann coordinates) ==")
for rep in verify.check_interaction_estimates(box, 8000, seed=0):
    want = rep.details.get("want_slope")
    print(f"  {rep.estimate_id}: sup ratio {rep.sup_ratio:.4g}, "
          f"shrinkage slope {rep.slope:.3f} (expect {want}), R2={rep.r2:.4f}")

print("\n== time-step estimates (slope 1 in dt) ==")
for rep in verify.check_timestep_estimates(box, n=2000, seed=0):
    print(f"  {rep.estimate_id}: sup ratio {rep.sup_ratio:.4g}, "
          f"slope {rep.slope:.3f}, R2={rep.r2:.4f}")

print("\n== shock-curve derivative formulas vs central differences ==")
rep = verify.check_appendixB(box, n=5000, seed=0)
print(f"  worst relative error: {rep.sup_ratio:.2e}")
print(f"  |dp/dh| <= C |p_l - 1| with C = {rep.details['|dp/dh| bound constant']:.3f} "
      f"(observed sup {rep.details['|dp/dh| sup ratio']:.3f})")

print("\n== finer interaction-type estimates (third/fourth order) ==")
for rep in verify.check_appendixC(box, n=4000, seed=0):
    print(f"  {rep.estimate_id}: sup ratio {rep.sup_ratio:.4g} "
          + (f"joint-size slope {rep.details.get('joint_size_slope'):.2f}"
             if "joint_size_slope" in rep.details else ""))

print("\n== product-vanishing structure ==")
rep = verify.check_vanishing_lemma(400, seed=0, box=box)
for k, v in rep.details.items():
    if "->" in k:
        print(f"  {k}: {v:.2e}")

print("\n== semigroup defects ==")
for rep in verify.check_semigroup_defect(box, seed=0):
    print(f"  {rep.estimate_id}: slope {rep.slope:.3f} (R2={rep.r2:.4f})")
