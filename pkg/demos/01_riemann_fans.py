"""Walk through the Riemann solver: wave kinds, admissibility, partitioning.

Run:  python demos/01_riemann_fans.py
"""

import numpy as np

from granuflow.model import State, eigenvalues
from granuflow.riemann import is_admissible, partition_rarefaction, solve_riemann

# A generic Riemann problem crossing the linearly degenerate line p = 1:
# the 1-wave lives on the left state's side, the 2-wave carries p across.
left = State(0.01, 1.10)
right = State(0.02, 0.90)
fan = solve_riemann(left, right)
print(f"left {left}  ->  right {right}")
print(f"middle state: {fan.middle}")
for w in fan.waves:
    print(f"  family {w.family} {w.kind:12s} gamma={w.gamma:+.5f} "
          f"rho={w.rho:+.5f} speed={w.speed:+.4f} admissible={is_admissible(w)}")
print(f"re-substitution residual: {fan.compose_residual():.2e}\n")

# On p = 1 the first family is linearly degenerate: any h-jump is a contact
# moving at speed -1.
fan = solve_riemann(State(0.02, 1.0), State(0.05, 1.0))
w = fan.waves[0]
print(f"contact on p=1: gamma={w.gamma:.3f} speed={w.speed:.12f}\n")

# Rarefactions are approximated by chains of small entropy-violating jumps
# along the Hugoniot curve, each moving at its own Rankine-Hugoniot speed.
eps = 1e-3
fan = solve_riemann(State(0.04, 1.08), State(0.002, 1.02), eps=eps)
for w in fan.waves:
    if w.kind != "rarefaction":
        continue
    parts = partition_rarefaction(w, eps)
    lam_l, lam_r = eigenvalues(*w.left), eigenvalues(*w.right)
    print(f"family-{w.family} rarefaction of size {w.gamma:+.5f} "
          f"-> {len(parts)} fronts of size <= {eps}")
    print(f"  speeds sweep [{parts[0].speed:.4f}, {parts[-1].speed:.4f}]"
          f" (characteristic fan [{lam_l[w.family-1]:.4f}, {lam_r[w.family-1]:.4f}])")
    endpoint_err = max(abs(parts[-1].right.h - w.right.h),
                       abs(parts[-1].right.p - w.right.p))
    print(f"  chain endpoint error: {endpoint_err:.2e}")
