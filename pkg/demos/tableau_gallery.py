"""The coefficient families and what their algebraic checks report."""

import numpy as np

from alphaprk import build_tableau, check_conditions

np.set_printoptions(precision=4, suppress=True)

for family, alpha in [("alpha-rattle", 0.2), ("lobatto3-a", 0.1), ("lobatto3-b", 0.1), ("lobatto3", 0.0)]:
    t = build_tableau(family, alpha)
    rep = check_conditions(t)
    print(f"\n{t.family.value}, alpha = {alpha}")
    print("A =\n", t.A)
    print("A_hat =\n", t.A_hat)
    print(f"symplectic residual {rep.symplectic:.1e}, first/last row {rep.stiff_accuracy:.1e}, "
          f"B({rep.B}) C({rep.C}) D({rep.D})")

# The W-transform family is symplectic too, but its first row is not zero,
# so the first stage position is not the start point.
for alpha in (0.0, 0.3, 0.6):
    rep = check_conditions(build_tableau("wtransform2", alpha))
    print(f"wtransform2 alpha = {alpha}: symplectic {rep.symplectic:.1e}, stiff accuracy residual {rep.stiff_accuracy:.3f}")
