"""Monte Carlo lower bounds for the subtransversality constant kappa.

Each estimate samples 10^4 points in a ball of radius 0.1 around the lifted
fixed point and is compared with the closed-form bound.
"""

import math

from drlambda.lab import get_scenario
from drlambda.operators import difference_vector, lift, omega_g
from drlambda.regularity import ball, estimate_kappa

lam = 0.5
for name in ("separable-circles", "nonseparable-circles", "concentric-circles"):
    scn = get_scenario(name)
    zeta = difference_vector(scn.gap, lam)
    ubar = lift(zeta, scn.fixed_point(lam))
    rep = estimate_kappa(omega_g(scn.problem(lam), scn.gap), ubar, zeta, [ubar],
                         ball(ubar[0], 0.1, 10_000, 42), check_unbounded=False)
    print(f"{name}: kappa >= {rep.estimate:.5f}, closed form {math.sqrt(scn.kappa_sq_bound):.5f}")
