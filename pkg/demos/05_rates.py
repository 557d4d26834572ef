"""Compare observed linear rates with the predicted contraction factor."""

import math

from drlambda.fixedpoint import fit_rate, iterate
from drlambda.lab import run_scenario, get_scenario
from drlambda.regularity import predicted_rate_convex_consistent

lam = 0.5
scn = get_scenario("two-intersecting-circles")
q = max(fit_rate(iterate(scn.problem(lam), s)).q_rate for s in scn.seeds)
c = predicted_rate_convex_consistent(lam, math.sqrt(2) * scn.kappa_prime).c
print(f"intersecting circles: observed {q:.4f}, predicted {c:.5f}")

rep = run_scenario("two-balls", lam, {"samples": 2000})
print(f"two balls: observed {rep.rate['empirical']:.4f}, predicted {rep.rate['predicted']:.4f}, "
      f"verdict {rep.verdict}")
