"""A circle and its center: the iteration has nowhere to land.

Every seed ends in a two-cycle of radius lambda/(1+lambda), so the residual
never drops below a fixed positive level.
"""

import numpy as np

from drlambda.fixedpoint import iterate
from drlambda.lab import get_scenario

scn = get_scenario("circle-point")
for lam in (0.2, 0.8):
    tails = []
    for seed in scn.seeds:
        trace = iterate(scn.problem(lam), seed, max_iter=100_000)
        tails.append(trace.residuals[-1])
    print(f"lambda={lam}: status={trace.status}, cycle length={trace.cycle}, "
          f"final radius={np.linalg.norm(trace.last):.6f} "
          f"(expected {lam / (1 + lam):.6f}), min tail residual={min(tails):.4f}")
