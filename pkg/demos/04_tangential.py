"""Tangent circles: regularity fails and convergence becomes sublinear.

The ratio that defines kappa' grows like 1/b near the touching point, and the
fitted linear rate creeps towards 1 as the stopping tolerance tightens.
"""

import math

import numpy as np

from drlambda.fixedpoint import fit_rate, iterate
from drlambda.geometry import SinglePoint
from drlambda.lab import get_scenario
from drlambda.regularity import kappa_prime_ratio

scn = get_scenario("tangential-circles")
for b in (0.1, 0.01, 0.001):
    u = np.array([math.sqrt(1 - b * b), b])
    ratio = kappa_prime_ratio([scn.A, scn.B], u, SinglePoint([1, 0]))
    print(f"b={b}: ratio={ratio:.4f}, 1/b={1 / b:.1f}")
for tol in (1e-4, 1e-6, 1e-8):
    trace = iterate(scn.problem(0.5), scn.seeds[0], tol=tol)
    print(f"tol={tol:.0e}: {trace.n_steps} steps, fitted rate {fit_rate(trace).q_rate:.6f}")
