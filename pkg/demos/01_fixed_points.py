"""Run DR-lambda on two separated circles and certify the limit.

The iterates settle at a point that is not in either set. The certificate
splits it into the nearest point f of B, its projection e onto A and the
gap vector g = f - e.
"""

from drlambda.fixedpoint import characterize_fixed_point, iterate
from drlambda.lab import get_scenario

scn = get_scenario("separable-circles")
for lam in (0.3, 0.5, 0.7):
    problem = scn.problem(lam)
    trace = iterate(problem, scn.seeds[0])
    cert = characterize_fixed_point(problem, trace.last)
    print(f"lambda={lam}: {trace.n_steps} steps, x={trace.last.round(10)}, "
          f"f={cert.f.round(10)}, g={cert.g.round(10)}, "
          f"residual={cert.reconstruction_residual:.1e}")
