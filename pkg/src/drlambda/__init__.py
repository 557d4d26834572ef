"""Relaxed Douglas-Rachford iteration for nonconvex feasibility problems.

The package is split into

* :mod:`drlambda.geometry` for sets and their exact multi-valued projectors,
* :mod:`drlambda.operators` for the relaxed step and the lifted four-set maps,
* :mod:`drlambda.fixedpoint` for iteration, rate fitting and fixed point certificates,
* :mod:`drlambda.regularity` for sampled estimates of the regularity constants,
* :mod:`drlambda.lab` for named scenarios, reports and the command line.
"""

from .geometry import (Ball, AffineSubspace, DegenerateProjection, DimensionError, FiniteUnion,
                       Halfspace, ProductSet, ProjectionResult, SinglePoint, Sphere, Translate,
                       distance, project, reflect)
from .operators import TwoSetProblem, difference_vector, drlambda_step, lift
from .fixedpoint import characterize_fixed_point, fit_rate, iterate

__version__ = "0.1.0"
