"""Running the relaxed Douglas-Rachford iteration and certifying what it finds.

The iteration driver always follows the lexicographically first branch of the
multi-valued step, which makes every trace reproducible.  Fixed points are
characterized through the shadow ``f = P_B(x)``, its projection ``e = P_A(f)``
and the gap ``g = f - e``: at a fixed point ``x = f - lam/(1-lam) * g``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import ClosedSet, DegenerateProjection, as_vector, distance, project
from .operators import TwoSetProblem, difference_vector, drlambda_step, omega_g

CONVERGED = "Converged"
MAX_ITERATIONS = "MaxIterations"
DIVERGED = "Diverged"
DEGENERATE = "DegenerateProjection"

#: residuals at or below this level are treated as the floating point noise floor
NOISE_FLOOR = 100 * np.finfo(float).eps


class NotAFixedPoint(ValueError):
    """Raised when a point handed to :func:`characterize_fixed_point` is not fixed."""


@dataclass
class IterationTrace:
    """Record of one run of the iteration.

    Attributes
    ----------
    iterates : ndarray, shape (K, n)
        ``x^0, ..., x^{K-1}``.
    residuals : ndarray, shape (K - 1,)
        Step lengths ``||x^{k+1} - x^k||``.
    shadows : ndarray, shape (K, n)
        Selected ``P_B(x^k)``; rows are NaN where the shadow is a continuum.
    ref_distances : ndarray or None
        Distances of the iterates to a reference fixed set, when one was given.
    status : str
        One of ``"Converged"``, ``"MaxIterations"``, ``"Diverged"`` and
        ``"DegenerateProjection"``.
    cycle : int or None
        Period of an exactly repeating tail, if one was detected.
    """

    iterates: np.ndarray
    residuals: np.ndarray
    shadows: np.ndarray
    ref_distances: np.ndarray | None
    status: str
    cycle: int | None = None

    @property
    def last(self) -> np.ndarray:
        return self.iterates[-1]

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    @property
    def n_steps(self) -> int:
        return len(self.residuals)

    def to_csv(self, path) -> None:
        """Write the trace with columns ``k, x0.., residual, shadow0.., refDistance``."""
        n = self.iterates.shape[1]
        header = (["k"] + [f"x{i}" for i in range(n)] + ["residual"]
                  + [f"shadow{i}" for i in range(n)] + ["refDistance"])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for k in range(len(self.iterates)):
                res = self.residuals[k] if k < len(self.residuals) else ""
                ref = self.ref_distances[k] if self.ref_distances is not None else ""
                w.writerow([k, *map(repr, self.iterates[k].tolist()), res,
                            *map(repr, self.shadows[k].tolist()), ref])


def _shadow(problem, x):
    r = project(problem.B, x)
    return np.full(x.size, np.nan) if r.is_degenerate else r.points[0]


def iterate(problem: TwoSetProblem, x0, tol: float = 1e-10, max_iter: int = 100_000,
            reference: ClosedSet | None = None, divergence_bound: float | None = None
            ) -> IterationTrace:
    """Run the relaxed Douglas-Rachford iteration from ``x0``.

    Parameters
    ----------
    problem : TwoSetProblem
    x0 : array_like
        Starting point.
    tol : float
        Stop with status ``Converged`` once a step is at most ``tol`` long.
    max_iter : int
        Maximum number of steps.
    reference : ClosedSet, optional
        Fixed set to measure ``refDistances`` against.
    divergence_bound : float, optional
        Norm beyond which the run is declared ``Diverged``; defaults to
        ``1e6 * (1 + ||x0||)``.

    Returns
    -------
    IterationTrace

    Notes
    -----
    The map is deterministic, so once an iterate repeats exactly the rest of
    the run is periodic.  The driver then fills the remaining steps by
    repeating the cycle instead of recomputing it; the trace is identical to
    the one an exhaustive run would produce.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    x = as_vector(x0).copy()
    if x.size != problem.dim:
        raise ValueError("x0 has the wrong dimension")
    bound = divergence_bound if divergence_bound is not None else 1e6 * (1 + np.linalg.norm(x))

    xs, res = [x], []
    seen = {x.tobytes(): 0}
    status, cycle = MAX_ITERATIONS, None
    for k in range(max_iter):
        try:
            nxt = drlambda_step(problem, x)[0]
        except DegenerateProjection:
            status = DEGENERATE
            break
        r = float(np.linalg.norm(nxt - x))
        xs.append(nxt)
        res.append(r)
        x = nxt
        if r <= tol:
            status = CONVERGED
            break
        if np.linalg.norm(x) > bound:
            status = DIVERGED
            break
        key = x.tobytes()
        if key in seen:
            start = seen[key]
            cycle = len(xs) - 1 - start
            remaining = max_iter - (k + 1)
            pattern_x = xs[start + 1:]
            pattern_r = res[start:]
            reps = remaining // cycle + 1
            xs.extend((pattern_x * reps)[:remaining])
            res.extend((pattern_r * reps)[:remaining])
            break
        seen[key] = len(xs) - 1

    iterates = np.array(xs)
    shadows = _shadows(problem, iterates)
    refd = None
    if reference is not None:
        refd = np.array([distance(reference, p) for p in iterates])
    return IterationTrace(iterates, np.array(res), shadows, refd, status, cycle)


def _shadows(problem, iterates):
    # periodic tails repeat the same points, so cache by value
    cache = {}
    out = []
    for p in iterates:
        key = p.tobytes()
        if key not in cache:
            cache[key] = _shadow(problem, p)
        out.append(cache[key])
    return np.array(out)


@dataclass(frozen=True)
class RateFit:
    """Result of :func:`fit_rate`."""

    q_rate: float
    r_squared: float
    window: int


def fit_rate(trace_or_residuals, window: int | None = None) -> RateFit:
    """Fit a geometric rate to the tail of a residual sequence.

    The residuals at or below ``100 * eps`` are dropped first.  The fit uses the
    last ``max(8, 20%)`` of the remaining residuals unless ``window`` is given,
    and regresses ``log r_k`` on ``k``.

    Returns
    -------
    RateFit
        ``q_rate = exp(slope)`` and the coefficient of determination.

    Raises
    ------
    ValueError
        If fewer than 8 usable residuals are available.
    """
    r = getattr(trace_or_residuals, "residuals", trace_or_residuals)
    r = np.asarray(r, dtype=float)
    k = np.arange(r.size)
    keep = r > NOISE_FLOOR
    r, k = r[keep], k[keep]
    w = window if window is not None else max(8, int(np.ceil(0.2 * r.size)))
    if r.size < 8 or w < 2 or w > r.size:
        raise ValueError(f"need at least 8 positive residuals, have {r.size}")
    r, k = r[-w:], k[-w:]
    y = np.log(r)
    slope, intercept = np.polyfit(k, y, 1)
    fitted = slope * k + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return RateFit(float(np.exp(slope)), r2, int(w))


@dataclass(frozen=True, eq=False)
class FixedPointCertificate:
    """Decomposition of a fixed point into shadow, its projection and the gap.

    ``reconstruction_residual`` measures ``||x - (f - lam' g)||`` and
    ``tightness_residual`` measures ``dist(e, P_A(f + lam' g))``.
    """

    x: np.ndarray
    f: np.ndarray
    e: np.ndarray
    g: np.ndarray
    lam: float
    reconstruction_residual: float
    tightness_residual: float
    tight: bool

    def to_dict(self) -> dict:
        return {"x": self.x.tolist(), "f": self.f.tolist(), "e": self.e.tolist(),
                "g": self.g.tolist(), "lambda": self.lam,
                "reconstructionResidual": self.reconstruction_residual,
                "tightnessResidual": self.tightness_residual, "tight": self.tight}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def characterize_fixed_point(problem: TwoSetProblem, x, tol: float = 1e-9) -> FixedPointCertificate:
    """Certify that ``x`` is a fixed point and extract its gap.

    Raises
    ------
    NotAFixedPoint
        If ``||x - T(x)|| > tol`` for the selected branch.
    DegenerateProjection
        If a projection is a continuum.
    """
    x = as_vector(x)
    step = drlambda_step(problem, x)[0]
    if np.linalg.norm(step - x) > tol:
        raise NotAFixedPoint(f"||x - T(x)|| = {np.linalg.norm(step - x):.3e} exceeds {tol:g}")
    lp = problem.lam_ratio
    f = project(problem.B, x).select()
    e = project(problem.A, f).select()
    g = f - e
    recon = float(np.linalg.norm(x - (f - lp * g)))
    r = project(problem.A, f + lp * g)
    if r.is_degenerate:
        tight = distance(r.continuum, e)
    else:
        tight = min(float(np.linalg.norm(e - p)) for p in r.points)
    return FixedPointCertificate(x, f, e, g, problem.lam, recon, tight, tight <= tol)


@dataclass(frozen=True)
class W0Check:
    ok: bool
    residuals: tuple


def check_w0_membership(problem: TwoSetProblem, g, u, tol: float = 1e-10) -> W0Check:
    """Check the four projection inclusions that define a cycle in ``W_0(g)``.

    The inclusions are ``u_1 in P(B - lam' g)(u_2)``, ``u_2 in P(A - lam' g)(u_3)``,
    ``u_3 in P_A(u_4)`` and ``u_4 in P_B(u_1)``.
    """
    u = np.asarray(u, dtype=float)
    sets = omega_g(problem, g)
    residuals = []
    for i in range(4):
        r = project(sets[i], u[(i + 1) % 4])
        if r.is_degenerate:
            raise DegenerateProjection("projection in the cycle is a continuum")
        residuals.append(min(float(np.linalg.norm(u[i] - p)) for p in r.points))
    return W0Check(all(v <= tol for v in residuals), tuple(residuals))


def shadows_of(problem: TwoSetProblem, fixed_points: Sequence) -> list:
    """Selected shadows ``P_B(x)`` of a list of fixed points."""
    return [project(problem.B, p).select() for p in fixed_points]


def check_monotonicity(problem1: TwoSetProblem, problem2: TwoSetProblem,
                       fixed1: Sequence, fixed2: Sequence, tol: float = 1e-8) -> bool:
    """Check that the shadows of ``Fix`` at the larger lambda lie among those at the smaller.

    Parameters
    ----------
    problem1, problem2 : TwoSetProblem
        The same sets at ``lam1 <= lam2``.
    fixed1, fixed2 : sequence of array_like
        Fixed points at ``lam1`` and ``lam2``.
    """
    if problem1.lam > problem2.lam:
        raise ValueError("problem1 must carry the smaller lambda")
    s1 = shadows_of(problem1, fixed1)
    s2 = shadows_of(problem2, fixed2)
    if not s2:
        return True
    if not s1:
        return False
    return all(min(np.linalg.norm(a - b) for b in s1) <= tol for a in s2)


def discover_fixed_points(problem: TwoSetProblem, seeds: Sequence, tol: float = 1e-10,
                          max_iter: int = 100_000, cluster_tol: float = 1e-6) -> list:
    """Approximate ``Fix T`` by running from several seeds and clustering the limits.

    Only converged runs contribute.  Limits closer than ``cluster_tol`` are merged.
    """
    found = []
    for s in seeds:
        tr = iterate(problem, s, tol=tol, max_iter=max_iter)
        if not tr.converged:
            continue
        p = tr.last
        if all(np.linalg.norm(p - q) > cluster_tol for q in found):
            found.append(p)
    return sorted(found, key=lambda p: tuple(p))


__all__ = [
    "IterationTrace", "RateFit", "FixedPointCertificate", "W0Check", "NotAFixedPoint",
    "iterate", "fit_rate", "characterize_fixed_point", "difference_vector",
    "check_w0_membership", "check_monotonicity", "discover_fixed_points", "shadows_of",
    "CONVERGED", "MAX_ITERATIONS", "DIVERGED", "DEGENERATE",
]
