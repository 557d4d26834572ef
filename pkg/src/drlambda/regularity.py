"""Sampled estimates of the regularity constants behind local convergence of the relaxed method.

Each estimator draws a deterministic stream of points from a
:class:`NeighborhoodSpec`, evaluates a ratio per sample and reports the
maximum.  Since the constants are suprema, every sampled value is a lower
bound; reports say so through ``is_lower_bound``.  Samples at which a ratio
has the form ``0/0`` are skipped, as are samples hitting a continuum
projection.

The sample stream has a prefix property: the first ``N`` points drawn for a
given seed do not depend on how many points are requested in total.  Hence
estimates are nondecreasing in the sample count.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr

from .geometry import (ClosedSet, DegenerateProjection, ProductSet, Sphere, SinglePoint,
                       Translate, as_vector, distance, intersection, project)
from .operators import (TwoSetProblem, difference_vector, lift, omega_g, phi_zeta_residual,
                        psi, psi_g)

DEFAULT_SAMPLES = 10_000
DEFAULT_SEED = 42
DEFAULT_RADIUS = 0.1

#: growth factor of the estimate under a tenfold shrink of the radius that flags unboundedness
UNBOUNDED_GROWTH = 3.0


# ---------------------------------------------------------------------------
# neighborhoods and samplers

@dataclass(frozen=True, eq=False)
class BallRegion:
    """Open ball of the given radius around ``center``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center).copy())
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def dim(self):
        return self.center.size

    def from_normals(self, z):
        n = self.dim
        d = z[:, :n]
        norms = np.linalg.norm(d, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        r = self.radius * ndtr(z[:, n:n + 1]) ** (1.0 / n)
        return self.center + d / norms * r

    def contains(self, p):
        return np.linalg.norm(p - self.center) < self.radius * (1 + 1e-12)

    def shrunk(self, factor):
        return BallRegion(self.center, self.radius * factor)

    def to_dict(self):
        return {"shape": "ball", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class TubeRegion:
    """Points within ``radius`` of the outward normal ray of ``anchor`` through ``through``.

    The ray is ``{through + t * direction : 0 <= t <= length}``; for a sphere the
    direction defaults to the outward radial direction at ``through``.
    """

    anchor: ClosedSet
    through: np.ndarray
    radius: float
    length: float = 1.0
    direction: np.ndarray | None = None

    def __post_init__(self):
        p = as_vector(self.through).copy()
        object.__setattr__(self, "through", p)
        if self.radius <= 0 or self.length < 0:
            raise ValueError("radius must be positive and length nonnegative")
        d = self.direction
        if d is None:
            if not isinstance(self.anchor, Sphere):
                raise ValueError("a direction is required for non-spherical anchors")
            d = p - self.anchor.center
        d = as_vector(d)
        object.__setattr__(self, "direction", d / np.linalg.norm(d))

    @property
    def dim(self):
        return self.through.size

    @property
    def center(self):
        return self.through

    def from_normals(self, z):
        n = self.dim
        base = BallRegion(np.zeros(n), self.radius).from_normals(z)
        t = self.length * ndtr(z[:, n + 1:n + 2])
        return self.through + t * self.direction + base

    def contains(self, p):
        t = np.clip((p - self.through) @ self.direction, 0.0, self.length)
        return np.linalg.norm(p - self.through - t * self.direction) < self.radius * (1 + 1e-12)

    def shrunk(self, factor):
        return TubeRegion(self.anchor, self.through, self.radius * factor, self.length * factor,
                          self.direction)

    def to_dict(self):
        return {"shape": "tube", "anchor": self.anchor.to_dict(), "through": self.through.tolist(),
                "radius": self.radius, "length": self.length}


@dataclass(frozen=True, eq=False)
class NeighborhoodSpec:
    """A sampling region together with the sample count and seed."""

    shape: BallRegion | TubeRegion
    sample_count: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be positive")

    def sample(self, streams: int = 1) -> np.ndarray:
        """Draw ``sample_count`` rows of ``streams`` independent points each.

        Returns
        -------
        ndarray, shape (sample_count, streams, dim)
        """
        n = self.shape.dim
        width = n + 2
        rng = np.random.default_rng(self.seed)
        z = rng.standard_normal((self.sample_count, streams * width))
        return np.stack([self.shape.from_normals(z[:, s * width:(s + 1) * width])
                         for s in range(streams)], axis=1)

    def shrunk(self, factor: float) -> "NeighborhoodSpec":
        return NeighborhoodSpec(self.shape.shrunk(factor), self.sample_count, self.seed)

    def with_count(self, count: int) -> "NeighborhoodSpec":
        return NeighborhoodSpec(self.shape, count, self.seed)


def ball(center, radius: float = DEFAULT_RADIUS, samples: int = DEFAULT_SAMPLES,
         seed: int = DEFAULT_SEED) -> NeighborhoodSpec:
    """Shorthand for a ball neighborhood."""
    return NeighborhoodSpec(BallRegion(center, radius), samples, seed)


def tube(anchor: ClosedSet, through, radius: float = DEFAULT_RADIUS, length: float = 1.0,
         samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED, direction=None) -> NeighborhoodSpec:
    """Shorthand for a tube neighborhood along the normal ray at ``through``."""
    return NeighborhoodSpec(TubeRegion(anchor, through, radius, length, direction), samples, seed)


class FullSpace:
    """The whole space as the set ``Lambda``."""

    def __call__(self, p):
        return p


class NormalRay:
    """Points of the normal ray ``{xbar + t * n : t >= 0}`` of a sphere at ``xbar``.

    With ``outward_only=False`` the whole open ray from the centre through
    ``xbar`` is used, which is the full preimage of ``xbar`` under the projector.
    Sample points are mapped to their nearest point on the ray.
    """

    def __init__(self, sphere: Sphere, xbar, outward_only: bool = True):
        self.center = sphere.center
        xbar = as_vector(xbar)
        self.direction = (xbar - self.center) / np.linalg.norm(xbar - self.center)
        self.start = xbar if outward_only else self.center

    def __call__(self, p):
        t = max(float((p - self.start) @ self.direction), 0.0)
        return self.start + t * self.direction


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class RegularityReport:
    """Outcome of a sampled estimate.

    ``estimate`` is the largest sampled ratio.  ``unbounded`` is set when the
    estimate keeps growing as the neighborhood shrinks, which signals that the
    local supremum is infinite.
    """

    quantity: str
    estimate: float
    is_lower_bound: bool
    samples: int
    seed: int
    worst_witness: dict | None
    skipped: int = 0
    unbounded: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"quantity": self.quantity, "estimate": _json_float(self.estimate),
                "isLowerBound": self.is_lower_bound, "samples": self.samples, "seed": self.seed,
                "worstWitness": self.worst_witness, "skipped": self.skipped,
                "unbounded": self.unbounded,
                "extra": {k: _json_float(v) for k, v in self.extra.items()}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _json_float(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _reduce(quantity, ratios, witnesses, spec, skipped, floor=None, extra=None):
    """Deterministic max-reduction; ties go to the earliest sample."""
    ratios = np.asarray(ratios, dtype=float)
    if ratios.size == 0:
        est, wit = (floor if floor is not None else float("nan")), None
    else:
        i = int(np.argmax(ratios))
        est, wit = float(ratios[i]), witnesses[i]
        if floor is not None:
            est = max(est, floor)
    return RegularityReport(quantity, est, True, len(ratios), spec.seed, wit, skipped,
                            extra=extra or {})


def _tolist(x):
    return np.asarray(x).tolist()


def _with_unbounded_check(estimator, spec, check):
    rep = estimator(spec)
    if not check:
        return rep
    small = estimator(spec.shrunk(0.1))
    grows = np.isfinite(rep.estimate) and small.estimate > UNBOUNDED_GROWTH * rep.estimate
    extra = dict(rep.extra, shrunk_estimate=small.estimate)
    return RegularityReport(rep.quantity, rep.estimate, True, rep.samples, rep.seed,
                            rep.worst_witness, rep.skipped, bool(grows), extra)


# ---------------------------------------------------------------------------
# super-regularity at a distance and projector regularity

def _projection_pairs(C, lambda_set, spec):
    """Evaluate the sampled pairs ``(x', y')`` with ``y'`` in Lambda and their projections."""
    pts = spec.sample(streams=2)
    lam_map = lambda_set if lambda_set is not None else FullSpace()
    pairs, skipped, any_lambda = [], 0, False
    for xp, yp_raw in pts:
        yp = lam_map(yp_raw)
        if not spec.shape.contains(yp):
            skipped += 1
            continue
        any_lambda = True
        rx, ry = project(C, xp), project(C, yp)
        if rx.is_degenerate or ry.is_degenerate:
            skipped += 1
            continue
        pairs.append((xp, rx.points[0], yp, ry.points[0]))
    if not any_lambda:
        raise ValueError("Lambda does not meet the neighborhood")
    return pairs, skipped


def _pair_ratio(xp, x, yp, y):
    w = (xp - x) - (yp - y)
    s = y - x
    den = np.linalg.norm(w) * np.linalg.norm(s)
    if den == 0:
        return None
    return float(w @ s) / den


def estimate_epsilon_super_regular(C: ClosedSet, xbar, lambda_set=None,
                                   nbhd: NeighborhoodSpec | None = None) -> RegularityReport:
    """Estimate the constant of super-regularity at a distance.

    For sampled ``x'`` in the neighborhood with ``x in P(x')`` and ``y'`` in
    ``Lambda`` with ``y in P(y')`` the ratio

        <v - (y' - y), y - x> / (||v - (y' - y)|| ||y - x||),   v = x' - x,

    is evaluated; the estimate is its maximum, floored at zero.

    Parameters
    ----------
    C : ClosedSet
    xbar : array_like
        Reference point of ``C``.
    lambda_set : callable, optional
        Map from sample points to points of ``Lambda``; defaults to the whole space.
    nbhd : NeighborhoodSpec, optional
        Defaults to a ball of radius 0.1 around ``xbar``.
    """
    xbar = as_vector(xbar)
    if distance(C, xbar) > 1e-9:
        raise ValueError("xbar must belong to the set")
    spec = nbhd if nbhd is not None else ball(xbar)
    pairs, skipped = _projection_pairs(C, lambda_set, spec)
    ratios, wits = [], []
    for xp, x, yp, y in pairs:
        r = _pair_ratio(xp, x, yp, y)
        if r is None:
            skipped += 1
            continue
        ratios.append(r)
        wits.append({"x_prime": _tolist(xp), "y_prime": _tolist(yp)})
    return _reduce("EpsilonSubregular", ratios, wits, spec, skipped, floor=0.0)


@dataclass(frozen=True)
class ProjectorCheck:
    """Worst sampled ratios against the bounds implied by a given epsilon."""

    passed: bool
    epsilon: float
    lipschitz_ratio: float
    lipschitz_bound: float
    firm_ratio: float
    firm_bound: float
    reflector_ratio: float
    reflector_bound: float
    samples: int


def projector_bounds(eps: float) -> tuple:
    """Bounds ``(1+e)/(1-e)``, ``1 + 4e(1+e)/(1-e)^2`` and ``1 + 8e(1+e)/(1-e)^2``."""
    q = (1.0 - eps) ** 2
    return (1.0 + eps) / (1.0 - eps), 1.0 + 4 * eps * (1 + eps) / q, 1.0 + 8 * eps * (1 + eps) / q


def check_projector_regularity(C: ClosedSet, xbar, epsilon: float, nbhd=None, lambda_set=None,
                               rtol: float = 1e-12) -> ProjectorCheck:
    """Check the projector and reflector inequalities implied by ``epsilon``.

    For the same sampled pairs as :func:`estimate_epsilon_super_regular`:

    * ``||x - y|| <= (1+e)/(1-e) ||x' - y'||``,
    * ``||x - y||^2 + ||(x'-x) - (y'-y)||^2 <= (1 + 4e(1+e)/(1-e)^2) ||x' - y'||^2``,
    * ``||R x' - R y'||^2 <= (1 + 8e(1+e)/(1-e)^2) ||x' - y'||^2``.
    """
    if not 0 <= epsilon < 1:
        raise ValueError("epsilon must lie in [0, 1)")
    spec = nbhd if nbhd is not None else ball(xbar)
    pairs, _ = _projection_pairs(C, lambda_set, spec)
    b1, b2, b3 = projector_bounds(epsilon)
    r1 = r2 = r3 = 0.0
    for xp, x, yp, y in pairs:
        d2 = float(np.sum((xp - yp) ** 2))
        if d2 == 0:
            continue
        a = x - y
        b = (xp - x) - (yp - y)
        r1 = max(r1, float(np.linalg.norm(a)) / math.sqrt(d2))
        r2 = max(r2, float(a @ a + b @ b) / d2)
        r3 = max(r3, float(np.sum((a - b) ** 2)) / d2)
    ok = r1 <= b1 * (1 + rtol) and r2 <= b2 * (1 + rtol) and r3 <= b3 * (1 + rtol)
    return ProjectorCheck(ok, epsilon, r1, b1, r2, b2, r3, b3, len(pairs))


# ---------------------------------------------------------------------------
# almost averaged operators and their calculus

def estimate_almost_averaged(step_map: Callable, y, alpha: float,
                             nbhd: NeighborhoodSpec | None = None) -> RegularityReport:
    """Smallest violation ``e`` with

        ||x+ - y+||^2 <= (1 + e) ||x - y||^2 - (1 - a)/a ||(x - x+) - (y - y+)||^2

    over sampled ``x`` and all branches ``x+ in T(x)``, ``y+ in T(y)``.

    Parameters
    ----------
    step_map : callable
        Maps a point to the list of its images.
    y : array_like
        Reference point, typically a fixed point.
    alpha : float
        Averaging constant in ``(0, 1)``.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    y = as_vector(y)
    spec = nbhd if nbhd is not None else ball(y)
    c = (1.0 - alpha) / alpha
    ys = step_map(y)
    ratios, wits, skipped = [], [], 0
    for (x,) in spec.sample():
        d2 = float(np.sum((x - y) ** 2))
        if d2 == 0:
            skipped += 1
            continue
        try:
            xs = step_map(x)
        except DegenerateProjection:
            skipped += 1
            continue
        worst = max((float(np.sum((xp - yp) ** 2)) + c * float(np.sum(((x - xp) - (y - yp)) ** 2))) / d2
                    for xp in xs for yp in ys)
        ratios.append(worst - 1.0)
        wits.append({"x": _tolist(x)})
    return _reduce("AlmostAveraged", ratios, wits, spec, skipped, floor=0.0,
                   extra={"alpha": alpha})


def compose_violations(violations: Sequence, alphas: Sequence) -> tuple:
    """Constants of the composition ``T_1 o ... o T_m``.

    Returns ``(prod(1 + e_j) - 1, m / (m - 1 + 1/max a_j))``.  Works with
    :class:`fractions.Fraction` inputs for exact arithmetic.
    """
    if len(violations) != len(alphas) or not violations:
        raise ValueError("need equally many violations and alphas, at least one")
    m = len(alphas)
    eps = 1
    for e in violations:
        eps = eps * (1 + e)
    eps = eps - 1
    amax = max(alphas)
    return eps, m / (m - 1 + 1 / amax)


def combine_violations(violations: Sequence, alphas: Sequence, weights: Sequence) -> tuple:
    """Constants of the convex combination ``sum w_j T_j``: ``(sum w_j e_j, max a_j)``."""
    if not len(violations) == len(alphas) == len(weights) or not violations:
        raise ValueError("need equally many violations, alphas and weights")
    eps = sum(w * e for w, e in zip(weights, violations))
    return eps, max(alphas)


# ---------------------------------------------------------------------------
# subtransversality constants

class WSpace:
    """Parametrize ``W(zeta)`` by its first block."""

    def __init__(self, zeta):
        self.zeta = np.asarray(zeta, dtype=float)

    def base(self, ubar):
        return np.asarray(ubar, dtype=float)[0]

    def embed(self, p):
        return lift(self.zeta, p)


class TildeSpace:
    """Parametrize ``{(x2 - s, x1 - s, x1, x2)}`` by the pair ``(x1, x2)``."""

    def __init__(self, shift):
        self.shift = as_vector(shift)

    def base(self, ubar):
        u = np.asarray(ubar, dtype=float)
        return np.concatenate([u[2], u[3]])

    def embed(self, p):
        n = self.shift.size
        x1, x2 = p[:n], p[n:]
        return np.stack([x2 - self.shift, x1 - self.shift, x1, x2])


def _reference_distance(reference, u):
    if isinstance(reference, ClosedSet):
        return distance(reference, u.reshape(-1))
    return min(float(np.linalg.norm(u - np.asarray(r))) for r in reference)


def _kappa_samples(collection, zeta, reference, spec, space):
    ratios, wits, skipped = [], [], 0
    for (p,) in spec.sample():
        u = space.embed(p)
        try:
            vals = psi(collection, u)
        except DegenerateProjection:
            skipped += 1
            continue
        den = min(float(np.linalg.norm(v - zeta)) for v in vals)
        num = _reference_distance(reference, u)
        if den == 0:
            skipped += 1
            continue
        ratios.append(num / den)
        wits.append({"u": _tolist(u)})
    return ratios, wits, skipped


def estimate_kappa(collection: Sequence[ClosedSet], ubar, zeta, reference,
                   nbhd: NeighborhoodSpec | None = None, space=None,
                   check_unbounded: bool = True) -> RegularityReport:
    """Estimate the subtransversality constant of a collection at ``ubar`` for ``zeta``.

    The sampled ratio is ``dist(u, S) / dist(zeta, Psi(u))``, where ``S`` is the
    reference solution set and ``u`` ranges over the parametrized space.

    Parameters
    ----------
    collection : sequence of ClosedSet
        Typically :func:`drlambda.operators.omega_g`.
    ubar : array_like, shape (m, n)
        Lifted base point.
    zeta : array_like, shape (m, n)
        Target value of ``Psi``.
    reference : ClosedSet or sequence of lifted points
        The set ``Psi^{-1}(zeta)`` intersected with the sampled space.
    nbhd : NeighborhoodSpec, optional
        Region in parameter space; defaults to a ball of radius 0.1 around the
        parameters of ``ubar``.
    space : WSpace or TildeSpace, optional
        Parametrization of the sampled lifted points; defaults to ``W(zeta)``.
    check_unbounded : bool
        Repeat the estimate on a ten times smaller region and flag the report as
        unbounded when the estimate grows by more than a factor of three.
    """
    zeta = np.asarray(zeta, dtype=float)
    space = space if space is not None else WSpace(zeta)
    spec = nbhd if nbhd is not None else ball(space.base(ubar))

    def run(s):
        ratios, wits, skipped = _kappa_samples(collection, zeta, reference, s, space)
        return _reduce("Kappa", ratios, wits, s, skipped)

    return _with_unbounded_check(run, spec, check_unbounded)


def kappa_prime_ratio(sets: Sequence[ClosedSet], u, common: ClosedSet) -> float | None:
    """``dist(u, common) / max_j dist(u, sets[j])``, or None for ``0/0``."""
    den = max(distance(C, u) for C in sets)
    num = distance(common, u)
    if den == 0:
        return None
    return num / den


def estimate_kappa_prime(sets: Sequence[ClosedSet], ubar, nbhd: NeighborhoodSpec | None = None,
                         common: ClosedSet | None = None, restrict_to: ClosedSet | None = None,
                         check_unbounded: bool = True) -> RegularityReport:
    """Estimate the local linear regularity constant of ``sets`` at a common point.

    The report's ``extra["kappa"]`` holds ``sqrt(m)`` times the estimate, the
    corresponding subtransversality constant of the diagonal collection.

    Parameters
    ----------
    sets : sequence of ClosedSet
    ubar : array_like
        A common point.
    common : ClosedSet, optional
        The intersection; computed in closed form for two sets when omitted.
    restrict_to : ClosedSet, optional
        Project every sample onto this set first (for instance one of the sets).
    """
    ubar = as_vector(ubar)
    if common is None:
        if len(sets) != 2:
            raise ValueError("pass the intersection explicitly for more than two sets")
        common = intersection(sets[0], sets[1])
    if distance(common, ubar) > 1e-9:
        raise ValueError("ubar must lie in the intersection")
    spec = nbhd if nbhd is not None else ball(ubar)
    m = len(sets)

    def run(s):
        ratios, wits, skipped = [], [], 0
        for (p,) in s.sample():
            if restrict_to is not None:
                r = project(restrict_to, p)
                if r.is_degenerate:
                    skipped += 1
                    continue
                p = r.points[0]
            v = kappa_prime_ratio(sets, p, common)
            if v is None:
                skipped += 1
                continue
            ratios.append(v)
            wits.append({"u": _tolist(p)})
        rep = _reduce("KappaPrime", ratios, wits, s, skipped)
        rep.extra["kappa"] = math.sqrt(m) * rep.estimate
        return rep

    return _with_unbounded_check(run, spec, check_unbounded)


def estimate_sigma(problem: TwoSetProblem, g, zeta=None, ubar1=None,
                   nbhd: NeighborhoodSpec | None = None) -> RegularityReport:
    """Estimate the constant ``sigma`` with ``dist(zeta, Psi_g(u)) <= sigma dist(0, Phi_zeta(u))``.

    Samples ``u_1`` near ``ubar1``, projects it onto ``B - lam' g`` and lifts it
    to ``W(zeta)``.

    Parameters
    ----------
    problem : TwoSetProblem
    g : array_like
        Gap vector.
    zeta : array_like, optional
        Difference vector; defaults to :func:`difference_vector` of ``g``.
    ubar1 : array_like
        First block of the lifted fixed point, i.e. the fixed point itself.
    """
    g = as_vector(g)
    zeta = difference_vector(g, problem.lam) if zeta is None else np.asarray(zeta, dtype=float)
    if ubar1 is None and nbhd is None:
        raise ValueError("give either ubar1 or a neighborhood")
    spec = nbhd if nbhd is not None else ball(ubar1)
    target = Translate(problem.B, problem.lam_ratio * g)
    collection = omega_g(problem, g)
    ratios, wits, skipped = [], [], 0
    for (p,) in spec.sample():
        try:
            u1 = project(target, p).select()
            u = lift(zeta, u1)
            den = phi_zeta_residual(problem, zeta, u)
            num = min(float(np.linalg.norm(v - zeta)) for v in psi(collection, u))
        except DegenerateProjection:
            skipped += 1
            continue
        if den == 0:
            skipped += 1
            continue
        ratios.append(num / den)
        wits.append({"u1": _tolist(u1)})
    return _reduce("Sigma", ratios, wits, spec, skipped)


# ---------------------------------------------------------------------------
# rates

@dataclass(frozen=True)
class RatePrediction:
    c: float
    condition_ok: bool


def predicted_rate(epsilon: float, alpha: float, kappa: float) -> RatePrediction:
    """Rate ``sqrt(1 + e - (1 - a)/(k^2 a))`` of an almost averaged, subregular iteration.

    ``condition_ok`` states ``k < sqrt((1 - a)/(e a))``, which always holds for
    ``e = 0``; it is equivalent to ``c < 1``.  A negative radicand is clamped to 0.
    """
    if not 0 < alpha < 1 or epsilon < 0 or kappa <= 0:
        raise ValueError("need alpha in (0, 1), epsilon >= 0 and kappa > 0")
    gain = (1.0 - alpha) / (kappa ** 2 * alpha)
    ok = epsilon < gain
    return RatePrediction(math.sqrt(max(0.0, 1.0 + epsilon - gain)), ok)


def predicted_rate_drlambda(epsilon: float, kappa: float, sigma: float) -> RatePrediction:
    """Rate ``sqrt(1 + e - 1/(k s)^2)`` for the lifted relaxed method."""
    gain = 1.0 / (kappa * sigma) ** 2
    return RatePrediction(math.sqrt(max(0.0, 1.0 + epsilon - gain)), epsilon < gain)


def predicted_rate_convex_consistent(lam: float, kappa: float) -> RatePrediction:
    """Rate ``sqrt(1 - 2 lam^2 / k^2)`` for convex sets with a common point."""
    v = 1.0 - 2.0 * lam ** 2 / kappa ** 2
    return RatePrediction(math.sqrt(max(0.0, v)), True)


# ---------------------------------------------------------------------------
# shift invariance of subtransversality

@dataclass(frozen=True)
class ShiftCheck:
    passed: bool
    lifted_estimate: float
    pair_estimate: float
    kappa2: float
    max_excess: float
    samples: int


def verify_shift_subtransversality(A: ClosedSet, B: ClosedSet, kappa2: float | None, g, lam: float,
                                   ebar, nbhd: NeighborhoodSpec | None = None,
                                   tol: float = 0.05) -> ShiftCheck:
    """Compare subtransversality ratios of ``{A, B}`` and of its shifted four-set lift.

    Pairs ``(x1, x2) = (p, p + g)`` are sampled with ``p`` near ``ebar``, the
    point of ``A`` nearest to the shadow.  For each pair the ratio of the
    collection ``{A, B}`` at ``(ebar, ebar + g)`` for the value ``(-g, g)`` is
    compared with the ratio of ``(B - lam' g, A - lam' g, A, B)`` at
    ``(x2 - lam' g, x1 - lam' g, x1, x2)`` for the difference vector.

    The check passes when the largest lifted ratio stays below ``kappa2 + tol``.
    With ``kappa2=None`` the sampled two-set estimate is used as ``kappa2``.
    """
    g = as_vector(g)
    ebar = as_vector(ebar)
    problem = TwoSetProblem(A, B, lam)
    zeta = difference_vector(g, lam)
    lp = problem.lam_ratio
    space = TildeSpace(lp * g)
    collection = omega_g(problem, g)
    base2 = np.stack([ebar, ebar + g])
    ubar = space.embed(base2.reshape(-1))
    y2 = np.stack([-g, g])
    spec = nbhd if nbhd is not None else ball(ebar)
    lifted, pair, skipped = [], [], 0
    for (p,) in spec.sample():
        x = np.stack([p, p + g])
        u = space.embed(x.reshape(-1))
        try:
            den2 = min(float(np.linalg.norm(v - y2)) for v in psi([A, B], x))
            den4 = min(float(np.linalg.norm(v - zeta)) for v in psi(collection, u))
        except DegenerateProjection:
            skipped += 1
            continue
        if den2 == 0 or den4 == 0:
            skipped += 1
            continue
        pair.append(float(np.linalg.norm(x - base2)) / den2)
        lifted.append(float(np.linalg.norm(u - ubar)) / den4)
    lifted_est = max(lifted) if lifted else 0.0
    pair_est = max(pair) if pair else 0.0
    kappa2 = pair_est if kappa2 is None else float(kappa2)
    excess = lifted_est - kappa2
    return ShiftCheck(excess <= tol, lifted_est, pair_est, kappa2, excess, len(lifted))
