"""Catalog of two-set problems with known fixed points and regularity constants.

A fixed point of the relaxed method has the form ``x = f - lam/(1-lam) * g``
where ``f`` is its shadow on ``B`` and ``g`` the gap.  Scenarios store ``f`` and
``g`` for the configuration they analyze and derive the fixed point for any
admissible ``lam`` from them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from ..geometry import (AffineSubspace, Ball, ClosedSet, FiniteUnion, SinglePoint, Sphere,
                        set_from_dict)
from ..operators import TwoSetProblem


@dataclass(frozen=True, eq=False)
class Scenario:
    """A two-set problem with the analytic data needed to check a run.

    Attributes
    ----------
    name : str
    A, B : ClosedSet
    description : str
    shadow, gap : ndarray or None
        Shadow ``f`` and gap ``g`` of the analyzed fixed point.
    lambda_max : float
        The analytic fixed point is valid for ``lam < lambda_max``.
    extra_fixed : callable or None
        Maps ``lam`` to a list of further known fixed points.
    fixed_set_fn : callable or None
        Maps ``lam`` to a set containing every known fixed point when they are
        not isolated (for instance a whole circle of them).
    has_fixed_points : bool
        False when the fixed point set is known to be empty.
    consistent : bool
        True when ``A`` and ``B`` intersect at the analyzed point.
    expect_linear : bool
        Whether local linear convergence is expected.
    kappa_sq_bound : float or None
        Lower bound for the squared subtransversality constant at ``lam = 1/2``.
    kappa_prime : float or None
        Upper bound for the local linear regularity constant.
    rate_check : str or None
        Which predicted rate the empirical rate is compared with: ``"consistent"``
        uses ``kappa_prime``, ``"averaged"`` uses sampled constants.
    seeds : list of ndarray
    """

    name: str
    A: ClosedSet
    B: ClosedSet
    description: str = ""
    shadow: np.ndarray | None = None
    gap: np.ndarray | None = None
    lambda_max: float = 1.0
    extra_fixed: Callable | None = None
    fixed_set_fn: Callable | None = None
    has_fixed_points: bool = True
    consistent: bool = False
    expect_linear: bool = True
    kappa_sq_bound: float | None = None
    kappa_prime: float | None = None
    rate_check: str | None = None
    seeds: tuple = ()

    def problem(self, lam: float) -> TwoSetProblem:
        return TwoSetProblem(self.A, self.B, lam)

    def in_range(self, lam: float) -> bool:
        return self.has_fixed_points and self.shadow is not None and 0 < lam < self.lambda_max

    def fixed_point(self, lam: float) -> np.ndarray | None:
        """The analyzed fixed point ``f - lam/(1-lam) g``, when valid at ``lam``."""
        if not self.in_range(lam):
            return None
        return self.shadow - lam / (1 - lam) * self.gap

    def fixed_points(self, lam: float) -> list:
        """All fixed points known in closed form at ``lam``."""
        pts = []
        p = self.fixed_point(lam)
        if p is not None:
            pts.append(p)
        if self.extra_fixed is not None and lam < self.lambda_max:
            pts.extend(np.asarray(q, dtype=float) for q in self.extra_fixed(lam))
        return pts

    def fixed_set(self, lam: float) -> ClosedSet | None:
        """A set descriptor of the known fixed points, or None if nothing is known."""
        if self.fixed_set_fn is not None and self.in_range(lam):
            return self.fixed_set_fn(lam)
        pts = self.fixed_points(lam)
        if not pts:
            return None
        if len(pts) == 1:
            return SinglePoint(pts[0])
        return FiniteUnion(tuple(SinglePoint(p) for p in pts))

    def to_dict(self) -> dict:
        d = {"name": self.name, "description": self.description,
             "A": self.A.to_dict(), "B": self.B.to_dict(),
             "seeds": [np.asarray(s).tolist() for s in self.seeds],
             "expectFixedPoints": self.has_fixed_points,
             "expectLinearConvergence": self.expect_linear, "consistent": self.consistent,
             "lambdaMax": self.lambda_max}
        if self.shadow is not None:
            d["shadow"] = self.shadow.tolist()
            d["gap"] = self.gap.tolist()
        if self.kappa_sq_bound is not None:
            d["kappaSquaredLowerBound"] = self.kappa_sq_bound
        if self.kappa_prime is not None:
            d["kappaPrime"] = self.kappa_prime
        return d


def _vec(x):
    return np.asarray(x, dtype=float)


def _ring(center, radius, n=8, phase=0.3):
    """``n`` seeds on a small circle around ``center``."""
    c = _vec(center)
    ang = phase + 2 * np.pi * np.arange(n) / n
    return tuple(c + radius * np.stack([np.cos(ang), np.sin(ang)], axis=1))


def two_intersecting_circles(a: float = -1.5, R: float = 1.0) -> Scenario:
    """Unit circle and the circle of radius ``R`` centred at ``(0, a)``."""
    A = Sphere([0, 0], 1)
    B = Sphere([0, a], R)
    h = (1 - R ** 2 + a ** 2) / (2 * a)
    w = math.sqrt(1 - h ** 2)
    p, q = _vec([w, h]), _vec([-w, h])
    # distances from the intersection point to B's centre are R; the bound uses
    # the nearest and farthest points of A from B's centre
    dmin, dmax = abs(abs(a) - 1), abs(a) + 1
    kp = 1.0 / (dmin * (1 - R / dmax))
    return Scenario(
        "two-intersecting-circles", A, B,
        "two circles crossing transversally at two points",
        shadow=p, gap=np.zeros(2), extra_fixed=lambda lam: [q], consistent=True,
        kappa_prime=kp, rate_check="consistent",
        seeds=_ring(p, 0.1) + _ring(q, 0.1))


def separable_circles(R: float = 1.0) -> Scenario:
    """Unit circle and the circle of radius ``R`` centred at ``(2 + R, 0)``."""
    A = Sphere([0, 0], 1)
    B = Sphere([2 + R, 0], R)
    bound = 8 * (R ** 2 + 2 * R + 1) / (R ** 2 + 2 * R + 5)
    return Scenario(
        "separable-circles", A, B, "disjoint circles that a line separates",
        shadow=_vec([2, 0]), gap=_vec([1, 0]), kappa_sq_bound=bound,
        seeds=(_vec([1.2, 0.3]),) + _ring([1, 0], 0.2, 4))


def nonseparable_circles(R: float = 1.0) -> Scenario:
    """Unit circle inside the circle of radius ``2 + R`` centred at ``(0, -1/2 - R)``."""
    A = Sphere([0, 0], 1)
    B = Sphere([0, -0.5 - R], 2 + R)
    bound = 9 * (4 * R ** 2 + 12 * R + 9) / (2 * R ** 2 + 6 * R + 9)
    return Scenario(
        "nonseparable-circles", A, B, "disjoint, non-concentric circles, one inside the other",
        shadow=_vec([0, 1.5]), gap=_vec([0, 0.5]), lambda_max=2 / 3, kappa_sq_bound=bound,
        seeds=(_vec([0.1, 1.3]),) + _ring([0, 1], 0.1, 4))


def concentric_circles(R: float = 2.0) -> Scenario:
    """Unit circle and the concentric circle of radius ``R > 1``."""
    if R <= 1:
        raise ValueError("R must exceed 1")
    A = Sphere([0, 0], 1)
    B = Sphere([0, 0], R)
    bound = 2 * R ** 2 / (R ** 4 - 2 * R ** 3 + 2 * R ** 2 - 2 * R + 1)

    def ring(lam):
        return Sphere([0, 0], abs(R - lam / (1 - lam) * (R - 1)))

    return Scenario(
        "concentric-circles", A, B, "concentric circles; fixed points form a circle",
        shadow=_vec([0, R]), gap=_vec([0, R - 1]), lambda_max=R / (2 * R - 1),
        fixed_set_fn=ring, kappa_sq_bound=bound,
        seeds=(_vec([0.2, 1.4]),) + _ring([0, 1.2], 0.1, 4))


def tangential_circles(R: float = 1.0) -> Scenario:
    """Unit circle and the circle of radius ``R`` touching it at ``(1, 0)``."""
    A = Sphere([0, 0], 1)
    B = Sphere([R + 1, 0], R)
    return Scenario(
        "tangential-circles", A, B, "circles touching at a single point",
        shadow=_vec([1, 0]), gap=np.zeros(2), consistent=True, expect_linear=False,
        seeds=(_vec([1.1, 0.3]), _vec([0.9, -0.2]), _vec([1.05, 0.1])))


def circle_point() -> Scenario:
    """Unit circle and its centre; no fixed point exists."""
    rng = np.random.default_rng(42)
    seeds = tuple(rng.uniform(-2, 2, size=(20, 2)))
    return Scenario(
        "circle-point", Sphere([0, 0], 1), SinglePoint([0, 0]),
        "circle and its centre: the fixed point set is empty",
        has_fixed_points=False, expect_linear=False, seeds=seeds)


def two_balls() -> Scenario:
    """Two disjoint unit balls centred at the origin and at ``(3, 0)``."""
    return Scenario(
        "two-balls", Ball([0, 0], 1), Ball([3, 0], 1),
        "disjoint convex balls; the relaxed step is firmly nonexpansive",
        shadow=_vec([2, 0]), gap=_vec([1, 0]), kappa_sq_bound=None, rate_check="averaged",
        seeds=(_vec([0.3, 0.7]),) + _ring([1, 0], 0.5, 4))


def line_circle() -> Scenario:
    """Horizontal line through ``(0, 3/4)`` and the unit circle.

    Besides the two intersection points, the point ``(0, 1 - lam/(4(1-lam)))``
    on the symmetry axis is a fixed point with a nonzero gap.
    """
    A = AffineSubspace([0, 0.75], [[1, 0]])
    B = Sphere([0, 0], 1)
    w = math.sqrt(1 - 0.75 ** 2)
    return Scenario(
        "line-circle", A, B, "a line cutting the unit circle; a second gap class on the axis",
        shadow=_vec([0, 1]), gap=_vec([0, 0.25]), lambda_max=0.8,
        extra_fixed=lambda lam: [[-w, 0.75], [w, 0.75]],
        seeds=(_vec([0, 0.7]), _vec([0, 0.3]), _vec([0.5, 0.8]), _vec([-0.5, 0.6])))


_BUILDERS = {
    "two-intersecting-circles": two_intersecting_circles,
    "separable-circles": separable_circles,
    "nonseparable-circles": nonseparable_circles,
    "concentric-circles": concentric_circles,
    "tangential-circles": tangential_circles,
    "circle-point": circle_point,
    "two-balls": two_balls,
    "line-circle": line_circle,
}


def builtin_scenarios() -> list:
    """All built-in scenarios with their default parameters."""
    return [b() for b in _BUILDERS.values()]


def scenario_from_dict(d: dict) -> Scenario:
    """Build a user scenario from its JSON form.

    Required keys are ``name``, ``A``, ``B`` (geometry dictionaries) and
    ``seeds``.  Optional keys: ``shadow`` and ``gap`` (analyzed fixed point),
    ``lambdaMax``, ``expectFixedPoints``, ``expectLinearConvergence``,
    ``consistent``, ``kappaSquaredLowerBound``, ``kappaPrime``.
    """
    shadow = d.get("shadow")
    gap = d.get("gap")
    if (shadow is None) != (gap is None):
        raise ValueError("give both shadow and gap, or neither")
    return Scenario(
        d["name"], set_from_dict(d["A"]), set_from_dict(d["B"]), d.get("description", ""),
        shadow=None if shadow is None else _vec(shadow), gap=None if gap is None else _vec(gap),
        lambda_max=float(d.get("lambdaMax", 1.0)),
        has_fixed_points=bool(d.get("expectFixedPoints", True)),
        consistent=bool(d.get("consistent", False)),
        expect_linear=bool(d.get("expectLinearConvergence", True)),
        kappa_sq_bound=d.get("kappaSquaredLowerBound"), kappa_prime=d.get("kappaPrime"),
        seeds=tuple(_vec(s) for s in d["seeds"]))


def get_scenario(name_or_path) -> Scenario:
    """Look up a built-in scenario by name or load one from a JSON file."""
    if name_or_path in _BUILDERS:
        return _BUILDERS[name_or_path]()
    path = Path(name_or_path)
    if path.suffix == ".json" or path.exists():
        if not path.exists():
            raise FileNotFoundError(f"scenario file {path} not found")
        return scenario_from_dict(json.loads(path.read_text()))
    raise KeyError(f"unknown scenario {name_or_path!r}; known: {', '.join(_BUILDERS)}")
