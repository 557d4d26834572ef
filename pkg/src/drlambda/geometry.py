"""Closed sets in Euclidean space and their exact, possibly multi-valued, projectors.

Every set knows how to compute all of its nearest points to a query.  When the
nearest points form a finite set they are returned sorted lexicographically;
when they form a continuum (for instance the centre of a sphere) the result
carries a descriptor of that continuum instead, and any attempt to select a
single point raises :class:`DegenerateProjection`.

Sets serialize to and from plain dictionaries, e.g.::

    {"type": "sphere", "center": [0, 0], "radius": 1.0}
    {"type": "translate", "shift": [1, 0], "inner": {...}}
    {"type": "product", "factors": [{...}, {...}]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

#: relative tolerance for deciding that two candidate distances tie
TIE_TOL = 1e-12


class DegenerateProjection(ValueError):
    """Raised when a single nearest point is required but the projection is a continuum."""


class DimensionError(ValueError):
    """Raised when a query point does not live in the ambient space of a set."""


def as_vector(x) -> np.ndarray:
    """Convert ``x`` to a one-dimensional float array."""
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    return v


def _frozen(x) -> np.ndarray:
    v = np.array(x, dtype=float)
    v.setflags(write=False)
    return v


def _sorted_points(points, tol=TIE_TOL):
    """Sort points lexicographically and merge numerical duplicates."""
    pts = sorted((np.asarray(p, dtype=float) for p in points), key=lambda p: tuple(p.ravel()))
    out = []
    for p in pts:
        if out:
            q = out[-1]
            scale = max(1.0, float(np.max(np.abs(q))))
            if np.max(np.abs(p - q)) <= tol * scale:
                continue
        out.append(p)
    return out


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    """All nearest points of a set to a query point.

    Attributes
    ----------
    kind : {"unique", "finite", "continuum"}
        Shape of the solution set.
    points : tuple of ndarray
        Nearest points, sorted lexicographically.  Empty for a continuum.
    distance : float
        Distance from the query to the set.
    continuum : ClosedSet or None
        Descriptor of the set of nearest points when ``kind == "continuum"``.
    """

    kind: str
    points: tuple
    distance: float
    continuum: "ClosedSet | None" = None

    @property
    def is_degenerate(self) -> bool:
        return self.kind == "continuum"

    def select(self) -> np.ndarray:
        """Return the lexicographically first nearest point.

        Raises
        ------
        DegenerateProjection
            If the nearest points form a continuum.
        """
        if self.is_degenerate:
            raise DegenerateProjection(
                f"projection is a continuum at distance {self.distance:g}")
        return self.points[0]

    def map(self, fn, continuum=None) -> "ProjectionResult":
        """Apply ``fn`` to every point, keeping kind and distance."""
        pts = tuple(_sorted_points(fn(p) for p in self.points))
        return ProjectionResult(self.kind, pts, self.distance,
                                continuum if continuum is not None else self.continuum)

    @staticmethod
    def from_points(points, distance) -> "ProjectionResult":
        pts = tuple(_sorted_points(points))
        kind = "unique" if len(pts) == 1 else "finite"
        return ProjectionResult(kind, pts, float(distance))


class ClosedSet:
    """Base class of all set descriptors."""

    convex = False

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def _project(self, x: np.ndarray) -> ProjectionResult:
        raise NotImplementedError

    def scaled(self, k: float, t) -> "ClosedSet":
        """Return the image ``{k*y + t : y in self}``."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    # convenience wrappers
    def project(self, x) -> ProjectionResult:
        return project(self, x)

    def distance(self, x) -> float:
        return distance(self, x)

    def contains(self, x, tol: float = 1e-10) -> bool:
        return distance(self, x) <= tol

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()})"


@dataclass(frozen=True, eq=False, repr=False)
class Sphere(ClosedSet):
    """Sphere ``{y : ||y - center|| = radius}``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    @property
    def dim(self):
        return self.center.size

    def _project(self, x):
        d = x - self.center
        n = float(np.linalg.norm(d))
        if n == 0.0 and self.radius > 0:
            return ProjectionResult("continuum", (), self.radius, self)
        if self.radius == 0:
            return ProjectionResult.from_points([self.center.copy()], n)
        return ProjectionResult.from_points([self.center + self.radius * d / n],
                                            abs(n - self.radius))

    def scaled(self, k, t):
        return Sphere(k * self.center + t, abs(k) * self.radius)

    def to_dict(self):
        return {"type": "sphere", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False, repr=False)
class Ball(ClosedSet):
    """Closed ball ``{y : ||y - center|| <= radius}``."""

    center: np.ndarray
    radius: float
    convex = True

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    @property
    def dim(self):
        return self.center.size

    def _project(self, x):
        d = x - self.center
        n = float(np.linalg.norm(d))
        if n <= self.radius:
            return ProjectionResult.from_points([x.copy()], 0.0)
        return ProjectionResult.from_points([self.center + self.radius * d / n], n - self.radius)

    def scaled(self, k, t):
        return Ball(k * self.center + t, abs(k) * self.radius)

    def to_dict(self):
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False, repr=False)
class AffineSubspace(ClosedSet):
    """Affine subspace ``anchor + span(basis)``.

    The rows of ``basis`` span the direction space; they are orthonormalized on
    construction.  An empty basis gives a single point.
    """

    anchor: np.ndarray
    basis: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    convex = True

    def __post_init__(self):
        a = _frozen(self.anchor)
        b = np.asarray(self.basis, dtype=float).reshape(-1, a.size)
        if b.shape[0]:
            q, r = np.linalg.qr(b.T)
            keep = np.abs(np.diag(r)) > 1e-12 * max(1.0, np.abs(r).max())
            b = q[:, keep].T
        object.__setattr__(self, "anchor", a)
        object.__setattr__(self, "basis", _frozen(b))

    @property
    def dim(self):
        return self.anchor.size

    def _project(self, x):
        p = self.anchor + self.basis.T @ (self.basis @ (x - self.anchor))
        return ProjectionResult.from_points([p], np.linalg.norm(x - p))

    def scaled(self, k, t):
        return AffineSubspace(k * self.anchor + t, self.basis)

    def to_dict(self):
        return {"type": "affine", "anchor": self.anchor.tolist(), "basis": self.basis.tolist()}


@dataclass(frozen=True, eq=False, repr=False)
class Halfspace(ClosedSet):
    """Halfspace ``{y : <normal, y> <= offset}``; the normal is normalized on construction."""

    normal: np.ndarray
    offset: float
    convex = True

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        s = np.linalg.norm(n)
        if s == 0:
            raise ValueError("normal must be nonzero")
        object.__setattr__(self, "normal", _frozen(n / s))
        object.__setattr__(self, "offset", float(self.offset) / s)

    @property
    def dim(self):
        return self.normal.size

    def _project(self, x):
        excess = float(self.normal @ x) - self.offset
        if excess <= 0:
            return ProjectionResult.from_points([x.copy()], 0.0)
        return ProjectionResult.from_points([x - excess * self.normal], excess)

    def scaled(self, k, t):
        if k == 0:
            return SinglePoint(t)
        n = self.normal * np.sign(k)
        return Halfspace(n, abs(k) * self.offset + float(n @ t))

    def to_dict(self):
        return {"type": "halfspace", "normal": self.normal.tolist(), "offset": self.offset}


@dataclass(frozen=True, eq=False, repr=False)
class SinglePoint(ClosedSet):
    """The singleton ``{point}``."""

    point: np.ndarray
    convex = True

    def __post_init__(self):
        object.__setattr__(self, "point", _frozen(as_vector(self.point)))

    @property
    def dim(self):
        return self.point.size

    def _project(self, x):
        return ProjectionResult.from_points([self.point.copy()], np.linalg.norm(x - self.point))

    def scaled(self, k, t):
        return SinglePoint(k * self.point + t)

    def to_dict(self):
        return {"type": "point", "point": self.point.tolist()}


@dataclass(frozen=True, eq=False, repr=False)
class Translate(ClosedSet):
    """The translate ``inner - shift``."""

    inner: ClosedSet
    shift: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "shift", _frozen(as_vector(self.shift)))
        if self.shift.size != self.inner.dim:
            raise DimensionError("shift does not match the dimension of the inner set")

    @property
    def convex(self):
        return self.inner.convex

    @property
    def dim(self):
        return self.inner.dim

    def _project(self, x):
        r = self.inner._project(x + self.shift)
        cont = Translate(r.continuum, self.shift) if r.continuum is not None else None
        return r.map(lambda p: p - self.shift, cont)

    def scaled(self, k, t):
        return self.inner.scaled(k, t - k * self.shift)

    def to_dict(self):
        return {"type": "translate", "shift": self.shift.tolist(), "inner": self.inner.to_dict()}


@dataclass(frozen=True, eq=False, repr=False)
class FiniteUnion(ClosedSet):
    """Union of finitely many closed sets."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("a union needs at least one part")
        if len({p.dim for p in parts}) != 1:
            raise DimensionError("all parts of a union must share the ambient dimension")
        object.__setattr__(self, "parts", parts)

    @property
    def dim(self):
        return self.parts[0].dim

    def _project(self, x):
        results = [p._project(x) for p in self.parts]
        dmin = min(r.distance for r in results)
        winners = [r for r in results if r.distance <= dmin + TIE_TOL * max(1.0, dmin)]
        if any(r.is_degenerate for r in winners):
            pieces = [r.continuum if r.is_degenerate else _points_set(r.points) for r in winners]
            cont = pieces[0] if len(pieces) == 1 else FiniteUnion(tuple(pieces))
            return ProjectionResult("continuum", (), dmin, cont)
        pts = [p for r in winners for p in r.points]
        return ProjectionResult.from_points(pts, dmin)

    def scaled(self, k, t):
        return FiniteUnion(tuple(p.scaled(k, t) for p in self.parts))

    def to_dict(self):
        return {"type": "union", "parts": [p.to_dict() for p in self.parts]}


@dataclass(frozen=True, eq=False, repr=False)
class ProductSet(ClosedSet):
    """Cartesian product of sets, acting on the concatenation of their blocks."""

    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("a product needs at least one factor")

    @property
    def convex(self):
        return all(f.convex for f in self.factors)

    @property
    def dim(self):
        return sum(f.dim for f in self.factors)

    def _blocks(self, x):
        out, i = [], 0
        for f in self.factors:
            out.append(x[i:i + f.dim])
            i += f.dim
        return out

    def _project(self, x):
        results = [f._project(b) for f, b in zip(self.factors, self._blocks(x))]
        dist = float(np.sqrt(sum(r.distance ** 2 for r in results)))
        if any(r.is_degenerate for r in results):
            cont = ProductSet(tuple(r.continuum if r.is_degenerate else _points_set(r.points)
                                    for r in results))
            return ProjectionResult("continuum", (), dist, cont)
        combos = [()]
        for r in results:
            combos = [c + (p,) for c in combos for p in r.points]
        return ProjectionResult.from_points([np.concatenate(c) for c in combos], dist)

    def scaled(self, k, t):
        t = as_vector(t)
        if t.size == 1 and self.dim != 1:
            t = np.full(self.dim, float(t[0]))
        return ProductSet(tuple(f.scaled(k, b) for f, b in zip(self.factors, self._blocks(t))))

    def to_dict(self):
        return {"type": "product", "factors": [f.to_dict() for f in self.factors]}


def _points_set(points) -> ClosedSet:
    if len(points) == 1:
        return SinglePoint(points[0])
    return FiniteUnion(tuple(SinglePoint(p) for p in points))


# ---------------------------------------------------------------------------
# public operations

def project(C: ClosedSet, x) -> ProjectionResult:
    """Compute all nearest points of ``C`` to ``x``.

    Parameters
    ----------
    C : ClosedSet
        Target set.
    x : array_like
        Query point.  For a :class:`ProductSet` it may be given either flat or
        as an ``(m, n)`` array of blocks; returned points have the same shape.

    Returns
    -------
    ProjectionResult
    """
    xa = np.asarray(x, dtype=float)
    shape = xa.shape if xa.ndim > 0 else (1,)
    flat = xa.reshape(-1)
    if flat.size != C.dim:
        raise DimensionError(f"point of dimension {flat.size} queried against a set in R^{C.dim}")
    r = C._project(flat)
    if len(shape) == 1:
        return r
    return ProjectionResult(r.kind, tuple(p.reshape(shape) for p in r.points), r.distance,
                            r.continuum)


def reflect(C: ClosedSet, x) -> ProjectionResult:
    """Apply the reflector ``2 P_C - Id`` to ``x``.

    For a continuum projection the returned ``continuum`` is the reflected
    image of the set of nearest points.
    """
    xa = np.asarray(x, dtype=float)
    r = project(C, xa)
    cont = r.continuum.scaled(2.0, -xa.reshape(-1)) if r.continuum is not None else None
    pts = tuple(_sorted_points(2.0 * p - xa for p in r.points))
    return ProjectionResult(r.kind, pts, r.distance, cont)


def distance(C: ClosedSet, x) -> float:
    """Distance from ``x`` to ``C``."""
    return project(C, x).distance


def intersection(A: ClosedSet, B: ClosedSet) -> ClosedSet:
    """Closed-form intersection for the pairs that occur in the built-in problems.

    Supported are a point with anything, two affine subspaces, and in the plane
    two circles or a circle and a line.

    Raises
    ------
    ValueError
        If the intersection is empty.
    NotImplementedError
        For unsupported pairs.
    """
    if isinstance(B, SinglePoint) and not isinstance(A, SinglePoint):
        A, B = B, A
    if isinstance(A, SinglePoint):
        if B.contains(A.point):
            return A
        raise ValueError("empty intersection")
    if isinstance(A, AffineSubspace) and isinstance(B, AffineSubspace):
        return _affine_intersection(A, B)
    if isinstance(A, Sphere) and isinstance(B, AffineSubspace):
        A, B = B, A
    if isinstance(A, AffineSubspace) and isinstance(B, Sphere) and A.dim == 2:
        return _line_circle(A, B)
    if isinstance(A, Sphere) and isinstance(B, Sphere) and A.dim == 2:
        return _circle_circle(A, B)
    raise NotImplementedError(f"no closed form for {type(A).__name__} and {type(B).__name__}")


def _affine_intersection(A, B):
    # solve a + U s = b + V t in the least-squares sense and check consistency
    M = np.hstack([A.basis.T, -B.basis.T])
    rhs = B.anchor - A.anchor
    sol = np.linalg.lstsq(M, rhs, rcond=None)[0] if M.size else np.zeros(0)
    p = A.anchor + A.basis.T @ sol[:A.basis.shape[0]]
    if np.linalg.norm(M @ sol - rhs) > 1e-10 * max(1.0, np.linalg.norm(rhs)):
        raise ValueError("empty intersection")
    if A.basis.shape[0] == 0 or B.basis.shape[0] == 0:
        return AffineSubspace(p)
    # directions common to both spans
    PA = A.basis.T @ A.basis
    PB = B.basis.T @ B.basis
    w, v = np.linalg.eigh(PA @ PB @ PA)
    common = v[:, w > 1 - 1e-10].T
    return AffineSubspace(p, common)


def _line_circle(L, S):
    if L.basis.shape[0] != 1:
        raise NotImplementedError("only lines are supported")
    d = L.basis[0]
    foot = L.anchor + d * (d @ (S.center - L.anchor))
    h = np.linalg.norm(S.center - foot)
    if h > S.radius * (1 + 1e-12):
        raise ValueError("empty intersection")
    s = np.sqrt(max(S.radius ** 2 - h ** 2, 0.0))
    return _points_set(_sorted_points([foot - s * d, foot + s * d]))


def _circle_circle(S1, S2):
    delta = S2.center - S1.center
    dd = np.linalg.norm(delta)
    r1, r2 = S1.radius, S2.radius
    if dd == 0 or dd > r1 + r2 + 1e-12 or dd < abs(r1 - r2) - 1e-12:
        raise ValueError("empty intersection")
    a = (r1 ** 2 - r2 ** 2 + dd ** 2) / (2 * dd)
    h = np.sqrt(max(r1 ** 2 - a ** 2, 0.0))
    e = delta / dd
    perp = np.array([-e[1], e[0]])
    base = S1.center + a * e
    return _points_set(_sorted_points([base - h * perp, base + h * perp]))


# ---------------------------------------------------------------------------
# serialization

def set_from_dict(d: dict) -> ClosedSet:
    """Build a set descriptor from its dictionary form."""
    kind = d.get("type")
    if kind == "sphere":
        return Sphere(d["center"], d["radius"])
    if kind == "ball":
        return Ball(d["center"], d["radius"])
    if kind == "affine":
        anchor = as_vector(d["anchor"])
        return AffineSubspace(anchor, np.asarray(d.get("basis", []), dtype=float).reshape(-1, anchor.size))
    if kind == "halfspace":
        return Halfspace(d["normal"], d["offset"])
    if kind == "point":
        return SinglePoint(d["point"])
    if kind == "translate":
        return Translate(set_from_dict(d["inner"]), d["shift"])
    if kind == "union":
        return FiniteUnion(tuple(set_from_dict(p) for p in d["parts"]))
    if kind == "product":
        return ProductSet(tuple(set_from_dict(f) for f in d["factors"]))
    raise ValueError(f"unknown set type {kind!r}")


def set_from_json(text: str) -> ClosedSet:
    return set_from_dict(json.loads(text))


def product(sets: Sequence[ClosedSet]) -> ProductSet:
    return ProductSet(tuple(sets))
