"""The relaxed Douglas-Rachford step and the lifted four-set machinery around it.

A :class:`TwoSetProblem` bundles two sets ``A`` and ``B`` with a relaxation
parameter ``lam`` in ``(0, 1]``.  One step of the relaxed method is

    T(x) = { lam/2 * (R_A(2b - x) + x) + (1 - lam) * b  :  b in P_B(x) },

which for ``lam = 1`` is the classical Douglas-Rachford operator.  All steps in
this module enumerate every branch of the multi-valued projectors.

Lifted states are ``(4, n)`` arrays whose rows are the blocks ``u_1, ..., u_4``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import (ClosedSet, DegenerateProjection, ProductSet, Translate,
                       _sorted_points, as_vector, project)


@dataclass(frozen=True, eq=False)
class TwoSetProblem:
    """Feasibility problem for two closed sets with relaxation ``lam``.

    Parameters
    ----------
    A, B : ClosedSet
        The two sets; ``B`` is the set projected onto first.
    lam : float
        Relaxation parameter in ``(0, 1]``.
    """

    A: ClosedSet
    B: ClosedSet
    lam: float

    def __post_init__(self):
        lam = float(self.lam)
        if not 0.0 < lam <= 1.0:
            raise ValueError(f"lambda must lie in (0, 1], got {lam}")
        if self.A.dim != self.B.dim:
            raise ValueError("A and B must live in the same space")
        object.__setattr__(self, "lam", lam)

    @property
    def dim(self) -> int:
        return self.A.dim

    @property
    def lam_ratio(self) -> float:
        """The ratio ``lam / (1 - lam)`` that scales the gap at fixed points."""
        if self.lam >= 1.0:
            raise ValueError("lam/(1-lam) is undefined for lam = 1")
        return self.lam / (1.0 - self.lam)

    def with_lambda(self, lam: float) -> "TwoSetProblem":
        return TwoSetProblem(self.A, self.B, lam)


def _points(C, x):
    r = project(C, x)
    if r.is_degenerate:
        raise DegenerateProjection(f"projection onto {C!r} is a continuum at {np.asarray(x).tolist()}")
    return r.points


def drlambda_step(problem: TwoSetProblem, x) -> list:
    """All images of ``x`` under the relaxed Douglas-Rachford operator.

    Returns
    -------
    list of ndarray
        Candidates sorted lexicographically, duplicates merged.

    Raises
    ------
    DegenerateProjection
        If a projection along the way is a continuum.
    """
    x = as_vector(x)
    lam = problem.lam
    out = []
    for b in _points(problem.B, x):
        y = 2.0 * b - x
        for a in _points(problem.A, y):
            # R_A(y) = 2a - y
            out.append(0.5 * lam * (2.0 * a - y + x) + (1.0 - lam) * b)
    return _sorted_points(out)


def ap_step(problem: TwoSetProblem, x) -> list:
    """All images of ``x`` under alternating projections ``P_A P_B``."""
    return cyclic_step([problem.B, problem.A], x)


def cyclic_step(sets: Sequence[ClosedSet], x) -> list:
    """Project onto each set in turn, in list order, enumerating all branches.

    ``cyclic_step([B, A], x)`` computes ``P_A(P_B(x))``.
    """
    current = [as_vector(x)]
    for C in sets:
        current = _sorted_points(p for y in current for p in _points(C, y))
    return current


def permute(u) -> np.ndarray:
    """Cyclic block shift ``(u_1, ..., u_m) -> (u_2, ..., u_m, u_1)``."""
    return np.roll(np.asarray(u, dtype=float), -1, axis=0)


def psi(sets: Sequence[ClosedSet], u) -> list:
    """All values of ``P_Omega(Pi u) - Pi u`` for ``Omega`` the product of ``sets``.

    Parameters
    ----------
    sets : sequence of ClosedSet
        The collection ``Omega_1, ..., Omega_m``.
    u : array_like, shape (m, n)
        Lifted point.

    Raises
    ------
    DegenerateProjection
        When one of the block projections is a continuum.
    """
    u = np.asarray(u, dtype=float)
    if u.shape[0] != len(sets):
        raise ValueError("number of blocks does not match the number of sets")
    pu = permute(u)
    omega = ProductSet(tuple(sets))
    return [p - pu for p in _points(omega, pu)]


def omega_g(problem: TwoSetProblem, g) -> list:
    """The shifted collection ``(B - lam' g, A - lam' g, A, B)``."""
    s = problem.lam_ratio * as_vector(g)
    return [Translate(problem.B, s), Translate(problem.A, s), problem.A, problem.B]


def psi_g(problem: TwoSetProblem, g, u) -> list:
    """:func:`psi` for the collection :func:`omega_g`."""
    return psi(omega_g(problem, g), u)


def difference_vector(g, lam: float) -> np.ndarray:
    """The lifted difference vector ``(g, -lam' g, -g, lam' g)`` with ``lam' = lam/(1-lam)``."""
    g = as_vector(g)
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie in (0, 1) for the difference vector")
    lp = lam / (1.0 - lam)
    return np.stack([g, -lp * g, -g, lp * g])


def lift(zeta, x) -> np.ndarray:
    """The point of ``W(zeta)`` whose first block is ``x``.

    Its blocks are ``(x, x - z_1, x - z_1 - z_2, x + z_4)``, so that
    ``u - Pi u = zeta`` whenever ``zeta`` sums to zero.
    """
    z = np.asarray(zeta, dtype=float)
    x = as_vector(x)
    return np.stack([x, x - z[0], x - z[0] - z[1], x + z[3]])


def t_zeta_step(problem: TwoSetProblem, zeta, u) -> list:
    """All images of a lifted point under the lifted operator ``T_zeta``.

    Only the first block drives the update; the other blocks follow the
    offsets encoded in ``zeta``.
    """
    u = np.asarray(u, dtype=float)
    return [lift(zeta, x) for x in drlambda_step(problem, u[0])]


def phi_zeta_residual(problem: TwoSetProblem, zeta, u) -> float:
    """``dist(0, T_zeta(u) - u)`` over all branches."""
    u = np.asarray(u, dtype=float)
    return min(float(np.linalg.norm(v - u)) for v in t_zeta_step(problem, zeta, u))
