import json

import numpy as np
import pytest

from drlambda.geometry import (AffineSubspace, Ball, DegenerateProjection, DimensionError,
                               FiniteUnion, Halfspace, ProductSet, SinglePoint, Sphere, Translate,
                               distance, intersection, project, reflect, set_from_dict,
                               set_from_json)

RNG_SEED = 7


def unit_circle():
    return Sphere([0, 0], 1.0)


def test_sphere_projection_unique():
    r = project(unit_circle(), [2, 0])
    assert r.kind == "unique"
    np.testing.assert_allclose(r.select(), [1, 0])
    assert r.distance == pytest.approx(1.0)


def test_sphere_center_is_continuum():
    r = project(unit_circle(), [0, 0])
    assert r.kind == "continuum"
    assert r.distance == 1.0
    assert isinstance(r.continuum, Sphere)
    with pytest.raises(DegenerateProjection):
        r.select()


def test_reflect_at_center_gives_doubled_circle():
    r = reflect(unit_circle(), [0, 0])
    assert r.kind == "continuum"
    assert r.continuum.radius == pytest.approx(2.0)
    np.testing.assert_allclose(r.continuum.center, [0, 0])


def test_reflect_point():
    r = reflect(unit_circle(), [0, 3])
    np.testing.assert_allclose(r.select(), [0, -1])


def test_ball_inside_and_outside():
    B = Ball([3, 0], 1)
    np.testing.assert_allclose(project(B, [3.2, 0.1]).select(), [3.2, 0.1])
    assert distance(B, [3.2, 0.1]) == 0
    np.testing.assert_allclose(project(B, [0, 0]).select(), [2, 0])


def test_affine_line():
    L = AffineSubspace([0, 0.75], [[2, 0]])
    np.testing.assert_allclose(project(L, [0.3, 2]).select(), [0.3, 0.75])
    assert distance(L, [5, 0]) == pytest.approx(0.75)


def test_affine_basis_is_orthonormalized():
    L = AffineSubspace([0, 0, 0], [[1, 1, 0], [2, 2, 0]])
    assert L.basis.shape == (1, 3)
    np.testing.assert_allclose(np.linalg.norm(L.basis[0]), 1.0)


def test_halfspace():
    H = Halfspace([0, 2], 2)  # y <= 1
    np.testing.assert_allclose(project(H, [4, 3]).select(), [4, 1])
    np.testing.assert_allclose(project(H, [4, -3]).select(), [4, -3])


def test_halfspace_reflector_nonexpansive():
    H = Halfspace([1, 1], 0.5)
    rng = np.random.default_rng(RNG_SEED)
    for _ in range(200):
        x, y = rng.normal(size=(2, 2)) * 3
        rx, ry = reflect(H, x).select(), reflect(H, y).select()
        assert np.linalg.norm(rx - ry) <= np.linalg.norm(x - y) * (1 + 1e-12)


def test_translate_moves_the_set():
    # Translate(C, g) is C - g
    T = Translate(unit_circle(), [1, 0])
    np.testing.assert_allclose(project(T, [1, 0]).select(), [0, 0])
    np.testing.assert_allclose(project(T, [-3, 0]).select(), [-2, 0])


def test_translate_continuum_is_translated():
    T = Translate(unit_circle(), [1, 0])
    r = project(T, [-1, 0])
    assert r.is_degenerate
    assert distance(r.continuum, [0, 0]) == pytest.approx(0.0)


def test_union_ties_are_sorted_lexicographically():
    U = FiniteUnion((SinglePoint([1, 0]), SinglePoint([-1, 0])))
    r = project(U, [0, 0])
    assert r.kind == "finite"
    np.testing.assert_allclose(r.points[0], [-1, 0])
    np.testing.assert_allclose(r.points[1], [1, 0])


def test_union_picks_nearest_part():
    U = FiniteUnion((unit_circle(), Sphere([5, 0], 1)))
    np.testing.assert_allclose(project(U, [3.5, 0]).select(), [4, 0])


def test_product_blockwise_and_shape():
    P = ProductSet((unit_circle(), Ball([3, 0], 1)))
    x = np.array([[2.0, 0.0], [0.0, 0.0]])
    r = project(P, x)
    assert r.points[0].shape == (2, 2)
    np.testing.assert_allclose(r.select(), [[1, 0], [2, 0]])
    assert r.distance == pytest.approx(np.sqrt(1 + 4))


def test_product_with_continuum_factor():
    P = ProductSet((unit_circle(), unit_circle()))
    r = project(P, [0, 0, 2, 0])
    assert r.is_degenerate
    assert isinstance(r.continuum, ProductSet)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        project(unit_circle(), [1, 2, 3])


@pytest.mark.parametrize("C", [
    Sphere([0.5, -1], 2.0), Ball([1, 1], 0.5), AffineSubspace([0, 1], [[1, 1]]),
    Halfspace([1, -2], 0.3), SinglePoint([0.2, 0.1]),
    Translate(Sphere([0, 0], 1), [0.3, -0.7]),
    FiniteUnion((Sphere([0, 0], 1), Ball([3, 0], 0.5))),
])
def test_json_round_trip(C):
    D = set_from_json(C.to_json())
    rng = np.random.default_rng(RNG_SEED)
    for x in rng.normal(size=(20, 2)) * 3:
        np.testing.assert_allclose(project(C, x).select(), project(D, x).select())


def test_json_schema_names():
    d = Translate(Sphere([0, 0], 1), [1, 0]).to_dict()
    assert d == {"type": "translate", "shift": [1.0, 0.0],
                 "inner": {"type": "sphere", "center": [0.0, 0.0], "radius": 1.0}}
    P = ProductSet((SinglePoint([0]), SinglePoint([1])))
    assert json.loads(P.to_json())["type"] == "product"
    with pytest.raises(ValueError):
        set_from_dict({"type": "torus"})


def test_intersection_closed_forms():
    h = -0.75  # (1 - 1 + 2.25) / (2 * -1.5)
    S = intersection(Sphere([0, 0], 1), Sphere([0, -1.5], 1))
    pts = sorted(p.point.tolist() for p in S.parts)
    np.testing.assert_allclose(pts, [[-np.sqrt(1 - h * h), h], [np.sqrt(1 - h * h), h]])
    T = intersection(Sphere([0, 0], 1), Sphere([2, 0], 1))
    np.testing.assert_allclose(T.point, [1, 0], atol=1e-12)
    O = intersection(AffineSubspace([0, 0], [[1, 0]]), AffineSubspace([0, 0], [[0, 1]]))
    np.testing.assert_allclose(O.anchor, [0, 0])
    assert O.basis.shape[0] == 0
    with pytest.raises(ValueError):
        intersection(Sphere([0, 0], 1), Sphere([3, 0], 1))


# property suites over random probes -------------------------------------------------

PROPERTY_SETS = [
    Sphere([0, 0], 1), Sphere([3, 0], 1), Ball([0, 0], 1), AffineSubspace([0, 0.75], [[1, 0]]),
    Halfspace([1, 2], 1.0), SinglePoint([0.3, -0.2]),
    FiniteUnion((Sphere([0, 0], 1), Sphere([0, -1.5], 1))),
]


def geometry_property_failures(n_probes=10_000, seed=RNG_SEED):
    """Count violations of idempotence, translation and product identities."""
    rng = np.random.default_rng(seed)
    xs = rng.normal(size=(n_probes, 2)) * 2
    gs = rng.normal(size=(n_probes, 2))
    failures = 0
    for i, x in enumerate(xs):
        C = PROPERTY_SETS[i % len(PROPERTY_SETS)]
        r = project(C, x)
        if r.is_degenerate:
            continue
        p = r.select()
        # idempotence and membership
        failures += np.linalg.norm(project(C, p).select() - p) > 1e-10
        failures += distance(C, p) > 1e-10
        # the projection is at least as close as any other point of the set
        q = project(C, x + gs[i]).select()
        failures += np.linalg.norm(x - p) > np.linalg.norm(x - q) + 1e-10
        # P_{C - g}(x) = P_C(x + g) - g
        g = gs[i]
        pt = project(Translate(C, g), x).select()
        failures += np.linalg.norm(pt - (project(C, x + g).select() - g)) > 1e-10
        # products act blockwise
        D = PROPERTY_SETS[(i + 1) % len(PROPERTY_SETS)]
        y = xs[(i + 1) % n_probes]
        rd = project(D, y)
        if rd.is_degenerate:
            continue
        pp = project(ProductSet((C, D)), np.concatenate([x, y])).select()
        failures += np.linalg.norm(pp - np.concatenate([p, rd.select()])) > 1e-10
    return int(failures)


def test_geometry_properties_on_random_probes():
    assert geometry_property_failures(2_000) == 0
