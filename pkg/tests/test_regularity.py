import json
import math
from fractions import Fraction

import numpy as np
import pytest

from drlambda.geometry import AffineSubspace, Ball, Halfspace, SinglePoint, Sphere
from drlambda.operators import TwoSetProblem, difference_vector, drlambda_step, lift, omega_g
from drlambda.regularity import (FullSpace, NormalRay, ball, check_projector_regularity,
                                 combine_violations, compose_violations,
                                 estimate_almost_averaged, estimate_epsilon_super_regular,
                                 estimate_kappa, estimate_kappa_prime, estimate_sigma,
                                 kappa_prime_ratio, predicted_rate,
                                 predicted_rate_convex_consistent, predicted_rate_drlambda, tube,
                                 verify_shift_subtransversality)

A = Sphere([0, 0], 1)


def test_sampler_prefix_property():
    big = ball([1, 2], 0.3, samples=500, seed=3).sample(2)
    small = ball([1, 2], 0.3, samples=120, seed=3).sample(2)
    np.testing.assert_array_equal(big[:120], small)
    assert np.all(np.linalg.norm(big - [1, 2], axis=2) < 0.3)


def test_tube_samples_stay_in_tube():
    spec = tube(A, [1, 0], radius=0.1, length=2.0, samples=2000)
    pts = spec.sample()[:, 0]
    assert all(spec.shape.contains(p) for p in pts)
    assert pts[:, 0].max() > 2.5


def test_epsilon_convex_ball_is_zero():
    rep = estimate_epsilon_super_regular(Ball([0, 0], 1), [1, 0], FullSpace(), ball([1, 0], 0.5, 3000))
    assert rep.estimate <= 1e-10
    assert rep.is_lower_bound


def test_epsilon_single_point_is_zero():
    rep = estimate_epsilon_super_regular(SinglePoint([0, 0]), [0, 0], nbhd=ball([0, 0], 1, 500))
    assert rep.estimate == 0


def test_epsilon_circle_outward_ray():
    rep = estimate_epsilon_super_regular(A, [1, 0], NormalRay(A, [1, 0]), ball([1, 0], 0.2))
    # the extreme sample sits at the edge of the ball, where ||x - xbar||/2 slightly exceeds 0.1
    assert rep.estimate <= 0.1 + 0.005


def test_epsilon_circle_full_ray_is_not_small():
    # inward points on both sides give a ratio of 1
    rep = estimate_epsilon_super_regular(A, [1, 0], NormalRay(A, [1, 0], outward_only=False),
                                         ball([1, 0], 0.2, 3000))
    assert rep.estimate > 0.9


def test_epsilon_requires_point_of_set():
    with pytest.raises(ValueError):
        estimate_epsilon_super_regular(A, [2, 0])


def test_estimates_monotone_in_sample_count():
    vals = [estimate_epsilon_super_regular(A, [1, 0], NormalRay(A, [1, 0]),
                                           ball([1, 0], 0.2, n)).estimate for n in (100, 400, 1600)]
    assert vals == sorted(vals)


def test_report_is_deterministic_and_serializable():
    r1 = estimate_epsilon_super_regular(A, [1, 0], NormalRay(A, [1, 0]), ball([1, 0], 0.2, 300))
    r2 = estimate_epsilon_super_regular(A, [1, 0], NormalRay(A, [1, 0]), ball([1, 0], 0.2, 300))
    assert r1.to_json() == r2.to_json()
    d = json.loads(r1.to_json())
    assert set(d) >= {"quantity", "estimate", "isLowerBound", "samples", "seed", "worstWitness"}


@pytest.mark.parametrize("C, xbar, lam_set", [
    (Ball([0, 0], 1), [1, 0], FullSpace()),
    (Sphere([0, 0], 1), [1, 0], None),
    (Halfspace([1, 0], 1), [1, 0], FullSpace()),
])
def test_projector_regularity_chain(C, xbar, lam_set):
    if lam_set is None:
        lam_set = NormalRay(C, xbar)
    spec = ball(xbar, 0.2, 2000)
    eps = estimate_epsilon_super_regular(C, xbar, lam_set, spec).estimate
    chk = check_projector_regularity(C, xbar, eps, spec, lam_set)
    assert chk.passed


def test_projector_convex_ratio_at_most_one():
    chk = check_projector_regularity(Ball([0, 0], 1), [1, 0], 0.0, ball([1, 0], 0.5, 2000))
    assert chk.lipschitz_ratio <= 1 + 1e-12
    assert chk.reflector_ratio <= 1 + 1e-12


def test_projector_circle_tube():
    chk = check_projector_regularity(A, [1, 0], 0.1, tube(A, [1, 0], 0.1, samples=2000),
                                     NormalRay(A, [1, 0]))
    assert chk.lipschitz_bound == pytest.approx(1.1 / 0.9)
    assert chk.lipschitz_ratio <= chk.lipschitz_bound


def test_almost_averaged_identity_and_balls():
    rep = estimate_almost_averaged(lambda x: [x], np.zeros(2), 0.5, ball([0, 0], 1, 500))
    assert rep.estimate == 0
    P = TwoSetProblem(Ball([0, 0], 1), Ball([3, 0], 1), 0.5)
    rep = estimate_almost_averaged(lambda x: drlambda_step(P, x), [1, 0], 0.5, ball([1, 0], 0.5, 3000))
    assert rep.estimate <= 1e-10


def test_almost_averaged_circles_tube_finite():
    P = TwoSetProblem(A, Sphere([3, 0], 1), 0.5)
    rep = estimate_almost_averaged(lambda x: drlambda_step(P, x), [1, 0], 0.5,
                                   tube(Sphere([3, 0], 1), [2, 0], 0.3, samples=2000))
    assert math.isfinite(rep.estimate)
    assert rep.estimate < 0.1


def test_compose_violations():
    assert compose_violations([0, 0], [0.5, 0.5]) == (0, pytest.approx(2 / 3))
    eps, alpha = compose_violations([0.1, 0.2], [0.5, 0.5])
    assert eps == pytest.approx(0.32)
    assert compose_violations([0.3], [0.4]) == (pytest.approx(0.3), pytest.approx(0.4))


def test_compose_violations_exact_rationals():
    eps, alpha = compose_violations([Fraction(1, 10), Fraction(1, 5)],
                                    [Fraction(1, 2), Fraction(2, 3)])
    assert eps == Fraction(8, 25)
    assert alpha == Fraction(2, 1) / (1 + Fraction(3, 2))
    e2, a2 = combine_violations([Fraction(1, 10), Fraction(1, 5)], [Fraction(1, 2), Fraction(2, 3)],
                                [Fraction(1, 4), Fraction(3, 4)])
    assert e2 == Fraction(7, 40)
    assert a2 == Fraction(2, 3)


def _lifted(B, f, g, lam=0.5):
    P = TwoSetProblem(A, B, lam)
    g = np.asarray(g, float)
    z = difference_vector(g, lam)
    ub = lift(z, np.asarray(f, float) - lam / (1 - lam) * g)
    return P, g, z, ub


def test_kappa_example2_small_run():
    P, g, z, ub = _lifted(Sphere([3, 0], 1), [2, 0], [1, 0])
    rep = estimate_kappa(omega_g(P, g), ub, z, [ub], ball(ub[0], 0.1, 2000), check_unbounded=False)
    assert 1.9 <= rep.estimate <= 2.0 + 1e-6


def test_kappa_tangential_flagged_unbounded():
    P = TwoSetProblem(A, Sphere([2, 0], 1), 0.5)
    z = np.zeros((4, 2))
    ub = lift(z, [1, 0])
    rep = estimate_kappa(omega_g(P, [0, 0]), ub, z, [ub], ball([1, 0], 0.1, 2000))
    assert rep.unbounded


def test_kappa_prime_orthogonal_lines():
    # max_u ||u|| / max(|u_1|, |u_2|) = sqrt(2), attained on the diagonals
    L1 = AffineSubspace([0, 0], [[1, 0]])
    L2 = AffineSubspace([0, 0], [[0, 1]])
    rep = estimate_kappa_prime([L1, L2], [0, 0], ball([0, 0], 1, 5000), check_unbounded=False)
    assert rep.estimate == pytest.approx(math.sqrt(2), rel=1e-3)
    assert rep.extra["kappa"] == pytest.approx(2, rel=1e-3)


def test_kappa_prime_skips_common_point():
    assert kappa_prime_ratio([A, Sphere([2, 0], 1)], np.array([1.0, 0.0]), SinglePoint([1, 0])) is None


def test_kappa_prime_example1_below_closed_form():
    B = Sphere([0, -1.5], 1)
    ip = np.array([math.sqrt(1 - 0.75 ** 2), -0.75])
    rep = estimate_kappa_prime([A, B], ip, ball(ip, 0.1, 3000))
    assert rep.estimate <= 10 / 3
    assert not rep.unbounded


def test_kappa_prime_empty_intersection():
    with pytest.raises(ValueError):
        estimate_kappa_prime([A, Sphere([3, 0], 1)], [1, 0])


@pytest.mark.parametrize("lam", [0.25, 0.5, 0.75])
def test_sigma_consistent_closed_form(lam):
    B = Sphere([0, -1.5], 1)
    ip = np.array([math.sqrt(1 - 0.75 ** 2), -0.75])
    rep = estimate_sigma(TwoSetProblem(A, B, lam), [0, 0], ubar1=ip, nbhd=ball(ip, 0.1, 1000))
    assert rep.estimate == pytest.approx(1 / (math.sqrt(2) * lam), rel=1e-8)


def test_sigma_example2_finite():
    P, g, z, ub = _lifted(Sphere([3, 0], 1), [2, 0], [1, 0])
    rep = estimate_sigma(P, g, z, ub[0], ball(ub[0], 0.1, 1000))
    assert math.isfinite(rep.estimate) and rep.estimate > 0


def test_predicted_rate():
    r = predicted_rate(0.0, 0.5, 2.0)
    assert r.c == pytest.approx(math.sqrt(3) / 2)
    assert r.condition_ok
    assert not predicted_rate(0.5, 0.5, 2.0).condition_ok
    r = predicted_rate_convex_consistent(0.5, math.sqrt(2) * 10 / 3)
    assert r.c == pytest.approx(math.sqrt(1 - 0.0225))
    assert r.c == pytest.approx(0.98869, abs=1e-5)
    assert predicted_rate_drlambda(0.0, 2.0, 1.0).c == pytest.approx(math.sqrt(3) / 2)


@pytest.mark.parametrize("eps, alpha, kappa", [
    (0.0, 0.5, 0.5), (0.01, 0.5, 2.0), (0.3, 0.3, 1.5), (0.2, 0.7, 3.0), (0.05, 0.5, 4.0),
])
def test_predicted_rate_condition_matches_contraction(eps, alpha, kappa):
    r = predicted_rate(eps, alpha, kappa)
    assert (r.c < 1) == r.condition_ok


def test_shift_subtransversality_example2():
    P, g, z, ub = _lifted(Sphere([3, 0], 1), [2, 0], [1, 0])
    res = verify_shift_subtransversality(A, Sphere([3, 0], 1), None, g, 0.5, ub[2],
                                         ball(ub[2], 0.1, 2000))
    assert res.passed
    assert res.lifted_estimate <= res.pair_estimate + 0.05


def test_shift_subtransversality_zero_shift_coincides():
    B = Sphere([0, -1.5], 1)
    ip = np.array([math.sqrt(1 - 0.75 ** 2), -0.75])
    res = verify_shift_subtransversality(A, B, None, [0, 0], 0.5, ip, ball(ip, 0.1, 1000))
    assert res.lifted_estimate == pytest.approx(res.pair_estimate, rel=1e-12)


def test_shift_subtransversality_convex_balls():
    res = verify_shift_subtransversality(Ball([0, 0], 1), Ball([3, 0], 1), None, [1, 0], 0.5,
                                         [1, 0], ball([1, 0], 0.1, 2000))
    assert res.passed
    assert res.lifted_estimate == pytest.approx(res.pair_estimate, rel=1e-9)
