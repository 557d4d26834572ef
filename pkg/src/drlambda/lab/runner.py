"""Run scenarios end to end and collect the results into reports with verdicts."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..fixedpoint import (NotAFixedPoint, characterize_fixed_point, check_monotonicity,
                          check_w0_membership, fit_rate, iterate)
from ..geometry import DegenerateProjection, Sphere, distance, project
from ..operators import drlambda_step, lift, omega_g, difference_vector
from ..regularity import (NormalRay, FullSpace, ball, estimate_almost_averaged,
                          estimate_epsilon_super_regular, estimate_kappa, estimate_kappa_prime,
                          estimate_sigma, predicted_rate, predicted_rate_convex_consistent,
                          verify_shift_subtransversality, DEFAULT_RADIUS, DEFAULT_SAMPLES,
                          DEFAULT_SEED)
from .scenarios import Scenario, get_scenario

PASS, FAIL = "Pass", "Fail"

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000


@dataclass
class RunReport:
    """Everything a scenario run produced.

    ``verdicts`` maps check names to ``"Pass"`` or ``"Fail"``; checks without a
    verdict are simply absent.  ``verdict`` is ``"Pass"`` only when every
    recorded check passed.
    """

    scenario: str
    lam: float
    tol: float
    max_iter: int
    traces: list
    certificate: dict | None
    analytic_certificate: dict | None
    regularity: dict
    rate: dict | None
    verdicts: dict
    trace_objects: list = field(default_factory=list, repr=False)

    @property
    def verdict(self) -> str:
        return PASS if all(v == PASS for v in self.verdicts.values()) else FAIL

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "lambda": self.lam, "tol": self.tol,
                "maxIter": self.max_iter, "traces": self.traces,
                "certificate": self.certificate, "analyticCertificate": self.analytic_certificate,
                "regularity": self.regularity, "rate": self.rate, "verdicts": self.verdicts,
                "verdict": self.verdict}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_json_default)

    def write(self, out_dir) -> None:
        """Write ``report.json`` and ``trace.csv`` (first seed) plus ``trace_<i>.csv`` for the rest."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(self.to_json())
        for i, tr in enumerate(self.trace_objects):
            tr.to_csv(out / ("trace.csv" if i == 0 else f"trace_{i}.csv"))


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _verdict(ok) -> str:
    return PASS if ok else FAIL


def _summarize(scn, problem, trace, seed, tol):
    fixed = scn.fixed_set(problem.lam)
    s = {"seed": np.asarray(seed).tolist(), "status": trace.status, "steps": trace.n_steps,
         "final": trace.last.tolist(),
         "finalResidual": float(trace.residuals[-1]) if trace.n_steps else None,
         "cycle": trace.cycle}
    try:
        fr = fit_rate(trace)
        s["qRate"], s["rSquared"] = fr.q_rate, fr.r_squared
    except ValueError:
        s["qRate"] = s["rSquared"] = None
    if fixed is not None:
        s["distanceToAnalytic"] = distance(fixed, trace.last)
    if len(trace.residuals):
        tail = trace.residuals[-max(1, len(trace.residuals) // 5):]
        s["tailResidualMin"] = float(tail.min())
    return s


def _lifted_fixed_point(scn, lam):
    p = scn.fixed_point(lam)
    zeta = difference_vector(scn.gap, lam)
    return lift(zeta, p), zeta


def default_estimators(scn: Scenario, lam: float) -> list:
    """The estimators run by default for a scenario at ``lam``."""
    est = []
    if scn.fixed_point(lam) is not None:
        if scn.kappa_sq_bound is not None or scn.rate_check == "averaged":
            est.append("kappa")
        if scn.consistent:
            est.append("sigma")
        if scn.A.convex and scn.B.convex:
            est.append("alpha")
        if scn.kappa_prime is not None:
            est.append("kappa-prime")
    return est


def estimate_quantity(scn: Scenario, lam: float, quantity: str, radius: float = DEFAULT_RADIUS,
                      samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED):
    """Run one regularity estimator on a scenario at its analyzed fixed point.

    Parameters
    ----------
    quantity : {"epsilon", "alpha", "kappa", "kappa-prime", "sigma"}
    """
    problem = scn.problem(lam)
    xbar = scn.fixed_point(lam)
    if xbar is None:
        raise ValueError(f"scenario {scn.name} has no analyzed fixed point at lambda={lam}")
    if quantity == "epsilon":
        # regularity of B at the shadow, relative to the normal ray through it
        f = scn.shadow
        lam_set = NormalRay(scn.B, f) if isinstance(scn.B, Sphere) else FullSpace()
        return estimate_epsilon_super_regular(scn.B, f, lam_set, ball(f, radius, samples, seed))
    if quantity == "alpha":
        return estimate_almost_averaged(lambda x: drlambda_step(problem, x), xbar, 0.5,
                                        ball(xbar, radius, samples, seed))
    if quantity == "kappa":
        ubar, zeta = _lifted_fixed_point(scn, lam)
        return estimate_kappa(omega_g(problem, scn.gap), ubar, zeta, [ubar],
                              ball(ubar[0], radius, samples, seed))
    if quantity == "kappa-prime":
        if not scn.consistent:
            raise ValueError("kappa-prime needs a common point of A and B")
        return estimate_kappa_prime([scn.A, scn.B], xbar, ball(xbar, radius, samples, seed))
    if quantity == "sigma":
        return estimate_sigma(problem, scn.gap, ubar1=xbar, nbhd=ball(xbar, radius, samples, seed))
    raise ValueError(f"unknown quantity {quantity!r}")


def _regularity_verdicts(scn, lam, reports, verdicts):
    if "kappa" in reports and scn.kappa_sq_bound is not None and lam == 0.5:
        verdicts["kappa"] = _verdict(reports["kappa"].estimate ** 2 >= 0.95 * scn.kappa_sq_bound)
    if "sigma" in reports and scn.consistent:
        verdicts["sigma"] = _verdict(reports["sigma"].estimate <= 1.02 / (math.sqrt(2) * lam))
    if "alpha" in reports and scn.A.convex and scn.B.convex:
        verdicts["alpha"] = _verdict(reports["alpha"].estimate <= 1e-10)
    if "kappa-prime" in reports and scn.kappa_prime is not None:
        verdicts["kappa-prime"] = _verdict(reports["kappa-prime"].estimate <= scn.kappa_prime)


def _rate_section(scn, lam, reports, traces):
    rates = [t["qRate"] for t in traces if t["status"] == "Converged" and t["qRate"] is not None]
    if not rates:
        return None, None
    empirical = max(rates)
    out = {"empirical": empirical}
    if scn.rate_check == "consistent" and scn.kappa_prime is not None:
        # kappa = sqrt(2) kappa', so sqrt(1 - 2 lam^2/kappa^2) = sqrt(1 - lam^2/kappa'^2)
        pred = predicted_rate_convex_consistent(lam, math.sqrt(2) * scn.kappa_prime)
    elif scn.rate_check == "averaged" and "kappa" in reports and "alpha" in reports:
        pred = predicted_rate(reports["alpha"].estimate, 0.5, reports["kappa"].estimate)
    else:
        return out, None
    out["predicted"] = pred.c
    out["conditionOk"] = pred.condition_ok
    ok = empirical <= min(1.0, pred.c) + 0.02
    return out, _verdict(ok)


def run_scenario(name, lam: float, overrides: dict | None = None) -> RunReport:
    """Run a scenario at relaxation ``lam``.

    Parameters
    ----------
    name : str or Scenario
        Built-in name, path to a scenario JSON file, or a scenario object.
    lam : float
    overrides : dict, optional
        Keys ``tol``, ``max_iter``, ``seeds`` (list of start points),
        ``estimators`` (list of quantity names), ``samples``, ``radius``, ``seed``.
    """
    o = dict(overrides or {})
    scn = name if isinstance(name, Scenario) else get_scenario(name)
    tol = float(o.get("tol", DEFAULT_TOL))
    max_iter = int(o.get("max_iter", DEFAULT_MAX_ITER))
    seeds = [np.asarray(s, dtype=float) for s in o.get("seeds", scn.seeds)]
    problem = scn.problem(lam)
    fixed = scn.fixed_set(lam)
    verdicts = {}

    traces, summaries = [], []
    for s in seeds:
        tr = iterate(problem, s, tol=tol, max_iter=max_iter, reference=fixed)
        traces.append(tr)
        summaries.append(_summarize(scn, problem, tr, s, tol))

    converged = [(t, s) for t, s in zip(traces, summaries) if t.converged]
    if not scn.has_fixed_points:
        verdicts["no-fixed-point"] = _verdict(not converged and all(
            s.get("tailResidualMin", 0) > 1e-3 for s in summaries))

    certificate = None
    if converged:
        try:
            cert = characterize_fixed_point(problem, converged[0][0].last, tol=max(10 * tol, 1e-9)) \
                if lam < 1 else None
            certificate = cert.to_dict() if cert is not None else None
            if cert is not None:
                verdicts["certificate"] = _verdict(cert.reconstruction_residual <= max(10 * tol, 1e-9))
        except (NotAFixedPoint, DegenerateProjection) as exc:
            certificate = {"error": str(exc)}
            verdicts["certificate"] = FAIL

    analytic = None
    if scn.fixed_point(lam) is not None and lam < 1:
        try:
            c = characterize_fixed_point(problem, scn.fixed_point(lam))
            analytic = c.to_dict()
            ok = (np.linalg.norm(c.f - scn.shadow) <= 1e-9
                  and np.linalg.norm(c.g - scn.gap) <= 1e-9 and c.reconstruction_residual <= 1e-9)
            verdicts["analytic-fixed-point"] = _verdict(ok)
        except (NotAFixedPoint, DegenerateProjection) as exc:
            analytic = {"error": str(exc)}
            verdicts["analytic-fixed-point"] = FAIL

    if fixed is not None and scn.expect_linear:
        ok = True
        for t, s in converged:
            q = s["qRate"] if s["qRate"] is not None else 0.0
            # a-posteriori error bound of a linearly convergent sequence
            allowed = 10 * tol * max(1.0, q / (1.0 - q)) if q < 1 else math.inf
            ok &= s["distanceToAnalytic"] <= allowed
        if converged:
            verdicts["limit-matches-analytic"] = _verdict(ok)

    reports = {}
    wanted = o.get("estimators", default_estimators(scn, lam))
    for q in wanted:
        reports[q] = estimate_quantity(scn, lam, q, float(o.get("radius", DEFAULT_RADIUS)),
                                       int(o.get("samples", DEFAULT_SAMPLES)),
                                       int(o.get("seed", DEFAULT_SEED)))
    _regularity_verdicts(scn, lam, reports, verdicts)

    rate, rate_verdict = _rate_section(scn, lam, reports, summaries)
    if rate_verdict is not None:
        verdicts["rate"] = rate_verdict

    return RunReport(scn.name, float(lam), tol, max_iter, summaries, certificate, analytic,
                     {k: v.to_dict() for k, v in reports.items()}, rate, verdicts, traces)


@dataclass
class SweepReport:
    """Per-lambda reports and the shadow inclusion check across sorted lambdas."""

    reports: list
    monotonicity: str | None
    shadows: dict

    @property
    def verdict(self) -> str:
        ok = all(r.verdict == PASS for r in self.reports) and self.monotonicity != FAIL
        return PASS if ok else FAIL

    def to_dict(self) -> dict:
        return {"reports": [r.to_dict() for r in self.reports], "monotonicity": self.monotonicity,
                "shadows": self.shadows, "verdict": self.verdict}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_json_default)


def _converged_points(report, cluster_tol=1e-6):
    pts = []
    for t in report.trace_objects:
        if t.converged and all(np.linalg.norm(t.last - p) > cluster_tol for p in pts):
            pts.append(t.last)
    return pts


def sweep_lambda(name, lambdas, overrides: dict | None = None, shadow_tol: float = 1e-6) -> SweepReport:
    """Run a scenario over several lambdas and check that shadow sets shrink as lambda grows.

    The fixed point sets are approximated by the converged limits of the
    scenario's seeds.  With fewer than two lambdas the inclusion check is
    skipped and ``monotonicity`` is None.
    """
    scn = name if isinstance(name, Scenario) else get_scenario(name)
    lams = sorted(float(v) for v in lambdas)
    o = dict(overrides or {})
    o.setdefault("estimators", [])
    reports = [run_scenario(scn, lam, o) for lam in lams]
    fixed = [_converged_points(r) for r in reports]
    shadows = {str(lam): [project(scn.B, p).select().tolist() for p in f]
               for lam, f in zip(lams, fixed)}
    mono = None
    if len(lams) >= 2:
        ok = all(check_monotonicity(scn.problem(l1), scn.problem(l2), f1, f2, shadow_tol)
                 for l1, l2, f1, f2 in zip(lams, lams[1:], fixed, fixed[1:]))
        mono = _verdict(ok)
    return SweepReport(reports, mono, shadows)


def verify(scn: Scenario, lam: float, check: str, samples: int = DEFAULT_SAMPLES) -> tuple:
    """Run one of the named verification checks; returns ``(passed, details)``."""
    problem = scn.problem(lam)
    if check == "fixedpoint":
        tr = iterate(problem, scn.seeds[0])
        if not tr.converged:
            return (not scn.has_fixed_points), {"status": tr.status}
        cert = characterize_fixed_point(problem, tr.last)
        return cert.reconstruction_residual <= 1e-9, cert.to_dict()
    if check == "w0":
        if scn.fixed_point(lam) is None:
            raise ValueError("no analyzed fixed point at this lambda")
        ubar, _ = _lifted_fixed_point(scn, lam)
        res = check_w0_membership(problem, scn.gap, ubar)
        return res.ok, {"residuals": list(res.residuals), "u": ubar.tolist()}
    if check == "monotonicity":
        lams = [lam / 2, lam]
        sw = sweep_lambda(scn, lams)
        return sw.monotonicity == PASS, {"lambdas": lams, "shadows": sw.shadows}
    if check == "shift-subtransversality":
        if scn.fixed_point(lam) is None:
            raise ValueError("no analyzed fixed point at this lambda")
        e = scn.shadow - scn.gap
        res = verify_shift_subtransversality(scn.A, scn.B, None, scn.gap, lam, e,
                                             ball(e, DEFAULT_RADIUS, samples))
        return res.passed, res.__dict__
    raise ValueError(f"unknown check {check!r}")
