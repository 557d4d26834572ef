import json

import numpy as np
import pytest

from drlambda.fixedpoint import characterize_fixed_point
from drlambda.lab import builtin_scenarios, get_scenario, run_scenario, sweep_lambda
from drlambda.lab.cli import main

FAST = {"estimators": []}


def test_catalog_has_all_scenarios():
    names = {s.name for s in builtin_scenarios()}
    assert names >= {"two-intersecting-circles", "separable-circles", "nonseparable-circles",
                     "concentric-circles", "tangential-circles", "circle-point", "two-balls",
                     "line-circle"}


def test_separable_analytic_data():
    s = get_scenario("separable-circles")
    np.testing.assert_allclose(s.fixed_point(0.3), [2 - 0.3 / 0.7, 0])
    np.testing.assert_allclose(s.gap, [1, 0])
    assert s.kappa_sq_bound == pytest.approx(4.0)


def test_circle_point_and_tangential_flags():
    assert get_scenario("circle-point").fixed_set(0.5) is None
    assert not get_scenario("circle-point").has_fixed_points
    assert not get_scenario("tangential-circles").expect_linear


@pytest.mark.parametrize("scn", builtin_scenarios(), ids=lambda s: s.name)
def test_analytic_fixed_points_certify(scn):
    for lam in (0.25, 0.5):
        for p in scn.fixed_points(lam):
            c = characterize_fixed_point(scn.problem(lam), p)
            assert c.reconstruction_residual <= 1e-9


def test_run_separable():
    rep = run_scenario("separable-circles", 0.5, {"samples": 2000})
    assert rep.verdict == "Pass"
    assert rep.traces[0]["status"] == "Converged"
    np.testing.assert_allclose(rep.traces[0]["final"], [1, 0], atol=1e-9)
    np.testing.assert_allclose(rep.certificate["g"], [1, 0], atol=1e-9)
    assert rep.regularity["kappa"]["estimate"] >= 1.9


def test_run_circle_point():
    rep = run_scenario("circle-point", 0.8, {"seeds": [[0.3, 0.5], [-1.0, 1.2]]})
    assert all(t["status"] in ("MaxIterations", "Diverged") for t in rep.traces)
    assert rep.verdicts["no-fixed-point"] == "Pass"


def test_run_two_balls():
    rep = run_scenario("two-balls", 0.5, {"samples": 2000})
    assert rep.verdict == "Pass"
    assert rep.regularity["alpha"]["estimate"] <= 1e-10
    assert rep.rate["empirical"] < rep.rate["predicted"]


@pytest.mark.parametrize("name", ["separable-circles", "nonseparable-circles",
                                  "concentric-circles", "two-intersecting-circles", "two-balls"])
def test_converged_limits_within_ten_tol(name):
    rep = run_scenario(name, 0.5, FAST)
    for t in rep.traces:
        assert t["status"] == "Converged"
        assert t["distanceToAnalytic"] <= 10 * rep.tol


def test_reports_are_reproducible():
    a = run_scenario("two-intersecting-circles", 0.5, {"samples": 500}).to_json()
    b = run_scenario("two-intersecting-circles", 0.5, {"samples": 500}).to_json()
    assert a == b


def test_sweep_separable():
    sw = sweep_lambda("separable-circles", [0.7, 0.3, 0.5])
    assert sw.monotonicity == "Pass"
    for shadows in sw.shadows.values():
        np.testing.assert_allclose(shadows, [[2, 0]] * len(shadows), atol=1e-9)


def test_sweep_single_lambda_skips_check():
    assert sweep_lambda("separable-circles", [0.5]).monotonicity is None


def test_sweep_intersecting():
    sw = sweep_lambda("two-intersecting-circles", [0.25, 0.75])
    assert sw.monotonicity == "Pass"


def test_user_scenario_file(tmp_path):
    d = {"name": "my-balls", "A": {"type": "ball", "center": [0, 0], "radius": 1},
         "B": {"type": "ball", "center": [0, 3], "radius": 1},
         "shadow": [0, 2], "gap": [0, 1], "seeds": [[0.2, 0.5]]}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(d))
    rep = run_scenario(str(path), 0.5, FAST)
    assert rep.verdict == "Pass"
    np.testing.assert_allclose(rep.traces[0]["final"], [0, 1], atol=1e-9)


def test_unknown_scenario():
    with pytest.raises(KeyError):
        get_scenario("no-such-thing")


# command line -------------------------------------------------------------------------

def test_cli_scenario_list(capsys):
    assert main(["scenario", "list"]) == 0
    assert "separable-circles" in capsys.readouterr().out


def test_cli_run_writes_artifacts(tmp_path, capsys):
    code = main(["run", "--scenario", "separable-circles", "--lambda", "0.5", "--x0", "1.2,0.3",
                 "--out", str(tmp_path)])
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["verdict"] == "Pass"
    header = (tmp_path / "trace.csv").read_text().splitlines()[0]
    assert header == "k,x0,x1,residual,shadow0,shadow1,refDistance"


def test_cli_run_fail_exit_code(tmp_path):
    # a loose tolerance makes the first step look converged, contradicting the empty fixed set
    code = main(["run", "--scenario", "circle-point", "--lambda", "0.5", "--x0", "1e-3,0",
                 "--max-iter", "50", "--tol", "0.9"])
    assert code == 2


def test_cli_error_exit_code(capsys):
    assert main(["run", "--scenario", "nope", "--lambda", "0.5"]) == 1
    assert main(["run", "--scenario", "separable-circles", "--lambda", "1.5"]) == 1


def test_cli_estimate(capsys):
    code = main(["estimate", "--scenario", "two-intersecting-circles", "--lambda", "0.5",
                 "--quantity", "sigma", "--samples", "300"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["quantity"] == "Sigma"
    assert out["estimate"] == pytest.approx(2 ** 0.5, rel=1e-6)


def test_cli_estimate_rate(capsys):
    code = main(["estimate", "--scenario", "two-balls", "--lambda", "0.5", "--quantity", "rate",
                 "--samples", "300"])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["conditionOk"]


@pytest.mark.parametrize("check", ["fixedpoint", "w0", "monotonicity", "shift-subtransversality"])
def test_cli_verify(check, capsys):
    assert main(["verify", "--scenario", "separable-circles", "--lambda", "0.5",
                 "--check", check]) == 0


def test_cli_sweep(capsys):
    assert main(["sweep", "--scenario", "separable-circles", "--lambdas", "0.3,0.5,0.7"]) == 0
    assert "monotonicity: Pass" in capsys.readouterr().out
