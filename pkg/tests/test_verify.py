"""Checks for the claim runner, line scans, and the shooting oracle."""
import inspect
import json
import math

import numpy as np
import pytest

from ldesc.descriptors import DescriptorSpec, compute_Lf, compute_M
from ldesc.errors import LdescError
from ldesc import verify
from ldesc.systems import get
from ldesc.verify import (
    Claim,
    LineScan,
    NoSignChange,
    VerificationReport,
    classify_attractor,
    claim_names,
    line_scan,
    reports_table,
    reports_to_json,
    run_all,
    run_claim,
    scan_to_csv,
    scan_to_json,
    scan_to_svg,
    separatrix_crossing,
)


# ---------------------------------------------------------------------------
# shooting oracle

def test_classify_basin_sides():
    system = get("basin2d")
    assert classify_attractor(system, (2.0, 1.0)) == 0
    assert classify_attractor(system, (2.0, -1.0)) == 1


def test_classify_duffing_right_well():
    system = get("duffing_damped")
    assert classify_attractor(system, (1.1, 0.0)) == 0


def test_classify_requires_attractors():
    with pytest.raises(LdescError):
        classify_attractor(get("saddle2d"), (0.1, 0.1))


def test_separatrix_crossing_at_zero():
    system = get("basin2d")
    s = separatrix_crossing(system, (1.1, 0.0), (0.0, 1.0), -2.0, 2.0)
    assert abs(s) <= 1e-5


def test_separatrix_needs_differing_fates():
    system = get("basin2d")
    with pytest.raises(NoSignChange):
        separatrix_crossing(system, (1.1, 0.0), (0.0, 1.0), 0.5, 2.0)


def test_shooting_path_reads_no_descriptors():
    # the boundary oracle must stay independent of the quantity it checks
    src = inspect.getsource(classify_attractor) + inspect.getsource(
        separatrix_crossing
    )
    for token in ("compute_M", "compute_Lf", "compute_MDp", "evaluate_batch",
                  "DescriptorSpec", "sweep", "line_scan"):
        assert token not in src


# ---------------------------------------------------------------------------
# line scans

def test_line_scan_matches_pointwise_values():
    system = get("basin2d")
    scan = line_scan(
        system, DescriptorSpec(kind="L_forward", tau=2.0),
        (1.1, 0.0), (0.0, 1.0), (-1.0, 1.0), samples=5,
    )
    assert scan.params.shape == (5,)
    direct = compute_Lf(system, (1.1, 0.5), 0.0, 2.0)
    assert scan.values[3] == direct
    assert not scan.failures


def test_line_scan_direction_normalized():
    system = get("rotation2d")
    a = line_scan(system, DescriptorSpec(tau=1.0), (0.0, 0.0), (0.0, 2.0),
                  (0.5, 1.0), samples=3)
    b = line_scan(system, DescriptorSpec(tau=1.0), (0.0, 0.0), (0.0, 1.0),
                  (0.5, 1.0), samples=3)
    np.testing.assert_array_equal(a.values, b.values)
    np.testing.assert_array_equal(a.direction, [0.0, 1.0])


def test_line_scan_rejects_bad_inputs():
    system = get("rotation2d")
    spec = DescriptorSpec(tau=1.0)
    with pytest.raises(ValueError):
        line_scan(system, spec, (0.0, 0.0), (0.0, 0.0), (0.0, 1.0))
    with pytest.raises(ValueError):
        line_scan(system, spec, (0.0, 0.0), (0.0, 1.0), (1.0, 0.0))
    with pytest.raises(ValueError):
        line_scan(system, spec, (0.0, 0.0), (0.0, 1.0), (0.0, 1.0), samples=1)


def test_argmin_tie_takes_smallest_param():
    params = np.linspace(-1.0, 1.0, 5)
    scan = LineScan(
        base=np.zeros(2), direction=np.array([1.0, 0.0]), params=params,
        points=np.zeros((5, 2)), values=np.zeros(5), failures=[], config={},
    )
    assert scan.argmin_param == -1.0


def test_argmin_skips_nan():
    params = np.linspace(0.0, 1.0, 3)
    values = np.array([np.nan, 2.0, 3.0])
    scan = LineScan(
        base=np.zeros(2), direction=np.array([1.0, 0.0]), params=params,
        points=np.zeros((3, 2)), values=values, failures=[(0, "x")], config={},
    )
    assert scan.argmin_param == 0.5
    assert scan.min_value == 2.0


def test_scan_serializers():
    system = get("rotation2d")
    scan = line_scan(system, DescriptorSpec(tau=1.0), (0.0, 0.0), (1.0, 0.0),
                     (0.5, 1.0), samples=3)
    csv = scan_to_csv(scan)
    lines = csv.splitlines()
    assert lines[0].startswith("# config: {")
    assert lines[1] == "param,x,y,value"
    assert len(lines) == 5
    # values round-trip through repr exactly
    assert float(lines[2].split(",")[3]) == scan.values[0]

    doc = json.loads(scan_to_json(scan))
    assert doc["config"]["command"] == "scan"
    assert doc["argmin_param"] == scan.argmin_param
    assert len(doc["values"]) == 3

    svg = scan_to_svg(scan)
    assert svg.startswith("<svg ")
    assert "<desc>" in svg and "polyline" in svg


def test_scan_svg_splits_at_nan():
    params = np.linspace(0.0, 1.0, 5)
    values = np.array([1.0, 2.0, np.nan, 2.0, 1.0])
    scan = LineScan(
        base=np.zeros(2), direction=np.array([1.0, 0.0]), params=params,
        points=np.zeros((5, 2)), values=values, failures=[(2, "x")],
        config={"command": "scan"},
    )
    svg = scan_to_svg(scan)
    assert svg.count("<polyline") == 2


# ---------------------------------------------------------------------------
# closed-form spot checks feeding the claims

def test_basin_fd_derivative_value():
    system = get("basin2d")
    h = 1e-5
    fd = (compute_Lf(system, (1.1, h), 0.0, 2.0)
          - compute_Lf(system, (1.1, -h), 0.0, 2.0)) / (2.0 * h)
    assert fd == pytest.approx(-math.sinh(2.0), rel=1e-3)


def test_ratio_is_exactly_one_on_axis():
    # same arguments, same code path: the on-axis ratio is 1 to the bit
    system = get("shear_piecewise")
    a = compute_M(system, (0.0, 0.25), 0.0, 4.0)
    b = compute_M(system, (0.0, 0.25), 0.0, 4.0)
    assert a / b == 1.0


# ---------------------------------------------------------------------------
# claim registry and reports

def test_registry_lists_fourteen_claims():
    names = claim_names()
    assert len(names) == 14
    assert len(set(names)) == 14
    assert names[0] == "rotation_identity"


def test_unknown_claim_rejected():
    with pytest.raises(LdescError, match="no claim named"):
        run_claim("no_such_claim")


def test_rotation_identity_claim_passes():
    report = run_claim("rotation_identity")
    assert report.passed
    assert report.measured["max_rel_error"] <= 1e-6
    assert report.seconds > 0.0


def test_mdp_reference_claim_passes():
    report = run_claim("mdp_reference_values")
    assert report.passed
    assert report.measured["hand_value"] == pytest.approx(2.0 + math.sqrt(2.0))


def test_basin_derivative_claim_passes():
    report = run_claim("basin_lf_derivative")
    assert report.passed
    assert report.measured["rel_error"] <= 1e-3


def test_claim_failure_becomes_report():
    def boom(cfg):
        raise NoSignChange("no boundary here")

    report = verify._run(Claim("x", "d", "t", boom), None)
    assert not report.passed
    assert report.measured == {}
    assert report.failure == "NoSignChange: no boundary here"


def test_report_serialization():
    report = VerificationReport(
        claim="c", description="d", measured={"v": 1.5}, tolerance="t",
        passed=True, seconds=0.25,
    )
    doc = report.to_dict()
    assert doc["pass"] is True
    assert doc["claim"] == "c"

    text = reports_to_json([report])
    back = json.loads(text)
    assert back[0]["measured"]["v"] == 1.5
    assert text.endswith("\n")


def test_reports_table_layout():
    reports = [
        VerificationReport("alpha", "d", {}, "tol", True, 0.1),
        VerificationReport("beta_longer", "d", {}, "tol", False, 0.2,
                           failure="NoSignChange: x"),
    ]
    table = reports_table(reports)
    lines = table.splitlines()
    assert lines[0].startswith("PASS  alpha")
    assert lines[1].startswith("FAIL  beta_longer")
    assert "[NoSignChange: x]" in lines[1]
    assert lines[2] == "1/2 claims passed"


def test_run_all_respects_selection():
    reports = run_all(["mdp_reference_values", "rotation_identity"])
    assert [r.claim for r in reports] == [
        "mdp_reference_values", "rotation_identity",
    ]
