import json

import pytest

from lamcert.bundle import parse_real
from lamcert.cli import main
from lamcert.verify import SuiteReport


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_slope_command_human(capsys, knot_bundle_path):
    code, out, _ = run(
        capsys, "slope", "--manifold", str(knot_bundle_path), "--slope", "3,4"
    )
    assert code == 0
    assert "slope (3, 4)" in out
    assert "length 5" in out
    assert "total normalized length: 5" in out


def test_slope_command_json(capsys, knot_bundle_path):
    code, out, _ = run(
        capsys, "slope", "--manifold", str(knot_bundle_path), "--slope", "3,4",
        "--json",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "slope-lengths"
    (row,) = doc["cusps"]
    assert row["p"] == 3 and row["q"] == 4
    assert parse_real(row["length"], "length") == pytest.approx(5.0, rel=1e-12)


def test_slope_malformed_input(capsys, knot_bundle_path):
    code, _, err = run(
        capsys, "slope", "--manifold", str(knot_bundle_path), "--slope", "2,4"
    )
    assert code == 2
    assert "error:" in err


def test_nz_by_ell(capsys):
    code, out, _ = run(capsys, "nz", "--ell", "10")
    assert code == 0
    assert "0.0540861264" in out and "0.0882222031" in out


def test_nz_below_threshold_exits_3(capsys):
    code, _, err = run(capsys, "nz", "--ell", "5")
    assert code == 3
    assert "7.823" in err


def test_nz_from_manifold_slope(capsys, knot_bundle_path):
    code, out, _ = run(
        capsys, "nz", "--manifold-slope", str(knot_bundle_path), "9,40"
    )
    assert code == 0
    assert "ell = 41" in out


def test_nz_flags_are_exclusive(knot_bundle_path):
    with pytest.raises(SystemExit):
        main(["nz", "--ell", "10", "--manifold-slope", str(knot_bundle_path), "1,0"])


def test_certify_command(capsys, family_bundle_path, tmp_path):
    out_file = tmp_path / "report.json"
    code, out, _ = run(
        capsys,
        "certify",
        "--manifold", str(family_bundle_path),
        "--slope", "0,1;1,0",
        "--surgery-class", "alpha",
        "--out", str(out_file),
    )
    assert code == 0
    assert "verdict: hypotheses-failed" in out
    assert f"report written to {out_file}" in out
    doc = json.loads(out_file.read_text())
    assert doc["kind"] == "certification-report"
    assert doc["verdict"] == "hypotheses-failed"
    assert doc["dichotomy"] == "no conclusion certified for this filling"


def test_certify_constant_override(capsys, family_bundle_path):
    code, out, _ = run(
        capsys,
        "certify",
        "--manifold", str(family_bundle_path),
        "--slope", "0,1;1,0",
        "--surgery-class", "alpha",
        "-C", "comparison_constant=2.5",
        "--json",
    )
    assert code == 0
    doc = json.loads(out)
    assert parse_real(doc["assumptions"]["comparison_constant"], "c") == 2.5
    # alpha has Thurston norm 2, so the conditional upper bound doubles
    assert parse_real(doc["thick_upper"], "u") == pytest.approx(5.0)


def test_certify_bad_override(capsys, family_bundle_path):
    for override in ("nope=1.0", "comparison_constant", "ell_threshold=x"):
        code, _, err = run(
            capsys,
            "certify",
            "--manifold", str(family_bundle_path),
            "--slope", "0,1;1,0",
            "--surgery-class", "alpha",
            "-C", override,
        )
        assert code == 2
        assert "error:" in err


def test_certify_unknown_class(capsys, family_bundle_path):
    code, _, err = run(
        capsys,
        "certify",
        "--manifold", str(family_bundle_path),
        "--slope", "0,1;1,0",
        "--surgery-class", "ghost",
    )
    assert code == 2
    assert "no class named" in err


def test_family_command(capsys, family_bundle_path):
    code, out, _ = run(capsys, "family", "--manifold", str(family_bundle_path))
    assert code == 0
    assert "threshold: criterion holds for every n > 39" in out
    assert "symmetric cusps" in out
    assert out.count("certified-cores") == 11


def test_family_command_json(capsys, family_bundle_path):
    code, out, _ = run(
        capsys, "family", "--manifold", str(family_bundle_path), "--json"
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "family-table"
    assert doc["threshold"]["value"] == 39
    assert len(doc["rows"]) == 51


def test_family_without_family_block(capsys, knot_bundle_path):
    code, _, err = run(capsys, "family", "--manifold", str(knot_bundle_path))
    assert code == 2
    assert "declares no family" in err


def test_missing_bundle_file(capsys):
    code, _, err = run(capsys, "slope", "--manifold", "no_such.json", "--slope", "1,0")
    assert code == 2
    assert "cannot read" in err


def test_verify_tubes_single_suite(capsys):
    code, out, _ = run(
        capsys, "verify-tubes", "--suite", "projection", "--samples", "20",
        "--seed", "5",
    )
    assert code == 0
    assert "projection: 20 checked, 0 violations" in out


def test_verify_tubes_parallel_matches_serial(capsys):
    code1, out1, _ = run(
        capsys, "verify-tubes", "--suite", "projection", "--samples", "10",
        "--jobs", "2", "--json",
    )
    assert code1 == 0
    doc = json.loads(out1)
    (suite,) = doc["suites"]
    assert suite["checked"] == 10
    assert suite["notes"]["chunks"] == [0, 1]


def test_verify_tubes_bad_args(capsys):
    code, _, err = run(capsys, "verify-tubes", "--samples", "0")
    assert code == 2
    assert "samples" in err


def test_verify_tubes_reports_violations_with_exit_4(capsys, monkeypatch):
    import lamcert.verify as verify

    def rigged(seed, samples):
        return SuiteReport("projection", seed, samples, samples, 1, -0.5)

    monkeypatch.setitem(verify.SUITES, "projection", rigged)
    code, out, _ = run(
        capsys, "verify-tubes", "--suite", "projection", "--samples", "3"
    )
    assert code == 4
    assert "1 violations" in out


def test_unknown_command():
    with pytest.raises(SystemExit):
        main(["frobnicate"])
