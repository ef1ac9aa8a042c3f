import sys

import pytest
from lamcert.bundle import load_manifold

from census_export.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_export_with_fillings(capsys, synth_path, tmp_path):
    out_path = tmp_path / "m.json"
    code, out, err = run(
        capsys,
        "export",
        "--name",
        "SYNTH-W2",
        "--fill",
        "1,-10;1,-10",
        "--fill",
        "1,0;1,0",
        "--out",
        str(out_path),
        "--backend",
        str(synth_path),
    )
    assert code == 0
    assert out == f"bundle written to {out_path}\n"
    assert err == (
        "warning: filling 1,0;1,0: non-geometric solution: "
        "contains degenerate tetrahedra\n"
    )
    loaded = load_manifold(out_path)
    assert loaded.name == "SYNTH-W2"
    assert len(loaded.provenance["fillings"]) == 2


def test_export_cone_flags(capsys, synth_path, tmp_path):
    out_path = tmp_path / "m.json"
    code, _, _ = run(
        capsys,
        "export",
        "--name",
        "SYNTH-W2",
        "--out",
        str(out_path),
        "--backend",
        str(synth_path),
        "--depth",
        "3.5",
        "--mu",
        "0.2",
        "--twist",
        "1.25",
        "--tube-radius",
        "2.0",
    )
    assert code == 0
    loaded = load_manifold(out_path)
    assert loaded.deepness.depth == 3.5
    assert loaded.deepness.mu == 0.2
    assert loaded.tubes[1].twist == 1.25
    assert loaded.tubes[1].radius_policy == ("fixed", 2.0)


def test_unknown_name_exits_2(capsys, synth_path, tmp_path):
    code, out, err = run(
        capsys,
        "export",
        "--name",
        "NOPE",
        "--out",
        str(tmp_path / "m.json"),
        "--backend",
        str(synth_path),
    )
    assert code == 2
    assert out == ""
    assert err.startswith("error: dataset has no manifold named 'NOPE'")


def test_bad_filling_exits_2(capsys, synth_path, tmp_path):
    code, _, err = run(
        capsys,
        "export",
        "--name",
        "SYNTH-W2",
        "--fill",
        "2,4;1,0",
        "--out",
        str(tmp_path / "m.json"),
        "--backend",
        str(synth_path),
    )
    assert code == 2
    assert "not primitive" in err


def test_default_backend_is_snappy(capsys, monkeypatch, tmp_path):
    # force the import failure even on machines that have snappy
    monkeypatch.setitem(sys.modules, "snappy", None)
    code, _, err = run(
        capsys, "export", "--name", "SYNTH-W2", "--out", str(tmp_path / "m.json")
    )
    assert code == 2
    assert "snappy is not installed" in err


def test_missing_dataset_exits_2(capsys, tmp_path):
    code, _, err = run(
        capsys,
        "export",
        "--name",
        "SYNTH-W2",
        "--out",
        str(tmp_path / "m.json"),
        "--backend",
        str(tmp_path / "absent.json"),
    )
    assert code == 2
    assert "cannot read dataset file" in err


def test_out_is_required(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["export", "--name", "SYNTH-W2"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_record_then_export(capsys, synth_path, tmp_path):
    dataset_path = tmp_path / "replay.json"
    code, out, err = run(
        capsys,
        "record",
        "--name",
        "SYNTH-W2",
        "--fill",
        "1,-10;1,-10",
        "--fill",
        "1,0;1,0",
        "--out",
        str(dataset_path),
        "--backend",
        str(synth_path),
    )
    assert code == 0
    assert out == f"dataset written to {dataset_path}\n"
    assert "warning: filling 1,0;1,0" in err

    out_path = tmp_path / "m.json"
    code, _, err = run(
        capsys,
        "export",
        "--name",
        "SYNTH-W2",
        "--fill",
        "1,-10;1,-10",
        "--fill",
        "1,0;1,0",
        "--out",
        str(out_path),
        "--backend",
        str(dataset_path),
    )
    assert code == 0
    # the replayed export reports the same core data and the same failure
    assert "warning: filling 1,0;1,0" in err
    entries = load_manifold(out_path).provenance["fillings"]
    direct = tmp_path / "direct.json"
    run(
        capsys,
        "export",
        "--name",
        "SYNTH-W2",
        "--fill",
        "1,-10;1,-10",
        "--fill",
        "1,0;1,0",
        "--out",
        str(direct),
        "--backend",
        str(synth_path),
    )
    assert load_manifold(direct).provenance["fillings"] == entries
