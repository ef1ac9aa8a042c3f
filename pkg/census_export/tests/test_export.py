import json
import math

import pytest
from lamcert.bundle import load_manifold

from census_export import (
    ConeData,
    ExportError,
    ExportRequest,
    FillingError,
    RecordedBackend,
    UnknownManifoldError,
    build_bundle,
    dumps_canonical,
    export,
    parse_filling,
    record_dataset,
)
from census_export.backend import CuspData, ManifoldFacts
from census_fixtures import BAD_FILLING, GOOD_FILLINGS

ALL_FILLINGS = GOOD_FILLINGS + (BAD_FILLING,)


def test_parse_filling():
    assert parse_filling("1,-10;1,-10") == ((1, -10), (1, -10))
    assert parse_filling("3,4") == ((3, 4),)
    assert parse_filling(" 3 , 4 ; 0 , 1 ") == ((3, 4), (0, 1))


@pytest.mark.parametrize(
    "text, match",
    [
        ("", "empty filling spec"),
        (";;", "empty filling spec"),
        ("1", "must be 'p,q'"),
        ("1,2,3", "must be 'p,q'"),
        ("a,b", "must be integer"),
        ("2,4", "not primitive"),
        ("0,0", "must be nonzero"),
    ],
)
def test_parse_filling_rejects(text, match):
    with pytest.raises(ExportError, match=match):
        parse_filling(text)


def test_request_validation():
    with pytest.raises(ExportError, match="nonempty"):
        ExportRequest(name="")
    with pytest.raises(ExportError, match="not primitive"):
        ExportRequest(name="x", fillings=(((2, 4), (1, 0)),))
    with pytest.raises(ExportError, match="must be integers"):
        ExportRequest(name="x", fillings=(((1.0, 0), (1, 0)),))


@pytest.fixture(scope="module")
def exported(synth_backend):
    request = ExportRequest(name="SYNTH-W2", fillings=ALL_FILLINGS)
    return export(request, synth_backend)


def test_export_passes_loader_validation(exported, tmp_path):
    bundle, _ = exported
    # both entry points of the consumer: parsed dict and file on disk
    load_manifold(bundle)
    path = tmp_path / "m.json"
    path.write_text(dumps_canonical(bundle))
    loaded = load_manifold(path)
    assert loaded.name == "SYNTH-W2"


def test_exported_geometry(exported):
    bundle, _ = exported
    loaded = load_manifold(bundle)
    assert len(loaded.cusps) == 2
    assert loaded.cusps[0].modulus == complex(0.29, 2.47)
    assert loaded.cusps[1].area == 6.4
    assert [t.mode for t in loaded.tubes] == ["derive-from-nz", "derive-from-nz"]
    # meridian basis: unit meridian rows, linking rows for the longitudes
    assert loaded.inclusion.matrices == (((1, 0), (0, 3)), ((0, 3), (1, 0)))


def test_exported_cone_defaults(exported):
    bundle, _ = exported
    loaded = load_manifold(bundle)
    assert loaded.deepness.depth == pytest.approx(2.0 * math.log(4.0))
    assert loaded.deepness.clearance == pytest.approx(math.log(4.0))
    assert loaded.deepness.mu == 0.1
    assert loaded.deepness.mu_below_margulis is None
    assert loaded.constants.comparison_constant == 1.0
    assert loaded.constants.ell_threshold == 7.823


def test_exported_provenance(exported):
    bundle, warnings = exported
    prov = load_manifold(bundle).provenance
    assert prov["census_name"] == "SYNTH-W2"
    assert prov["exporter"]["tool"] == "census-export"
    assert prov["backend"]["tool"] == "recorded"
    assert "Seifert-framed" in prov["peripheral_basis"]["convention"]
    assert "conjugate" in prov["peripheral_basis"]["modulus"]
    assert prov["cone_data"].startswith("manual")
    entries = prov["fillings"]
    assert len(entries) == 4
    good = [e for e in entries if "error" not in e]
    assert len(good) == 3
    for entry in good:
        assert len(entry["core_lengths"]) == 2
    bad = [e for e in entries if "error" in e]
    assert bad[0]["slopes"] == [[1, 0], [1, 0]]
    assert warnings == [
        "filling 1,0;1,0: non-geometric solution: "
        "contains degenerate tetrahedra"
    ]


def test_cone_overrides(synth_backend):
    cone = ConeData(depth=3.0, twist=1.25, tube_radius=2.0)
    bundle, _ = export(ExportRequest(name="SYNTH-W2"), synth_backend, cone)
    loaded = load_manifold(bundle)
    assert loaded.deepness.depth == 3.0
    assert loaded.tubes[0].twist == 1.25
    assert loaded.tubes[0].radius_policy == ("fixed", 2.0)


def test_export_writes_file(synth_backend, tmp_path):
    out = tmp_path / "m.json"
    request = ExportRequest(name="SYNTH-W2", fillings=GOOD_FILLINGS[:1], out=out)
    bundle, _ = export(request, synth_backend)
    text = out.read_text()
    assert text == dumps_canonical(bundle)
    assert text.endswith("\n")
    # canonical form is a fixed point of parse-and-dump
    assert dumps_canonical(json.loads(text)) == text


def test_cusp_count_mismatch(synth_backend):
    request = ExportRequest(name="SYNTH-W2", fillings=(((1, -10),),))
    with pytest.raises(ExportError, match="1 slopes for 2 cusps"):
        export(request, synth_backend)


def test_unknown_name(synth_backend):
    with pytest.raises(UnknownManifoldError):
        export(ExportRequest(name="NOPE"), synth_backend)


def _facts(linking):
    return ManifoldFacts(
        name="X",
        cusps=(
            CuspData(complex(0.1, 1.5), 4.0),
            CuspData(complex(0.2, 1.6), 4.1),
        ),
        linking_matrix=linking,
        solution_type="all tetrahedra positively oriented",
    )


def test_build_bundle_rejects_bad_linking():
    with pytest.raises(ExportError, match="zero diagonal"):
        build_bundle(_facts(((1, 2), (2, 0))), ConeData(), [], {})
    with pytest.raises(ExportError, match="symmetric"):
        build_bundle(_facts(((0, 2), (3, 0))), ConeData(), [], {})
    with pytest.raises(ExportError, match="cusps x cusps"):
        build_bundle(_facts(((0,),)), ConeData(), [], {})


def test_record_dataset_roundtrip(synth_backend, tmp_path):
    out = tmp_path / "replay.json"
    request = ExportRequest(name="SYNTH-W2", fillings=ALL_FILLINGS, out=out)
    dataset, warnings = record_dataset(request, synth_backend)
    assert len(warnings) == 1
    assert out.read_text() == dumps_canonical(dataset)

    replay = RecordedBackend(out)
    assert replay.facts("SYNTH-W2") == synth_backend.facts("SYNTH-W2")
    for filling in GOOD_FILLINGS:
        assert replay.filled_cores("SYNTH-W2", filling) == (
            synth_backend.filled_cores("SYNTH-W2", filling)
        )
    # the recorded failure replays as the same per-entry error
    with pytest.raises(FillingError, match="non-geometric solution"):
        replay.filled_cores("SYNTH-W2", BAD_FILLING)
    assert replay.source["recorded_with"]["tool"] == "recorded"
