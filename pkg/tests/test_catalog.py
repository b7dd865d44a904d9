"""Tests for catalog persistence and re-validation."""

import math

import pytest

from polypulse import CatalogEntry, CatalogError, ProfileClass, PulseTrain, load_catalog, save_catalog
from polypulse.catalog import builtin_catalog_path, revalidate, serialize_entry

PI = math.pi


def pi_pulse_entry(id_="demo-pi"):
    return CatalogEntry(
        id=id_,
        train=PulseTrain.from_detunings(PI, [0.0]),
        target_p=1.0,
        profile_class=ProfileClass.BROADBAND,
        method="derivative",
        provenance="derived",
        center_p=1.0,
        center_tol=1e-6,
    )


def test_builtin_catalog_loads_and_revalidates():
    entries = load_catalog(builtin_catalog_path(), validate=True)
    assert len(entries) == 14
    ids = {e.id for e in entries}
    assert {"BB-X3-deriv", "BB-X4", "NB-X7", "PB-X8", "2D-X2", "2D-X4"} <= ids
    for e in entries:
        assert e.provenance == "literature"


def test_round_trip_is_bitwise_stable(tmp_path):
    entries = [pi_pulse_entry(f"e{k}") for k in range(20)]
    p1, p2 = tmp_path / "a.txt", tmp_path / "b.txt"
    save_catalog(entries, p1)
    loaded = load_catalog(p1, validate=False)
    save_catalog(loaded, p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert [e.id for e in loaded] == [e.id for e in entries]


def test_unknown_field_rejected(tmp_path):
    path = tmp_path / "c.txt"
    text = serialize_entry(pi_pulse_entry()) + "\nbogus_field: 1\n"
    path.write_text("# polypulse catalog v1\n\n" + text)
    with pytest.raises(CatalogError, match="unknown field 'bogus_field'"):
        load_catalog(path)


def test_duplicate_field_rejected(tmp_path):
    path = tmp_path / "d.txt"
    text = serialize_entry(pi_pulse_entry()) + "\nrabi: 1\n"
    path.write_text("# polypulse catalog v1\n\n" + text)
    with pytest.raises(CatalogError, match="duplicate field 'rabi'"):
        load_catalog(path)


def test_missing_header_rejected(tmp_path):
    path = tmp_path / "e.txt"
    path.write_text(serialize_entry(pi_pulse_entry()) + "\n")
    with pytest.raises(CatalogError, match="first line"):
        load_catalog(path)


def test_malformed_line_reports_line_number(tmp_path):
    path = tmp_path / "f.txt"
    path.write_text("# polypulse catalog v1\n\nthis is not a record\n")
    with pytest.raises(CatalogError, match="line 3"):
        load_catalog(path)


def test_junk_train_rejected(tmp_path):
    # declared antisymmetric but the detunings are not
    path = tmp_path / "g.txt"
    path.write_text(
        "# polypulse catalog v1\n\n"
        "id: junk\nprovenance: derived\nprofile_class: broadband\nmethod: cost\n"
        "symmetry: antisymmetric\ntarget_p: 1\nunit: pi/T\nrabi: 0.5\n"
        "detunings: 0.3, 0.4\ncenter_p: 1\ncenter_tol: 0.01\n"
    )
    with pytest.raises(CatalogError, match="invalid train"):
        load_catalog(path, validate=False)


def test_unit_tag_mandatory(tmp_path):
    path = tmp_path / "h.txt"
    text = serialize_entry(pi_pulse_entry()).replace("unit: pi/T\n", "")
    path.write_text("# polypulse catalog v1\n\n" + text + "\n")
    with pytest.raises(CatalogError, match="unit"):
        load_catalog(path)


def test_revalidation_failure_detected(tmp_path):
    bad = CatalogEntry(
        id="bad-center",
        train=PulseTrain.from_detunings(PI, [0.0]),
        target_p=1.0,
        profile_class=ProfileClass.BROADBAND,
        method="cost",
        provenance="derived",
        center_p=0.5,  # wrong on purpose
        center_tol=1e-3,
    )
    ok, detail = revalidate(bad)
    assert not ok
    assert "center" in detail
    path = tmp_path / "i.txt"
    save_catalog([bad], path)
    with pytest.raises(CatalogError, match="failed re-validation"):
        load_catalog(path, validate=True)


def test_default_catalog_env_override(tmp_path, monkeypatch):
    from polypulse.catalog import default_catalog_path

    monkeypatch.setenv("POLYPULSE_CATALOG", str(tmp_path / "x.txt"))
    assert default_catalog_path() == str(tmp_path / "x.txt")
    monkeypatch.delenv("POLYPULSE_CATALOG")
    assert str(default_catalog_path()).endswith("builtin_catalog.txt")
