"""End-to-end tests of the command-line interface."""

import pytest

from polypulse.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["derive"])  # missing required flags
    assert exc.value.code == 2


def test_repro_line_echoed(capsys):
    code, out = run(["catalog", "list"], capsys)
    assert code == 0
    assert out.startswith("# run: polypulse catalog list")


def test_catalog_list_and_show(capsys):
    code, out = run(["catalog", "list"], capsys)
    assert code == 0
    assert "BB-X3-deriv" in out and "2D-X4" in out
    code, out = run(["catalog", "show", "--id", "BB-X4"], capsys)
    assert code == 0
    assert "unit: pi/T" in out
    code, _ = run(["catalog", "show", "--id", "nope"], capsys)
    assert code == 1


def test_profile_center_value(tmp_path, capsys):
    out_csv = tmp_path / "x3.csv"
    code, _ = run(["profile", "--id", "BB-X3-deriv", "--out", str(out_csv)], capsys)
    assert code == 0
    for line in out_csv.read_text().splitlines():
        if line.startswith("0,"):
            assert abs(float(line.split(",")[1]) - 1.0) < 2e-3
            break
    else:
        pytest.fail("no eps=0 row in CSV")


def test_profile_renders_figure(tmp_path, capsys):
    out_csv, out_png = tmp_path / "p.csv", tmp_path / "p.png"
    code, _ = run(
        ["profile", "--id", "NB-X7", "--out", str(out_csv), "--fig", str(out_png)],
        capsys,
    )
    assert code == 0
    assert out_png.stat().st_size > 0
    assert out_png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_profile_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["profile", "--id", "BB-H4", "--out", str(a)], capsys)[0] == 0
    assert run(["profile", "--id", "BB-H4", "--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_profile2d_output(tmp_path, capsys):
    out_csv = tmp_path / "x2.csv"
    code, _ = run(
        [
            "profile2d", "--id", "2D-X2", "--eps-step", "0.25",
            "--delta-step", "0.5", "--out", str(out_csv),
        ],
        capsys,
    )
    assert code == 0
    lines = out_csv.read_text().splitlines()
    assert lines[1] == "eps,delta,p"
    assert len(lines) == 2 + 9 * 9


def test_unknown_id_exits_1(tmp_path, capsys):
    code, _ = run(["profile", "--id", "nope", "--out", str(tmp_path / "x.csv")], capsys)
    assert code == 1


def test_validate_entry(capsys):
    code, out = run(["validate", "--id", "BB-X5-deriv"], capsys)
    assert code == 0
    assert "ok" in out


def test_derive_writes_catalog(tmp_path, capsys):
    out = tmp_path / "derived.txt"
    code, text = run(
        ["derive", "--target", "1", "--n", "1", "--seeds", "25",
         "--rng-seed", "3", "--out", str(out)],
        capsys,
    )
    assert code == 0
    assert "unit=pi/T" in text
    from polypulse.catalog import load_catalog

    entries = load_catalog(out, validate=True)
    assert entries
    assert all(e.provenance == "derived" for e in entries)


def test_simulate_writes_headers(tmp_path, capsys):
    out = tmp_path / "sim.csv"
    code, _ = run(
        ["simulate", "--id", "BB-X3-deriv", "--eps-step", "0.5",
         "--rng-seed", "1", "--out", str(out)],
        capsys,
    )
    assert code == 0
    text = out.read_text()
    for key in ("# t1=", "# t2=", "# readout=", "# shots="):
        assert key in text
