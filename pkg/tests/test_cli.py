import json
from fractions import Fraction
import xml.etree.ElementTree as ET

import pytest

from mapgerms import contour, export, recognition
from mapgerms.cli import ENV_TOLERANCES, main
from mapgerms.strata import locate


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_butterfly(capsys):
    code, out, _ = run(capsys, "classify", "--germ", "(x, x*y + y^5 + y^7)")
    assert code == 0
    assert json.loads(out)["class"] == "butterfly"


def test_classify_from_file(tmp_path, capsys):
    f = tmp_path / "germ.txt"
    f.write_text("(x, y^3 + x^3*y)\n")
    code, out, _ = run(capsys, "classify", "--input", str(f), "--criteria")
    assert code == 0
    data = json.loads(out)
    assert data["class"] == "goose" and "criteria" in data


def test_strata_beaks_lips(capsys):
    code, out, _ = run(capsys, "strata", "--unfolding", "i23", "--stratum", "beaks_lips",
                       "--y", "1", "--c", "1", "--sign", "+")
    assert code == 0
    data = json.loads(out)
    assert data["params"] == ["8", "-13", "1"]
    assert data["residual"] == "0"


def test_bad_germ_exits_2(capsys):
    code, _, err = run(capsys, "classify", "--germ", "(2x, y)")
    assert code == 2
    assert json.loads(err)["error"] == "input"


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["strata", "--stratum", "nope"])
    assert e.value.code == 2


def test_domain_error_exits_3(capsys):
    code, _, err = run(capsys, "strata", "--stratum", "beaks_lips", "--y", "1", "--c", "-5")
    assert code == 3
    diag = json.loads(err)
    assert diag["error"] == "numerical" and diag["type"] == "DomainError"


def test_sweep_too_coarse_exits_3(tmp_path, capsys):
    code, _, err = run(capsys, "caustic", "--path=-0.05,0.2;0.05,0.2", "--frames", "3",
                       "--out", str(tmp_path), "--workers", "1")
    assert code == 3
    assert json.loads(err)["error"] == "sweep_too_coarse"


def test_help_documents_environment(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--help"])
    assert e.value.code == 0
    out = capsys.readouterr().out
    for var in ENV_TOLERANCES:
        assert var in out
    assert "exit status" in out


def test_env_override_reaches_metadata(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(recognition, "FLOAT_ZERO", recognition.FLOAT_ZERO)
    monkeypatch.setattr(contour, "DOUBLE_POINT_CELLS", contour.DOUBLE_POINT_CELLS)
    monkeypatch.setattr(locate, "NEWTON_TOL", locate.NEWTON_TOL)
    monkeypatch.setenv("MAPGERMS_DOUBLE_POINT_CELLS", "7")
    monkeypatch.setenv("MAPGERMS_NEWTON_TOL", "1e-11")
    code, _, _ = run(capsys, "contour", "--germ", "(x, y^2)", "--window=-1,1,-1,1",
                     "--resolution", "64", "--out", str(tmp_path), "--format", "json")
    assert code == 0
    meta = json.loads((tmp_path / "contour.json").read_text())["metadata"]
    assert meta["tolerances"]["double_point_cells"] == 7
    assert meta["tolerances"]["newton_tol"] == 1e-11


def test_bad_env_value_exits_2(capsys, monkeypatch):
    monkeypatch.setenv("MAPGERMS_RESOLUTION", "many")
    code, _, _ = run(capsys, "classify", "--germ", "(x, y^2)")
    assert code == 2


@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_outputs_are_byte_identical(tmp_path, capsys, fmt):
    texts = []
    for k in range(2):
        out = tmp_path / str(k)
        assert run(capsys, "contour", "--unfolding", "i23", "--params", "0.001,0.001,-0.2",
                   "--resolution", "128", "--out", str(out), "--format", fmt)[0] == 0
        texts.append((out / f"contour.{fmt}").read_bytes())
    assert texts[0] == texts[1]


def test_deltoid_svg_has_three_cusp_markers(tmp_path, capsys):
    code, out, _ = run(capsys, "contour", "--unfolding", "i23", "--params", "0.001,0.001,-0.2",
                       "--resolution", "256", "--out", str(tmp_path))
    assert code == 0
    assert json.loads(out)["counts"][1] == 3
    svg = (tmp_path / "contour.svg").read_text()
    assert export.count_markers(svg, "cusp") == 3
    root = ET.fromstring(svg)
    ids = {g.get("id") for g in root.iter("{http://www.w3.org/2000/svg}g")}
    assert {"source-curve", "image-curve", "cusps", "double-points", "strata"} <= ids
    meta = json.loads(root.find("{http://www.w3.org/2000/svg}metadata").text)
    assert {"version", "tolerances", "window"} <= set(meta)


def test_section_svg_markers(tmp_path, capsys):
    code, out, _ = run(capsys, "section", "--c", "1", "--out", str(tmp_path))
    assert code == 0
    svg = (tmp_path / "section.svg").read_text()
    assert export.count_markers(svg, "goose") == 2
    assert export.count_markers(svg, "butterfly") == 2


def test_empty_svg_is_valid():
    root = ET.fromstring(export.empty_svg())
    assert not list(root.iter("{http://www.w3.org/2000/svg}polyline"))
    assert export.count_markers(export.empty_svg(), "cusp") == 0


def test_crosscap_table_round_trip(tmp_path, capsys):
    from mapgerms.geometry import CrosscapFamily, characteristic_curves
    from mapgerms.jets import Jet

    code, out, _ = run(capsys, "crosscap", "--t", "1/10", "--format", "json", "--out", str(tmp_path))
    assert code == 0
    data = json.loads((tmp_path / "crosscap.json").read_text())
    assert [c["order"] for c in data["contact"]] == [3, 3]
    p, f = characteristic_curves(CrosscapFamily.typical(), Fraction(1, 10))
    assert Jet.from_json(data["curves"]["parabolic"]["table"]["poly"]) == p.poly
    assert Jet.from_json(data["curves"]["flecnodal"]["table"]["poly"]) == f.poly


def test_sweep_export(tmp_path, capsys):
    code, out, _ = run(capsys, "caustic", "--path=-0.012,0.2;0.012,0.2", "--frames", "6", "--resolution", "128",
                       "--out", str(tmp_path), "--format", "json", "--workers", "1")
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["crossings.json"] + [f"frame_{k:03d}.json" for k in range(6)]
    log = json.loads((tmp_path / "crossings.json").read_text())
    assert len(log["counts"]) == 6


def test_validate_only(tmp_path, capsys):
    code, out, err = run(capsys, "validate", "--only", "2", "--out", str(tmp_path))
    assert code == 0
    report = json.loads(out)
    assert report["passed"]
    assert [c["name"].split()[0] for c in report["checks"]] == ["2"]
    assert "[PASS]" in err
    assert (tmp_path / "validate.json").exists()
