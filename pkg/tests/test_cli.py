import csv
import io
import json

import pytest

from lattice_billiards.cli import EXIT_CHECK_FAILED, EXIT_ORACLE, EXIT_USAGE, OUTDIR_ENV, run


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_table5_k_dirichlet(capsys, table5_printed):
    code, out, _ = _run(capsys, "spectrum", "--domain", "k-tetra", "--bc", "dirichlet", "--count", "40", "--table5")
    assert code == 0
    assert [int(x) for x in out.split()] == table5_printed["k-tetra/dirichlet"]["av"]


def test_table5_all_columns_csv(capsys, table5_printed):
    code, out, _ = _run(capsys, "spectrum", "--table5", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    header, body = rows[0], rows[1:]
    assert len(body) == 40
    for j, name in enumerate(header[1:], start=1):
        key = name.replace(":", "/")
        assert [int(r[j]) for r in body] == table5_printed[key]["av"]


def test_spectrum_times4_csv(capsys):
    code, out, _ = _run(capsys, "spectrum", "--domain", "k4-tetra", "--bc", "dirichlet", "--count", "5", "--times4", "--format", "csv")
    assert code == 0
    assert [int(r.split(",")[1]) for r in out.splitlines()[1:]] == [56, 84, 104, 116, 120]


def test_spectrum_json(capsys):
    code, out, _ = _run(capsys, "spectrum", "--domain", "cube", "--bc", "neumann", "--count", "3", "--format", "json")
    doc = json.loads(out)
    assert doc["levels"][0]["energy"] == 1 and doc["levels"][0]["multiplicity"] == 3


def test_degeneracies_square(capsys):
    code, out, _ = _run(capsys, "degeneracies", "--domain", "square", "--max", "65")
    assert code == 0
    lines = {l.split(":")[0].strip(): l for l in out.splitlines()}
    assert "(1,7)" in lines["50"] and "(5,5)" in lines["50"] and "accidental" in lines["50"]
    assert "(1,8)" in lines["65"] and "(4,7)" in lines["65"] and "accidental" in lines["65"]
    assert "accidental" not in lines["25"]


def test_genus(capsys):
    assert _run(capsys, "genus", "--angles", "1/3,2/3,1/3,2/3")[1].strip() == "2"
    code, out, _ = _run(capsys, "genus", "--angles", "1/2,1/4,1/4", "--format", "json")
    assert json.loads(out) == {"angles": ["1/2", "1/4", "1/4"], "genus": 1, "integrable": True}


def test_orbit_verify(capsys):
    code, out, _ = _run(capsys, "orbit", "--domain", "square", "--label", "3,2", "--start", "0.6666666666666666,0.3333333333333333", "--verify", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["bounces"] == 10 and doc["amplitude_squared"] == 13 and doc["oracle"] == "periodic"


def test_orbit_oracle_disagreement_exit_code(capsys):
    code, out, _ = _run(capsys, "orbit", "--domain", "k-tetra", "--label", "1,1,2", "--verify")
    assert code == EXIT_ORACLE
    assert "disagreement" in out


def test_orbit_terminal_exit_code(capsys):
    code, _, err = _run(capsys, "orbit", "--domain", "square", "--label", "1,1", "--start", "0.5,0.5")
    assert code == EXIT_CHECK_FAILED
    assert "terminal" in err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["nonsense"],
        ["orbit", "--domain", "square"],
        ["orbit", "--domain", "rhombus", "--label", "1,1"],
        ["orbit", "--domain", "square", "--label", "a,b"],
        ["spectrum", "--domain", "square", "--bc", "robin"],
        ["spectrum", "--bc", "dirichlet"],
        ["genus", "--angles", "1/3,1/3,1/2"],
        ["solve", "--domain", "square", "--resolution", "10"],
        ["solve"],
        ["render", "--domain", "square"],
    ],
)
def test_usage_errors(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == EXIT_USAGE
    assert err


def test_verify_reductions_json(capsys):
    code, out, _ = _run(capsys, "verify", "--suite", "reductions", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] and len(doc["checks"]) == 5


def test_verify_oracle_3d_reports_disagreement(capsys):
    code, out, _ = _run(capsys, "verify", "--suite", "oracle", "--dims", "3d")
    assert code == EXIT_ORACLE
    assert "[FAIL]" in out


def test_verify_oracle_2d_passes(capsys):
    code, out, _ = _run(capsys, "verify", "--suite", "oracle", "--dims", "2d")
    assert code == 0
    assert "[PASS]" in out


def test_solve_square_csv(capsys):
    code, out, _ = _run(capsys, "solve", "--domain", "square", "--resolution", "64", "--k", "3", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["analytic"]) for r in rows] == [2, 5, 5]
    assert all(float(r["relative_error"]) < 1e-3 for r in rows)


def test_solve_mesh_dump_under_outdir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(OUTDIR_ENV, str(tmp_path))
    code, _, err = _run(capsys, "solve", "--domain", "right-isosceles", "--dofs", "1000", "--k", "2", "--mesh-dump", "mesh.txt")
    assert code == 0
    assert (tmp_path / "mesh.txt").read_text().startswith("# simplicial mesh dim=2")


def test_render_writes_under_outdir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(OUTDIR_ENV, str(tmp_path))
    code, out, _ = _run(capsys, "render", "--domain", "equilateral", "--label", "1,9;5,6", "--panels")
    assert code == 0
    path = tmp_path / "equilateral_19_56.svg"
    assert out.strip() == str(path)
    first = path.read_bytes()
    _run(capsys, "render", "--domain", "equilateral", "--label", "1,9", "--label", "5,6", "--panels")
    assert path.read_bytes() == first


def test_render_3d_container(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(OUTDIR_ENV, str(tmp_path))
    code, out, _ = _run(capsys, "render", "--domain", "k-tetra", "--label", "1,1,1", "--container", "-o", "k.obj")
    assert code == 0
    assert "o container" in (tmp_path / "k.obj").read_text()


def test_catalog_json(capsys):
    code, out, _ = _run(capsys, "catalog")
    assert code == 0 and len(json.loads(out)) == 8


def test_output_is_reproducible(capsys):
    a = _run(capsys, "degeneracies", "--domain", "equilateral", "--max", "200", "--format", "json")[1]
    b = _run(capsys, "degeneracies", "--domain", "equilateral", "--max", "200", "--format", "json")[1]
    assert a == b
