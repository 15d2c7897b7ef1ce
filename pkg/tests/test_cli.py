import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from vtlimits.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, analyze_graph, main
from vtlimits.families import FamilySpec
from vtlimits.graph import dumps_vtg, read_vtg, star_graph, write_vtg
from vtlimits.metric import diameter


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    report = json.loads(out) if out.strip() else None
    return code, report, err


def test_build_counts(tmp_path, capsys):
    cases = [("heisenberg", 8, 512, None), ("cyclic", 3, 3, 3), ("torus-2", 10, 100, 200)]
    for family, n, vertices, edges in cases:
        out = tmp_path / f"{family}.vtg"
        code, rep, _ = run(capsys, "build", "--family", family, "--n", n, "-o", out)
        assert code == EXIT_OK and rep["summary"]["vertices"] == vertices
        if edges is not None:
            assert rep["summary"]["edges"] == edges
        assert read_vtg(out).n == vertices
    assert rep["summary"]["max_degree"] == 4


def test_build_round_trip(tmp_path, capsys):
    out = tmp_path / "h.vtg"
    run(capsys, "build", "--family", "heisenberg", "--n", 4, "--out", out)
    g = FamilySpec.parse("heisenberg").graph(4)
    assert read_vtg(out).same_as(g)
    assert out.read_text() == dumps_vtg(g)


def test_build_errors(tmp_path, capsys):
    assert run(capsys, "build", "--family", "nonsense", "--n", 5)[0] == EXIT_INPUT
    assert run(capsys, "build", "--family", "cyclic", "--n", "x")[0] == EXIT_INPUT
    assert run(capsys, "build", "--family", "cyclic", "--n", "3,4")[0] == EXIT_INPUT
    assert run(capsys, "build", "--family", "heisenberg", "--n", 30, "--budget", 100,
               "-o", tmp_path / "x.vtg")[0] == EXIT_INPUT
    assert run(capsys, "build")[0] == EXIT_INPUT


def test_analyze_cycle(tmp_path, capsys):
    out = tmp_path / "a.json"
    code, rep, _ = run(capsys, "analyze", "--family", "cyclic", "--n", 100, "-o", out)
    assert code == EXIT_OK
    bundle = json.loads(out.read_text())
    assert bundle["diameter"] == 50 and bundle["caret"]["R"] == 0
    assert rep["summary"]["diameter"] == 50
    assert set(bundle) >= {"growth", "doubling", "fat_triangle", "line_defect"}


def test_analyze_star_file(tmp_path, capsys):
    g = tmp_path / "star.vtg"
    write_vtg(star_graph(3), g)
    out = tmp_path / "s.json"
    code, _, _ = run(capsys, "analyze", g, "-o", out)
    assert code == EXIT_OK
    assert json.loads(out.read_text())["caret"]["R"] == 1


def test_analyze_heisenberg_growth(tmp_path, capsys):
    out = tmp_path / "h.json"
    run(capsys, "analyze", "--family", "heisenberg", "--n", 8, "-o", out)
    bundle = json.loads(out.read_text())
    sizes = bundle["growth"]["sizes"]
    assert sizes[-1] == 512
    # frozen fit over radii 1..D/2 from the BFS profile; the asymptotic
    # exponent 4 is not reached at this size
    assert bundle["growth"]["exponent_fit"] == pytest.approx(2.3509, abs=1e-3)


def test_analyze_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.vtg"
    bad.write_text("this is not a graph\n")
    assert run(capsys, "analyze", bad)[0] == EXIT_INPUT
    assert run(capsys, "analyze", tmp_path / "missing.vtg")[0] == EXIT_INPUT
    assert run(capsys, "analyze")[0] == EXIT_INPUT


def test_certify_cyclic_pass(tmp_path, capsys):
    out = tmp_path / "c.csv"
    code, rep, err = run(capsys, "certify", "--family", "cyclic", "--model", "circle",
                         "--n", "50,100,200,400", "--tol", 0.1, "-o", out)
    assert code == EXIT_OK and "PASS" in err
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 4
    for row, n in zip(rows, (50, 100, 200, 400)):
        assert float(row["gh_upper"]) <= 4 / n


def test_certify_torus_pass(tmp_path, capsys):
    code, rep, _ = run(capsys, "certify", "--family", "torus-2", "--model", "l1-torus-2",
                       "--n", "20,40", "-o", tmp_path / "t.csv")
    assert code == EXIT_OK and rep["summary"]["passed"]


def test_certify_random_regular_fails(tmp_path, capsys):
    code, rep, err = run(capsys, "certify", "--family", "random-3-regular", "--model", "circle",
                         "--n", "64,128", "-o", tmp_path / "r.csv")
    assert code == EXIT_FAIL and "FAIL stage=" in err


def test_certify_tolerance_fail(tmp_path, capsys):
    code, rep, err = run(capsys, "certify", "--family", "cyclic", "--model", "circle",
                         "--n", "50,100", "--tol", 1e-4, "-o", tmp_path / "c.csv")
    assert code == EXIT_FAIL and not rep["summary"]["passed"]


def test_certify_bad_model(capsys):
    assert run(capsys, "certify", "--family", "cyclic", "--model", "sphere",
               "--n", "10")[0] == EXIT_INPUT


def test_reports_are_byte_identical(tmp_path, capsys):
    outputs = []
    for _ in range(2):
        out = tmp_path / "a.json"
        main(["analyze", "--family", "random-3-regular", "--n", "64", "--seed", "3",
              "-o", str(out)])
        outputs.append((capsys.readouterr().out, out.read_bytes()))
    assert outputs[0] == outputs[1]


def test_discretize_command(tmp_path, capsys):
    angles = 2 * np.pi * np.arange(200) / 200
    sample = tmp_path / "circle.csv"
    sample.write_text("id,theta\n" + "".join(f"{i},{float(a)!r}\n" for i, a in enumerate(angles)))
    out = tmp_path / "net.vtg"
    code, rep, _ = run(capsys, "discretize", "--sample", sample, "--metric", "circle",
                       "--t", 0.1, "-o", out)
    assert code == EXIT_OK and rep["summary"]["connected"]
    assert rep["summary"]["multiplicative"] <= 4
    assert read_vtg(out).n == rep["summary"]["net_points"]


def test_discretize_disconnected(tmp_path, capsys):
    sample = tmp_path / "two.csv"
    sample.write_text("0,0,0\n1,0.01,0\n2,5,0\n3,5.01,0\n")
    code, rep, err = run(capsys, "discretize", "--sample", sample, "--metric", "euclidean",
                         "--t", 0.1, "-o", tmp_path / "n.vtg")
    assert code == EXIT_FAIL and not rep["summary"]["connected"]
    assert run(capsys, "discretize", "--sample", sample, "--metric", "euclidean",
               "--t", -1)[0] == EXIT_INPUT


def test_console_entry_point(tmp_path):
    out = tmp_path / "c.vtg"
    proc = subprocess.run([sys.executable, "-m", "vtlimits.cli", "build", "--family", "cyclic",
                           "--n", "7", "-o", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["outputs"]["graph"] == str(out)


def test_analyze_graph_direct():
    g = FamilySpec.parse("torus-2").graph(8)
    bundle = analyze_graph(g)
    assert bundle["diameter"] == diameter(g) == 8
