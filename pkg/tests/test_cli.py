from __future__ import annotations

import json

import pytest

from rectipoly.cli import main


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def oct_obj(tmp_path, capsys):
    path = tmp_path / "oct.obj"
    assert run(["build", "octopus", "--L", 3, "--out", path], capsys)[0] == 0
    return path


def test_build_octopus(oct_obj):
    lines = oct_obj.read_text().splitlines()
    assert sum(1 for line in lines if line.startswith("v ")) == 30
    assert sum(1 for line in lines if line.startswith("f ")) == 42


def test_build_cube_to_stdout(capsys):
    code, out, _ = run(["build", "cube", "--size", 1], capsys)
    assert code == 0
    assert sum(1 for line in out.splitlines() if line.startswith("v ")) == 8


@pytest.mark.parametrize("model", ["frame-torus", "octopus-cubes", "star:rgrg"])
def test_build_other_models(model, capsys):
    code, out, _ = run(["build", model, "--seed", 1], capsys)
    assert code == 0 and out.startswith("v ")


def test_build_unrealizable_star(capsys):
    code, _, err = run(["build", "star:rggg", "--seed", 1], capsys)
    assert code == 3
    assert "UnrealizablePattern" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["build", "dodecahedron"],
        ["build", "octopus", "--L", 1.2],
        ["build", "star:rxg"],
    ],
)
def test_build_bad_input(argv, capsys):
    assert run(argv, capsys)[0] == 2


@pytest.mark.parametrize("argv", [["build", "cube", "--size", -1], ["frobnicate"], ["lemma-sweep", "--degrees", "9..4"]])
def test_argparse_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main([str(a) for a in argv])
    assert info.value.code == 2


def test_analyze_octopus(oct_obj, tmp_path, capsys):
    report = tmp_path / "r.json"
    code, out, _ = run(["analyze", oct_obj, "--json", report], capsys)
    assert code == 0
    assert "genus=7" in out and "certificate: Fail (84 red edges)" in out
    data = json.loads(report.read_text())
    assert data["topology"]["genus"] == 7 and data["certificate"]["red_edge_count"] == 84


def test_analyze_controls(tmp_path, capsys):
    for model, genus in (("cube", 0), ("frame-torus", 1)):
        path = tmp_path / f"{model}.obj"
        run(["build", model, "--out", path], capsys)
        code, out, _ = run(["analyze", path], capsys)
        assert code == 0
        assert f"genus={genus}" in out and "certificate: Pass" in out and "red graph: empty" in out


def test_analyze_parse_error(tmp_path, capsys):
    path = tmp_path / "bad.obj"
    path.write_text("v 0 0 0\nf 0 1 2\n")
    code, _, err = run(["analyze", path], capsys)
    assert code == 2 and "line 2" in err


def test_analyze_missing_file(tmp_path, capsys):
    assert run(["analyze", tmp_path / "nope.obj"], capsys)[0] == 2


def test_analyze_non_manifold(tmp_path, capsys):
    path = tmp_path / "open.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 3 2\nf 1 2 4\n")
    code, _, err = run(["analyze", path], capsys)
    assert code == 4 and "NonManifoldEdge" in err


def test_env_tolerance(oct_obj, tmp_path, capsys, monkeypatch):
    report = tmp_path / "r.json"
    monkeypatch.setenv("RECTIPOLY_TOL", "1e-7")
    assert run(["analyze", oct_obj, "--json", report], capsys)[0] == 0
    assert json.loads(report.read_text())["tolerances"]["rectilinear"] == 1e-7
    # an explicit flag wins over the environment
    assert run(["analyze", oct_obj, "--tol", "1e-8", "--json", report], capsys)[0] == 0
    assert json.loads(report.read_text())["tolerances"]["rectilinear"] == 1e-8
    monkeypatch.setenv("RECTIPOLY_TOL", "loose")
    assert run(["analyze", oct_obj], capsys)[0] == 2


def test_unfold_cube(tmp_path, capsys):
    path = tmp_path / "cube.obj"
    svg = tmp_path / "cube.svg"
    run(["build", "cube", "--out", path], capsys)
    code, out, _ = run(["unfold", path, "--svg", svg], capsys)
    assert code == 0 and out.splitlines()[0] == "Simple"
    assert svg.read_text().count("<polygon") == 6


def test_unfold_octopus(oct_obj, capsys):
    code, out, _ = run(["unfold", oct_obj, "--strategy", "bfs"], capsys)
    assert code == 0
    assert out.splitlines()[0] in {"Touching", "Overlapping"}
    assert "cut_excess=14" in out


def test_unfold_bad_args(oct_obj, capsys):
    with pytest.raises(SystemExit) as info:
        main(["unfold", str(oct_obj), "--strategy", "spiral"])
    assert info.value.code == 2
    assert run(["unfold", oct_obj, "--root", 42], capsys)[0] == 2


def test_lemma_sweep_single(capsys):
    code, out, _ = run(["lemma-sweep", "--samples", 1], capsys)
    assert code == 0 and "violations=0" in out


def test_lemma_sweep_full(tmp_path, capsys):
    path = tmp_path / "sweep.json"
    code, _, _ = run(
        ["lemma-sweep", "--samples", 10000, "--degrees", "3..12", "--seed", 42, "--json", path], capsys
    )
    assert code == 0
    data = json.loads(path.read_text())
    totals = {}
    for hist in data["histogram"].values():
        for k, v in hist.items():
            totals[int(k)] = totals.get(int(k), 0) + v
    assert totals.get(1, 0) == 0 and totals.get(3, 0) == 0
    assert not data["violations"]
    # five red edges occur, and only at degree five and above
    assert totals[5] > 0
    assert all(int(n) >= 5 for n, h in data["histogram"].items() if "5" in h)
