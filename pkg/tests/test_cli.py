"""End-to-end checks of the command-line verbs and their exit codes."""

import json

import numpy as np
import pytest

from polyrig.cli import build_parser, main
from polyrig.offio import measurements_to_json, read_off


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def cube_off(tmp_path):
    path = tmp_path / "cube.off"
    assert main(["generate", "cube", "--out", str(path)]) == 0
    return str(path)


def test_generate_writes_valid_off(cube_off):
    coords, faces = read_off(open(cube_off).read())
    assert coords.shape == (8, 3)
    assert len(faces) == 6
    lengths = {
        round(float(np.linalg.norm(coords[a] - coords[b])), 9)
        for f in faces
        for a, b in zip(f, f[1:] + f[:1])
    }
    assert lengths == {1.0}


def test_generate_to_stdout(capsys):
    code, out, _ = run(capsys, "generate", "tetrahedron")
    assert code == 0
    assert out.startswith("OFF\n4 4 6\n")


def test_analyze_face_distances_sufficient(capsys, cube_off):
    code, out, _ = run(capsys, "analyze", cube_off)
    assert code == 0
    payload = json.loads(out)
    assert payload["sufficient"] is True
    assert payload["E"] == 12
    assert payload["achievedRank"] == payload["targetRank"] == 36
    assert payload["flexDimension"] == 0
    assert payload["mode"] == "congruence"
    assert payload["selected"] is None


def test_analyze_dihedrals_insufficient(capsys, cube_off):
    code, out, _ = run(capsys, "analyze", cube_off, "--pool", "dihedrals")
    assert code == 1
    assert json.loads(out)["sufficient"] is False


def test_select_cube_edges(capsys, cube_off):
    code, out, err = run(capsys, "select", cube_off, "--pool", "face-distances")
    assert code == 0
    payload = json.loads(out)
    assert len(payload["selected"]) == 12
    assert all(m["type"] == "face_distance" for m in payload["selected"])
    assert "selected 12 measurements" in err


def test_select_dodecahedron_similarity_angles(capsys, tmp_path):
    path = tmp_path / "d.off"
    assert main(["generate", "dodecahedron", "--out", str(path)]) == 0
    code, out, _ = run(
        capsys,
        "select", str(path),
        "--pool", "face-angles",
        "--mode", "similarity",
    )
    assert code == 0
    payload = json.loads(out)
    assert len(payload["selected"]) == 29
    assert payload["achievedRank"] == payload["targetRank"] == 89


def test_select_insufficient_pool(capsys, cube_off):
    code, out, err = run(capsys, "select", cube_off, "--pool", "dihedrals")
    assert code == 1
    assert "exhausted at rank" in err
    assert json.loads(out)["sufficient"] is False


def test_select_is_deterministic(tmp_path, cube_off):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["select", cube_off, "--out", str(a)]) == 0
    assert main(["select", cube_off, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_check_mesh_measurement_set(capsys, tmp_path, cube_off):
    coords, faces = read_off(open(cube_off).read())
    from polyrig.generators import faces_from_convex_vertices  # labeling match
    from polyrig.geometry import build_pool, fit_realization
    from polyrig.incidence import build_incidence

    poly = build_incidence(faces)
    ms_path = tmp_path / "ms.json"
    ms_path.write_text(measurements_to_json(3, build_pool(poly, "face-distances")))
    code, out, _ = run(capsys, "check", cube_off, "--measurements", str(ms_path))
    assert code == 0
    assert json.loads(out)["sufficient"] is True

    ms_path.write_text(measurements_to_json(3, build_pool(poly, "edges-only")))
    code, out, _ = run(capsys, "check", cube_off, "--measurements", str(ms_path))
    assert code == 1


def test_check_rejects_out_of_range_ids(capsys, tmp_path, cube_off):
    ms_path = tmp_path / "ms.json"
    ms_path.write_text(
        json.dumps(
            {"dim": 3, "measurements": [{"type": "face_distance", "ids": [0, 99]}]}
        )
    )
    code, _, err = run(capsys, "check", cube_off, "--measurements", str(ms_path))
    assert code == 2
    assert "out of range" in err


SQUARE_POINTS = {"dim": 2, "points": [[0, 0], [1, 0], [1, 1], [0, 1]]}

EXCEPTIONAL_FOUR = {
    "dim": 2,
    "measurements": [
        {"type": "distance", "ids": [0, 1]},
        {"type": "distance", "ids": [0, 2]},
        {"type": "distance", "ids": [0, 3]},
        {"type": "angle", "ids": [1, 2, 3]},
    ],
}


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_check_point_config(capsys, tmp_path):
    cfg = _write(tmp_path, "square.json", SQUARE_POINTS)
    four = _write(tmp_path, "four.json", EXCEPTIONAL_FOUR)
    code, out, _ = run(capsys, "check", cfg, "--measurements", four)
    assert code == 1
    payload = json.loads(out)
    assert payload["achievedRank"] == 3
    assert payload["targetRank"] == 5
    assert "second-order" in payload["status"]

    five = {
        "dim": 2,
        "measurements": [
            {"type": "distance", "ids": [i, (i + 1) % 4]} for i in range(4)
        ]
        + [{"type": "distance", "ids": [0, 2]}],
    }
    code, out, _ = run(
        capsys, "check", cfg, "--measurements", _write(tmp_path, "5.json", five)
    )
    assert code == 0
    assert json.loads(out)["sufficient"] is True


def test_witness_mesh_flexes_edges(capsys, tmp_path, cube_off):
    coords, faces = read_off(open(cube_off).read())
    from polyrig.geometry import build_pool
    from polyrig.incidence import build_incidence

    poly = build_incidence(faces)
    ms = tmp_path / "edges.json"
    ms.write_text(measurements_to_json(3, build_pool(poly, "edges-only")))
    code, out, _ = run(capsys, "witness", cube_off, "--measurements", str(ms))
    assert code == 1
    payload = json.loads(out)
    assert payload["maxMeasurementError"] < 1e-8
    assert payload["maxIncidenceError"] < 1e-8
    assert payload["normalizedDistance"] > 1e-4
    assert len(payload["witness"]["vertices"]) == 8

    ms.write_text(measurements_to_json(3, build_pool(poly, "face-distances")))
    code, out, _ = run(capsys, "witness", cube_off, "--measurements", str(ms))
    assert code == 0
    assert json.loads(out) == {"sufficient": True, "witness": None}


def test_witness_point_config(capsys, tmp_path):
    cfg = _write(tmp_path, "square.json", SQUARE_POINTS)
    four_sides = {
        "dim": 2,
        "measurements": [
            {"type": "distance", "ids": [i, (i + 1) % 4]} for i in range(4)
        ],
    }
    ms = _write(tmp_path, "sides.json", four_sides)
    code, out, _ = run(
        capsys, "witness", cfg, "--measurements", ms, "--restarts", "40"
    )
    assert code == 1
    payload = json.loads(out)
    assert payload["witness"] is not None
    assert payload["converged"] > 0
    assert sum(c["count"] for c in payload["clusters"]) == payload["converged"]

    exceptional = _write(tmp_path, "four.json", EXCEPTIONAL_FOUR)
    code, out, _ = run(
        capsys, "witness", cfg, "--measurements", exceptional, "--restarts", "80"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["witness"] is None
    assert len(payload["clusters"]) == 1


def test_witness_is_deterministic(tmp_path):
    cfg = _write(tmp_path, "square.json", SQUARE_POINTS)
    ms = _write(
        tmp_path,
        "sides.json",
        {
            "dim": 2,
            "measurements": [
                {"type": "distance", "ids": [i, (i + 1) % 4]} for i in range(4)
            ],
        },
    )
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    base = ["witness", cfg, "--measurements", ms, "--restarts", "30"]
    assert main(base + ["--out", str(a)]) == 1
    assert main(base + ["--out", str(b)]) == 1
    assert a.read_bytes() == b.read_bytes()


def test_seed_env_override(monkeypatch):
    monkeypatch.setenv("POLYRIG_SEED", "7")
    args = build_parser().parse_args(["witness", "x", "--measurements", "y"])
    assert args.seed == 7
    monkeypatch.setenv("POLYRIG_SEED", "junk")
    args = build_parser().parse_args(["witness", "x", "--measurements", "y"])
    assert args.seed == 0
    monkeypatch.delenv("POLYRIG_SEED")
    args = build_parser().parse_args(["witness", "x", "--measurements", "y"])
    assert args.seed == 0


def test_generate_out_of_region_exits_2(capsys):
    code, _, err = run(capsys, "generate", "hexa-a", "--q1", "0.4")
    assert code == 2
    assert "OutOfValidityRegion" in err


def test_generate_staircase_off(tmp_path):
    path = tmp_path / "s.off"
    code = main(
        [
            "generate", "staircase-ngon",
            "--n", "4",
            "--angles", f"{np.pi / 4},{np.pi / 4}",
            "--out", str(path),
        ]
    )
    assert code == 0
    coords, faces = read_off(path.read_text())
    assert coords.shape == (4, 3)
    assert np.abs(coords[:, 2]).max() == 0.0
    assert faces == [(0, 1, 2, 3)]


def test_polygon_staircase_payload(capsys):
    code, out, _ = run(
        capsys, "polygon", "staircase", "--n", "6",
        "--angles", "1.2,1.2,1.2,1.2",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["dim"] == 2
    assert len(payload["points"]) == 6
    assert len(payload["measurements"]) == 6
    kinds = [m["type"] for m in payload["measurements"]]
    assert kinds == ["distance", "distance"] + ["angle"] * 4


def test_polygon_analyze_square(capsys, tmp_path):
    cfg = _write(tmp_path, "square.json", SQUARE_POINTS)
    four = _write(tmp_path, "four.json", EXCEPTIONAL_FOUR)
    code, out, _ = run(capsys, "polygon", "analyze", cfg, "--measurements", four)
    assert code == 1
    assert "second-order" in json.loads(out)["status"]


def test_polygon_oracle_square(capsys):
    code, out, _ = run(capsys, "polygon", "oracle", "square", "--d", "1.0")
    assert code == 0
    payload = json.loads(out)
    assert payload["maxAngle"] == pytest.approx(np.pi / 2, abs=1e-9)
    assert len(payload["argmax"]) == 4


def test_polygon_oracle_right_quad(capsys):
    code, out, _ = run(
        capsys, "polygon", "oracle", "right-quad",
        "--ab", "1.0", "--ad", "1.0", "--ac", str(np.sqrt(2.0)),
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["angleABC"] == pytest.approx(np.pi / 2, abs=1e-7)
    assert payload["angleADC"] == pytest.approx(np.pi / 2, abs=1e-7)


def test_polygon_oracle_octagon_smoke(capsys):
    code, out, _ = run(capsys, "polygon", "oracle", "octagon", "--restarts", "3")
    assert code == 0
    payload = json.loads(out)
    assert abs(payload["maxValue"] - payload["regularValue"]) < 1e-8
    assert payload["angleA5A1A8"] == pytest.approx(3 * np.pi / 8, abs=1e-7)


def test_malformed_inputs_exit_2(capsys, tmp_path):
    bad_off = tmp_path / "bad.off"
    bad_off.write_text("OFF\n1 2\n")
    code, _, err = run(capsys, "analyze", str(bad_off))
    assert code == 2 and "error" in err

    code, _, err = run(capsys, "analyze", str(tmp_path / "missing.off"))
    assert code == 2

    cfg = _write(tmp_path, "sq.json", SQUARE_POINTS)
    bad_ms = _write(
        tmp_path, "bad.json",
        {"dim": 2, "measurements": [{"type": "laser", "ids": [0, 1]}]},
    )
    code, _, err = run(capsys, "check", cfg, "--measurements", bad_ms)
    assert code == 2

    code, _, _ = run(capsys, "analyze", str(bad_off), "--tol", "5.0")
    assert code == 2
