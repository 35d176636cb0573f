import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from dualorlicz.cli import main
from dualorlicz.io import read_masses_csv, read_off

S2 = np.sqrt(2.0)
CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return str(path)


SQUARE_MU = {"directions": [[1, 0], [0, 1], [-1, 0], [0, -1]], "weights": [float(S2)] * 4}


def test_compute_square(tmp_path):
    cfg = write(tmp_path, "c.yaml", {"density": {"kind": "power", "q": -1}, "body": {"kind": "square"}})
    assert main(["compute", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    rows = read_masses_csv(tmp_path / "o" / "masses.csv")
    assert len(rows) == 4 and all(abs(r["mass"] - S2) < 1e-12 for r in rows)
    assert float((tmp_path / "o" / "quermass.txt").read_text()) == pytest.approx(4 * S2)


def test_compute_360_gon(tmp_path):
    cfg = write(tmp_path, "c.yaml", {"density": {"kind": "power", "q": -1},
                                     "body": {"kind": "regular_polygon", "m": 360}})
    assert main(["compute", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    masses = np.array([r["mass"] for r in read_masses_csv(tmp_path / "o" / "masses.csv")])
    assert np.allclose(masses, 2 * np.pi / 360, rtol=1e-4)


def test_compute_star_body(tmp_path):
    cfg = write(tmp_path, "c.yaml", {"density": {"kind": "power", "q": -1}, "body": {"kind": "ball", "radius": 2.0}})
    assert main(["compute", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert float((tmp_path / "o" / "quermass.txt").read_text()) == pytest.approx(np.pi)


@pytest.mark.parametrize("data", [
    {"body": {"kind": "square"}},  # missing density
    {"density": {"kind": "power", "q": 1.0}, "body": {"kind": "square"}},  # q must be negative
    {"density": {"kind": "nope"}, "body": {"kind": "square"}},
    {"density": {"kind": "power"}, "body": {"normals": [[1, 0], [0, 1]], "supports": [1, 1]}},
])
def test_parse_errors_exit_2(tmp_path, data, capsys):
    cfg = write(tmp_path, "c.yaml", data)
    assert main(["compute", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_file_and_bad_args_exit_2(tmp_path):
    assert main(["compute", "--config", str(tmp_path / "none.yaml")]) == 2
    assert main(["frobnicate", "--config", "x"]) == 2
    (tmp_path / "bad.yaml").write_text("density: [unclosed\n")
    assert main(["compute", "--config", str(tmp_path / "bad.yaml")]) == 2


def test_numeric_failure_exit_3(tmp_path, capsys):
    cfg = write(tmp_path, "c.yaml", {"density": {"kind": "power", "q": -1},
                                     "body": {"normals": [[1, 0], [1, 0], [0, 1], [-1, 0], [0, -1]],
                                              "supports": [1, 1, 1, 1, 1]}})
    assert main(["compute", "--config", cfg, "--out", str(tmp_path / "o")]) == 3
    assert "DegenerateVertex" in capsys.readouterr().err


def test_solve_square(tmp_path):
    cfg = write(tmp_path, "s.yaml", {"density": {"kind": "power", "q": -1}, "measure": SQUARE_MU})
    out = tmp_path / "o"
    assert main(["solve", "--config", cfg, "--out", str(out), "--multistart", "3"]) == 0
    res = json.loads((out / "result.json").read_text())
    assert np.allclose(res["polytope"]["supports"], 1.0, atol=1e-8)
    assert res["kkt_residual"] <= 1e-8
    assert "max_pairwise_distance" in (out / "uniqueness.txt").read_text()
    verts, faces = read_off(out / "solution.off")
    assert len(verts) == 4 and faces == [[0, 1, 2, 3]]


def test_solve_concentrated_exit_4(tmp_path, capsys):
    cfg = write(tmp_path, "s.yaml", {"density": {"kind": "power", "q": -1},
                                     "measure": {"directions": [[1, 0], [0, 1]], "weights": [1, 1]}})
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "o")]) == 4
    assert "not be concentrated in any closed hemisphere" in capsys.readouterr().err
    assert not (tmp_path / "o" / "result.json").exists()


def test_solve_not_converged_exit_5(tmp_path):
    data = {"density": {"kind": "power", "q": -1}, "seed": 3,
            "measure": {"kind": "random", "count": 7}, "solver": {"max_iters": 1}}
    cfg = write(tmp_path, "s.yaml", data)
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "a")]) == 5
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "b"), "--allow-soft"]) == 0
    assert json.loads((tmp_path / "b" / "result.json").read_text())["converged"] is False


def test_solve_is_byte_deterministic(tmp_path):
    data = {"density": {"kind": "power", "q": -2}, "measure": {"kind": "random", "count": 8}}
    cfg = write(tmp_path, "s.yaml", data)
    for name in ("a", "b"):
        assert main(["solve", "--config", cfg, "--out", str(tmp_path / name), "--seed", "11", "--multistart", "2"]) == 0
    for f in ("result.json", "trace.csv", "masses.csv", "solution.off", "uniqueness.txt"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "c"), "--seed", "12"]) == 0
    assert (tmp_path / "a" / "result.json").read_bytes() != (tmp_path / "c" / "result.json").read_bytes()


def test_verify_default_suite_passes(tmp_path):
    out = tmp_path / "o"
    assert main(["verify", "--config", str(CONFIGS / "square_solve.yaml"), "--out", str(out)]) == 0
    records = json.loads((out / "verify.json").read_text())
    assert [r["name"] for r in records] == ["convergence", "forms", "homogeneity", "uniqueness", "variational"]


def test_verify_coarse_rule_fails(tmp_path, capsys):
    assert main(["verify", "--config", str(CONFIGS / "coarse_verify.yaml"), "--out", str(tmp_path / "o")]) == 1
    assert "forms" in capsys.readouterr().err


def test_verify_empty_selection_warns(tmp_path):
    cfg = write(tmp_path, "v.yaml", {"density": {"kind": "power"}, "body": {"kind": "square"}, "verify": {"checks": []}})
    with pytest.warns(UserWarning, match="empty"):
        assert main(["verify", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "verify.txt").read_text() == ""


def test_export_cube_and_result(tmp_path):
    cfg = write(tmp_path, "e.yaml", {"body": {"kind": "cube"}})
    assert main(["export", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    verts, faces = read_off(tmp_path / "o" / "polytope.off")
    assert len(verts) == 8 and len(faces) == 6 and all(len(f) == 4 for f in faces)
    # faces are oriented outward
    for f in faces:
        a, b, c = verts[f[0]], verts[f[1]], verts[f[2]]
        assert np.cross(b - a, c - a) @ verts[f].mean(axis=0) > 0
    scfg = write(tmp_path, "s.yaml", {"density": {"kind": "power"}, "measure": SQUARE_MU})
    assert main(["solve", "--config", scfg, "--out", str(tmp_path / "s")]) == 0
    ecfg = write(tmp_path, "r.yaml", {"result": str(tmp_path / "s" / "result.json")})
    assert main(["export", "--config", ecfg, "--out", str(tmp_path / "r")]) == 0
    assert len(read_off(tmp_path / "r" / "polytope.off")[0]) == 4


def test_instance_include_and_tabulated_phi2(tmp_path):
    base = tmp_path / "base.yaml"
    base.write_text(yaml.safe_dump({"density": {"kind": "power", "q": -1,
                                                "phi2": {"angles": [0.0, 3.0], "values": [1.0, 1.0]}},
                                    "body": {"kind": "square"}}))
    cfg = write(tmp_path, "c.yaml", {"instance": "base.yaml", "quadrature": {"resolution": None}})
    assert main(["compute", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert float((tmp_path / "o" / "quermass.txt").read_text()) == pytest.approx(4 * S2)
