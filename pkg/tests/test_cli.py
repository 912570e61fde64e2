import csv
import io
import json

import numpy as np
import pytest

from ruled_laplace.cli import cmd_classify, cmd_eval, cmd_mesh, cmd_verify, dump_report, main, quad_triangles
from ruled_laplace.config import ConfigError, SceneConfig, builtin, builtin_names, load_config
from ruled_laplace.image import image_surface
from ruled_laplace.oracle import fit_line


def rows_as_dicts(rows):
    return [dict(zip(rows[0], r)) for r in rows[1:]]


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def write_scene(tmp_path, cfg: SceneConfig, name="scene.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg.to_dict()))
    return str(path)


def obj_vertices(text):
    return np.array([[float(x) for x in line.split()[1:]] for line in text.splitlines() if line.startswith("v ")])


# --- config ----------------------------------------------------------------------


def test_required_builtins_ship():
    assert {"helicoid", "example1", "example2", "prop2", "prop6f", "sect4c"} <= set(builtin_names())


@pytest.mark.parametrize("name", builtin_names())
def test_builtins_round_trip(name):
    cfg = builtin(name)
    assert SceneConfig.from_dict(cfg.to_dict()) == cfg


def test_config_validation():
    doc = builtin("helicoid").to_dict()
    with pytest.raises(ConfigError):
        SceneConfig.from_dict({**doc, "domain": {**doc["domain"], "nu": 1}})
    with pytest.raises(ConfigError):
        SceneConfig.from_dict({**doc, "domain": {**doc["domain"], "u_min": 3.0}})
    with pytest.raises(ConfigError):
        SceneConfig.from_dict({**doc, "invariants": {**doc["invariants"], "delta": "1 +"}})
    with pytest.raises(ConfigError):
        SceneConfig.from_dict({**doc, "invariants": {"kappa": "0"}})
    with pytest.raises(ConfigError):
        SceneConfig.from_dict({**doc, "support": {"kind": "other", "q": "1"}})


def test_unknown_constant_is_a_config_error():
    doc = builtin("example1").to_dict()
    doc["support"]["f"] = "k/cos(u)"
    with pytest.raises(ConfigError, match="support"):
        SceneConfig.from_dict(doc)


def test_with_changes():
    cfg = builtin("helicoid").with_changes(**{"domain.nu": 10, "name": "small"})
    assert (cfg.nu, cfg.name) == (10, "small")


def test_load_config_from_file_and_name(tmp_path):
    cfg = builtin("prop6f")
    assert load_config(write_scene(tmp_path, cfg)) == cfg
    assert load_config("prop6f") == cfg
    with pytest.raises(ConfigError):
        load_config("no-such-scene")


# --- eval ---------------------------------------------------------------------------


def test_eval_helicoid_gaussian_curvature():
    row = rows_as_dicts(cmd_eval(builtin("helicoid"), [(0.0, 1.0)]))[0]
    assert float(row["K"]) == -0.25


def test_eval_striction_row_normal_is_n():
    for row in rows_as_dicts(cmd_eval(builtin("prop6f"), [(0.2, 0.0), (0.7, 0.0)])):
        assert [row[f"xi_{c}"] for c in "123"] == [row[f"n_{c}"] for c in "123"]


def test_eval_conoidal_support_has_no_z_component():
    for row in rows_as_dicts(cmd_eval(builtin("sect4c"))):
        assert float(row["y_z"]) == 0.0


def test_eval_csv_format(tmp_path, capsys):
    out = tmp_path / "points.csv"
    code, _, _ = run(["eval", "--config", "helicoid", "--point", "0", "1", "--point", "0.5", "-1", "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert len(rows) == 3 and rows[0][:2] == ["u", "v"]
    assert rows[1][rows[0].index("xi_2")] == "0.707106781187"


def test_eval_gamma_target(capsys):
    code, out, _ = run(["eval", "--config", "example1", "--target", "gamma"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["u", "x", "y", "z", "k"]
    assert max(abs(float(r[4])) for r in rows[1:]) <= 1e-8


def test_eval_reports_evaluation_errors(capsys):
    # cos(2u) = 0 at u = pi/4
    code, _, err = run(["eval", "--config", "example2", "--point", "0.7853981633974483", "0"], capsys)
    assert code == 1
    assert "error" in err


# --- classify ----------------------------------------------------------------------


@pytest.mark.parametrize(
    "name, verdict",
    [("prop2", "point"), ("example1", "straight-line"), ("example2", "straight-line"), ("helicoid", "planar-curve"), ("generic", "surface")],
)
def test_classify_builtins(name, verdict, capsys):
    code, out, err = run(["classify", "--config", name], capsys)
    assert code == 0
    assert json.loads(out)["verdict"] == verdict
    assert f"verdict: {verdict}" in err


def test_classify_includes_oracle_cross_check():
    rep = cmd_classify(builtin("helicoid"))
    assert rep["oracle"]["status"] == "pass"


# --- verify ------------------------------------------------------------------------


def test_verify_example1(capsys):
    code, out, _ = run(["verify", "--config", "example1", "--check", "examples"], capsys)
    assert code == 0
    measured = json.loads(out)["checks"]["examples"]["measured"]
    assert float(measured["gamma_max_curvature"]) < 1e-8


def test_verify_prop6f_edlinger():
    rep = cmd_verify(builtin("prop6f"))
    assert rep["passed"]
    assert rep["checks"]["prop6"]["measured"]["edlinger"]["holds"] is True


def test_verify_perturbed_example_fails(tmp_path, capsys):
    cfg = builtin("example1").with_changes(**{"support.f": "c/cos(u) + 0.1"})
    code, out, _ = run(["verify", "--config", write_scene(tmp_path, cfg), "--check", "examples"], capsys)
    assert code == 1
    assert float(json.loads(out)["checks"]["examples"]["measured"]["gamma_max_curvature"]) > 1e-3


@pytest.mark.parametrize("name", builtin_names())
def test_verify_every_builtin_passes(name):
    rep = cmd_verify(builtin(name))
    assert rep["passed"], {k: v["message"] for k, v in rep["checks"].items()}


def test_verify_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run(["verify", "--config", "sect4c", "--out", str(out)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_report_floats_use_fixed_format():
    text = dump_report({"x": 1 / 3, "y": [np.float64(-0.0)], "flag": np.bool_(True)})
    assert json.loads(text) == {"flag": True, "x": "0.333333333333", "y": ["0"]}


# --- mesh ---------------------------------------------------------------------------


def test_helicoid_mesh_counts():
    text = cmd_mesh(builtin("helicoid").with_changes(**{"domain.nu": 10, "domain.nv": 10}))
    lines = text.splitlines()
    assert sum(line.startswith("v ") for line in lines) == 100
    faces = [line for line in lines if line.startswith("f ")]
    assert len(faces) == 162
    assert max(int(i) for f in faces for i in f.split()[1:]) == 100


def test_quad_split_orientation():
    assert quad_triangles(2, 2) == [(1, 2, 4), (1, 4, 3)]


def test_gamma_polyline_is_collinear():
    text = cmd_mesh(builtin("example1"), "gamma")
    pts = obj_vertices(text)
    assert fit_line(pts)[0] <= 1e-8
    segs = [line for line in text.splitlines() if line.startswith("l ")]
    assert len(segs) == len(pts) - 1 and segs[0] == "l 1 2"


def test_image_surface_mesh_vertices_lie_on_rulings():
    cfg = SceneConfig.from_dict(
        {
            "name": "unit",
            "invariants": {"kappa": "1", "delta": "1", "lambda": "0"},
            "support": {"kind": "conoidal", "f": "1"},
            "domain": {"u_min": 0, "u_max": 1, "v_min": -1, "v_max": 1, "nu": 4, "nv": 3},
        }
    )
    verts = obj_vertices(cmd_mesh(cfg, "image-surface")).reshape(4, 3, 3)
    surf = cfg.surface()
    for i, u in enumerate(cfg.grid()[0]):
        pt, _ = image_surface(surf.inv, cfg.support().f, surf.frame_at(u))
        for x in verts[i]:
            assert np.linalg.norm(np.cross(x - pt.s_star, pt.ruling)) <= 1e-10


def test_image_surface_mesh_needs_conoidal_form(capsys):
    code, _, err = run(["mesh", "--config", "generic", "--target", "image-surface"], capsys)
    assert code == 1 and "conoidal" in err


# --- usage -----------------------------------------------------------------------------


@pytest.mark.parametrize(
    "argv",
    [[], ["frobnicate"], ["verify"], ["verify", "--config", "helicoid", "--check", "prop9"], ["classify", "--config", "nope"]],
)
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2
