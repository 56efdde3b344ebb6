import json
import subprocess
import sys

import numpy as np

from bktwistor.cli import main
from bktwistor.complexification import ModuliQuadruple
from bktwistor.linalg import SpacePair
from bktwistor.sampling import sample_quadruple


def _load(path):
    with open(path) as fh:
        return json.load(fh)


def test_verify_pass(tmp_path):
    out = tmp_path / "r.json"
    code = main(["verify", "--suite", "base-identities", "--l", "1", "--m", "1", "--k", "1",
                 "--samples", "5", "--seed", "0", "--backend", "exact", "--out", str(out)])
    report = _load(out)
    assert code == 0 and report["verdict"] == "pass" and report["schema"] == 1
    assert "wall_time" in report


def test_verify_fail_exit_code(tmp_path):
    out = tmp_path / "r.json"
    code = main(["verify", "--suite", "fiber-solver", "--l", "1", "--m", "1", "--k", "1",
                 "--samples", "3", "--seed", "0", "--tol", "0", "--out", str(out)])
    assert code == 1 and _load(out)["verdict"] == "fail"


def test_verify_config_error(tmp_path):
    code = main(["verify", "--suite", "flat", "--l", "9", "--out", str(tmp_path / "r.json")])
    assert code == 2


def test_solve_fiber(tmp_path):
    q = sample_quadruple(0, 2, 1)
    (tmp_path / "quad.json").write_text(json.dumps(q.to_json()))
    (tmp_path / "plane.json").write_text(json.dumps({"basis": [[[1, 0], [0, 0], [0.5, 0.2]]]}))
    out = tmp_path / "kappa.json"
    code = main(["solve-fiber", "--input", str(tmp_path / "quad.json"),
                 "--plane", str(tmp_path / "plane.json"), "--out", str(out)])
    res = _load(out)
    assert code == 0 and res["verdict"] == "pass" and res["residual"] <= 1e-8
    assert {"x", "y", "L"} <= set(res["kappa"])
    assert res["reduction"]["duality_applied"] in (True, False)


def test_solve_fiber_tensor_input(tmp_path):
    sp = SpacePair(1, 1)
    q = ModuliQuadruple.real(sp.base_x(), sp.base_y())
    (tmp_path / "quad.json").write_text(json.dumps(q.to_json()))
    z = [{"I": [1], "J": [1], "c": [1.0, 0.0]}]
    (tmp_path / "plane.json").write_text(json.dumps({"z": z, "k": 2}))
    out = tmp_path / "kappa.json"
    assert main(["solve-fiber", "--input", str(tmp_path / "quad.json"),
                 "--plane", str(tmp_path / "plane.json"), "--out", str(out)]) == 0


def _pair_file(tmp_path, s=None):
    sp = SpacePair(1, 1)
    x0, y0 = sp.base_x(), sp.base_y()
    nu2 = y0 if s is None else np.array([1, s])
    q1 = ModuliQuadruple.create(x0, x0, y0, y0)
    q2 = ModuliQuadruple.create(x0, x0, np.array([1, 0.5]), nu2)
    path = tmp_path / "pair.json"
    path.write_text(json.dumps({"q1": q1.to_json(), "q2": q2.to_json(), "k": 1}))
    return path


def test_intersect(tmp_path):
    out = tmp_path / "res.json"
    assert main(["intersect", "--input", str(_pair_file(tmp_path)), "--out", str(out)]) == 0
    res = _load(out)
    assert res["predicate"] and res["type"]["tag"] == "G(k-1,n-1)"
    assert res["family_dimension"] == 0 and max(res["member_residuals"]) <= 1e-7


def test_intersect_disjoint(tmp_path):
    out = tmp_path / "res.json"
    assert main(["intersect", "--input", str(_pair_file(tmp_path, s=0.3)), "--out", str(out)]) == 0
    res = _load(out)
    assert not res["predicate"] and res["type"]["tag"] == "Disjoint" and res["witness"] is None


def test_demo_subprocess():
    out = subprocess.run([sys.executable, "-m", "bktwistor.cli", "demo"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "y  = (0.5, 0)" in out.stdout and "r0 = 0.25" in out.stdout
    assert "G(k-1,n-1)" in out.stdout


def test_console_script_help():
    out = subprocess.run([sys.executable, "-m", "bktwistor.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "solve-fiber" in out.stdout
