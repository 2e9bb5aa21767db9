import json
import subprocess
import sys

import numpy as np
import pytest

from flexpoly.cli import main
from flexpoly.constructions import bricard_type1
from flexpoly.io import load_mesh, save_mesh


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def bricard_file(tmp_path):
    path = tmp_path / "bricard.json"
    save_mesh(bricard_type1(), path)
    return path


def test_analyze(tmp_path, capsys, tetra):
    save_mesh(tetra, tmp_path / "t.json")
    code, out, _ = run(["analyze", str(tmp_path / "t.json")], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["counts"] == {"vertices": 4, "edges": 6, "faces": 4, "euler": 2}
    assert report["flex_dim"] == 0
    assert report["kernel_dim"] == 6
    assert len(report["predicates"]) == 4


def test_analyze_bad_mesh_exit_1(tmp_path, capsys):
    (tmp_path / "bad.json").write_text('{"vertices": [[0,0,0]], "faces": [[0, 1, 2]]}')
    code, _, err = run(["analyze", str(tmp_path / "bad.json")], capsys)
    assert code == 1
    assert "ParseError" in err


def test_trace_rigid_exit_2(tmp_path, capsys, tetra):
    save_mesh(tetra, tmp_path / "t.json")
    code, _, err = run(["trace", str(tmp_path / "t.json")], capsys)
    assert code == 2
    assert "NoFlexDirection" in err


def test_bad_argument_exit_3(capsys):
    with pytest.raises(SystemExit) as info:
        main(["trace"])
    assert info.value.code == 3


def test_deltak_invalid_l_exit_3(capsys):
    code, _, err = run(["deltak", "--l", "0.5"], capsys)
    assert code == 3
    assert "InvalidParameter" in err


def test_deltak_range(capsys):
    code, out, _ = run(["deltak", "--range", "0.7:0.1:2.0"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "l,M_mesh,M_closed,phi,psi,abs_diff,phi_printed"
    assert len(lines) == 15
    assert all(float(line.split(",")[5]) < 1e-12 for line in lines[1:])


def test_bricard_out_formats(tmp_path, capsys):
    code, out, _ = run(["bricard", "--out", str(tmp_path / "b.dat"), "--obj"], capsys)
    assert code == 0
    assert json.loads(out)["flex_dim"] == 1
    assert (tmp_path / "b.dat").read_text().startswith("v ")
    with pytest.raises(SystemExit) as info:
        main(["bricard", "--json", "--obj"])
    assert info.value.code == 3


def test_bricard_seed(capsys):
    seed = ["1.0", "0.2", "0.0", "-0.3", "0.9", "0.5", "0.4", "0.3", "1.2"]
    code, out, _ = run(["bricard", "--seed", *seed], capsys)
    report = json.loads(out)
    assert code == 0 and report["flex_dim"] == 1
    assert np.allclose(report["mesh"]["vertices"][0], [1.0, 0.2, 0.0])


def test_counterexample(tmp_path, capsys):
    code, out, _ = run(["counterexample", "--out", str(tmp_path / "p.json")], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["flex_dim"] >= 1
    assert report["flux"] == pytest.approx(report["expected_flux"], rel=1e-9)
    assert not any(r["star_coplanar"] or r["three_edges_coplanar"] for r in report["predicates"])
    assert load_mesh(tmp_path / "p.json").n_vertices == report["vertices"]


def test_counterexample_params(tmp_path, capsys):
    (tmp_path / "p.json").write_text(json.dumps({"magnitude": 3.0}))
    code, out, _ = run(["counterexample", "--params", str(tmp_path / "p.json")], capsys)
    assert code == 0
    assert json.loads(out)["flux"] == pytest.approx(1.7, rel=1e-9)


def test_trace_is_deterministic(tmp_path, capsys, bricard_file):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["trace", str(bricard_file), "--steps", "10", "--out", str(a)]) == 0
    assert main(["trace", str(bricard_file), "--steps", "10", "--out", str(b)]) == 0
    assert a.read_text() == b.read_text()
    assert len(a.read_text().splitlines()) == 12


def test_trace_obj_dir(tmp_path, capsys, bricard_file):
    code, out, _ = run(["trace", str(bricard_file), "--steps", "3",
                        "--obj-dir", str(tmp_path / "frames")], capsys)
    assert code == 0
    assert len(list((tmp_path / "frames").glob("frame_*.obj"))) == 4


def test_config_overrides_flags(tmp_path, capsys, bricard_file):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"steps": 4}))
    code, out, _ = run(["trace", str(bricard_file), "--steps", "10", "--config", str(cfg)], capsys)
    assert code == 0
    assert len(out.splitlines()) == 6


def test_config_unknown_key(tmp_path, bricard_file):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(SystemExit) as info:
        main(["trace", str(bricard_file), "--config", str(cfg)])
    assert info.value.code == 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "flexpoly", "deltak", "--l", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1].startswith("1,")
