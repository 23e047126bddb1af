import json
from pathlib import Path

import numpy as np
import pytest

from graphheat import io as gio
from graphheat.cli import main

FIX = Path(__file__).parent / "fixtures"


def fx(name):
    return str(FIX / name)


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def manifest(err):
    return json.loads(err.strip().splitlines()[-1])


def test_laplacian(capsys):
    code, out, err = run(["laplacian", "--edges", fx("p3.edges")], capsys)
    assert code == 0
    m = gio.parse_matrix(out)
    np.testing.assert_array_equal(m.toarray(), [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])
    man = manifest(err)
    assert man["command"] == "laplacian" and fx("p3.edges") in man["inputs"]


def test_eig(tmp_path, capsys):
    vec = tmp_path / "v.csv"
    code, out, err = run(["eig", "--edges", fx("p3.edges"), "--vectors", vec], capsys)
    assert code == 0
    _, rows = gio.parse_table(out)
    np.testing.assert_allclose([float(r[1]) for r in rows], [0, 1, 3], atol=1e-12)
    header, vrows = gio.parse_table(vec.read_text())
    assert header == ["node", "psi_1", "psi_2", "psi_3"] and len(vrows) == 3


def test_eig_truncated_warns(capsys):
    code, out, err = run(["eig", "--edges", fx("graph30.edges"), "--num-eig", "4"], capsys)
    assert code == 0 and len(gio.parse_table(out)[1]) == 4
    assert any("truncated" in w for w in manifest(err)["warnings"])


def test_smooth_sigma_zero(capsys):
    code, out, _ = run(["smooth", "--edges", fx("p3.edges"), "--signal", fx("p3_signal.csv"), "--sigma", 0], capsys)
    assert code == 0
    np.testing.assert_allclose(gio.parse_signal(out), [1, -2, 0.5], atol=1e-12)


def test_smooth_voxmask(capsys):
    code, out, _ = run(["smooth", "--voxmask", fx("tube.vm"), "--conn", "n6", "--signal", fx("p3_signal.csv"),
                        "--sigma", 1], capsys)
    assert code == 2  # signal has 3 values, tube has more nodes


def test_fiedler(capsys):
    code, out, _ = run(["fiedler", "--edges", fx("p3.edges")], capsys)
    assert code == 0
    np.testing.assert_allclose(np.abs(gio.parse_signal(out)), [2**-0.5, 0, 2**-0.5], atol=1e-12)


def test_fiedler_disconnected(capsys):
    code, out, err = run(["fiedler", "--edges", fx("disconnected.edges")], capsys)
    assert code == 3 and out == ""
    msg = json.loads(err.strip().splitlines()[0])
    assert msg["error"] == "numerical_failure" and "2 components" in msg["message"]


def test_diffuse_zero_steps(capsys):
    code, out, _ = run(["diffuse", "--signal", fx("step100.csv"), "--steps", 0], capsys)
    assert code == 0
    assert out == Path(fx("step100.csv")).read_text()


def test_diffuse_oracle(tmp_path, capsys):
    ora = tmp_path / "o.csv"
    code, out, err = run(["diffuse", "--signal", fx("step100.csv"), "--steps", 2000, "--boundary", "replicate",
                          "--oracle", "fourier", "--terms", 200, "--oracle-out", ora], capsys)
    assert code == 0
    num, ana = gio.parse_signal(out), gio.parse_signal(ora.read_text())
    assert np.sqrt(np.mean((num - ana) ** 2)) < 5e-2
    assert "oracle_truncation_rms" in manifest(err)


def test_diffuse_grid(capsys):
    code, out, _ = run(["diffuse", "--signal", fx("grid8x8.csv"), "--shape", "8,8", "--stencil", "n8",
                        "--steps", 5, "--dt", 0.1], capsys)
    assert code == 0 and gio.parse_signal(out).size == 64


def test_diffuse_divergence(capsys):
    code, _, err = run(["diffuse", "--signal", fx("step100.csv"), "--dt", 10, "--steps", 5000], capsys)
    assert code == 3 and "step" in err


def test_diffuse_check_stability(capsys):
    code, _, _ = run(["diffuse", "--signal", fx("step100.csv"), "--dt", 10, "--check-stability"], capsys)
    assert code == 2


def test_local_laplacian(capsys):
    code, out, _ = run(["local-laplacian", "--points", fx("points.csv")], capsys)
    assert code == 0
    _, rows = gio.parse_table(out)
    assert rows[-1][0] == "laplacian" and float(rows[-1][1]) == pytest.approx(8.0, abs=1e-8)


def test_laplace(tmp_path, capsys):
    field = tmp_path / "f.csv"
    code, out, err = run(["laplace", "--edges", fx("p3.edges"), "--plus", "0", "--minus", "2",
                          "--out-field", field], capsys)
    assert code == 0
    np.testing.assert_allclose(gio.parse_signal(out), [1, 0, -1], atol=1e-8)
    _, rows = gio.parse_table(field.read_text())
    assert [float(r[2]) for r in rows] == pytest.approx([1, 1])


def test_laplace_default_boundary(capsys):
    code, _, err = run(["laplace", "--edges", fx("graph30.edges")], capsys)
    assert code == 0 and manifest(err)["boundary"]["rule"] == "mst-double-sweep"


def test_laplace_half_boundary(capsys):
    assert run(["laplace", "--edges", fx("p3.edges"), "--plus", "0"], capsys)[0] == 2


def test_wavelet(capsys):
    code, out, _ = run(["wavelet", "--edges", fx("graph30.edges"), "--signal", fx("graph30_signal.csv"),
                        "--t", 0.5], capsys)
    code2, out2, _ = run(["smooth", "--edges", fx("graph30.edges"), "--signal", fx("graph30_signal.csv"),
                          "--sigma", 0.5], capsys)
    assert code == code2 == 0
    np.testing.assert_allclose(gio.parse_signal(out), gio.parse_signal(out2), atol=1e-10)


def test_wavelet_node(capsys):
    code, out, _ = run(["wavelet", "--edges", fx("p3.edges"), "--scale", "one", "--t", 1, "--node", 1], capsys)
    assert code == 0
    np.testing.assert_allclose(gio.parse_signal(out), [0, 1, 0], atol=1e-12)


def test_skeletonize(tmp_path, capsys):
    out_mask, out_graph = tmp_path / "s.vm", tmp_path / "s.edges"
    code, _, err = run(["skeletonize", "--voxmask", fx("tube.vm"), "--scale", 2, "--out-mask", out_mask,
                        "--out-graph", out_graph], capsys)
    assert code == 0
    man = manifest(err)
    mask = gio.parse_voxmask(out_mask.read_text())
    assert mask.count == man["skeleton_voxels"] < 2 * man["input_voxels"]
    assert gio.parse_edge_list(out_graph.read_text()).n_nodes == mask.count


def test_skeletonize_identity(tmp_path, capsys):
    out_mask = tmp_path / "s.vm"
    code, _, _ = run(["skeletonize", "--voxmask", fx("tube.vm"), "--sigma", 0, "--out-mask", out_mask], capsys)
    assert code == 0 and out_mask.read_text() == Path(fx("tube.vm")).read_text()


def test_manifest_file(tmp_path, capsys):
    man = tmp_path / "m.json"
    code, _, err = run(["laplacian", "--edges", fx("p3.edges"), "--manifest", man], capsys)
    assert code == 0 and err == ""
    data = json.loads(man.read_text())
    assert data["version"] and "wall_time_s" in data and data["config"]["edges"] == fx("p3.edges")


def test_manifest_on_failure(tmp_path, capsys):
    man = tmp_path / "m.json"
    code, _, _ = run(["fiedler", "--edges", fx("disconnected.edges"), "--manifest", man], capsys)
    assert code == 3 and json.loads(man.read_text())["exit_code"] == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["smooth", "--edges", "missing.edges", "--signal", "x", "--sigma", "1"],
        ["laplacian"],
        ["eig", "--edges", fx("p3.edges"), "--num-eig", "zero"],
        ["laplacian", "--edges", fx("p3.edges"), "--threads", "0"],
    ],
)
def test_invalid_input(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2 and json.loads(err)["error"] == "invalid_input"


def test_unknown_subcommand(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_threads_env(monkeypatch, capsys):
    monkeypatch.setenv("GRAPHHEAT_THREADS", "1")
    assert run(["laplacian", "--edges", fx("p3.edges")], capsys)[0] == 0
    monkeypatch.setenv("GRAPHHEAT_THREADS", "many")
    assert run(["laplacian", "--edges", fx("p3.edges")], capsys)[0] == 2


def test_threads_flag(capsys):
    assert run(["eig", "--edges", fx("graph30.edges"), "--threads", "2"], capsys)[0] == 0


def test_console_script(tmp_path):
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "graphheat.cli", "laplacian", "--edges", fx("p3.edges"),
         "--manifest", str(tmp_path / "m.json")],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout.startswith("# coo 3 7")
