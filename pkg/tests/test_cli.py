import xml.etree.ElementTree as ET

import numpy as np
import pytest

from dgml import cli


def run(tmp_path, *argv):
    return cli.main([*argv, "--out", str(tmp_path / "run")])


def read(tmp_path, suffix):
    return (tmp_path / f"run{suffix}").read_text()


def test_optimize_outputs(tmp_path, clustering_triple):
    assert run(tmp_path, "optimize") == 0
    lines = read(tmp_path, "_params.csv").strip().splitlines()
    assert lines[0] == "name,value"
    values = dict(line.split(",") for line in lines[1:])
    assert abs(float(values["alpha"]) - clustering_triple.alpha) < 1e-9
    assert abs(float(values["delta0"]) - clustering_triple.penalty) < 1e-9
    assert abs(float(values["c"]) - clustering_triple.discontinuity) < 1e-9
    assert abs(float(values["rho"]) - 0.19732) < 1e-4
    for key in ("quartic_residual_c", "quartic_residual_delta0", "quartic_residual_alpha"):
        assert abs(float(values[key])) < 1e-12 * 352
    meta = read(tmp_path, "_meta.txt")
    assert "command=optimize" in meta and "version=" in meta


def test_spectrum1d_row_counts_and_clusters(tmp_path):
    assert run(tmp_path, "spectrum1d", "--format", "both") == 0
    lines = read(tmp_path, "_spectrum.csv").strip().splitlines()
    assert lines[0] == "re,im,preset"
    rows = [line.split(",") for line in lines[1:]]
    for preset in ("classical", "alpha-delta", "clustering"):
        sub = [r for r in rows if r[2] == preset]
        assert len(sub) == 64  # 2J eigenvalues at J=32
        assert all(abs(float(r[1])) < 1e-8 for r in sub)  # real spectra
        assert max(abs(float(r[0])) for r in sub) < 1.0
    cluster_rows = [float(r[0]) for r in rows if r[2] == "clustering"]
    near = [v for v in cluster_rows if abs(abs(v) - 0.19732) < 1e-3]
    assert len(near) >= 29
    ET.parse(tmp_path / "run_spectrum.svg")  # well-formed, self-contained


def test_spectrum1d_deterministic(tmp_path):
    run(tmp_path, "spectrum1d", "--preset", "classical")
    first = read(tmp_path, "_spectrum.csv")
    run(tmp_path, "spectrum1d", "--preset", "classical")
    assert read(tmp_path, "_spectrum.csv") == first


def test_spectrum1d_custom_override(tmp_path):
    assert run(tmp_path, "spectrum1d", "--cells", "8", "--alpha", "0.8",
               "--delta0", "2.2", "--c", "0.5") == 0
    lines = read(tmp_path, "_spectrum.csv").strip().splitlines()
    assert len(lines) == 17  # header + 2J rows for one custom triple
    assert all(line.endswith("custom") for line in lines[1:])


def test_spectrum2d_row_counts(tmp_path):
    assert run(tmp_path, "spectrum2d", "--cells", "4", "--max-evals", "5") == 0
    lines = read(tmp_path, "_spectrum.csv").strip().splitlines()
    rows = [line.split(",") for line in lines[1:]]
    for preset in ("classical-1d", "alpha-delta-1d", "clustering-1d", "numeric-2d"):
        assert sum(r[2] == preset for r in rows) == 64  # (2J)^2 at J=4
    meta = read(tmp_path, "_meta.txt")
    assert "params_numeric-2d=" in meta


def test_gmres_sweep(tmp_path):
    assert run(tmp_path, "gmres-sweep", "--cells-list", "16,32", "--format", "both") == 0
    lines = read(tmp_path, "_gmres.csv").strip().splitlines()
    assert lines[0] == "J,preset,iterations,final_relres"
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 4
    iters = {(r[1], r[0]): int(r[2]) for r in rows}
    assert iters[("clustering", "16")] == iters[("clustering", "32")]
    for J in ("16", "32"):
        assert iters[("classical", J)] > iters[("clustering", J)]
        assert iters[("clustering", J)] <= 8
    ET.parse(tmp_path / "run_gmres.svg")


def test_gmres_sweep_loose_tolerance(tmp_path):
    assert run(tmp_path, "gmres-sweep", "--cells-list", "16", "--preset", "clustering",
               "--tol", "0.5") == 0
    lines = read(tmp_path, "_gmres.csv").strip().splitlines()
    assert int(lines[1].split(",")[2]) <= 2


def test_lfa_verify_passes(tmp_path):
    assert run(tmp_path, "lfa-verify", "--cells-list", "4,8") == 0
    lines = read(tmp_path, "_verify.csv").strip().splitlines()
    assert lines[0] == "J,params,max_deviation"
    assert all(float(line.split(",")[2]) < 1e-8 for line in lines[1:])


def test_lfa_verify_detects_injected_fault(tmp_path):
    assert run(tmp_path, "lfa-verify", "--cells-list", "4", "--inject-error") == 2


def test_usage_errors(tmp_path):
    assert cli.main(["no-such-command"]) == 1
    assert run(tmp_path, "spectrum1d", "--cells", "7") == 1
    assert run(tmp_path, "spectrum1d", "--delta0", "0.5") == 1


def test_dense_cap_respected(tmp_path, monkeypatch):
    monkeypatch.setenv("DGML_DENSE_CAP", "16")
    assert run(tmp_path, "spectrum2d", "--cells", "4", "--max-evals", "3") == 1


def test_preset_resolution(clustering_triple):
    classical = cli.preset_params("classical")
    assert classical.as_tuple() == (8.0 / 9.0, 2.0, 0.5)
    ad = cli.preset_params("alpha-delta")
    assert abs(ad.alpha - 0.9) < 5e-3 and abs(ad.penalty - 1.5) < 5e-3
    assert ad.discontinuity == 0.5
    cl = cli.preset_params("clustering")
    np.testing.assert_allclose(cl.as_tuple(), clustering_triple.as_tuple(), atol=1e-8)
    with pytest.raises(KeyError):
        cli.preset_params("nope")
