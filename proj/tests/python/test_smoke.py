import math

import numpy as np
import pytest

import fmqm

FAST = dict(n_target=20000, n_patch=20, n_color_patch=20)


def small_plane():
    v = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float)
    uv = v[:, :2].copy()
    f = np.array([[0, 1, 2], [0, 2, 3]])
    tex = np.full((4, 4, 3), 0.5)
    return fmqm.Mesh(v, uv, f, f, tex)


def test_mesh_roundtrip(tmp_path):
    mesh = fmqm.primitives.cube(2)
    path = tmp_path / "cube.obj"
    fmqm.save_mesh(mesh, path)
    back = fmqm.load_mesh(path)
    assert back.faces.shape == mesh.faces.shape
    np.testing.assert_allclose(back.vertices, mesh.vertices, atol=1e-9)
    np.testing.assert_allclose(back.texture, mesh.texture, atol=1e-12)
    assert fmqm.surface_area(back) == pytest.approx(6.0, abs=1e-9)


def test_mesh_from_arrays():
    mesh = small_plane()
    assert mesh.vertices.shape == (4, 3)
    assert mesh.texture.shape == (4, 4, 3)
    assert fmqm.surface_area(mesh) == pytest.approx(1.0)


def test_invalid_mesh_raises():
    v = np.zeros((3, 3))
    f = np.array([[0, 1, 5]])
    with pytest.raises(fmqm.FmqmInvalidArgument):
        fmqm.Mesh(v, np.zeros((3, 2)), f, np.array([[0, 1, 2]]), np.zeros((2, 2, 3)))


def test_identity_scores_one():
    mesh = fmqm.primitives.icosphere(2)
    result = fmqm.compare(mesh, mesh, **FAST)
    assert result["deterministic"]["final"] == pytest.approx(1.0, abs=1e-9)
    for key in ("geo", "geoGra", "color", "colorGra"):
        assert result["deterministic"]["pooled"][key] == pytest.approx(1.0, abs=1e-9)


def test_noise_lowers_score_and_is_deterministic():
    ref = fmqm.primitives.torus(24, 12)
    dist = fmqm.gaussian_noise(ref, 0.005, seed=3)
    a = fmqm.compare(ref, dist, seed=5, **FAST)
    b = fmqm.compare(ref, dist, seed=5, **FAST)
    assert 0.0 <= a["deterministic"]["final"] < 0.99
    assert a["deterministic"]["final"] == b["deterministic"]["final"]


def test_texture_only_distortion_keeps_geometry():
    ref = fmqm.primitives.cube(4)
    dist = fmqm.downsample_texture(ref, 8)
    result = fmqm.compare(ref, dist, **FAST)
    assert result["deterministic"]["pooled"]["geo"] == pytest.approx(1.0, abs=1e-9)
    assert result["deterministic"]["pooled"]["color"] < 1.0


def test_compare_files(tmp_path):
    ref = fmqm.primitives.cube(3)
    fmqm.save_mesh(ref, tmp_path / "ref.obj")
    fmqm.save_mesh(fmqm.quantize(ref, 4), tmp_path / "dist.obj")
    result = fmqm.compare_files(tmp_path / "ref.obj", tmp_path / "dist.obj", **FAST)
    assert 0.0 <= result["deterministic"]["final"] <= 1.0


def test_bad_option_and_missing_file(tmp_path):
    mesh = fmqm.primitives.cube(2)
    with pytest.raises(fmqm.FmqmInvalidArgument):
        fmqm.compare(mesh, mesh, not_an_option=1)
    with pytest.raises(fmqm.FmqmIoError):
        fmqm.load_mesh(tmp_path / "missing.obj")


def test_default_config():
    cfg = fmqm.default_config()
    assert cfg["n_target"] == 200000
    assert cfg["n_patch"] == 250


def test_evaluation():
    x = np.linspace(0, 1, 50)
    mos = 1 + 4 / (1 + np.exp(-(x - 0.5) / 0.1))
    report = fmqm.evaluate(x, mos)
    assert report["plcc"] > 0.9999
    assert report["srocc"] == pytest.approx(1.0)
    assert fmqm.spearman([1, 2, 2, 3], [1, 2, 2, 3]) == pytest.approx(1.0)
    assert math.isclose(fmqm.pearson([1, 2, 3], [2, 4, 6]), 1.0)
