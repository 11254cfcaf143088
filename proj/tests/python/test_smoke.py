import math

import numpy as np
import pytest

import rstk


@pytest.fixture
def pan_scene():
    frames, dt, t0 = rstk.synth_scene(
        generator="pan", width=32, height=32, frame_count=6, fps=120.0,
        velocity_x=20.0, velocity_y=-10.0, seed=3,
    )
    return frames, dt, t0


def test_synth_shapes(pan_scene):
    frames, dt, t0 = pan_scene
    assert len(frames) == 6
    assert frames[0].shape == (32, 32, 3)
    assert frames[0].dtype == np.float32
    assert dt == pytest.approx(1.0 / 120.0)
    assert t0 == 0.0


def test_formation_reductions(pan_scene):
    frames, dt, t0 = pan_scene
    t = t0 + 2 * dt
    gs = rstk.sample_gs(frames, dt, t0, t)
    rs0 = rstk.simulate_rs(frames, dt, t0, t, t_r=0.0, t_e=0.0)
    np.testing.assert_array_equal(gs, rs0)

    rscd = rstk.simulate_rscd(frames, dt, t0, t, t_r=dt / 64.0, t_e=0.0)
    rs = rstk.simulate_rs(frames, dt, t0, t, t_r=dt / 64.0, t_e=0.0)
    np.testing.assert_array_equal(rscd, rs)

    oracle = rstk.oracle_rscd(frames, dt, t0, t, t_r=0.0, t_e=0.5 * dt,
                              s_dense=512)
    blur = rstk.simulate_gs_blur(frames, dt, t0, t, t_r=0.0, t_e=0.5 * dt,
                                 samples_per_window=64)
    assert np.max(np.abs(oracle - blur)) < 1e-4


def test_threads_do_not_change_results(pan_scene):
    frames, dt, t0 = pan_scene
    t = t0 + 2 * dt

    rstk.set_threads(1)
    one = rstk.simulate_rscd(frames, dt, t0, t, t_r=dt / 64.0, t_e=0.5 * dt)
    rstk.set_threads(4)
    four = rstk.simulate_rscd(frames, dt, t0, t, t_r=dt / 64.0, t_e=0.5 * dt)
    rstk.set_threads(0)
    np.testing.assert_array_equal(one, four)


def test_warp_identity(pan_scene):
    frames, _, _ = pan_scene
    zero = np.zeros((32, 32, 2), dtype=np.float32)
    warped, mask = rstk.backward_warp(frames[0], zero)
    np.testing.assert_array_equal(warped, frames[0])
    assert mask.min() == 1.0


def test_flow_recovers_translation():
    frames, dt, t0 = rstk.synth_scene(
        width=48, height=48, frame_count=2, fps=1.0,
        velocity_x=2.0, velocity_y=1.0, seed=5,
    )
    field, report = rstk.solve_flow(frames[1], frames[0], max_iters=120)
    assert field.shape == (48, 48, 2)
    assert len(report["levels"]) == 3
    interior = field[8:-8, 8:-8]
    epe = np.hypot(interior[..., 0] - 2.0, interior[..., 1] - 1.0).mean()
    assert epe < 0.5


def test_metrics():
    rng = np.random.default_rng(7)
    a = rng.uniform(0.2, 0.8, size=(24, 24, 1)).astype(np.float32)
    assert math.isinf(rstk.psnr(a, a))
    assert rstk.ssim(a, a) == pytest.approx(1.0)
    b = a + np.float32(0.1)
    assert rstk.psnr(a, b) == pytest.approx(20.0, abs=1e-3)


def test_rectify_masks(pan_scene):
    frames, dt, t0 = pan_scene
    t_r = dt / 16.0
    t = t0 + 2 * dt + 16 * t_r
    rs = rstk.simulate_rs(frames, dt, t0, t, t_r=t_r, t_e=0.0)
    out, mask, offsets = rstk.rectify_global(rs, vx=20.0, vy=-10.0, t_r=t_r)
    assert out.shape == rs.shape
    assert mask.shape == (32, 32, 1)
    assert len(offsets) == 32
    assert offsets[16] == 0.0


def test_calibration():
    rng = np.random.default_rng(11)
    src = rng.uniform(0, 100, size=(20, 2))
    pts = np.hstack([src, src + [5.0, -3.0]])
    h, rms = rstk.estimate_homography(pts)
    assert rms < 1e-9
    assert h[0, 2] == pytest.approx(5.0, abs=1e-6)
    assert h[1, 2] == pytest.approx(-3.0, abs=1e-6)


def test_tensor_roundtrip(tmp_path):
    rng = np.random.default_rng(13)
    arr = rng.standard_normal((4, 5, 2)).astype(np.float32)
    path = tmp_path / "t.rstf"
    rstk.write_tensor(path, arr)
    back = rstk.read_tensor(path)
    np.testing.assert_array_equal(arr, back)


def test_image_roundtrip(tmp_path, pan_scene):
    frames, _, _ = pan_scene
    path = tmp_path / "f.png"
    rstk.save_image(path, frames[0], transfer="linear", bit_depth=16)
    back = rstk.load_image(path, transfer="linear")
    assert back.shape == (32, 32, 3)
    assert np.max(np.abs(back - np.clip(frames[0], 0.0, 1.0))) <= 1.0 / 65535.0
