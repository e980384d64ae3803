import numpy as np
import pytest

from signtutor.errors import DegenerateBoxError
from signtutor.headmotion import (
    HeadConfig,
    HeadFeatureSequence,
    adaptive_smooth,
    gate_velocity,
    head_features,
    head_velocity,
    motion_energy,
    smooth_sequence,
)


def rgb(gray):
    return np.repeat(np.asarray(gray, dtype=np.uint8)[..., None], 3, axis=2)


def textured_frame(shift_x=0, shift_y=0, size=200, seed=7):
    """Smooth random texture, shifted by whole pixels via indexing."""
    rng = np.random.default_rng(seed)
    big = rng.integers(0, 256, size=(size * 2, size * 2)).astype(float)
    # Box-blur a few times so block matching has a clean basin.
    for _ in range(3):
        big = (
            big
            + np.roll(big, 1, 0)
            + np.roll(big, -1, 0)
            + np.roll(big, 1, 1)
            + np.roll(big, -1, 1)
        ) / 5.0
    y0, x0 = size // 2 - shift_y, size // 2 - shift_x
    return rgb(big[y0 : y0 + size, x0 : x0 + size].astype(np.uint8))


BOX = (60, 60, 80, 100)  # x, y, w, h


def test_identical_frames_zero_energy():
    f = textured_frame()
    assert motion_energy(f, f, BOX) == 0.0


def test_energy_counts_changed_fraction():
    # Equal-mean patches differing by the full range on 10% of the pixels:
    # energy must come out at exactly 0.10 (hand evaluation: 5% of the white
    # moves out and 5% moves in, so means match and equalization is a no-op).
    h, w = 20, 20
    prev = np.zeros((h, w), dtype=float)
    cur = np.zeros((h, w), dtype=float)
    n = h * w // 20  # 5% of pixels
    prev.flat[:n] = 255.0
    cur.flat[-n:] = 255.0  # same count, different place -> equal means
    assert motion_energy(rgb(prev), rgb(cur), (0, 0, w, h)) == pytest.approx(
        0.10, abs=1e-12
    )


def test_uniform_brightness_step_cancels():
    f = textured_frame()
    brighter = np.clip(f.astype(int) + 30, 0, 255).astype(np.uint8)
    assert motion_energy(f, brighter, BOX) == pytest.approx(0.0, abs=1e-9)


def test_energy_zero_area_box_raises():
    f = textured_frame()
    with pytest.raises(DegenerateBoxError):
        motion_energy(f, f, (10, 10, 0, 5))


def test_translation_detected_as_positive_energy():
    f0 = textured_frame(0, 0)
    f1 = textured_frame(1, 0)
    assert motion_energy(f0, f1, BOX) > 0.0


def test_velocity_horizontal_translation():
    f0 = textured_frame(0, 0)
    f1 = textured_frame(4, 0)  # content moves +4 px in x
    est = head_velocity(f0, f1, BOX)
    assert est.vx == pytest.approx(4 / 80, abs=0.25 / 80)
    assert est.vy == pytest.approx(0.0, abs=0.25 / 100)
    assert not est.clipped


def test_velocity_vertical_translation():
    f0 = textured_frame(0, 0)
    f1 = textured_frame(0, -3)
    est = head_velocity(f0, f1, BOX)
    assert est.vy == pytest.approx(-3 / 100, abs=0.25 / 100)
    assert est.vx == pytest.approx(0.0, abs=0.25 / 80)


def test_velocity_static_frames():
    f = textured_frame()
    est = head_velocity(f, f, BOX)
    assert est.vx == 0.0 and est.vy == 0.0


def test_velocity_clipped_window_flagged():
    f = textured_frame()
    est = head_velocity(f, f, (2, 2, 60, 60))  # only 2 px of slack at low edge
    assert est.clipped


def test_gate_zeroes_low_energy_velocity():
    assert gate_velocity(0.001, 0.3, 0.0) == (0.0, 0.0)


def test_gate_keeps_dominant_axis_only():
    assert gate_velocity(0.5, 0.2, 0.05) == (0.2, 0.0)
    assert gate_velocity(0.5, 0.0, -0.1) == (0.0, -0.1)


def test_gate_output_single_axis_property():
    rng = np.random.default_rng(3)
    for _ in range(50):
        vx, vy = gate_velocity(rng.random(), rng.normal(), rng.normal())
        assert vx == 0.0 or vy == 0.0


def test_adaptive_smooth_hand_computed():
    out = adaptive_smooth(np.array([[0.0], [1.0], [1.0]]), alpha=0.5)
    np.testing.assert_allclose(out[:, 0], [0.0, 0.5, 0.75])


def test_adaptive_smooth_constant_fixed_point():
    seq = np.full((7, 3), 2.5)
    np.testing.assert_allclose(adaptive_smooth(seq, 0.5), seq)


def test_adaptive_smooth_alpha_one_identity():
    rng = np.random.default_rng(5)
    seq = rng.normal(size=(10, 3))
    np.testing.assert_array_equal(adaptive_smooth(seq, 1.0), seq)


def test_adaptive_smooth_bounded_by_input_range():
    rng = np.random.default_rng(9)
    seq = rng.normal(size=(30, 3))
    out = adaptive_smooth(seq, 0.5)
    for c in range(3):
        assert out[:, c].min() >= seq[:, c].min() - 1e-12
        assert out[:, c].max() <= seq[:, c].max() + 1e-12


def test_adaptive_smooth_alpha_validation():
    with pytest.raises(ValueError):
        adaptive_smooth(np.zeros((3, 1)), 0.0)


def nod_clip(n_frames=40, amp=4, period=16, size=200):
    shifts = np.round(amp * np.sin(2 * np.pi * np.arange(n_frames) / period)).astype(int)
    frames = [textured_frame(0, int(s), size=size) for s in shifts]
    return frames, shifts


def test_vertical_nod_sign_pattern():
    frames, shifts = nod_clip()
    boxes = [BOX] * len(frames)
    seq = head_features(frames, boxes, HeadConfig(gate_threshold=0.001))
    assert len(seq) == len(frames)
    np.testing.assert_array_equal(seq.values[0], 0.0)
    drive = np.diff(shifts)
    checked = 0
    for t in range(1, len(frames)):
        d = drive[t - 1]
        if abs(d) >= 1:
            assert np.sign(seq.vy[t]) == np.sign(d), f"frame {t}"
            assert seq.vx[t] == 0.0
            checked += 1
    assert checked >= 10
    # Energy must be strictly positive exactly while the head moves.
    for t in range(1, len(frames)):
        if abs(drive[t - 1]) >= 1:
            assert seq.energy[t] > 0


def test_smooth_sequence_wraps_values():
    seq = HeadFeatureSequence(np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [1.0, 1.0, 1.0]]))
    out = smooth_sequence(seq, 0.5)
    np.testing.assert_allclose(out.values[:, 0], [0.0, 0.5, 0.75])
