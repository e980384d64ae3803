import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signtutor.errors import (
    DegenerateBoxError,
    DegenerateTrajectoryError,
    TooShortError,
)
from signtutor.features import (
    AssemblyConfig,
    AssemblyError,
    Group,
    HandObservation,
    ObservationFrame,
    ObservationSequence,
    assemble,
    normalize_trajectories,
    position_features,
    trim_sequence,
)
from signtutor.handshape import FeatureRanges

FACE = (300, 50, 80, 100)


def obs(x, y, vx=0.0, vy=0.0, shape=None):
    return HandObservation(x, y, vx, vy, shape)


def frame(left=None, right=None, head=(0.0, 0.0, 0.0)):
    return ObservationFrame(left, right, head, FACE)


def present_frame(t):
    return frame(left=obs(100 + t, 200.0), right=obs(400 - t, 210.0), head=(0.1, 0.0, 0.01))


def absent_frame():
    return frame()


# --- trimming -------------------------------------------------------------------


def test_trim_drops_lead_and_transitions():
    # [absent x3, present x20], N=6, T=2: frames 3..22 survive the lead trim,
    # then 5..20 after the transition trim -> 16 frames (hand trace).
    frames = [absent_frame()] * 3 + [present_frame(t) for t in range(20)]
    out = trim_sequence(ObservationSequence(frames), n_gap=6, t_transition=2)
    assert len(out) == 16
    assert out.frames[0].left.x == 100 + 2  # original frame index 5


def test_trim_bridges_short_gap_with_copies():
    frames = (
        [present_frame(t) for t in range(5)]
        + [absent_frame()] * 2
        + [present_frame(t) for t in range(5, 10)]
    )
    out = trim_sequence(ObservationSequence(frames), n_gap=6, t_transition=0)
    assert len(out) == 12
    bridged = out.frames[5:7]
    for f in bridged:
        assert f.left is not None and f.left.copied
        assert f.left.x == 100 + 4  # copied from the last detected frame
        assert f.left.vx == 0.0  # copied frames carry no fabricated motion
    assert not out.frames[7].left.copied


def test_trim_long_gap_ends_sign():
    frames = (
        [present_frame(t) for t in range(8)]
        + [absent_frame()] * 6
        + [present_frame(t) for t in range(8, 12)]
    )
    out = trim_sequence(ObservationSequence(frames), n_gap=6, t_transition=0)
    assert len(out) == 8  # the gap and everything after it is gone
    assert out.frames[-1].left.x == 100 + 7


def test_trim_all_absent_raises():
    with pytest.raises(TooShortError):
        trim_sequence(ObservationSequence([absent_frame()] * 5))


def test_trim_everything_trimmed_raises():
    frames = [present_frame(0), present_frame(1)]
    with pytest.raises(TooShortError):
        trim_sequence(ObservationSequence(frames), n_gap=6, t_transition=2)


def test_trim_idempotent_for_t_zero():
    frames = (
        [absent_frame()] * 2
        + [present_frame(t) for t in range(6)]
        + [absent_frame()] * 3
        + [present_frame(t) for t in range(6, 12)]
    )
    once = trim_sequence(ObservationSequence(frames), n_gap=6, t_transition=0)
    twice = trim_sequence(once, n_gap=6, t_transition=0)
    assert twice.frames == once.frames


def test_trim_fills_individually_missing_hand():
    f_both = present_frame(0)
    f_left_only = frame(left=obs(110.0, 205.0))
    out = trim_sequence(
        ObservationSequence([f_both, f_left_only]), n_gap=6, t_transition=0
    )
    assert out.frames[1].right is not None and out.frames[1].right.copied


# --- trajectory normalization ----------------------------------------------------


def test_normalize_hand_worked_example():
    left = np.array([[0.0, 0.0], [10.0, 0.0], [10.0, 10.0]])
    right = np.zeros((0, 2))
    ln, rn, params = normalize_trajectories(left, right)
    np.testing.assert_allclose(ln, [[0, 0], [1, 0], [1, 1]])
    assert params.x_m == 5.0 and params.y_m == 5.0 and params.d == 5.0
    assert params.left_start == (0.0, 0.0)
    assert rn.shape == (0, 2)


def test_normalize_translation_and_scale_invariance():
    rng = np.random.default_rng(1)
    left = rng.uniform(0, 100, size=(12, 2))
    right = rng.uniform(0, 100, size=(12, 2))
    base_l, base_r, _ = normalize_trajectories(left, right)
    shifted_l, shifted_r, _ = normalize_trajectories(left + [100, 70], right + [100, 70])
    scaled_l, scaled_r, _ = normalize_trajectories(left * 3, right * 3)
    np.testing.assert_allclose(shifted_l, base_l, atol=1e-12)
    np.testing.assert_allclose(shifted_r, base_r, atol=1e-12)
    np.testing.assert_allclose(scaled_l, base_l, atol=1e-12)
    np.testing.assert_allclose(scaled_r, base_r, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    seed=st.integers(0, 2**31 - 1),
    tx=st.floats(-1e4, 1e4),
    ty=st.floats(-1e4, 1e4),
    scale=st.floats(0.01, 100.0),
)
def test_normalize_invariance_property(seed, tx, ty, scale):
    rng = np.random.default_rng(seed)
    left = rng.uniform(-50, 50, size=(rng.integers(1, 20), 2))
    right = rng.uniform(-50, 50, size=(rng.integers(1, 20), 2))
    if max(np.ptp(np.vstack([left, right]), axis=0)) == 0:
        return
    base_l, base_r, params = normalize_trajectories(left, right)
    # Pre-shift coordinates live in [0, 1].
    pre_l = base_l + np.asarray(params.left_start)
    pre_r = base_r + np.asarray(params.right_start)
    for pre in (pre_l, pre_r):
        assert pre.min() >= -1e-9 and pre.max() <= 1 + 1e-9
    got_l, got_r, _ = normalize_trajectories(left * scale + [tx, ty], right * scale + [tx, ty])
    np.testing.assert_allclose(got_l, base_l, atol=1e-9)
    np.testing.assert_allclose(got_r, base_r, atol=1e-9)


def test_normalize_joint_scaling_preserves_interhand_ratios():
    # Joint normalization keeps the ratio of inter-hand distances between
    # frames; independent per-hand normalization would not.
    left = np.array([[0.0, 0.0], [10.0, 0.0]])
    right = np.array([[0.0, 5.0], [30.0, 5.0]])
    ln, rn, params = normalize_trajectories(left, right)
    pre_l = ln + np.asarray(params.left_start)
    pre_r = rn + np.asarray(params.right_start)
    raw_d = np.linalg.norm(left - right, axis=1)
    norm_d = np.linalg.norm(pre_l - pre_r, axis=1)
    assert norm_d[1] / norm_d[0] == pytest.approx(raw_d[1] / raw_d[0], abs=1e-12)


def test_normalize_degenerate_raises():
    pts = np.tile([[3.0, 4.0]], (5, 1))
    with pytest.raises(DegenerateTrajectoryError):
        normalize_trajectories(pts, pts)
    with pytest.raises(DegenerateTrajectoryError):
        normalize_trajectories(np.zeros((0, 2)), np.zeros((0, 2)))


# --- position features -----------------------------------------------------------


def test_position_features_basics():
    box = (100, 100, 80, 100)  # center (140, 150)
    assert position_features((140.0, 150.0), box) == (0.0, 0.0)
    assert position_features((220.0, 150.0), box) == (1.0, 0.0)
    # Half a face-height above the center: image y points down -> -0.5.
    assert position_features((140.0, 100.0), box) == (0.0, -0.5)


def test_position_features_zero_area_raises():
    with pytest.raises(DegenerateBoxError):
        position_features((0.0, 0.0), (0, 0, 10, 0))


# --- assembly --------------------------------------------------------------------


def shaped_frames(n=10):
    rng = np.random.default_rng(4)
    frames = []
    for t in range(n):
        shape_l = rng.uniform(0, 5, 19)
        shape_r = rng.uniform(0, 5, 19)
        frames.append(
            frame(
                left=obs(100 + 3 * t, 200 - t, 3.0, -1.0, shape_l),
                right=obs(400 - 2 * t, 210 + t, -2.0, 1.0, shape_r),
                head=(0.2, 0.05, 0.0),
            )
        )
    return frames


def fitted_config(frames, **kwargs):
    shapes = [f.left.shape for f in frames] + [f.right.shape for f in frames]
    return AssemblyConfig(shape_ranges=FeatureRanges.fit(shapes), **kwargs)


def test_assemble_default_dims():
    frames = shaped_frames()
    seq = ObservationSequence(frames)
    config = fitted_config(frames)
    assert assemble(seq, Group.MANUAL, config).dim == 50
    assert assemble(seq, Group.NONMANUAL, config).dim == 3
    assert assemble(seq, Group.COMBINED, config).dim == 53


def test_assemble_shape_disabled_dims():
    frames = shaped_frames()
    seq = ObservationSequence(frames)
    config = AssemblyConfig(include_shape=False)
    assert assemble(seq, Group.MANUAL, config).dim == 12
    assert assemble(seq, Group.COMBINED, config).dim == 15


def test_assemble_nonmanual_ignores_hand_channels():
    frames = shaped_frames()
    config = AssemblyConfig(include_shape=False)
    base = assemble(ObservationSequence(frames), Group.NONMANUAL, config)
    perturbed = [
        ObservationFrame(
            HandObservation(f.left.x + 999, f.left.y - 999, 5, 5),
            None,
            f.head,
            f.face_box,
        )
        for f in frames
    ]
    got = assemble(ObservationSequence(perturbed), Group.NONMANUAL, config)
    np.testing.assert_array_equal(got.rows, base.rows)


def test_assemble_rows_finite_and_tagged():
    frames = shaped_frames()
    config = fitted_config(frames)
    out = assemble(ObservationSequence(frames), Group.COMBINED, config)
    assert np.isfinite(out.rows).all()
    assert out.layout_tag == config.layout_tag
    assert "traj" in out.layout_tag and "shape" in out.layout_tag


def test_assemble_head_rows_are_smoothed():
    frames = [
        frame(left=obs(0, 0), head=(0.0, 0.0, 0.0)),
        frame(left=obs(10, 0), head=(1.0, 0.0, 0.0)),
        frame(left=obs(10, 10), head=(1.0, 0.0, 0.0)),
    ]
    out = assemble(ObservationSequence(frames), Group.NONMANUAL, AssemblyConfig())
    np.testing.assert_allclose(out.rows[:, 0], [0.0, 0.5, 0.75])


def test_assemble_never_detected_hand_contributes_zeros():
    frames = [frame(left=obs(10.0 * t, 5.0 * t)) for t in range(6)]
    config = AssemblyConfig(include_shape=False)
    out = assemble(ObservationSequence(frames), Group.MANUAL, config)
    np.testing.assert_array_equal(out.rows[:, 6:], 0.0)
    assert np.abs(out.rows[:, :6]).sum() > 0


def test_assemble_requires_shape_ranges():
    frames = shaped_frames()
    with pytest.raises(AssemblyError):
        assemble(ObservationSequence(frames), Group.MANUAL, AssemblyConfig())


def test_layout_tag_reflects_blocks():
    assert AssemblyConfig().layout_tag == "manual[traj,vel,pos,shape]x2+head[energy,vx,vy]:v1"
    assert AssemblyConfig(include_shape=False).layout_tag == "manual[traj,vel,pos]x2+head[energy,vx,vy]:v1"


def test_column_slices_partition_combined():
    config = AssemblyConfig(include_shape=False)
    manual = config.manual_columns()
    nonmanual = config.nonmanual_columns()
    assert manual == list(range(12))
    assert nonmanual == [12, 13, 14]
    assert len(manual) + len(nonmanual) == config.dim(Group.COMBINED)
