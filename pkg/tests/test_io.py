"""Clip preprocessing and the file-level round trips."""

import numpy as np
import pytest

from mobivsr import (
    Clip,
    ValidationError,
    build_mobivsr,
    load_clip_dir,
    preprocess_clip,
    read_clip,
    read_graph,
    write_clip,
    write_graph,
    write_ppm,
)


def frames(fill):
    return np.full((29, 256, 256, 3), fill, dtype=np.uint8)


def test_all_white_maps_to_exact_ones():
    clip = preprocess_clip(frames(255))
    assert np.all(clip.frames == 1.0)


def test_all_black_maps_to_zeros():
    assert np.all(preprocess_clip(frames(0)).frames == 0.0)


def test_crop_offset_arithmetic():
    raw = frames(0)
    raw[:, 80, 80, :] = 255  # lands at clip position (0, 0)
    raw[:, 79, 80, :] = 255  # one row above the crop, discarded
    clip = preprocess_clip(raw)
    assert np.all(clip.frames[:, 0, 0] == 1.0)
    assert np.all(clip.frames[:, 1:, :] == 0.0)
    assert np.all(clip.frames[:, 0, 1:] == 0.0)


def test_luma_weights_match_bt601():
    raw = frames(0)
    raw[..., 0] = 255  # pure red
    clip = preprocess_clip(raw)
    assert clip.frames[0, 0, 0] == pytest.approx(0.299, abs=1e-6)


def test_wrong_frame_count_rejected():
    with pytest.raises(ValidationError):
        preprocess_clip(np.zeros((28, 256, 256, 3), dtype=np.uint8))


def test_wrong_frame_size_rejected():
    with pytest.raises(ValidationError):
        preprocess_clip(np.zeros((29, 96, 96, 3), dtype=np.uint8))


def test_output_always_in_unit_range():
    rng = np.random.default_rng(0)
    clip = preprocess_clip(rng.integers(0, 256, size=(29, 256, 256, 3)).astype(np.uint8))
    assert clip.frames.min() >= 0.0
    assert clip.frames.max() <= 1.0


def test_clip_invariants_enforced():
    with pytest.raises(ValidationError):
        Clip(frames=np.zeros((28, 96, 96), dtype=np.float32))
    with pytest.raises(ValidationError):
        Clip(frames=np.full((29, 96, 96), 1.5, dtype=np.float32))


def _write_frame_dir(path, raw, as_ppm=True):
    path.mkdir(exist_ok=True)
    for index, frame in enumerate(raw):
        name = path / f"frame_{index:02d}"
        if as_ppm:
            write_ppm(name.with_suffix(".ppm"), frame)
        else:
            name.with_suffix(".rgb").write_bytes(frame.tobytes())


def test_ppm_frame_dir_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    raw = rng.integers(0, 256, size=(29, 256, 256, 3)).astype(np.uint8)
    _write_frame_dir(tmp_path / "ppm", raw)
    loaded = load_clip_dir(tmp_path / "ppm")
    np.testing.assert_array_equal(loaded, raw)


def test_raw_frame_dir_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    raw = rng.integers(0, 256, size=(29, 256, 256, 3)).astype(np.uint8)
    _write_frame_dir(tmp_path / "raw", raw, as_ppm=False)
    loaded = load_clip_dir(tmp_path / "raw")
    np.testing.assert_array_equal(loaded, raw)


def test_frame_dir_with_wrong_count(tmp_path):
    raw = np.zeros((29, 256, 256, 3), dtype=np.uint8)
    _write_frame_dir(tmp_path / "short", raw[:5])
    with pytest.raises(ValidationError):
        load_clip_dir(tmp_path / "short")


def test_frame_dir_with_garbage_file(tmp_path):
    d = tmp_path / "bad"
    d.mkdir()
    for i in range(29):
        (d / f"{i:02d}.rgb").write_bytes(b"too short")
    with pytest.raises(ValidationError):
        load_clip_dir(d)


def test_clip_file_round_trip(tmp_path):
    clip = preprocess_clip(np.random.default_rng(3).integers(0, 256, size=(29, 256, 256, 3))
                           .astype(np.uint8))
    write_clip(tmp_path / "clip.npy", clip)
    again = read_clip(tmp_path / "clip.npy")
    np.testing.assert_array_equal(again.frames, clip.frames)


def test_graph_file_round_trip_on_disk(tmp_path):
    graph = build_mobivsr(2)
    write_graph(tmp_path / "g.json", graph)
    assert read_graph(tmp_path / "g.json") == graph
