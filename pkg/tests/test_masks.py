import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from physbench.errors import EmptyMask, LengthMismatch
from physbench.masks import (
    BBox,
    MaskSequence,
    bbox_from_mask,
    bbox_from_runs,
    centroid,
    centroid_from_runs,
    decode_rle,
    encode_rle,
    load_mask_file,
    mask_pixel_count,
    read_ppm,
    save_mask_file,
    write_ppm,
)


def test_decode_example_4x4():
    mask = decode_rle([2, 2, 2, 2, 8], 4, 4)
    expected = np.zeros((4, 4), dtype=bool)
    expected[0, 2:4] = True
    expected[1, 2:4] = True
    assert np.array_equal(mask, expected)


def test_decode_all_background():
    assert not decode_rle([16], 4, 4).any()


def test_decode_length_mismatch():
    with pytest.raises(LengthMismatch):
        decode_rle([15], 4, 4)


def test_decode_negative_run():
    with pytest.raises(LengthMismatch):
        decode_rle([17, -1], 4, 4)


def test_encode_all_ones():
    assert encode_rle(np.ones((4, 4), dtype=bool)) == [0, 16]


def test_encode_example_roundtrip():
    mask = decode_rle([2, 2, 2, 2, 8], 4, 4)
    assert encode_rle(mask) == [2, 2, 2, 2, 8]


@given(st.integers(0, 2**64 - 1))
@settings(max_examples=200, deadline=None)
def test_rle_roundtrip_random(seed):
    rng = np.random.default_rng(seed)
    h, w = int(rng.integers(1, 12)), int(rng.integers(1, 12))
    mask = rng.random((h, w)) < rng.random()
    runs = encode_rle(mask)
    assert np.array_equal(decode_rle(runs, w, h), mask)
    assert encode_rle(decode_rle(runs, w, h)) == runs


def test_centroid_2x2_block():
    mask = np.zeros((4, 4), dtype=bool)
    mask[0:2, 0:2] = True
    assert centroid(mask) == (0.5, 0.5)


def test_centroid_single_pixel():
    mask = np.zeros((6, 9), dtype=bool)
    mask[3, 7] = True
    assert centroid(mask) == (7.0, 3.0)


def test_centroid_l_shape():
    # set pixels (row, col): (0,0), (1,0), (1,1)
    mask = np.zeros((3, 3), dtype=bool)
    mask[0, 0] = mask[1, 0] = mask[1, 1] = True
    u, v = centroid(mask)
    assert u == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert v == pytest.approx(2.0 / 3.0, abs=1e-15)


def test_centroid_empty_raises():
    with pytest.raises(EmptyMask):
        centroid(np.zeros((3, 3), dtype=bool))


@given(st.integers(0, 2**32), st.integers(-6, 6), st.integers(-6, 6))
@settings(max_examples=80, deadline=None)
def test_centroid_translation_exact(seed, dc, dr):
    # the fractional offset from the bbox corner is bit-identical under
    # integer translation; only the integer base moves
    rng = np.random.default_rng(seed)
    core = rng.random((8, 8)) < 0.4
    if not core.any():
        core[4, 4] = True
    big = np.zeros((24, 24), dtype=bool)
    big[8:16, 8:16] = core
    shifted = np.zeros_like(big)
    shifted[8 + dr : 16 + dr, 8 + dc : 16 + dc] = core
    rows, cols = np.nonzero(core)
    n = rows.size
    frac_u = int((cols - cols.min()).sum()) / n
    frac_v = int((rows - rows.min()).sum()) / n
    b0 = bbox_from_mask(big)
    b1 = bbox_from_mask(shifted)
    assert (b1.u_min - b0.u_min, b1.v_min - b0.v_min) == (dc, dr)
    assert centroid(big) == (b0.u_min + frac_u, b0.v_min + frac_v)
    assert centroid(shifted) == (b1.u_min + frac_u, b1.v_min + frac_v)


def test_bbox_example():
    mask = decode_rle([2, 2, 2, 2, 8], 4, 4)
    assert bbox_from_mask(mask) == BBox(2, 0, 3, 1)


def test_bbox_full_frame():
    assert bbox_from_mask(np.ones((5, 7), dtype=bool)) == BBox(0, 0, 6, 4)


def test_bbox_empty_raises():
    with pytest.raises(EmptyMask):
        bbox_from_mask(np.zeros((2, 2), dtype=bool))


@given(st.integers(0, 2**32))
@settings(max_examples=100, deadline=None)
def test_bbox_tight_and_bounding(seed):
    rng = np.random.default_rng(seed)
    mask = rng.random((10, 14)) < 0.25
    if not mask.any():
        mask[3, 5] = True
    box = bbox_from_mask(mask)
    rows, cols = np.nonzero(mask)
    assert (cols >= box.u_min).all() and (cols <= box.u_max).all()
    assert (rows >= box.v_min).all() and (rows <= box.v_max).all()
    # every edge is touched
    assert (cols == box.u_min).any() and (cols == box.u_max).any()
    assert (rows == box.v_min).any() and (rows == box.v_max).any()
    assert box.area() >= mask.sum()


@given(st.integers(0, 2**32))
@settings(max_examples=100, deadline=None)
def test_runs_geometry_matches_raster(seed):
    rng = np.random.default_rng(seed)
    h, w = int(rng.integers(1, 20)), int(rng.integers(1, 20))
    mask = rng.random((h, w)) < 0.3
    runs = encode_rle(mask)
    assert mask_pixel_count(runs) == int(mask.sum())
    if mask.any():
        assert centroid_from_runs(runs, w, h) == centroid(mask)
        assert bbox_from_runs(runs, w, h) == bbox_from_mask(mask)


def test_mask_sequence_validates_runs():
    with pytest.raises(LengthMismatch):
        MaskSequence("o", 4, 4, 30.0, frames=((15,),))


def test_mask_file_roundtrip(tmp_path):
    seq = MaskSequence("ball", 4, 4, 240.0, frames=((16,), (2, 2, 2, 2, 8), (0, 16)))
    path = tmp_path / "ball.json"
    save_mask_file(seq, path)
    loaded = load_mask_file(path)
    assert loaded == seq
    # a second save produces identical bytes
    save_mask_file(loaded, tmp_path / "again.json")
    assert (tmp_path / "again.json").read_bytes() == path.read_bytes()


def test_ppm_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    img = rng.integers(0, 256, size=(6, 9, 3), dtype=np.uint8)
    p = tmp_path / "frame_000000.ppm"
    write_ppm(p, img)
    back = read_ppm(p)
    assert np.array_equal(back, img)
    write_ppm(tmp_path / "b.ppm", back)
    assert (tmp_path / "b.ppm").read_bytes() == p.read_bytes()


def test_ppm_header_with_comment(tmp_path):
    img = np.arange(12, dtype=np.uint8).reshape(2, 2, 3)
    raw = b"P6\n# a comment\n2 2\n255\n" + img.tobytes()
    p = tmp_path / "c.ppm"
    p.write_bytes(raw)
    assert np.array_equal(read_ppm(p), img)


def test_ppm_rejects_wrong_maxval(tmp_path):
    p = tmp_path / "bad.ppm"
    p.write_bytes(b"P6\n1 1\n65535\n\x00\x00\x00\x00\x00\x00")
    with pytest.raises(ValueError):
        read_ppm(p)
