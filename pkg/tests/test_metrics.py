import numpy as np
import pytest

from physbench.errors import (
    DimensionMismatch,
    EmptyBackground,
    EmptyInput,
    FrameCountMismatch,
    IdMismatch,
)
from physbench.masks import MaskSequence, encode_rle
from physbench.metrics import (
    MetricSeries,
    background_rmse,
    frame_miou,
    sequence_metrics,
    summarize,
)


def _rect(h, w, r0, r1, c0, c1):
    m = np.zeros((h, w), dtype=bool)
    m[r0:r1, c0:c1] = True
    return m


def test_identical_masks_iou_one():
    m = _rect(10, 10, 2, 6, 3, 8)
    res = frame_miou({"a": m, "b": ~m}, {"a": m, "b": ~m})
    assert res.miou == 1.0
    assert res.per_object == {"a": 1.0, "b": 1.0}


def test_hand_counted_overlap():
    # 2x2 blocks offset by one column: intersection 2, union 6
    gt = _rect(4, 4, 0, 2, 0, 2)
    pred = _rect(4, 4, 0, 2, 1, 3)
    res = frame_miou({"o": gt}, {"o": pred})
    assert res.miou == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_both_empty_excluded():
    empty = np.zeros((4, 4), dtype=bool)
    res = frame_miou({"o": empty}, {"o": empty})
    assert res.miou is None
    assert res.per_object["o"] is None


def test_one_empty_scores_zero():
    m = _rect(4, 4, 0, 2, 0, 2)
    empty = np.zeros((4, 4), dtype=bool)
    assert frame_miou({"o": m}, {"o": empty}).miou == 0.0
    assert frame_miou({"o": empty}, {"o": m}).miou == 0.0


def test_id_mismatch():
    m = _rect(4, 4, 0, 2, 0, 2)
    with pytest.raises(IdMismatch):
        frame_miou({"a": m}, {"b": m})


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        frame_miou({"a": np.zeros((4, 4), bool)}, {"a": np.zeros((5, 4), bool)})


def test_miou_symmetric():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a = rng.random((8, 8)) < 0.4
        b = rng.random((8, 8)) < 0.4
        assert frame_miou({"o": a}, {"o": b}).miou == frame_miou({"o": b}, {"o": a}).miou


def test_nested_masks_exact_ratio():
    inner = _rect(12, 12, 3, 6, 3, 6)    # 9 px
    outer = _rect(12, 12, 2, 8, 2, 8)    # 36 px, contains inner
    res = frame_miou({"o": inner}, {"o": outer})
    assert res.miou == pytest.approx(9 / 36, abs=1e-15)


def test_miou_translation_invariant_away_from_borders():
    rng = np.random.default_rng(1)
    core_a = rng.random((6, 6)) < 0.5
    core_b = rng.random((6, 6)) < 0.5
    core_a[0, 0] = core_b[1, 1] = True

    def place(core, dr, dc):
        m = np.zeros((30, 30), dtype=bool)
        m[10 + dr : 16 + dr, 10 + dc : 16 + dc] = core
        return m

    base = frame_miou({"o": place(core_a, 0, 0)}, {"o": place(core_b, 0, 0)}).miou
    moved = frame_miou({"o": place(core_a, 5, -4)}, {"o": place(core_b, 5, -4)}).miou
    assert moved == base


# -- background RMSE ---------------------------------------------------------


def _flat(h, w, rgb):
    img = np.empty((h, w, 3), dtype=np.uint8)
    img[:, :] = rgb
    return img


def test_identical_frames_zero():
    img = _flat(6, 6, (100, 150, 200))
    assert background_rmse(img, img, [np.zeros((6, 6), bool)]) == 0.0


def test_constant_offset():
    gt = _flat(6, 6, (100, 100, 100))
    pred = _flat(6, 6, (125, 125, 125))  # +25.5 would clip; 25/255 offset
    val = background_rmse(gt, pred, [np.zeros((6, 6), bool)])
    assert val == pytest.approx(25.0 / 255.0, abs=1e-12)


def test_foreground_differences_ignored():
    gt = _flat(6, 6, (10, 20, 30))
    pred = gt.copy()
    mask = _rect(6, 6, 1, 4, 1, 4)
    pred[mask] = (250, 0, 0)
    assert background_rmse(gt, pred, [mask]) == 0.0


def test_constant_offset_exact_on_float_frames():
    gt = np.full((5, 5, 3), 0.3)
    pred = np.full((5, 5, 3), 0.4)
    val = background_rmse(gt, pred, [np.zeros((5, 5), bool)])
    assert val == pytest.approx(0.1, abs=1e-12)


def test_dilated_rectangle_area_ratio():
    # masks dilated by 1 px: IoU equals the exact area ratio
    for (h0, w0) in ((4, 6), (3, 3), (5, 9)):
        inner = _rect(20, 20, 8, 8 + h0, 5, 5 + w0)
        dilated = _rect(20, 20, 7, 9 + h0, 4, 6 + w0)
        got = frame_miou({"o": inner}, {"o": dilated}).miou
        assert got == pytest.approx((h0 * w0) / ((h0 + 2) * (w0 + 2)), abs=1e-12)


def test_rmse_linear_in_offset():
    gt = _flat(8, 8, (60, 60, 60))
    mask = [np.zeros((8, 8), bool)]
    a = background_rmse(gt, _flat(8, 8, (70, 70, 70)), mask)
    b = background_rmse(gt, _flat(8, 8, (80, 80, 80)), mask)
    assert b == pytest.approx(2 * a, rel=1e-12)


def test_rmse_symmetric_given_fixed_masks():
    rng = np.random.default_rng(2)
    gt = rng.integers(0, 256, (8, 8, 3), dtype=np.uint8)
    pred = rng.integers(0, 256, (8, 8, 3), dtype=np.uint8)
    mask = [_rect(8, 8, 0, 3, 0, 3)]
    assert background_rmse(gt, pred, mask) == background_rmse(pred, gt, mask)


def test_empty_background_error():
    img = _flat(4, 4, (0, 0, 0))
    with pytest.raises(EmptyBackground):
        background_rmse(img, img, [np.ones((4, 4), bool)])


# -- sequences and summaries -------------------------------------------------


def _seq(frames_masks, w=16, h=12, fps=24.0, oid="o"):
    return MaskSequence(oid, w, h, fps, tuple(tuple(encode_rle(m)) for m in frames_masks))


def test_sequence_identity():
    masks = [_rect(12, 16, 2, 6, k, k + 4) for k in range(6)]
    gt = {"o": _seq(masks)}
    series = sequence_metrics(gt, gt)
    assert series.per_frame_miou == (1.0,) * 6
    assert series.mean_miou() == 1.0


def test_sequence_frozen_prediction_decays_monotonically():
    # ground truth translates; prediction frozen at frame 0
    masks = [_rect(12, 32, 2, 6, 2 + 2 * k, 10 + 2 * k) for k in range(8)]
    frozen = [masks[0]] * 8
    series = sequence_metrics({"o": _seq(masks, w=32)}, {"o": _seq(frozen, w=32)})
    vals = series.per_frame_miou
    assert vals[0] == 1.0
    first_zero = next(i for i, v in enumerate(vals) if v == 0.0)
    for i in range(first_zero):
        assert vals[i] > vals[i + 1]
    # analytic overlap of two 8x4 rectangles offset by 2k columns
    for k in range(8):
        inter = max(0, 8 - 2 * k) * 4
        union = 2 * 8 * 4 - inter
        assert vals[k] == pytest.approx(inter / union if inter else 0.0, abs=1e-12)


def test_sequence_frame_count_mismatch():
    a = _seq([_rect(12, 16, 0, 2, 0, 2)] * 3)
    b = _seq([_rect(12, 16, 0, 2, 0, 2)] * 4)
    with pytest.raises(FrameCountMismatch):
        sequence_metrics({"o": a}, {"o": b})


def test_sequence_with_frames_rmse():
    masks = [_rect(12, 16, 2, 6, 3, 8)] * 3
    gt = {"o": _seq(masks)}
    gt_frames = [_flat(12, 16, (50, 60, 70))] * 3
    pred_frames = [_flat(12, 16, (55, 60, 70))] * 3
    series = sequence_metrics(gt, gt, gt_frames, pred_frames)
    expected = np.sqrt((5.0 / 255.0) ** 2 / 3.0)
    for v in series.per_frame_bg_rmse:
        assert v == pytest.approx(expected, rel=1e-12)


def test_summarize_single_constant():
    series = MetricSeries((0.5, 0.5, 0.5), None, 3)
    summary = summarize([series], "demo")
    assert summary.mean_miou == pytest.approx(0.5)
    assert summary.n_videos == 1


def test_summarize_two_series_mean():
    a = MetricSeries((0.2, 0.2), None, 2)
    b = MetricSeries((0.4, 0.4), None, 2)
    summary = summarize([a, b], "demo")
    assert summary.mean_miou == pytest.approx(0.3)
    assert summary.miou_vs_frame[0] == (pytest.approx(0.3), pytest.approx(0.1), 2)


def test_summarize_skips_absent_frames():
    a = MetricSeries((None, 0.6, 0.4), None, 3)
    summary = summarize([a], "demo")
    assert summary.mean_miou == pytest.approx(0.5)
    assert summary.miou_vs_frame[0][2] == 0  # no defined entries at frame 0


def test_summarize_empty():
    with pytest.raises(EmptyInput):
        summarize([], "demo")
