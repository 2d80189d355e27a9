import numpy as np
import pytest

from gafdetect.core.patterns import PatternClass
from gafdetect.core.samples import LabeledSample
from gafdetect.detector import detection_loss, iou_1d, responsible_pairs, sample_loss
from gafdetect.errors import InvalidInput, ShapeError

from .helpers import make_series, numerical_gradient


@pytest.mark.parametrize(
    "w_pred, w_true, expected",
    [(8, 16, 0.5), (16, 8, 0.5), (5, 5, 1.0), (12.0, 9.0, 0.75)],
)
def test__iou_1d__must_divide_the_shorter_width_by_the_longer(w_pred, w_true, expected):
    assert iou_1d(w_pred, w_true) == pytest.approx(expected)
    assert isinstance(iou_1d(w_pred, w_true), float)


def test__iou_1d__must_broadcast_arrays():
    np.testing.assert_allclose(iou_1d(np.array([4.0, 10.0]), np.array([8.0, 5.0])), 0.5)


@pytest.mark.parametrize("w_pred, w_true", [(0, 5), (5, 0), (-1.0, 5)])
def test__iou_1d__must_raise_invalid_input__when_a_width_is_not_positive(
    w_pred, w_true
):
    with pytest.raises(InvalidInput):
        iou_1d(w_pred, w_true)


def test__responsible_pairs__must_pick_the_better_overlap_and_break_ties_to_zero():
    w_norm = np.array([[0.5, 0.25], [0.25, 0.5], [0.25, 1.0]])
    np.testing.assert_array_equal(responsible_pairs(w_norm, np.full(3, 8.0)), [0, 1, 0])


def test__detection_loss__must_compute_each_term_for_neutral_outputs():
    terms = detection_loss(np.zeros((1, 12)), [0], [16])
    assert terms.coord == pytest.approx(5.0 * (np.sqrt(0.5) - 1.0) ** 2)
    assert terms.conf_obj == pytest.approx(0.0)
    assert terms.conf_noobj == pytest.approx(0.5 * 0.25)
    assert terms.cls == pytest.approx(np.log(8.0))
    assert terms.total == pytest.approx(
        terms.coord + terms.conf_obj + terms.conf_noobj + terms.cls
    )
    np.testing.assert_array_equal(terms.responsible, [0])


def test__detection_loss__must_vanish__when_prediction_is_exact():
    raw = np.zeros((1, 12))
    raw[0, 1] = 30.0
    raw[0, 3] = -30.0
    raw[0, 4 + 2] = 40.0
    terms = detection_loss(raw, [2], [8])
    assert terms.total < 1e-9
    assert np.max(np.abs(terms.grad)) < 1e-9


def test__detection_loss__must_scale_weighted_terms_linearly():
    raw = np.random.default_rng(0).normal(size=(4, 12))
    classes, sizes = [0, 3, 5, 7], [5, 9, 12, 16]
    base = detection_loss(raw, classes, sizes)
    heavy = detection_loss(raw, classes, sizes, lambda_coord=10.0, lambda_noobj=1.0)
    assert heavy.coord == pytest.approx(2 * base.coord)
    assert heavy.conf_noobj == pytest.approx(2 * base.conf_noobj)
    assert heavy.conf_obj == base.conf_obj
    assert heavy.cls == base.cls


def test__detection_loss__must_average_over_the_batch():
    raw = np.random.default_rng(1).normal(size=(3, 12))
    classes, sizes = [1, 4, 6], [6, 10, 15]
    batch = detection_loss(raw, classes, sizes)
    singles = [detection_loss(raw[i], [classes[i]], [sizes[i]]) for i in range(3)]
    assert batch.total == pytest.approx(np.mean([s.total for s in singles]))
    np.testing.assert_allclose(
        batch.grad * 3, np.concatenate([s.grad for s in singles]), atol=1e-12
    )


@pytest.mark.parametrize("seed", [2, 3, 4])
def test__detection_loss_gradient__must_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(3, 12))
    classes, sizes = [0, 3, 7], [5, 9, 14]
    terms = detection_loss(raw, classes, sizes)

    def loss():
        return detection_loss(raw, classes, sizes).total

    np.testing.assert_allclose(
        terms.grad, numerical_gradient(loss, raw), rtol=1e-5, atol=1e-8
    )


@pytest.mark.parametrize(
    "raw, classes, sizes",
    [
        (np.zeros((2, 11)), [0, 0], [5, 5]),
        (np.zeros((2, 12)), [0], [5, 5]),
        (np.zeros((2, 12)), [0, 0], [5, 5, 5]),
    ],
)
def test__detection_loss__must_raise_shape_error__when_shapes_disagree(
    raw, classes, sizes
):
    with pytest.raises(ShapeError):
        detection_loss(raw, classes, sizes)


@pytest.mark.parametrize("classes, sizes", [([8], [5]), ([-1], [5]), ([0], [0])])
def test__detection_loss__must_raise_invalid_input__when_labels_are_out_of_range(
    classes, sizes
):
    with pytest.raises(InvalidInput):
        detection_loss(np.zeros((1, 12)), classes, sizes)


def test__sample_loss__must_match_the_batch_loss_of_one_sample():
    window = make_series(1.0 + 0.01 * np.arange(16))
    target = LabeledSample(window, PatternClass.BULLISH_HARAMI, 7)
    raw = np.random.default_rng(5).normal(size=12)
    expected = detection_loss(raw[None, :], [6], [7])
    assert sample_loss(raw, target).total == expected.total
    assert sample_loss(raw, target, lambda_coord=1.0).coord == pytest.approx(
        expected.coord / 5.0
    )
