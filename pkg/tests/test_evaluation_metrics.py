import io

import numpy as np
import pandas as pd
import pytest

from gafdetect.detector import DetectorArchitecture, DetectorModel
from gafdetect.errors import InvalidInput, ShapeError
from gafdetect.evaluation import (
    EvalReport,
    evaluate,
    evaluate_predictions,
    predict_labels,
    window_confusion,
)

BALANCED_CLASSES = np.repeat(np.arange(8), 3)
BALANCED_SIZES = np.tile([5, 10, 16], 8)


def test__evaluate_predictions__must_score_a_perfect_predictor_as_one():
    report = evaluate_predictions(
        BALANCED_CLASSES, BALANCED_SIZES, BALANCED_CLASSES, BALANCED_SIZES
    )
    assert report.n_samples == 24
    assert report.macro_accuracy == 1.0
    assert report.weighted_accuracy == 1.0
    assert report.window_accuracy == 1.0
    assert report.window_within_one_accuracy == 1.0
    assert set(report.class_counts.values()) == {3}


def test__evaluate_predictions__must_average_classes__when_one_class_always_wins():
    report = evaluate_predictions(
        BALANCED_CLASSES, BALANCED_SIZES, np.zeros(24, dtype=int), BALANCED_SIZES
    )
    assert report.macro_accuracy == pytest.approx(0.125)
    assert report.weighted_accuracy == pytest.approx(0.125)
    assert report.per_class_accuracy["MorningStar"] == 1.0
    assert report.per_class_accuracy["BearishHarami"] == 0.0


def test__evaluate_predictions__must_skip_absent_classes_in_the_macro_mean():
    sizes = [5, 5, 5, 5]
    report = evaluate_predictions([0, 0, 0, 2], sizes, [0, 0, 1, 2], sizes)
    assert report.per_class_accuracy["MorningStar"] == pytest.approx(2 / 3)
    assert report.per_class_accuracy["BullishEngulfing"] == 1.0
    assert report.per_class_accuracy["EveningStar"] is None
    assert report.class_counts["EveningStar"] == 0
    assert report.macro_accuracy == pytest.approx((2 / 3 + 1.0) / 2)
    assert report.weighted_accuracy == 0.75


def test__evaluate_predictions__must_count_window_sizes_off_by_one():
    report = evaluate_predictions([1] * 4, [5, 8, 12, 16], [1] * 4, [5, 9, 14, 15])
    assert report.window_accuracy == 0.25
    assert report.window_within_one_accuracy == 0.75
    confusion = np.array(report.window_confusion)
    assert confusion.sum() == 4
    assert confusion[8 - 5, 9 - 5] == 1
    assert confusion[16 - 5, 15 - 5] == 1


def test__window_confusion__must_place_counts_by_true_row_and_predicted_column():
    matrix = window_confusion([5, 5, 16], [5, 6, 16])
    assert matrix.shape == (12, 12)
    assert matrix[0, 0] == 1
    assert matrix[0, 1] == 1
    assert matrix[11, 11] == 1
    assert matrix.sum() == 3


@pytest.mark.parametrize("true, pred", [([4], [5]), ([5], [17])])
def test__window_confusion__must_raise_invalid_input__when_size_is_out_of_range(
    true, pred
):
    with pytest.raises(InvalidInput):
        window_confusion(true, pred)


def test__evaluate_predictions__must_raise__when_inputs_are_invalid():
    with pytest.raises(InvalidInput):
        evaluate_predictions([], [], [], [])
    with pytest.raises(ShapeError):
        evaluate_predictions([0, 1], [5, 5], [0], [5, 5])
    with pytest.raises(InvalidInput):
        evaluate_predictions([8], [5], [0], [5])


def test__eval_report__must_render_text_and_confusion_csv():
    report = evaluate_predictions([0, 3], [5, 7], [0, 2], [5, 8])
    text = report.to_text()
    assert '"macro_accuracy": 0.5' in text
    assert "Avg" in text
    assert "window size confusion" in text
    buffer = io.StringIO()
    report.confusion_to_csv(buffer)
    buffer.seek(0)
    frame = pd.read_csv(buffer, index_col=0)
    assert frame.index.name == "true"
    assert list(frame.columns) == [str(w) for w in range(5, 17)]
    assert frame.loc[7, "8"] == 1


def test__eval_report__must_round_trip_through_json(tmp_path):
    report = evaluate_predictions([0, 3, 3], [5, 7, 9], [0, 2, 3], [5, 8, 9])
    path = tmp_path / "report.json"
    report.to_json(path)
    assert EvalReport.from_json(path) == report


def test__evaluate__must_agree_with_predict_labels(small_dataset):
    _, records = small_dataset
    architecture = DetectorArchitecture(widths=(4, 4, 4, 4), kernels=(3, 3, 1, 1))
    model = DetectorModel(architecture)
    chosen = records[:20]
    report = evaluate(model, chosen, batch_size=7)
    classes, sizes = predict_labels(
        model, np.stack([r.tensor.channels for r in chosen]), batch_size=7
    )
    expected = evaluate_predictions(
        [r.sample.pattern_class.index for r in chosen],
        [r.sample.window_size for r in chosen],
        classes,
        sizes,
    )
    assert report == expected
    with pytest.raises(InvalidInput):
        evaluate(model, [])
