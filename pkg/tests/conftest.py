import numpy as np
import pytest

from gafdetect.dataset import DatasetConfig, SyntheticConfig, build_dataset
from gafdetect.dataset import generate_synthetic
from gafdetect.rules import RuleThresholds, calibrate_thresholds


@pytest.fixture(scope="session")
def corpus():
    return generate_synthetic(SyntheticConfig(seed=11, n_bars=40_000))


@pytest.fixture(scope="session")
def loose_thresholds(corpus):
    # halved trend cutoffs and a single body cutoff, so every rule matches often
    calibrated = calibrate_thresholds(corpus)
    body = float(np.median(np.abs(corpus.close - corpus.open)))
    return RuleThresholds(
        calibrated.trend_cutoff_up / 2, calibrated.trend_cutoff_down / 2, body, body
    )


@pytest.fixture(scope="session")
def small_dataset(corpus, loose_thresholds):
    return build_dataset(
        corpus,
        cfg=DatasetConfig(top_k=3, max_per_class=40),
        thresholds=loose_thresholds,
        provenance="seed=11",
    )
