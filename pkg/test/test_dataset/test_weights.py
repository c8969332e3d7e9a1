from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pixel_eql.dataset import label_weights
from pixel_eql.errors import DegenerateDataError


def test_two_present_objects_in_one_sample():
    weights = label_weights(np.array([[1, 1]]), alpha=0.1, beta=10.0)
    assert weights.mu == 1.0
    assert weights.eta.tolist() == [[0.5, 0.5]]
    assert weights.eta_bar[0, 0] == pytest.approx(0.1067, abs=1e-4)


def test_equal_frequencies_give_equal_weights():
    exist = np.array([[1, 0, 1], [0, 1, 1], [1, 1, 0]])
    weights = label_weights(exist)
    assert np.allclose(weights.inverse_frequency, 0.5)
    row = weights.eta_bar[2]
    assert row[0] == pytest.approx(row[1])


def test_rare_object_gets_larger_weight():
    exist = np.array([[1, 0]] * 9 + [[1, 1]])
    weights = label_weights(exist)
    assert weights.eta_bar[-1, 1] > weights.eta_bar[-1, 0]


def test_never_present_object_is_excluded_from_mean(caplog):
    weights = label_weights(np.array([[1, 0], [1, 0]]))
    assert weights.inverse_frequency.tolist() == [0.5, 0.0]
    assert weights.mu == 0.5
    assert "never appear" in caplog.text


def test_all_absent_is_degenerate():
    with pytest.raises(DegenerateDataError):
        label_weights(np.zeros((4, 3)))


def test_stacked_labels_keep_their_shape():
    exist = np.random.default_rng(0).integers(0, 2, size=(6, 4, 3))
    exist[0, 0] = 1
    assert label_weights(exist).eta_bar.shape == (6, 4, 3)


@settings(max_examples=50, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 20), st.integers(1, 6)), elements=st.integers(0, 1)))
def test_weights_stay_inside_alpha_alpha_plus_one(exist):
    if not exist.any():
        return
    weights = label_weights(exist, alpha=0.1, beta=10.0)
    assert (weights.eta_bar >= 0.1).all()
    assert (weights.eta_bar <= 1.1).all()


def test_saturated_weight_reaches_upper_bound():
    # eta = 5 against mu = 0.6 puts the sigmoid at 1.0 in float64
    exist = np.array([[1, 1], [1, 0], [1, 0], [1, 0], [1, 0]])
    weights = label_weights(exist, alpha=0.1, beta=10.0)
    assert weights.eta_bar.max() == pytest.approx(1.1)
    assert (weights.eta_bar <= 1.1).all()


def test_weight_grows_with_inverse_frequency_below_saturation():
    exist = np.array([[1, 1, 1]] + [[1, 1, 0]] * 2 + [[1, 0, 0]] * 3)
    weights = label_weights(exist, alpha=0.1, beta=1.0)
    first = weights.eta_bar[0]
    assert first[0] < first[1] < first[2] < 1.1
