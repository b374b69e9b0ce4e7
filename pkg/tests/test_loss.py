import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fpf.loss import LossSpec, expected_loss, loss_eval


def test_zero_one_correct_guess():
    assert loss_eval(LossSpec.zero_one(2), 1, 1) == 0.0
    assert loss_eval(LossSpec.zero_one(2), 0, 1) == 1.0


def test_log_loss_half():
    assert loss_eval(LossSpec.log(2), [0.5, 0.5], 0) == pytest.approx(0.693147, abs=1e-6)


def test_log_loss_zero_probability_is_inf():
    assert loss_eval(LossSpec.log(2), [1.0, 0.0], 1) == math.inf


def test_squared_l2_distance():
    l = LossSpec.squared_l2([[0, 0], [1, 0]])
    assert loss_eval(l, [0.75, 0.0], 0) == 0.5625


def test_expected_loss_examples():
    assert expected_loss(LossSpec.zero_one(2), 0, [0.6, 0.4]) == pytest.approx(0.4)
    p = np.array([0.25, 0.75])
    entropy = -(0.25 * math.log(0.25) + 0.75 * math.log(0.75))
    assert expected_loss(LossSpec.log(2), p, p) == pytest.approx(entropy, abs=1e-12)
    assert entropy == pytest.approx(0.562335, abs=1e-6)
    assert expected_loss(LossSpec.matrix([[0, 2], [1, 0]]), 1, [0.5, 0.5]) == 0.5


def test_bound_R():
    assert LossSpec.zero_one(3).bound_R == 1.0
    assert LossSpec.matrix([[0, -3], [1, 0]]).bound_R == 3.0
    assert LossSpec.log(2).bound_R == math.inf
    assert LossSpec.squared_l2([[0, 0], [1, 0], [0, 2]]).bound_R == 5.0


def test_zero_one_equals_matrix_encoding():
    z = LossSpec.zero_one(3)
    mat = LossSpec.matrix([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    for b in range(3):
        for x in range(3):
            assert loss_eval(z, b, x) == loss_eval(mat, b, x)


def test_matrix_rejects_nonfinite():
    with pytest.raises(ValueError):
        LossSpec.matrix([[0, np.inf], [1, 0]])


def test_matrix_from_json(tmp_path):
    p = tmp_path / "loss.json"
    p.write_text(json.dumps({"rows": [[0, 2], [1, 0]]}))
    l = LossSpec.from_json(p)
    assert l.rows.tolist() == [[0, 2], [1, 0]]
    assert l.n_strategies == 2


@given(
    st.lists(st.lists(st.floats(-5, 5), min_size=3, max_size=3), min_size=1, max_size=4),
    st.lists(st.floats(0, 1), min_size=3, max_size=3).filter(lambda w: sum(w) > 0.01),
)
def test_matrix_expected_loss_bounded(rows, w):
    l = LossSpec.matrix(rows)
    p = np.array(w) / sum(w)
    for b in range(len(rows)):
        assert abs(expected_loss(l, b, p)) <= l.bound_R + 1e-12


def test_squared_l2_minimized_at_weighted_mean():
    points = np.array([[0.0, 0.0], [1.0, 0.0], [0.2, 1.0]])
    l = LossSpec.squared_l2(points)
    p = np.array([0.2, 0.5, 0.3])
    mean = p @ points
    best = expected_loss(l, mean, p)
    grid = np.linspace(-0.5, 1.5, 81)
    for gx in grid:
        for gy in grid:
            assert expected_loss(l, np.array([gx, gy]), p) >= best - 1e-12
