import numpy as np
import pytest

from fusecast.metrics import (
    CSV_HEADER,
    compute_report,
    csv_row,
    cv_rmse,
    mae,
    mean_error,
    nmbe,
    rmse,
    smape,
)


class TestMae:
    def test_exact_match(self):
        assert mae([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_hand_value(self):
        assert mae([0.0, 0.0], [3.0, -1.0]) == pytest.approx(2.0)

    def test_permutation_invariant(self):
        y = [1.0, 5.0, -2.0]
        yhat = [0.5, 4.0, -3.0]
        assert mae(y, yhat) == mae(y[::-1], yhat[::-1])

    def test_length_mismatch_and_empty(self):
        with pytest.raises(ValueError):
            mae([1.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            mae([], [])


class TestRmse:
    def test_exact_match(self):
        assert rmse([2.0], [2.0]) == 0.0

    def test_hand_value_sqrt5(self):
        assert rmse([0.0, 0.0], [3.0, -1.0]) == pytest.approx(np.sqrt(5.0), rel=1e-12)

    def test_single_pair_collapse(self):
        assert rmse([7.0], [4.5]) == pytest.approx(2.5)


class TestSmape:
    def test_exact_match_nonzero(self):
        assert smape([10.0, 20.0], [10.0, 20.0]) == 0.0

    def test_hand_value(self):
        # |100-50| / ((100+50)/2) * 100 = 66.666...
        assert smape([100.0], [50.0]) == pytest.approx(200.0 / 3.0, abs=1e-9)

    def test_upper_bound_case(self):
        assert smape([0.0], [123.4]) == pytest.approx(200.0)

    def test_zero_zero_term_contributes_zero(self):
        assert smape([0.0, 100.0], [0.0, 100.0]) == 0.0

    def test_bounds_fuzz(self):
        rng = np.random.default_rng(99)
        for _ in range(200):
            y = rng.standard_normal(50) * rng.choice([1e-6, 1.0, 1e6])
            yhat = rng.standard_normal(50) * rng.choice([1e-6, 1.0, 1e6])
            v = smape(y, yhat)
            assert 0.0 <= v <= 200.0


class TestMeanError:
    def test_exact(self):
        assert mean_error([3.0], [3.0]) == 0.0

    def test_hand_value(self):
        assert mean_error([10.0, 10.0], [8.0, 14.0]) == pytest.approx(-1.0)

    def test_overprediction_is_negative(self):
        assert mean_error([10.0], [12.0]) < 0.0


class TestNmbe:
    def test_exact(self):
        assert nmbe([5.0, 5.0], [5.0, 5.0]) == 0.0

    def test_hand_value(self):
        assert nmbe([100.0, 100.0], [90.0, 90.0]) == pytest.approx(10.0)

    def test_scale_invariance(self):
        y = np.array([80.0, 120.0, 100.0])
        yhat = np.array([70.0, 130.0, 90.0])
        assert nmbe(3.7 * y, 3.7 * yhat) == pytest.approx(nmbe(y, yhat), rel=1e-12)

    def test_zero_mean_rejected(self):
        with pytest.raises(ValueError):
            nmbe([1.0, -1.0], [0.0, 0.0])


class TestCvRmse:
    def test_exact(self):
        assert cv_rmse([50.0], [50.0]) == 0.0

    def test_hand_value(self):
        assert cv_rmse([100.0, 100.0], [90.0, 110.0]) == pytest.approx(10.0)

    def test_scale_invariance(self):
        y = np.array([80.0, 120.0])
        yhat = np.array([78.0, 125.0])
        assert cv_rmse(2.5 * y, 2.5 * yhat) == pytest.approx(cv_rmse(y, yhat), rel=1e-12)


def test_bias_variance_identity():
    rng = np.random.default_rng(3)
    for _ in range(30):
        y = rng.standard_normal(200) * 10 + 50
        yhat = y + rng.standard_normal(200) * 4 + 2
        errs = y - yhat
        lhs = rmse(y, yhat) ** 2
        rhs = mean_error(y, yhat) ** 2 + float(np.var(errs))
        assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_all_metrics_zero_iff_equal():
    rng = np.random.default_rng(4)
    y = rng.random(20) * 100 + 10
    for fn in (mae, rmse, smape, nmbe, cv_rmse):
        assert fn(y, y) == 0.0
    yhat = y.copy()
    yhat[7] += 0.5
    for fn in (mae, rmse, smape, cv_rmse):
        assert fn(y, yhat) > 0.0


def test_report_and_csv_row():
    y = np.array([100.0, 100.0])
    yhat = np.array([90.0, 110.0])
    rep = compute_report(y, yhat)
    assert rep.n == 2
    assert rep.rmse == pytest.approx(10.0)
    assert rep.cv_rmse == pytest.approx(10.0)
    assert rep.mean_error == pytest.approx(0.0)
    assert rep.rmse >= abs(rep.mean_error)
    row = csv_row(1, "pgmn", rep)
    assert row.startswith("1,pgmn,2,")
    assert len(row.split(",")) == len(CSV_HEADER.split(","))
