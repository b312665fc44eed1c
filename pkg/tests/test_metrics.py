import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from osp.metrics import (MetricError, ahde, evaluate, mean_error, postprocess,
                         trivial_baselines)

TRUTH = np.array([2.0, 3.0, 5.0])
PRED = np.array([2.0, 4.0, 5.0])
ALL = np.ones(3, dtype=bool)


def random_case(seed, n):
    rng = np.random.default_rng(seed)
    t = rng.integers(1, 7, (n, n)).astype(float)
    t = np.triu(t, 1) + np.triu(t, 1).T
    pred = t + rng.normal(0, 1.5, (n, n))
    mask = rng.random((n, n)) < 0.5
    mask = np.triu(mask, 1) | np.triu(mask, 1).T
    mask[0, 1] = mask[1, 0] = True
    return pred, t, mask


class TestPostprocess:
    def test_diagonal_and_small_values(self):
        m = postprocess(np.array([[0.7, 0.3], [2.4, 0.1]]))
        assert m.tolist() == [[0.0, 1.0], [2.4, 0.0]]

    def test_negative_lifted(self):
        assert postprocess(np.array([[0.0, -0.2], [-0.2, 0.0]]))[0, 1] == 1.0

    def test_input_not_modified(self):
        m = np.array([[0.5, 0.5], [0.5, 0.5]])
        postprocess(m)
        assert (m == 0.5).all()

    def test_non_square(self):
        with pytest.raises(MetricError):
            postprocess(np.zeros((2, 3)))

    @settings(max_examples=50)
    @given(n=st.integers(1, 12), seed=st.integers(0, 10**6))
    def test_idempotent(self, n, seed):
        m = np.random.default_rng(seed).normal(1, 2, (n, n))
        once = postprocess(m)
        assert (postprocess(once) == once).all()


class TestMeanError:
    def test_exact(self):
        assert mean_error(TRUTH, TRUTH, ALL) == 0.0

    def test_hand_evaluated(self):
        assert mean_error(PRED, TRUTH, ALL) == pytest.approx(0.1, abs=1e-12)

    def test_all_zero_prediction(self):
        assert mean_error(np.zeros(3), TRUTH, ALL) == 1.0

    def test_zero_truth_rejected(self):
        with pytest.raises(MetricError):
            mean_error(np.ones(2), np.zeros(2), np.ones(2, dtype=bool))

    def test_empty_mask_rejected(self):
        with pytest.raises(MetricError):
            mean_error(PRED, TRUTH, np.zeros(3, dtype=bool))

    def test_shape_mismatch(self):
        with pytest.raises(MetricError):
            mean_error(PRED[:2], TRUTH, ALL)


class TestAhde:
    def test_exact(self):
        assert ahde(TRUTH, TRUTH, ALL) == 0.0

    def test_hand_evaluated(self):
        assert ahde(PRED, TRUTH, ALL) == pytest.approx(1 / 3, abs=1e-12)

    def test_off_by_one_everywhere(self):
        assert ahde(TRUTH + 1, TRUTH, ALL) == 1.0


class TestTrivialBaselines:
    def test_all_one_truth(self):
        zero, one = trivial_baselines(np.ones(4), np.ones(4, dtype=bool))
        assert (one.mean_error, one.ahde) == (0.0, 0.0)
        assert (zero.mean_error, zero.ahde) == (1.0, 1.0)

    def test_fill_one_ahde(self):
        _, one = trivial_baselines(TRUTH, ALL)
        assert one.ahde == pytest.approx(7 / 3)

    @settings(max_examples=50)
    @given(n=st.integers(2, 15), seed=st.integers(0, 10**6))
    def test_fill_zero_mean_error_is_one(self, n, seed):
        _, t, mask = random_case(seed, n)
        assert trivial_baselines(t, mask)[0].mean_error == 1.0


class TestProperties:
    @settings(max_examples=60)
    @given(n=st.integers(2, 15), seed=st.integers(0, 10**6))
    def test_metric_identity(self, n, seed):
        pred, t, mask = random_case(seed, n)
        r = evaluate(pred, t, mask)
        assert r.mean_error == pytest.approx(r.ahde * r.pair_count / t[mask].sum(), rel=1e-12)
        assert r.mean_error == mean_error(pred, t, mask)
        assert r.ahde == ahde(pred, t, mask)
        assert r.pair_count == mask.sum()

    @settings(max_examples=60)
    @given(n=st.integers(2, 15), seed=st.integers(0, 10**6))
    def test_label_permutation_invariance(self, n, seed):
        pred, t, mask = random_case(seed, n)
        perm = np.random.default_rng(seed + 1).permutation(n)
        ix = np.ix_(perm, perm)
        a, b = evaluate(pred, t, mask), evaluate(pred[ix], t[ix], mask[ix])
        assert a.mean_error == pytest.approx(b.mean_error, rel=1e-12)
        assert a.ahde == pytest.approx(b.ahde, rel=1e-12)

    @settings(max_examples=60)
    @given(n=st.integers(2, 15), seed=st.integers(0, 10**6))
    def test_off_mask_entries_ignored(self, n, seed):
        pred, t, mask = random_case(seed, n)
        noise = np.random.default_rng(seed).normal(0, 100, (n, n))
        assert evaluate(np.where(mask, pred, noise), np.where(mask, t, -noise), mask) == \
            evaluate(pred, t, mask)
