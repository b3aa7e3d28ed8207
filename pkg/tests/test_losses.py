import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from timbresep.losses import (
    LossHistory,
    deep_cluster_loss,
    dwa_weights,
    focal_loss,
    focal_loss_grad,
    magnitude_balance,
)


def one_hot(labels, m):
    return np.eye(m)[labels]


class TestDeepCluster:
    def test_perfect_embedding(self):
        Z = one_hot([0, 1, 2, 1, 0], 3)
        assert deep_cluster_loss(Z, Z) == 0

    def test_two_bins_two_classes(self):
        V = np.array([[1.0], [1.0]])
        Z = one_hot([0, 1], 2)
        assert deep_cluster_loss(V, Z) == pytest.approx(2.0)
        assert deep_cluster_loss(V, Z, naive=True) == pytest.approx(2.0)

    def test_forms_agree(self):
        r = np.random.default_rng(0)
        for _ in range(100):
            K, D, M = r.integers(1, 51), r.integers(1, 9), r.integers(1, 5)
            V = r.normal(size=(K, D))
            Z = one_hot(r.integers(0, M, K), M)
            a, b = deep_cluster_loss(V, Z), deep_cluster_loss(V, Z, naive=True)
            assert a == pytest.approx(b, rel=1e-9, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32))
    def test_nonnegative(self, seed):
        r = np.random.default_rng(seed)
        V = r.normal(size=(10, 3))
        Z = one_hot(r.integers(0, 2, 10), 2)
        assert deep_cluster_loss(V, Z) >= -1e-9

    def test_zero_iff_gram_match(self):
        Z = one_hot([0, 0, 1], 2)
        rot = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert deep_cluster_loss(Z @ rot, Z) == pytest.approx(0.0, abs=1e-12)
        assert deep_cluster_loss(Z * 0.9, Z) > 0

    @pytest.mark.parametrize("Z", [np.array([[1.0, 1.0], [0.0, 1.0]]), np.array([[0.5, 0.5], [1.0, 0.0]]), np.zeros((2, 2))])
    def test_not_one_hot(self, Z):
        with pytest.raises(ValueError, match="one-hot"):
            deep_cluster_loss(np.ones((2, 1)), Z)

    def test_row_mismatch(self):
        with pytest.raises(ValueError):
            deep_cluster_loss(np.ones((3, 1)), one_hot([0, 1], 2))


class TestFocal:
    def test_reduces_to_half_bce(self, rng):
        p = rng.uniform(0.01, 0.99, 200)
        y = (rng.random(200) < 0.3).astype(float)
        bce = -np.mean(y * np.log(p) + (1 - y) * np.log(1 - p))
        assert focal_loss(p, y, alpha=0.5, gamma=0) == pytest.approx(0.5 * bce, rel=1e-9)

    def test_perfect_prediction(self):
        y = np.array([0.0, 1.0, 1.0, 0.0])
        # largest class weight is 1 - alpha = 0.8
        assert focal_loss(y, y) <= 0.8 * 1e-7 * abs(np.log(1 - 1e-7)) * (1 + 1e-9)

    def test_single_element(self):
        assert focal_loss([0.5], [1.0], alpha=0.2, gamma=1) == pytest.approx(0.2 * 0.5 * np.log(2))
        assert focal_loss([0.5], [1.0]) == pytest.approx(0.0693, abs=5e-5)

    def test_negative_class_weight(self):
        assert focal_loss([0.5], [0.0], alpha=0.2) == pytest.approx(0.8 * 0.5 * np.log(2))

    def test_clamped(self):
        assert np.isfinite(focal_loss([0.0, 1.0], [1.0, 0.0]))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            focal_loss(np.ones(3) * 0.5, np.ones(4))

    @pytest.mark.parametrize("gamma", [0.0, 1.0, 2.0])
    def test_gradient_matches_finite_differences(self, rng, gamma):
        p = rng.uniform(0.05, 0.95, 30)
        y = (rng.random(30) < 0.5).astype(float)
        g = focal_loss_grad(p, y, 0.2, gamma)
        h = 1e-5
        for i in range(p.size):
            up, dn = p.copy(), p.copy()
            up[i] += h
            dn[i] -= h
            fd = (focal_loss(up, y, 0.2, gamma) - focal_loss(dn, y, 0.2, gamma)) / (2 * h)
            assert g[i] == pytest.approx(fd, rel=1e-4, abs=1e-10)


class TestMagnitudeBalance:
    def test_equal(self):
        np.testing.assert_allclose(magnitude_balance([2.0, 2.0]), [0.5, 0.5])

    def test_one_three(self):
        a = magnitude_balance([1.0, 3.0], LossHistory(), beta=0.0)
        np.testing.assert_allclose(a, [0.75, 0.25])
        np.testing.assert_allclose(a * [1.0, 3.0], [0.75, 0.75])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=8))
    def test_parallel_identity(self, L):
        L = np.array(L)
        a = magnitude_balance(L)
        assert a.sum() == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(a * L, 1.0 / np.sum(1.0 / L), rtol=1e-12)

    def test_iir(self):
        s = LossHistory()
        first = magnitude_balance([1.0, 1.0], s, beta=0.9)
        np.testing.assert_allclose(first, [0.5, 0.5])
        second = magnitude_balance([1.0, 3.0], s, beta=0.9)
        np.testing.assert_allclose(second, 0.9 * np.array([0.5, 0.5]) + 0.1 * np.array([0.75, 0.25]))

    @pytest.mark.parametrize("L", [[1.0, 0.0], [-1.0], [], [np.inf]])
    def test_invalid(self, L):
        with pytest.raises(ValueError):
            magnitude_balance(L)


def history(*epochs):
    h = LossHistory()
    for e in epochs:
        h.record(e)
    return h


class TestDWA:
    def test_equal_ratios_uniform(self):
        np.testing.assert_allclose(dwa_weights(history([2.0, 4.0, 1.0], [1.0, 2.0, 0.5])), np.full(3, 1 / 3))

    def test_large_temperature(self):
        w = dwa_weights(history([1.0, 1.0], [1.0, 0.1]), temperature=1e6)
        np.testing.assert_allclose(w, [0.5, 0.5], atol=1e-6)

    def test_softmax_example(self):
        w = dwa_weights(history([1.0, 1.0], [1.0, 0.5]), temperature=1.0)
        e = np.exp([1.0, 0.5])
        np.testing.assert_allclose(w, e / e.sum())
        np.testing.assert_allclose(w, [0.622, 0.378], atol=5e-4)

    def test_sums_to_one(self, rng):
        h = history(rng.random(5) + 0.1, rng.random(5) + 0.1)
        assert dwa_weights(h).sum() == pytest.approx(1.0)

    def test_bootstrap_uniform(self):
        np.testing.assert_allclose(dwa_weights(LossHistory(), n_losses=4), np.full(4, 0.25))
        np.testing.assert_allclose(dwa_weights(history([1.0, 2.0])), [0.5, 0.5])

    def test_buffer_keeps_last_two(self):
        h = history([1.0, 1.0], [5.0, 5.0], [1.0, 2.5])
        assert len(h.epochs) == 2
        np.testing.assert_allclose(h.ratios(), [0.2, 0.5])

    def test_record_validation(self):
        h = history([1.0, 1.0])
        with pytest.raises(ValueError):
            h.record([0.0, 1.0])
        with pytest.raises(ValueError):
            h.record([1.0])
