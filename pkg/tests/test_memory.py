import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from timbresep.memory import (
    AssociativeMemory,
    HopfieldMemory,
    associate,
    associate_attention,
    associate_once,
    hebb_store,
    hopfield_energy,
    hopfield_recall,
    weighted_memory,
)


def pm1(rng, n, k=None):
    shape = (n,) if k is None else (k, n)
    return rng.choice([-1.0, 1.0], size=shape)


class TestHebbStore:
    def test_single_pattern(self, rng):
        x = pm1(rng, 12)
        X = hebb_store([x]).X
        expected = np.outer(x, x)
        np.fill_diagonal(expected, 0)
        np.testing.assert_array_equal(X, expected)

    def test_orthogonal_patterns(self):
        from scipy.linalg import hadamard

        H = hadamard(8).astype(float)
        X = hebb_store(H[:3]).X
        for p in H[:3]:
            # x X = x (mean of outer products) - x diag: recovers x scaled
            np.testing.assert_allclose(p @ X, (8 / 3 - 1) * p)

    def test_symmetric_zero_diag(self, rng):
        X = hebb_store(pm1(rng, 20, 5)).X
        np.testing.assert_array_equal(X, X.T)
        assert not np.any(np.diag(X))

    @pytest.mark.parametrize(
        "patterns",
        [[], [np.array([1.0, 0.0])], [np.ones(3), np.ones(4)], [np.array([1.0, 2.0])]],
    )
    def test_invalid(self, patterns):
        with pytest.raises(ValueError):
            hebb_store(patterns)


class TestRecall:
    def test_stored_is_fixed_point(self, rng):
        P = pm1(rng, 64, 3)
        mem = hebb_store(P)
        for p in P:
            r = hopfield_recall(mem, p)
            np.testing.assert_array_equal(r.state, p)
            assert r.converged and r.iterations == 1

    def test_negation_is_fixed_point(self, rng):
        P = pm1(rng, 64, 3)
        r = hopfield_recall(hebb_store(P), -P[0])
        np.testing.assert_array_equal(r.state, -P[0])

    def test_noisy_probe_recall_rate(self):
        rng = np.random.default_rng(7)
        hits = 0
        for trial in range(100):
            P = pm1(rng, 100, 5)
            mem = hebb_store(P)
            probe = P[0].copy()
            flip = rng.choice(100, 10, replace=False)
            probe[flip] *= -1
            hits += np.array_equal(hopfield_recall(mem, probe).state, P[0])
        assert hits >= 95

    def test_lyapunov_nonincreasing(self, rng):
        # for synchronous updates the two-step energy -x_t X x_{t-1} never rises
        for _ in range(20):
            mem = hebb_store(pm1(rng, 40, 8))
            hist = []
            hopfield_recall(mem, pm1(rng, 40), history=hist)
            lyap = [-hist[i] @ mem.X @ hist[i - 1] for i in range(1, len(hist))]
            assert all(b <= a + 1e-9 for a, b in zip(lyap, lyap[1:]))

    def test_energy_minimum_at_pattern(self, rng):
        P = pm1(rng, 50, 2)
        mem = hebb_store(P)
        noisy = P[0].copy()
        noisy[:5] *= -1
        assert hopfield_energy(mem, P[0]) < hopfield_energy(mem, noisy)

    def test_probe_length(self, rng):
        with pytest.raises(ValueError):
            hopfield_recall(hebb_store(pm1(rng, 8, 2)), np.ones(9))

    def test_max_iter_reports_not_converged(self):
        # two-cycle: x -> -x under X = -(J - I)
        mem = hebb_store([np.array([1.0, -1.0]), np.array([-1.0, 1.0])])
        r = hopfield_recall(mem, np.array([1.0, 1.0]), max_iter=4)
        assert not r.converged and r.iterations == 4

    def test_estimator(self, rng):
        P = pm1(rng, 64, 3)
        est = HopfieldMemory().fit(P)
        np.testing.assert_array_equal(est.predict(P), P)


class TestWeightedMemory:
    def test_single_row(self):
        v = np.array([[3.0, 4.0]])
        M = weighted_memory(v, [2.0]).M
        u = v[0] / 5
        np.testing.assert_allclose(M, 2.0 * np.outer(u, u))

    def test_unit_weights_trace_one(self, rng):
        V = rng.normal(size=(30, 6))
        M = weighted_memory(V, np.ones(30)).M
        assert np.trace(M) == pytest.approx(1.0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32))
    def test_psd_symmetric(self, seed):
        r = np.random.default_rng(seed)
        V = r.normal(size=(r.integers(1, 20), 5))
        Y = r.random(V.shape[0]) + 0.01
        M = weighted_memory(V, Y).M
        np.testing.assert_allclose(M, M.T)
        assert np.linalg.eigvalsh(M).min() >= -1e-12

    def test_no_salient_bins(self, rng):
        with pytest.raises(ValueError, match="no salient bins"):
            weighted_memory(rng.normal(size=(4, 3)), np.zeros(4))

    def test_negative_weight(self, rng):
        with pytest.raises(ValueError):
            weighted_memory(rng.normal(size=(2, 3)), [1.0, -1.0])

    def test_length_mismatch(self, rng):
        with pytest.raises(ValueError):
            weighted_memory(rng.normal(size=(3, 3)), [1.0, 1.0])

    def test_zero_rows_ignored(self, rng):
        V = np.vstack([rng.normal(size=(3, 4)), np.zeros((1, 4))])
        Y = np.array([1.0, 1.0, 1.0, 0.0])
        np.testing.assert_allclose(weighted_memory(V, Y).M, weighted_memory(V[:3], Y[:3]).M)


class TestAssociate:
    def test_identity_memory(self, rng):
        V = np.eye(4)
        mem = weighted_memory(V, np.ones(4))
        np.testing.assert_allclose(associate(V, mem), V / 4)

    def test_orthogonal_projection(self):
        V = np.array([[1.0, 0, 0], [0, 2.0, 0]])
        mem = weighted_memory(V, [1.0, 1.0])
        out = associate(np.array([[1.0, 1.0, 1.0]]), mem)
        np.testing.assert_allclose(out, [[0.5, 0.5, 0.0]])

    def test_null_space(self):
        mem = weighted_memory(np.array([[1.0, 0.0]]), [1.0])
        np.testing.assert_allclose(associate(np.array([[0.0, 5.0]]), mem), 0)

    def test_dim_mismatch(self):
        mem = weighted_memory(np.eye(3), np.ones(3))
        with pytest.raises(ValueError):
            associate(np.ones((2, 4)), mem)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32))
    def test_once_equals_two_step_and_attention(self, seed):
        r = np.random.default_rng(seed)
        K, D = r.integers(1, 40), r.integers(1, 9)
        V = r.normal(size=(K, D))
        Y = r.random(K) + 0.01
        a = associate_once(V, Y)
        np.testing.assert_allclose(a, associate(V, weighted_memory(V, Y)), atol=1e-12)
        np.testing.assert_allclose(a, associate_attention(V, Y), atol=1e-12)

    def test_single_bin(self):
        v = np.array([[0.6, 0.8]])
        np.testing.assert_allclose(associate_once(v, [3.0]), 3.0 * v)

    def test_weight_scaling(self, rng):
        V = rng.normal(size=(10, 4))
        Y = rng.random(10) + 0.1
        np.testing.assert_allclose(associate_once(V, 5 * Y), 5 * associate_once(V, Y), rtol=1e-12)

    def test_sharpens_clusters(self):
        # two orthogonal directions plus isotropic noise: association damps the
        # noise dimensions and raises the intra/inter cosine contrast
        r = np.random.default_rng(3)
        a, b = np.eye(20)[0], np.eye(20)[1]
        V = np.vstack([a + 0.2 * r.normal(size=(60, 20)), b + 0.2 * r.normal(size=(60, 20))])
        labels = np.repeat([0, 1], 60)
        W = associate_once(V, np.ones(120))

        def contrast(E):
            E = E / np.linalg.norm(E, axis=1, keepdims=True)
            C = E @ E.T
            same = labels[:, None] == labels[None, :]
            return C[same].mean() - C[~same].mean()

        assert contrast(W) > contrast(V)

    def test_estimator(self, rng):
        V = rng.normal(size=(12, 3))
        Y = rng.random(12)
        est = AssociativeMemory()
        np.testing.assert_allclose(est.fit_transform(V, Y), associate_once(V, Y), atol=1e-12)
