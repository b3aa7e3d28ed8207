import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from timbresep.core import Pianoroll
from timbresep.evalmetrics import FrameScores, format_table, frame_metrics, permutation_mse, pit_match


def random_roll(rng, shape=(84, 50), p=0.1):
    return (rng.random(shape) < p).astype(float)


class TestFrameMetrics:
    def test_identity(self, rng):
        r = random_roll(rng)
        s = frame_metrics(r, r)
        assert (s.precision, s.recall, s.f1, s.acc) == (1.0, 1.0, 1.0, 1.0)

    def test_empty_estimate(self, rng):
        s = frame_metrics(random_roll(rng), np.zeros((84, 50)))
        assert (s.precision, s.recall, s.f1, s.acc) == (0.0, 0.0, 0.0, 0.0)

    def test_eight_of_ten(self):
        ref = np.zeros((84, 20))
        est = np.zeros((84, 20))
        ref[10, :10] = 1
        est[10, 2:12] = 1
        s = frame_metrics(ref, est)
        assert (s.tp, s.fp, s.fn) == (8, 2, 2)
        for v in (s.precision, s.recall, s.f1):
            assert v == pytest.approx(0.8)
        assert s.acc == pytest.approx(8 / 12)

    def test_threshold(self):
        ref = np.ones((2, 2))
        est = np.array([[0.49, 0.5], [0.9, 0.1]])
        assert frame_metrics(ref, est).tp == 2

    def test_accepts_pianoroll(self, rng):
        r = random_roll(rng)
        assert frame_metrics(Pianoroll(r, np.zeros_like(r)), r).f1 == 1.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            frame_metrics(np.zeros((84, 3)), np.zeros((84, 4)))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32))
    def test_acc_bounded_by_f1(self, seed):
        r = np.random.default_rng(seed)
        s = frame_metrics(random_roll(r, (12, 10), 0.3), random_roll(r, (12, 10), 0.3))
        assert 0 <= s.acc <= s.f1 + 1e-12 <= 1 + 1e-12


class TestPIT:
    def test_single_source(self, rng):
        r = random_roll(rng)
        perm, per, mean = pit_match([r], [r])
        assert perm == (0,) and mean.f1 == 1.0

    def test_recovers_shuffle(self, rng):
        refs = [random_roll(rng) for _ in range(4)]
        order = [2, 0, 3, 1]
        ests = [refs[i] for i in order]
        perm, _, mean = pit_match(refs, ests)
        assert [order[p] for p in perm] == [0, 1, 2, 3]
        assert mean.f1 == 1.0

    @pytest.mark.parametrize("M", [1, 2, 3, 4])
    def test_exhaustive_oracle(self, rng, M):
        for _ in range(10):
            refs = [random_roll(rng, (5, 8), 0.4) for _ in range(M)]
            ests = [random_roll(rng, (5, 8), 0.4) for _ in range(M)]
            perm, _, _ = pit_match(refs, ests)
            best = min(permutation_mse(refs, ests, p) for p in itertools.permutations(range(M)))
            assert permutation_mse(refs, ests, perm) == pytest.approx(best)

    def test_no_pairwise_swap_improves(self, rng):
        refs = [random_roll(rng, (6, 6), 0.5) for _ in range(5)]
        ests = [random_roll(rng, (6, 6), 0.5) for _ in range(5)]
        perm, _, _ = pit_match(refs, ests)
        base = permutation_mse(refs, ests, perm)
        for i, j in itertools.combinations(range(5), 2):
            q = list(perm)
            q[i], q[j] = q[j], q[i]
            assert permutation_mse(refs, ests, q) >= base - 1e-12

    def test_macro_mean(self):
        ref = np.zeros((2, 4))
        ref[0] = 1
        est_good = ref.copy()
        ref2 = np.zeros((2, 4))
        ref2[1, :2] = 1
        est_half = np.zeros((2, 4))
        est_half[1, :1] = 1
        _, per, mean = pit_match([ref, ref2], [est_good, est_half])
        assert mean.f1 == pytest.approx(np.mean([per[0].f1, per[1].f1]))
        assert mean.tp == per[0].tp + per[1].tp

    def test_count_mismatch(self, rng):
        with pytest.raises(ValueError):
            pit_match([random_roll(rng)], [random_roll(rng)] * 2)

    def test_too_many_sources(self):
        with pytest.raises(ValueError):
            pit_match([np.zeros((1, 1))] * 7, [np.zeros((1, 1))] * 7)


def test_format_table():
    s = FrameScores.from_counts(8, 2, 2)
    txt = format_table({"src0": s})
    lines = txt.strip().split("\n")
    assert lines[0].split("\t") == ["name", "Acc", "P", "R", "F1"]
    assert lines[1] == "src0\t0.667\t0.800\t0.800\t0.800"


def test_average_requires_input():
    with pytest.raises(ValueError):
        FrameScores.average([])
