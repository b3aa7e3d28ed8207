"""Frame-level multipitch metrics and permutation-invariant matching of separated rolls."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import Pianoroll

DEFAULT_THRESHOLD = 0.5
MAX_PIT_SOURCES = 6


@dataclass(frozen=True)
class FrameScores:
    tp: int
    fp: int
    fn: int
    acc: float
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> FrameScores:
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        acc = tp / (tp + fp + fn) if tp + fp + fn else 0.0
        return cls(int(tp), int(fp), int(fn), acc, p, r, f1)

    @classmethod
    def average(cls, scores) -> FrameScores:
        """Macro average of the ratios; counts are summed."""
        scores = list(scores)
        if not scores:
            raise ValueError("nothing to average")
        mean = lambda attr: float(np.mean([getattr(s, attr) for s in scores]))  # noqa: E731
        return cls(
            sum(s.tp for s in scores),
            sum(s.fp for s in scores),
            sum(s.fn for s in scores),
            mean("acc"),
            mean("precision"),
            mean("recall"),
            mean("f1"),
        )

    def row(self) -> list[float]:
        return [self.acc, self.precision, self.recall, self.f1]


def _notes(x) -> np.ndarray:
    return x.notes if isinstance(x, Pianoroll) else np.asarray(x, dtype=float)


def frame_metrics(reference, estimate, threshold: float = DEFAULT_THRESHOLD) -> FrameScores:
    ref, est = _notes(reference), _notes(estimate)
    if ref.shape != est.shape:
        raise ValueError(f"shape mismatch: reference {ref.shape} vs estimate {est.shape}")
    r = ref >= threshold
    e = est >= threshold
    tp = int(np.count_nonzero(r & e))
    fp = int(np.count_nonzero(~r & e))
    fn = int(np.count_nonzero(r & ~e))
    return FrameScores.from_counts(tp, fp, fn)


def pit_match(references, estimates, threshold: float = DEFAULT_THRESHOLD):
    """Best reference-to-estimate assignment by total MSE over all M! permutations.

    Returns ``(perm, per_source, mean)`` where ``estimates[perm[k]]`` is matched
    to ``references[k]``. MSE uses the continuous rolls; the reported metrics
    use rolls binarised at ``threshold``. Ties keep the lexicographically first
    permutation, so the identity wins when it is optimal.
    """
    refs = [_notes(r) for r in references]
    ests = [_notes(e) for e in estimates]
    if len(refs) != len(ests):
        raise ValueError(f"got {len(refs)} references but {len(ests)} estimates")
    m = len(refs)
    if not 1 <= m <= MAX_PIT_SOURCES:
        raise ValueError(f"PIT supports 1..{MAX_PIT_SOURCES} sources, got {m}")
    for r, e in zip(refs, ests):
        if r.shape != e.shape:
            raise ValueError("all rolls must share one shape")
    cost = np.array([[np.mean((r - e) ** 2) for e in ests] for r in refs])
    best, best_cost = None, np.inf
    for perm in itertools.permutations(range(m)):
        c = sum(cost[k, perm[k]] for k in range(m))
        if c < best_cost - 1e-15:
            best, best_cost = perm, c
    per_source = [frame_metrics(refs[k], ests[best[k]], threshold) for k in range(m)]
    return best, per_source, FrameScores.average(per_source)


def permutation_mse(references, estimates, perm) -> float:
    return float(sum(np.mean((_notes(references[k]) - _notes(estimates[perm[k]])) ** 2) for k in range(len(perm))))


def format_table(rows: dict[str, FrameScores]) -> str:
    """TSV with Acc / P / R / F1 columns, one row per label."""
    lines = ["name\tAcc\tP\tR\tF1"]
    for name, s in rows.items():
        lines.append(name + "\t" + "\t".join(f"{v:.3f}" for v in s.row()))
    return "\n".join(lines) + "\n"
