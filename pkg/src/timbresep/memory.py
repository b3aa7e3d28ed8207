"""Hebbian associative memory: binary Hopfield storage/recall and the weighted continuous form.

The continuous memory is built from embeddings ``V`` (K x D) and per-row
salience weights ``Y`` (K,). Rows are unit-normalised, rescaled by their
weight and accumulated as outer products; a single association pass
``V @ M`` is then the softmax-free attention ``V (U^T U) / sum(Y)``.

Flattening convention: when ``Y`` comes from an N x T pianoroll, rows are
ordered pitch-major (``Y.reshape(-1)`` on the (N, T) array).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_finite, check_is_fitted, check_real_matrix

DEFAULT_MAX_ITER = 32


@dataclass(frozen=True)
class BinaryMemory:
    X: np.ndarray

    @property
    def n(self) -> int:
        return self.X.shape[0]


@dataclass(frozen=True)
class MemoryMatrix:
    M: np.ndarray

    @property
    def dim(self) -> int:
        return self.M.shape[0]


class Recall(NamedTuple):
    state: np.ndarray
    iterations: int
    converged: bool


def hebb_store(patterns) -> BinaryMemory:
    """X = mean of x x^T over the stored +-1 patterns, diagonal zeroed."""
    patterns = [np.asarray(p, dtype=float) for p in patterns]
    if not patterns:
        raise ValueError("no patterns to store")
    n = patterns[0].shape
    if any(p.shape != n or p.ndim != 1 for p in patterns):
        raise ValueError("all patterns must be 1-D with the same length")
    P = np.stack(patterns)
    if not np.all(np.abs(P) == 1):
        raise ValueError("patterns must contain only +1/-1 entries")
    X = P.T @ P / len(patterns)
    np.fill_diagonal(X, 0.0)
    X.setflags(write=False)
    return BinaryMemory(X)


def _sign_keep(a: np.ndarray, prev: np.ndarray) -> np.ndarray:
    return np.where(a > 0, 1.0, np.where(a < 0, -1.0, prev))


def hopfield_energy(mem: BinaryMemory, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(-0.5 * x @ mem.X @ x)


def hopfield_recall(mem: BinaryMemory, probe, max_iter: int = DEFAULT_MAX_ITER, *, history: list | None = None) -> Recall:
    """Synchronous recall ``x <- sign(x X)``, where sign(0) keeps the previous entry.

    Starts from the (possibly real-valued) probe. Stops at a fixed point or
    after ``max_iter`` updates; ``converged`` tells which. If ``history`` is a
    list, every visited state is appended to it.
    """
    y = check_finite(probe, "probe", ndim=1, allow_complex=False).astype(float)
    if y.shape[0] != mem.n:
        raise ValueError(f"probe length {y.shape[0]} != memory size {mem.n}")
    x = _sign_keep(y, np.ones_like(y))
    if history is not None:
        history.append(x.copy())
    prev_input = y
    for it in range(1, max_iter + 1):
        new = _sign_keep(prev_input @ mem.X, x)
        if history is not None:
            history.append(new.copy())
        if np.array_equal(new, x):
            return Recall(new, it, True)
        x = new
        prev_input = x
    return Recall(x, max_iter, False)


def _row_normalize(V: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(V, axis=1, keepdims=True)
    return np.divide(V, norms, out=np.zeros_like(V), where=norms > 0)


def _check_pair(V, Y) -> tuple[np.ndarray, np.ndarray]:
    V = check_real_matrix(V, "V")
    Y = check_finite(Y, "Y", allow_complex=False).astype(float).reshape(-1)
    if Y.shape[0] != V.shape[0]:
        raise ValueError(f"Y has {Y.shape[0]} entries but V has {V.shape[0]} rows")
    if np.any(Y < 0):
        raise ValueError("weights must be non-negative")
    if not Y.sum() > 0:
        raise ValueError("no salient bins: weights sum to zero")
    return V, Y


def weighted_memory(V, Y) -> MemoryMatrix:
    V, Y = _check_pair(V, Y)
    U = _row_normalize(V) * Y[:, None]
    M = U.T @ U / Y.sum()
    M = 0.5 * (M + M.T)
    M.setflags(write=False)
    return MemoryMatrix(M)


def associate(V, mem: MemoryMatrix) -> np.ndarray:
    V = check_real_matrix(V, "V")
    if V.shape[1] != mem.dim:
        raise ValueError(f"embedding dim {V.shape[1]} != memory dim {mem.dim}")
    return V @ mem.M


def associate_once(V, Y) -> np.ndarray:
    """One association pass, evaluated as ``V @ (U^T U) / sum(Y)`` in O(K D^2)."""
    V, Y = _check_pair(V, Y)
    U = _row_normalize(V) * Y[:, None]
    return V @ (U.T @ U) / Y.sum()


def associate_attention(V, Y) -> np.ndarray:
    """Same quantity in attention order, ``(V U^T) U / sum(Y)``; O(K^2 D), for checking."""
    V, Y = _check_pair(V, Y)
    U = _row_normalize(V) * Y[:, None]
    return (V @ U.T) @ U / Y.sum()


class HopfieldMemory(BaseEstimator):
    """Binary Hopfield network. ``fit`` stores rows of +-1 patterns, ``predict`` recalls probes."""

    def __init__(self, max_iter: int = DEFAULT_MAX_ITER):
        self.max_iter = max_iter

    def fit(self, X, y=None):
        self.memory_ = hebb_store(np.atleast_2d(X))
        self.n_features_in_ = self.memory_.n
        return self

    def predict(self, X):
        check_is_fitted(self, "memory_")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.stack([hopfield_recall(self.memory_, x, self.max_iter).state for x in X])

    def energy(self, X):
        check_is_fitted(self, "memory_")
        return np.array([hopfield_energy(self.memory_, x) for x in np.atleast_2d(X)])


class AssociativeMemory(TransformerMixin, BaseEstimator):
    """Weighted Hebbian memory over embeddings.

    ``fit(V, Y)`` learns ``memory_`` (D x D); ``transform(V)`` associates any
    embeddings against it. ``fit_transform(V, Y)`` equals :func:`associate_once`.
    """

    def fit(self, X, y=None):
        if y is None:
            y = np.ones(np.asarray(X).shape[0])
        self.memory_ = weighted_memory(X, y)
        self.n_features_in_ = self.memory_.dim
        return self

    def transform(self, X):
        check_is_fitted(self, "memory_")
        return associate(X, self.memory_)
