"""Loss functions and multi-task loss weighting.

All functions here are pure except :class:`LossHistory`, which the training
loop owns and updates once per epoch.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_real_matrix, check_same_shape

FOCAL_EPS = 1e-7
DEFAULT_BETA = 0.9
DEFAULT_TEMPERATURE = 2.0


def _check_one_hot(Z: np.ndarray) -> None:
    if not np.all((Z == 0) | (Z == 1)) or not np.all(Z.sum(axis=1) == 1):
        raise ValueError("Z must be one-hot: every row has exactly one 1")


def deep_cluster_loss(V, Z, *, naive: bool = False) -> float:
    """||V V^T - Z Z^T||_F^2 for embeddings V (K x D) and one-hot labels Z (K x M).

    The default path expands the norm into D x D, D x M and M x M Gram terms
    and never forms a K x K matrix; ``naive=True`` does, for debugging.
    """
    V = check_real_matrix(V, "V")
    Z = check_real_matrix(Z, "Z")
    if V.shape[0] != Z.shape[0]:
        raise ValueError("V and Z must have the same number of rows")
    if V.shape[0] < 1:
        raise ValueError("need at least one embedding")
    _check_one_hot(Z)
    if naive:
        return float(np.sum((V @ V.T - Z @ Z.T) ** 2))
    vv = V.T @ V
    vz = V.T @ Z
    zz = Z.T @ Z
    return float(np.sum(vv**2) - 2.0 * np.sum(vz**2) + np.sum(zz**2))


def focal_loss(p, y, alpha: float = 0.2, gamma: float = 1.0) -> float:
    """Mean of -alpha_t (1 - p_t)^gamma log(p_t), with p clamped to [1e-7, 1 - 1e-7]."""
    p, y = np.asarray(p, dtype=float), np.asarray(y, dtype=float)
    check_same_shape(p, y, "p and y")
    p = np.clip(p, FOCAL_EPS, 1.0 - FOCAL_EPS)
    pt = np.where(y == 1, p, 1.0 - p)
    at = np.where(y == 1, alpha, 1.0 - alpha)
    return float(np.mean(-at * (1.0 - pt) ** gamma * np.log(pt)))


def focal_loss_grad(p, y, alpha: float = 0.2, gamma: float = 1.0) -> np.ndarray:
    """Gradient of :func:`focal_loss` with respect to ``p`` (inside the clamp range)."""
    p, y = np.asarray(p, dtype=float), np.asarray(y, dtype=float)
    check_same_shape(p, y, "p and y")
    p = np.clip(p, FOCAL_EPS, 1.0 - FOCAL_EPS)
    pt = np.where(y == 1, p, 1.0 - p)
    at = np.where(y == 1, alpha, 1.0 - alpha)
    # d/dpt of -(1-pt)^g log(pt)
    d_pt = gamma * (1.0 - pt) ** (gamma - 1.0) * np.log(pt) - (1.0 - pt) ** gamma / pt
    sign = np.where(y == 1, 1.0, -1.0)
    return at * d_pt * sign / p.size


@dataclass
class LossHistory:
    """Epoch-mean losses (last two epochs) plus the smoothed balancing weights."""

    epochs: deque = field(default_factory=lambda: deque(maxlen=2))
    alpha_smooth: np.ndarray | None = None

    def record(self, losses) -> None:
        losses = np.asarray(losses, dtype=float)
        if np.any(losses <= 0):
            raise ValueError("recorded losses must be positive")
        if self.epochs and len(self.epochs[-1]) != len(losses):
            raise ValueError("loss count changed between epochs")
        self.epochs.append(losses)

    def ratios(self) -> np.ndarray | None:
        if len(self.epochs) < 2:
            return None
        return self.epochs[-1] / self.epochs[-2]


def magnitude_balance(losses, state: LossHistory | None = None, beta: float = DEFAULT_BETA) -> np.ndarray:
    """Weights alpha_i proportional to 1/L_i, so every alpha_i L_i equals 1 / sum_j 1/L_j.

    With a ``state`` the weights pass through a first-order IIR filter
    ``a <- beta a + (1 - beta) a_raw``; the first call seeds it with the raw weights.
    """
    L = np.asarray(losses, dtype=float)
    if L.ndim != 1 or L.size == 0:
        raise ValueError("losses must be a non-empty 1-D sequence")
    if np.any(L <= 0) or not np.all(np.isfinite(L)):
        raise ValueError("losses must be positive and finite")
    inv = 1.0 / L
    raw = inv / inv.sum()
    if state is None:
        return raw
    if state.alpha_smooth is None or state.alpha_smooth.shape != raw.shape:
        state.alpha_smooth = raw
    else:
        state.alpha_smooth = beta * state.alpha_smooth + (1.0 - beta) * raw
    return state.alpha_smooth.copy()


def dwa_weights(history: LossHistory, temperature: float = DEFAULT_TEMPERATURE, n_losses: int | None = None) -> np.ndarray:
    """Softmax of the loss ratios L_{t-1} / L_{t-2} over ``temperature``.

    Weights sum to 1. Uniform until two epochs have been recorded.
    """
    r = history.ratios()
    if r is None:
        n = n_losses if n_losses is not None else (len(history.epochs[-1]) if history.epochs else 1)
        return np.full(n, 1.0 / n)
    z = r / temperature
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()
