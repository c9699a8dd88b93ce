"""Attention bias kernels built from relative-position lookup tables.

All biases are (n, n) arrays indexed [key, query] with zeros strictly below
the diagonal; only causal pairs key <= query are meaningful. Attention
weight matrices go the other way, [query, key] with zeros strictly above the
diagonal, matching the row-stochastic convention of causal softmax.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, WindowExceededError


@dataclass(frozen=True)
class RelTable:
    """Lookup table over signed relative offsets -(window-1) .. window-1."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size % 2 == 0:
            raise DimensionMismatchError("table needs an odd number of entries")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def window(self) -> int:
        return (self.values.size + 1) // 2

    @classmethod
    def zeros(cls, window: int) -> "RelTable":
        return cls(np.zeros(2 * window - 1))

    @classmethod
    def random(cls, window: int, seed: int = 0, scale: float = 1.0) -> "RelTable":
        rng = np.random.default_rng(seed)
        return cls(scale * rng.standard_normal(2 * window - 1))

    def gather(self, deltas) -> np.ndarray:
        """Vectorized lookup; offsets outside the window raise, never clamp."""
        d = np.asarray(deltas)
        limit = self.window - 1
        if d.size and int(np.abs(d).max()) > limit:
            bad = int(d.flat[int(np.abs(d).argmax())])
            raise WindowExceededError(
                f"offset {bad} outside window {self.window} (|offset| <= {limit})"
            )
        return self.values[d + limit]

    def __getitem__(self, delta: int) -> float:
        return float(self.gather(np.asarray(delta)))


def _toeplitz(table: RelTable, n: int) -> np.ndarray:
    idx = np.arange(n)
    return table.gather(idx[:, None] - idx[None, :])


def rpe_bias(table: RelTable, n: int) -> np.ndarray:
    """Plain relative bias, entry (i, j) = R[j - i] on causal pairs."""
    return np.triu(_toeplitz(table, n).T)


def alibi_bias(slope: float, n: int) -> np.ndarray:
    """Linear recency penalty, entry (i, j) = -slope * (j - i)."""
    idx = np.arange(n)
    return np.triu(-slope * (idx[None, :] - idx[:, None]))


def attention_weights(X, wq, wk) -> np.ndarray:
    """Causal softmax of (W_Q x_query) . (W_K x_key), unscaled, max-subtracted."""
    X = np.asarray(X, dtype=np.float64)
    wq = np.asarray(wq, dtype=np.float64)
    wk = np.asarray(wk, dtype=np.float64)
    if wq.shape != wk.shape or wq.shape[1] != X.shape[1]:
        raise DimensionMismatchError("projection shapes do not match embeddings")
    logits = (X @ wq.T) @ (X @ wk.T).T
    n = X.shape[0]
    mask = np.tril(np.ones((n, n), dtype=bool))
    shifted = np.where(mask, logits, -np.inf)
    expv = np.exp(shifted - shifted.max(axis=1, keepdims=True))
    return expv / expv.sum(axis=1, keepdims=True)


def _check_weights(weights) -> np.ndarray:
    A = np.asarray(weights, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError("attention weights must be square")
    if np.any(np.triu(A, 1) != 0.0):
        raise DimensionMismatchError("attention weights must be causal")
    return A


def _distance_profile(weights: np.ndarray) -> np.ndarray:
    """Rows q_m(u) = a_m(m - u): attention mass at distance u behind m."""
    n = weights.shape[0]
    m_idx, u_idx = np.indices((n, n))
    src = np.clip(m_idx - u_idx, 0, n - 1)
    return np.where(u_idx <= m_idx, weights[m_idx, src], 0.0)


def rpe_square_bias(table: RelTable, weights) -> np.ndarray:
    """Distance-profile bias (i, j) = sum_{u,v} q_j(u) q_i(v) R[u - v].

    Computed as the transposed congruence of the Toeplitz table with the
    distance-profile matrix; the quadruple sum lives on in
    rpe_square_bias_reference.
    """
    A = _check_weights(weights)
    O = _distance_profile(A)
    R = _toeplitz(table, A.shape[0])
    return np.triu((O @ R @ O.T).T)


def rpe_square_bias_reference(table: RelTable, weights) -> np.ndarray:
    """Direct evaluation of the distance-profile sum, quadratic per pair."""
    A = _check_weights(weights)
    n = A.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            acc = 0.0
            for u in range(j + 1):
                for v in range(i + 1):
                    acc += A[j, j - u] * A[i, i - v] * table[u - v]
            out[i, j] = acc
    return out


def rpe_absolute_bias(table: RelTable, weights) -> np.ndarray:
    """Key-anchored bias (i, j) = sum_{k<=i} a_i(k) R[i - k], constant in j."""
    A = _check_weights(weights)
    n = A.shape[0]
    c = np.sum(A * np.tril(_toeplitz(table, n)), axis=1)
    return np.triu(np.repeat(c[:, None], n, axis=1))


def _softmax_backprop(weights: np.ndarray, abar: np.ndarray) -> np.ndarray:
    """Map d(phi)/d(weights) to d(phi)/d(logits) row by row."""
    inner = np.sum(weights * abar, axis=1, keepdims=True)
    return weights * (abar - inner)


def rpe_square_scalar(table: RelTable, X, wq, wk, upstream) -> float:
    """Test functional: sum of upstream weights against the causal bias."""
    bias = rpe_square_bias(table, attention_weights(X, wq, wk))
    return float(np.sum(np.triu(np.asarray(upstream, dtype=np.float64)) * bias))


def rpe_square_grads(table: RelTable, X, wq, wk, upstream):
    """Value and analytic gradients of rpe_square_scalar in (wq, wk)."""
    X = np.asarray(X, dtype=np.float64)
    A = attention_weights(X, wq, wk)
    n = A.shape[0]
    O = _distance_profile(A)
    R = _toeplitz(table, n)
    Gu = np.triu(np.asarray(upstream, dtype=np.float64))
    phi = float(np.sum(Gu * np.triu((O @ R @ O.T).T)))
    H = Gu.T
    dO = H @ O @ R.T + H.T @ O @ R
    m_idx, l_idx = np.indices((n, n))
    abar = np.where(l_idx <= m_idx, dO[m_idx, np.clip(m_idx - l_idx, 0, n - 1)], 0.0)
    gamma = _softmax_backprop(A, abar)
    wq = np.asarray(wq, dtype=np.float64)
    wk = np.asarray(wk, dtype=np.float64)
    gq = wk @ X.T @ gamma.T @ X
    gk = wq @ X.T @ gamma @ X
    return phi, gq, gk


def rpe_absolute_scalar(table: RelTable, X, wq, wk, upstream) -> float:
    bias = rpe_absolute_bias(table, attention_weights(X, wq, wk))
    return float(np.sum(np.triu(np.asarray(upstream, dtype=np.float64)) * bias))


def rpe_absolute_grads(table: RelTable, X, wq, wk, upstream):
    """Value and analytic gradients of rpe_absolute_scalar in (wq, wk)."""
    X = np.asarray(X, dtype=np.float64)
    A = attention_weights(X, wq, wk)
    n = A.shape[0]
    Gu = np.triu(np.asarray(upstream, dtype=np.float64))
    T = np.tril(_toeplitz(table, n))
    c = np.sum(A * T, axis=1)
    phi = float(np.sum(Gu * np.triu(np.repeat(c[:, None], n, axis=1))))
    abar = np.sum(Gu, axis=1)[:, None] * T
    gamma = _softmax_backprop(A, abar)
    wq = np.asarray(wq, dtype=np.float64)
    wk = np.asarray(wk, dtype=np.float64)
    gq = wk @ X.T @ gamma.T @ X
    gk = wq @ X.T @ gamma @ X
    return phi, gq, gk


def finite_diff_grad(fn, W, eps: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function at W, entry by entry."""
    W = np.asarray(W, dtype=np.float64)
    out = np.zeros_like(W)
    it = np.nditer(W, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        up = W.copy()
        up[idx] += eps
        down = W.copy()
        down[idx] -= eps
        out[idx] = (fn(up) - fn(down)) / (2 * eps)
    return out


def bias_csv_lines(bias) -> list:
    """CSV rows (header first) for causal entries, full float precision."""
    B = np.asarray(bias, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise DimensionMismatchError("bias must be square")
    lines = ["row,col,value"]
    n = B.shape[0]
    for i in range(n):
        for j in range(i, n):
            lines.append(f"{i},{j},{B[i, j]:.17g}")
    return lines
