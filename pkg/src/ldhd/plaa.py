"""Linear attention models steered by a position-advice signal.

The advice of a point is the highest coordinate index holding -1 (0 when
there is none). The model value is x^T A e_{n(x)} for an upper-triangular
score matrix A, so each advice fiber reads one column of A. Three
parameterizations are covered: free upper-triangular scores, factored
absolute-position scores A = M o (P^T P), and a fixed score matrix expressed
in a table basis with disjoint supports (one trainable gain per table).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, DivergedError
from .hypercube import (
    Basis,
    SubcubeSpec,
    TableFunction,
    _element_degree,
    cube_points,
    subcube_points,
)

UNIT_NORM_TOL = 1e-12


def advice(x) -> int:
    """Highest 1-based index with x_i == -1, or 0 when all coordinates are +1."""
    out = 0
    for i, v in enumerate(x):
        if v == -1:
            out = i + 1
        elif v != 1:
            raise ValueError(f"coordinate {v!r} not in {{+1,-1}}")
    return out


def advice_of_points(points: np.ndarray) -> np.ndarray:
    """Vectorized advice over a (m, n) point array."""
    pts = np.asarray(points)
    positions = np.arange(1, pts.shape[1] + 1)
    return np.where(pts == -1, positions, 0).max(axis=1)


def advice_counts(n0: int) -> np.ndarray:
    """Number of subcube points per advice value, computed by enumeration."""
    if not 0 <= n0 <= 20:
        raise DimensionMismatchError(f"n0={n0} outside [0, 20]")
    counts = np.zeros(n0 + 1, dtype=np.int64)
    for m in range(1 << n0):
        counts[m.bit_length()] += 1
    return counts


def check_upper_triangular(A, n: int | None = None) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError("score matrix must be square")
    if n is not None and A.shape[0] != n:
        raise DimensionMismatchError(f"score matrix must be {n}x{n}")
    if np.any(np.tril(A, -1) != 0.0):
        raise DimensionMismatchError("score matrix has entries below the diagonal")
    return A


def plaa_forward(A, points) -> np.ndarray:
    """Model values x^T A e_{n(x)}; advice 0 short-circuits to 0."""
    pts = np.asarray(points, dtype=np.float64)
    A = check_upper_triangular(A, pts.shape[1])
    adv = advice_of_points(pts)
    cols = A[:, np.maximum(adv, 1) - 1]
    vals = np.einsum("mi,im->m", pts, cols)
    return np.where(adv == 0, 0.0, vals)


def pair_table_values(n: int, i: int, j: int) -> np.ndarray:
    """Values of the (i, j) pair table x_i * [advice(x) == j] on the full cube."""
    if not 1 <= i <= j <= n:
        raise DimensionMismatchError(f"need 1 <= i <= j <= n, got ({i}, {j})")
    pts = cube_points(n)
    adv = advice_of_points(pts)
    return pts[:, i - 1].astype(np.float64) * (adv == j)


def plaa_basis(n: int) -> Basis:
    """All n(n+1)/2 pair tables, advice-major order, tagged with (i, j)."""
    elems, tags = [], []
    for j in range(1, n + 1):
        for i in range(1, j + 1):
            elems.append(TableFunction(n, pair_table_values(n, i, j)))
            tags.append((i, j))
    degrees = [_element_degree(n, e.values) for e in elems]
    return Basis(elems, degrees, "plaa", tags=tags)


def check_gain_tables(mats) -> list:
    """Validate a family of unit-Frobenius upper-triangular disjoint tables."""
    out = []
    seen = None
    for k, U in enumerate(mats):
        U = check_upper_triangular(U)
        norm = float(np.sqrt(np.sum(U * U)))
        if abs(norm - 1.0) > UNIT_NORM_TOL:
            raise DimensionMismatchError(f"table {k} has Frobenius norm {norm!r}")
        support = U != 0.0
        if seen is None:
            seen = np.zeros_like(support)
        elif support.shape != seen.shape:
            raise DimensionMismatchError("tables of mixed sizes")
        if np.any(seen & support):
            raise DimensionMismatchError(f"table {k} overlaps an earlier support")
        seen |= support
        out.append(U)
    if not out:
        raise DimensionMismatchError("empty table family")
    return out


def grpe_basis(mats) -> Basis:
    """Table functions b_k(x) = x^T U_k e_{n(x)} for a validated family."""
    mats = check_gain_tables(mats)
    n = mats[0].shape[0]
    pts = cube_points(n)
    elems = [TableFunction(n, plaa_forward(U, pts)) for U in mats]
    degrees = [_element_degree(n, e.values) for e in elems]
    return Basis(elems, degrees, "grpe", tags=tuple(range(1, len(mats) + 1)))


def rpe_tables(n: int) -> list:
    """Constant-diagonal family: table k holds 1/sqrt(n+1-k) on offset k-1."""
    out = []
    for k in range(1, n + 1):
        U = np.zeros((n, n))
        idx = np.arange(n - k + 1)
        U[idx, idx + k - 1] = 1.0 / np.sqrt(n + 1 - k)
        out.append(U)
    return out


def block_zero_set(mats, n0: int) -> frozenset:
    """1-based table indices whose leading n0 x n0 block is identically zero."""
    zero = set()
    for k, U in enumerate(mats, start=1):
        if not np.any(np.asarray(U)[:n0, :n0] != 0.0):
            zero.add(k)
    return frozenset(zero)


def corollary_predicate(mats, gains, n0: int) -> bool:
    """True when every zero-block table carries a zero concept gain."""
    gains = np.asarray(gains, dtype=np.float64)
    if gains.shape != (len(mats),):
        raise DimensionMismatchError("gain count differs from table count")
    return all(gains[k - 1] == 0.0 for k in block_zero_set(mats, n0))


def grpe_forward(mats, gains, points) -> np.ndarray:
    """Model values for the table family with the given gains."""
    gains = np.asarray(gains, dtype=np.float64)
    if gains.shape != (len(mats),):
        raise DimensionMismatchError("gain count differs from table count")
    combo = sum(g * np.asarray(U, dtype=np.float64) for g, U in zip(gains, mats))
    return plaa_forward(combo, points)


def grpe_closed_form(mats, gains, n0: int) -> np.ndarray:
    """Limit of gradient descent from zero on the subcube population loss.

    Tables visible on the subcube recover their concept gain; tables whose
    function vanishes there keep gain zero.
    """
    mats = check_gain_tables(mats)
    gains = np.asarray(gains, dtype=np.float64)
    if gains.shape != (len(mats),):
        raise DimensionMismatchError("gain count differs from table count")
    sub = subcube_points(SubcubeSpec(mats[0].shape[0], n0))
    out = np.zeros(len(mats))
    for k, U in enumerate(mats):
        visible = bool(np.any(plaa_forward(U, sub) != 0.0))
        out[k] = gains[k] if visible else 0.0
    return out


@dataclass(frozen=True)
class GrpeResult:
    gains: np.ndarray
    loss: float
    steps: int


def grpe_train(
    mats,
    gains,
    n0: int,
    lr: float = 0.1,
    max_steps: int = 10**6,
    loss_tol: float = 1e-12,
    grad_tol: float = 1e-10,
) -> GrpeResult:
    """Gradient descent from zero gains fitting the concept on the subcube."""
    mats = check_gain_tables(mats)
    sub = subcube_points(SubcubeSpec(mats[0].shape[0], n0))
    y = grpe_forward(mats, gains, sub)
    B = np.stack([plaa_forward(U, sub) for U in mats], axis=1)
    m = B.shape[0]
    p = np.zeros(len(mats))
    best = np.inf
    loss = float(np.dot(y, y)) / (2 * m)
    steps = 0
    for steps in range(1, max_steps + 1):
        resid = B @ p - y
        loss = float(np.dot(resid, resid)) / (2 * m)
        grad = B.T @ resid / m
        if loss <= loss_tol or float(np.abs(grad).max()) <= grad_tol:
            break
        best = min(best, loss)
        if loss > 10 * best and loss > loss_tol:
            raise DivergedError(f"loss {loss:.3e} above 10x running minimum {best:.3e}")
        p = p - lr * grad
    return GrpeResult(gains=p, loss=loss, steps=steps)


def q_mask(n: int, n0: int) -> np.ndarray:
    """Root-weight mask: entry (i, j) is 2^{-(n0-j+1)/2} on the upper n0 block."""
    if not 0 <= n0 <= n:
        raise DimensionMismatchError(f"n0={n0} outside [0, n={n}]")
    Q = np.zeros((n, n))
    for j in range(1, n0 + 1):
        Q[: j, j - 1] = 2.0 ** (-(n0 - j + 1) / 2.0)
    return Q


def masked_gram(P) -> np.ndarray:
    """Upper-triangular part of P^T P, the effective score matrix."""
    P = np.asarray(P, dtype=np.float64)
    return np.triu(P.T @ P)


def ape_forward(P, points) -> np.ndarray:
    """Model values with factored scores, x^T (M o P^T P) e_{n(x)}."""
    return plaa_forward(masked_gram(P), points)


def ape_loss(P, A, n0: int) -> float:
    """Closed-form population loss over the subcube, 0.5 |Q o (P^T P - A)|_F^2."""
    P = np.asarray(P, dtype=np.float64)
    A = check_upper_triangular(A)
    Q = q_mask(A.shape[0], n0)
    Z = Q * (P.T @ P - A)
    return 0.5 * float(np.sum(Z * Z))


def ape_loss_enumerated(P, A, n0: int) -> float:
    """Subcube average of squared model gap, kept as the slow reference."""
    A = check_upper_triangular(A)
    spec = SubcubeSpec(A.shape[0], n0)
    sub = subcube_points(spec)
    gap = ape_forward(P, sub) - plaa_forward(A, sub)
    return 0.5 * float(np.mean(gap * gap))


def ape_gradient(P, A, n0: int) -> np.ndarray:
    """Analytic gradient of ape_loss with respect to P."""
    P = np.asarray(P, dtype=np.float64)
    A = check_upper_triangular(A)
    Q2 = q_mask(A.shape[0], n0) ** 2
    W = Q2 * (P.T @ P - A)
    return P @ (W + W.T)


def ape_init(n: int, alpha: float, d: int | None = None) -> np.ndarray:
    """Deterministic factor with P^T P = alpha I, shape (d, n)."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    d = n if d is None else d
    if d < n:
        raise DimensionMismatchError(f"need d >= n, got d={d}, n={n}")
    P = np.zeros((d, n))
    P[:n, :n] = np.sqrt(alpha) * np.eye(n)
    return P


@dataclass(frozen=True)
class ApeResult:
    P: np.ndarray
    loss: float
    grad_sup: float
    steps: int
    converged: bool


def ape_train(
    A,
    n0: int,
    alpha: float,
    lr: float = 0.02,
    max_steps: int = 10**6,
    loss_tol: float = 1e-12,
    grad_tol: float = 1e-10,
    d: int | None = None,
) -> ApeResult:
    """Gradient descent on the factored scores from the isotropic start."""
    A = check_upper_triangular(A)
    n = A.shape[0]
    Q = q_mask(n, n0)
    Q2 = Q * Q
    P = ape_init(n, alpha, d)
    best = np.inf
    loss = np.inf
    grad_sup = np.inf
    steps = 0
    for steps in range(1, max_steps + 1):
        D = P.T @ P - A
        loss = 0.5 * float(np.sum((Q * D) ** 2))
        W = Q2 * D
        grad = P @ (W + W.T)
        grad_sup = float(np.abs(grad).max())
        if loss <= loss_tol or grad_sup <= grad_tol:
            return ApeResult(P=P, loss=loss, grad_sup=grad_sup, steps=steps, converged=True)
        best = min(best, loss)
        if loss > 10 * best and loss > loss_tol:
            raise DivergedError(f"loss {loss:.3e} above 10x running minimum {best:.3e}")
        P = P - lr * grad
    return ApeResult(P=P, loss=loss, grad_sup=grad_sup, steps=steps, converged=False)


def ape_deviation_bound(A, n0: int, alpha: float) -> float:
    """Bound on |M o P^T P - A restricted to the leading block|_F^2 at zero loss."""
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    gap = n - n0
    return n * gap * alpha * float(np.abs(A).max()) + (gap + 1) * gap / 2 * alpha**2


def sample_feasible_target(n: int, n0: int, seed: int = 0) -> np.ndarray:
    """Random upper-triangular target whose leading block is a shifted Gram.

    The block eigenvalue floor keeps the factored-score descent from
    crawling along a nearly flat valley, so sweeps stay fast.
    """
    rng = np.random.default_rng(seed)
    A = np.triu(rng.standard_normal((n, n)))
    G = rng.standard_normal((n0, n0))
    A[:n0, :n0] = np.triu(G @ G.T / max(n0, 1) + 0.3 * np.eye(n0))
    return A


@dataclass(frozen=True)
class ApeSweepRow:
    alpha: float
    loss: float
    steps: int
    converged: bool
    block_dev: float
    off_block_sq: float
    bound: float
    frozen_dev: float
    gram: np.ndarray


ALPHA_LADDER = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 1e-4)


def ape_alpha_limit(A, n0: int, alphas=ALPHA_LADDER, lr: float = 0.02, d: int | None = None):
    """Effective scores at the smallest alpha, plus the per-alpha sweep rows."""
    alphas = list(alphas)
    if any(b >= a for a, b in zip(alphas, alphas[1:])) or min(alphas) <= 0:
        raise ValueError("alphas must be positive and strictly decreasing")
    rows = ape_alpha_sweep(A, n0, alphas, lr=lr, d=d)
    return rows[-1].gram, rows


def ape_alpha_sweep(
    A, n0: int, alphas, lr: float = 0.02, max_steps: int = 10**6, d: int | None = None
) -> list:
    """Train once per alpha and report block recovery plus the deviation bound."""
    A = check_upper_triangular(A)
    n = A.shape[0]
    rows = []
    for alpha in alphas:
        res = ape_train(A, n0, alpha, lr=lr, max_steps=max_steps, d=d)
        gram = masked_gram(res.P)
        block_dev = float(np.abs(np.triu(gram[:n0, :n0] - A[:n0, :n0])).max())
        restricted = np.zeros_like(A)
        restricted[:n0, :n0] = np.triu(A[:n0, :n0])
        off = gram - restricted
        off[:n0, :n0] = 0.0
        off_block_sq = float(np.sum(off * off))
        frozen = res.P[:, n0:] - ape_init(n, alpha, res.P.shape[0])[:, n0:]
        frozen_dev = float(np.abs(frozen).max()) if frozen.size else 0.0
        rows.append(
            ApeSweepRow(
                alpha=float(alpha),
                loss=res.loss,
                steps=res.steps,
                converged=res.converged,
                block_dev=block_dev,
                off_block_sq=off_block_sq,
                bound=ape_deviation_bound(A, n0, alpha),
                frozen_dev=frozen_dev,
                gram=gram,
            )
        )
    return rows
