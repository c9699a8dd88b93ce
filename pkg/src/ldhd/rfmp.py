"""Random-features model over a fixed orthonormal projection of the cube.

The model is f(x; a) = K^{-1/2} sum_k a_k sigma(<w_k, Vt x> + b_k) with the
amplitudes a as the only trainable parameters, so gradient descent from zero
on the population square loss over the subcube converges to the minimum-norm
interpolating amplitudes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    DivergedError,
    IllConditionedError,
    InfeasibleError,
    NotOrthonormalError,
)
from .hypercube import (
    ORTHONORMAL_TOL,
    SubcubeSpec,
    TableFunction,
    cube_points,
    projected_basis,
    subcube_points,
)
from .mindegree import InterpolationProblem, min_degree_interpolator

ACTIVATIONS = {
    "exp": np.exp,
    "relu": lambda z: np.maximum(z, 0.0),
}

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class FeatureSet:
    """Frozen random features: weight rows w_k, biases b_k, activation name."""

    weights: np.ndarray
    biases: np.ndarray
    activation: str
    seed: int

    @property
    def k(self) -> int:
        return self.weights.shape[0]

    @property
    def r(self) -> int:
        return self.weights.shape[1]


def sample_features(k: int, r: int, activation: str = "exp", seed: int = 0) -> FeatureSet:
    """Draw k features with entries of variance 1/r, reproducible from seed."""
    if activation not in ACTIVATIONS:
        raise ValueError(f"unknown activation {activation!r}")
    if k < 1 or r < 1:
        raise DimensionMismatchError("need k >= 1 features and r >= 1 projected dims")
    rng = np.random.default_rng(seed)
    scale = np.sqrt(1.0 / r)
    weights = rng.normal(0.0, scale, size=(k, r))
    biases = rng.normal(0.0, scale, size=k)
    weights.setflags(write=False)
    biases.setflags(write=False)
    return FeatureSet(weights=weights, biases=biases, activation=activation, seed=seed)


def check_projection(V, n: int) -> np.ndarray:
    """Validate an (n, r) projection with orthonormal columns."""
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2 or V.shape[0] != n:
        raise DimensionMismatchError(f"projection must be ({n}, r)")
    dev = np.abs(V.T @ V - np.eye(V.shape[1])).max()
    if dev > ORTHONORMAL_TOL:
        raise NotOrthonormalError(f"max |V^T V - I| = {dev:.3e}")
    return V


def feature_matrix(features: FeatureSet, V, points) -> np.ndarray:
    """Scaled activation matrix, shape (len(points), k)."""
    pts = np.asarray(points, dtype=np.float64)
    V = check_projection(V, pts.shape[1])
    if V.shape[1] != features.r:
        raise DimensionMismatchError("projection width differs from feature width")
    z = pts @ V
    act = ACTIVATIONS[features.activation]
    return act(z @ features.weights.T + features.biases) / np.sqrt(features.k)


def rfmp_forward(features: FeatureSet, V, amplitudes, points) -> np.ndarray:
    """Model values at the given points."""
    a = np.asarray(amplitudes, dtype=np.float64)
    if a.shape != (features.k,):
        raise DimensionMismatchError("amplitude count differs from feature count")
    return feature_matrix(features, V, points) @ a


def min_norm_amplitudes(features: FeatureSet, V, spec: SubcubeSpec, targets) -> np.ndarray:
    """Minimum-norm amplitudes interpolating the targets on the subcube."""
    y = np.asarray(targets, dtype=np.float64)
    F = feature_matrix(features, V, subcube_points(spec))
    sv = np.linalg.svd(F, compute_uv=False)
    nonzero = sv[sv > 0]
    if nonzero.size and nonzero[0] / nonzero[-1] > CONDITION_LIMIT:
        raise IllConditionedError(
            f"feature matrix condition {nonzero[0] / nonzero[-1]:.3e}"
        )
    a, *_ = np.linalg.lstsq(F, y, rcond=None)
    resid = np.abs(F @ a - y).max()
    if resid > 1e-9 * max(1.0, float(np.abs(y).max())):
        raise InfeasibleError(f"interpolation residual sup-norm {resid:.3e}")
    return a


@dataclass(frozen=True)
class TrainResult:
    amplitudes: np.ndarray
    loss: float
    steps: int


def rfmp_train_gd(
    features: FeatureSet,
    V,
    spec: SubcubeSpec,
    targets,
    lr: float = 0.05,
    max_steps: int = 10**6,
    loss_tol: float = 1e-10,
) -> TrainResult:
    """Full-batch gradient descent from zero amplitudes on the population loss.

    The loss is mean over the subcube of (f(x) - y(x))^2 / 2. Because the
    model is linear in the amplitudes, every iterate lies in the row space of
    the feature matrix; the update is carried in that low-dimensional space,
    which reproduces the plain parameter-space iterates exactly.
    """
    y = np.asarray(targets, dtype=np.float64)
    F = feature_matrix(features, V, subcube_points(spec))
    m = F.shape[0]
    if y.shape != (m,):
        raise DimensionMismatchError(f"expected {m} targets, got {y.shape}")
    gram = F @ F.T
    w = np.zeros(m)
    best = np.inf
    loss = float(np.dot(y, y)) / (2 * m)
    steps = 0
    for steps in range(1, max_steps + 1):
        resid = gram @ w - y
        loss = float(np.dot(resid, resid)) / (2 * m)
        if loss <= loss_tol:
            break
        best = min(best, loss)
        if loss > 10 * best and loss > loss_tol:
            raise DivergedError(f"loss {loss:.3e} above 10x running minimum {best:.3e}")
        w = w - (lr / m) * resid
    return TrainResult(amplitudes=F.T @ w, loss=loss, steps=steps)


def _train_gd_primal(
    features: FeatureSet,
    V,
    spec: SubcubeSpec,
    targets,
    lr: float,
    steps: int,
) -> np.ndarray:
    """Straight-line parameter-space gradient descent, kept as a reference."""
    y = np.asarray(targets, dtype=np.float64)
    F = feature_matrix(features, V, subcube_points(spec))
    m = F.shape[0]
    a = np.zeros(features.k)
    for _ in range(steps):
        a = a - (lr / m) * (F.T @ (F @ a - y))
    return a


@dataclass(frozen=True)
class RfmpOracleReport:
    """Learned model against the minimum-degree interpolant of the targets."""

    sup_deviation: float
    l2_deviation: float
    learned: np.ndarray
    oracle: TableFunction
    oracle_coeffs: np.ndarray
    final_loss: float
    steps: int


def rfmp_vs_oracle(
    features: FeatureSet,
    V,
    spec: SubcubeSpec,
    concept: TableFunction,
    method: str = "gd",
    lr: float = 0.05,
    max_steps: int = 10**6,
    loss_tol: float = 1e-10,
) -> RfmpOracleReport:
    """Train on the concept restricted to the subcube, compare on the cube.

    The reference is the minimum-degree interpolant with respect to the
    projected product basis of V.
    """
    targets = concept.subcube_values(spec)
    if method == "gd":
        result = rfmp_train_gd(
            features, V, spec, targets, lr=lr, max_steps=max_steps, loss_tol=loss_tol
        )
        amplitudes, loss, steps = result.amplitudes, result.loss, result.steps
    elif method == "min-norm":
        amplitudes = min_norm_amplitudes(features, V, spec, targets)
        loss, steps = 0.0, 0
    else:
        raise ValueError(f"unknown method {method!r}")
    learned = rfmp_forward(features, V, amplitudes, cube_points(spec.n))
    basis = projected_basis(V)
    coeffs = min_degree_interpolator(
        InterpolationProblem(spec=spec, basis=basis, targets=tuple(targets))
    )
    oracle = basis.combine(coeffs)
    dev = learned - oracle.values
    return RfmpOracleReport(
        sup_deviation=float(np.abs(dev).max()),
        l2_deviation=float(np.sqrt(np.mean(dev * dev))),
        learned=learned,
        oracle=oracle,
        oracle_coeffs=coeffs,
        final_loss=loss,
        steps=steps,
    )
