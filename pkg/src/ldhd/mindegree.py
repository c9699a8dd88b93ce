"""Minimum-degree-profile interpolation on a prefix subcube.

Given targets on the subcube and a basis, the solver picks the interpolant
whose degree profile (squared-coefficient mass per degree, compared
lexicographically from the highest degree down) is minimal. It walks the
feasible affine set degree by degree, each time minimizing the mass at the
current level and restricting to the argmin subset via a null-space
parameterization.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    InfeasibleError,
    RankToleranceError,
    TooLargeError,
)
from .hypercube import (
    Basis,
    FourierCoefficients,
    SubcubeSpec,
    TableFunction,
    _fwht,
)

FEASIBILITY_RTOL = 1e-9
ENUMERATION_GUARD = 1 << 20


@dataclass(frozen=True)
class InterpolationProblem:
    """Targets on the prefix subcube of spec, to be matched within basis span.

    targets[m] is the required value at the subcube point with index m.
    """

    spec: SubcubeSpec
    basis: Basis
    targets: tuple

    def __post_init__(self) -> None:
        if self.basis.n != self.spec.n:
            raise DimensionMismatchError("basis dimension differs from spec")
        if len(self.targets) != self.spec.size:
            raise DimensionMismatchError(
                f"expected {self.spec.size} targets, got {len(self.targets)}"
            )


def _null_space(matrix: np.ndarray, rtol: float) -> np.ndarray:
    """Orthonormal null-space basis with an ambiguity band around the cutoff.

    Singular values inside [cut/4, 4*cut] make the rank decision unreliable
    for this tolerance, which is reported instead of silently resolved.
    """
    if matrix.size == 0:
        return np.eye(matrix.shape[1])
    _, sv, vt = np.linalg.svd(matrix)
    if sv.size == 0 or sv[0] == 0.0:
        return np.eye(matrix.shape[1])
    cut = rtol * sv[0]
    ambiguous = (sv >= cut / 4) & (sv <= cut * 4)
    if bool(ambiguous.any()):
        raise RankToleranceError(
            f"singular value near rank cutoff {cut:.3e}: {sv[ambiguous][0]:.3e}"
        )
    rank = int(np.sum(sv > cut))
    return vt[rank:].T.copy()


def min_degree_interpolator(problem: InterpolationProblem, rtol: float = 1e-9) -> np.ndarray:
    """Coefficients of the lexicographically minimal interpolant.

    Raises InfeasibleError when the targets are not in the span of the basis
    restricted to the subcube.
    """
    E = problem.basis.subcube_matrix(problem.spec)
    y = np.asarray(problem.targets, dtype=np.float64)
    coeffs, *_ = np.linalg.lstsq(E, y, rcond=None)
    resid = np.abs(E @ coeffs - y).max()
    if resid > FEASIBILITY_RTOL * max(1.0, float(np.abs(y).max())):
        raise InfeasibleError(f"interpolation residual sup-norm {resid:.3e}")
    free = _null_space(E, rtol)
    degrees = np.asarray(problem.basis.degrees)
    for d in sorted(set(problem.basis.degrees), reverse=True):
        if free.shape[1] == 0:
            break
        sel = degrees == d
        level = free[sel, :]
        t, *_ = np.linalg.lstsq(level, -coeffs[sel], rcond=None)
        coeffs = coeffs + free @ t
        free = free @ _null_space(level, rtol)
    return coeffs


def fourier_min_degree_closed_form(targets, spec: SubcubeSpec) -> FourierCoefficients:
    """Fourier-basis shortcut: transform the restriction, embed it unchanged.

    The result places all mass on monomials inside the free prefix, which is
    the minimal profile among all interpolants of the targets.
    """
    y = np.asarray(targets, dtype=np.float64)
    if y.shape != (spec.size,):
        raise DimensionMismatchError(f"expected {spec.size} targets, got {y.shape}")
    out = np.zeros(1 << spec.n)
    if spec.n0 == 0:
        out[0] = y[0]
    else:
        out[: spec.size] = _fwht(y) / spec.size
    return FourierCoefficients(spec.n, out)


def nfl_interpolator_sum(
    concept_labels,
    spec: SubcubeSpec,
    labels: tuple,
    loss_table,
    distribution,
) -> float:
    """Sum of expected loss over every completion of the concept off-subcube.

    A completion agrees with the concept on the subcube and takes arbitrary
    label values elsewhere; the sum enumerates all |labels|^(off points)
    completions explicitly, in a fixed order.

    :param concept_labels: length 2^n array of label indices into labels.
    :param labels: the finite label set (distinct values).
    :param loss_table: (|labels|, |labels|) array, loss_table[i, j] is the
        loss of predicting labels[j] when the concept says labels[i].
    :param distribution: length 2^n positive weights summing to 1.
    """
    c = np.asarray(concept_labels, dtype=np.int64)
    dist = np.asarray(distribution, dtype=np.float64)
    loss = np.asarray(loss_table, dtype=np.float64)
    k = len(labels)
    if len(set(labels)) != k:
        raise ValueError("labels must be distinct")
    if loss.shape != (k, k):
        raise DimensionMismatchError("loss table shape differs from label count")
    size = 1 << spec.n
    if c.shape != (size,) or dist.shape != (size,):
        raise DimensionMismatchError("concept or distribution length differs from cube size")
    if np.any(dist <= 0) or abs(float(dist.sum()) - 1.0) > 1e-12:
        raise ValueError("distribution must be positive and sum to 1")
    if np.any(c < 0) or np.any(c >= k):
        raise ValueError("concept labels outside the label set")
    off = np.arange(spec.size, size)
    count = k ** len(off)
    if count > ENUMERATION_GUARD:
        raise TooLargeError(f"{count} completions exceed the {ENUMERATION_GUARD} guard")
    fixed = float(sum(dist[m] * loss[c[m], c[m]] for m in range(spec.size)))
    total = 0.0
    for assignment in itertools.product(range(k), repeat=len(off)):
        acc = fixed
        for pos, lab in zip(off, assignment):
            acc += dist[pos] * loss[c[pos], lab]
        total += acc
    return total


@dataclass(frozen=True)
class GeneralizationReport:
    """Absolute deviation statistics split by region of the cube."""

    train_max: float
    train_mean: float
    test_max: float
    test_mean: float
    overall_max: float
    overall_mean: float


def generalization_report(
    predictor: TableFunction, concept: TableFunction, spec: SubcubeSpec
) -> GeneralizationReport:
    """Deviation of predictor from concept on subcube, complement and full cube."""
    if predictor.n != concept.n or predictor.n != spec.n:
        raise DimensionMismatchError("predictor, concept and spec dimensions differ")
    dev = np.abs(predictor.values - concept.values)
    train = dev[: spec.size]
    test = dev[spec.size :]
    return GeneralizationReport(
        train_max=float(train.max()),
        train_mean=float(train.mean()),
        test_max=float(test.max()) if test.size else 0.0,
        test_mean=float(test.mean()) if test.size else 0.0,
        overall_max=float(dev.max()),
        overall_mean=float(dev.mean()),
    )
