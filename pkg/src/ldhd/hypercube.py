"""Functions on the Boolean hypercube {+1,-1}^N and their multilinear expansions.

Points are indexed by bitmask: bit (i-1) of the index is set exactly when
coordinate x_i equals -1, so index 0 is the all-ones point and the prefix
subcube (trailing coordinates frozen at +1) occupies a contiguous index range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    NotIndependentError,
    NotInSpanError,
    NotOrthonormalError,
)

MAX_N = 20

RANK_RTOL = 1e-9
ORTHONORMAL_TOL = 1e-10


def _check_dim(n: int) -> None:
    if not 1 <= n <= MAX_N:
        raise DimensionMismatchError(f"dimension {n} outside [1, {MAX_N}]")


@dataclass(frozen=True)
class SubcubeSpec:
    """Ambient dimension n and free-prefix length n0.

    The subcube consists of all points whose coordinates beyond n0 are +1.
    """

    n: int
    n0: int

    def __post_init__(self) -> None:
        _check_dim(self.n)
        if not 0 <= self.n0 <= self.n:
            raise DimensionMismatchError(f"n0={self.n0} outside [0, n={self.n}]")

    @property
    def size(self) -> int:
        return 1 << self.n0


def cube_points(n: int) -> np.ndarray:
    """All 2^n points of {+1,-1}^n as an integer array in index order."""
    _check_dim(n)
    idx = np.arange(1 << n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n)) & 1
    return (1 - 2 * bits).astype(np.int64)


def subcube_points(spec: SubcubeSpec) -> np.ndarray:
    """Points of the prefix subcube, shape (2^n0, n), in index order."""
    pts = np.ones(((1 << spec.n0), spec.n), dtype=np.int64)
    if spec.n0 > 0:
        idx = np.arange(1 << spec.n0, dtype=np.int64)
        bits = (idx[:, None] >> np.arange(spec.n0)) & 1
        pts[:, : spec.n0] = 1 - 2 * bits
    return pts


def index_of_point(x) -> int:
    """Index of a point under the bitmask convention."""
    m = 0
    for i, v in enumerate(x):
        if v == -1:
            m |= 1 << i
        elif v != 1:
            raise ValueError(f"coordinate {v!r} not in {{+1,-1}}")
    return m


def _popcounts(masks: np.ndarray, n: int) -> np.ndarray:
    bits = (masks[:, None] >> np.arange(n)) & 1
    return bits.sum(axis=1)


class TableFunction:
    """A real function on {+1,-1}^n stored as a value table in index order.

    :param n: hypercube dimension.
    :param values: length 2^n array of function values; copied and frozen.
    """

    def __init__(self, n: int, values) -> None:
        _check_dim(n)
        vals = np.asarray(values, dtype=np.float64).copy()
        if vals.shape != ((1 << n),):
            raise DimensionMismatchError(
                f"expected {1 << n} values for n={n}, got shape {vals.shape}"
            )
        vals.setflags(write=False)
        self.n = n
        self.values = vals

    @classmethod
    def from_callable(cls, n: int, fn) -> "TableFunction":
        pts = cube_points(n)
        return cls(n, [float(fn(tuple(p))) for p in pts])

    def subcube_values(self, spec: SubcubeSpec) -> np.ndarray:
        """Values on the prefix subcube; its points occupy the leading indices."""
        if spec.n != self.n:
            raise DimensionMismatchError("spec dimension differs from function dimension")
        return self.values[: spec.size]

    def __call__(self, x) -> float:
        return float(self.values[index_of_point(x)])

    def __repr__(self) -> str:
        return f"TableFunction(n={self.n})"


class FourierCoefficients:
    """Multilinear expansion coefficients indexed by subset bitmask.

    Bit (i-1) of a mask is set exactly when variable x_i belongs to the
    monomial, so mask 0 is the constant term.
    """

    def __init__(self, n: int, coeffs) -> None:
        _check_dim(n)
        c = np.asarray(coeffs, dtype=np.float64).copy()
        if c.shape != ((1 << n),):
            raise DimensionMismatchError(
                f"expected {1 << n} coefficients for n={n}, got shape {c.shape}"
            )
        c.setflags(write=False)
        self.n = n
        self.coeffs = c

    def coefficient(self, subset) -> float:
        mask = 0
        for i in subset:
            if not 1 <= i <= self.n:
                raise DimensionMismatchError(f"variable index {i} outside [1, {self.n}]")
            mask |= 1 << (i - 1)
        return float(self.coeffs[mask])

    def to_table(self) -> TableFunction:
        return TableFunction(self.n, _fwht(self.coeffs))

    def degree(self, tol: float = 1e-9) -> int:
        masks = np.nonzero(np.abs(self.coeffs) > tol)[0]
        if masks.size == 0:
            return 0
        return int(_popcounts(masks, self.n).max())


def _fwht(values: np.ndarray) -> np.ndarray:
    """In-place style fast Walsh-Hadamard transform on a copy, unnormalized."""
    a = np.asarray(values, dtype=np.float64).copy()
    h = 1
    while h < a.size:
        for start in range(0, a.size, 2 * h):
            lo = a[start : start + h].copy()
            hi = a[start + h : start + 2 * h].copy()
            a[start : start + h] = lo + hi
            a[start + h : start + 2 * h] = lo - hi
        h *= 2
    return a


def walsh_transform(f: TableFunction) -> FourierCoefficients:
    """Expansion coefficients c_T = 2^{-n} sum_x f(x) prod_{i in T} x_i."""
    return FourierCoefficients(f.n, _fwht(f.values) / f.values.size)


def inner_product(f: TableFunction, g: TableFunction) -> float:
    """Expectation of f*g under the uniform distribution on the cube."""
    if f.n != g.n:
        raise DimensionMismatchError("inner product of functions on different cubes")
    return float(np.dot(f.values, g.values)) / f.values.size


def support_set(f: TableFunction, tol: float = 1e-9) -> frozenset:
    """1-based variable indices touched by any coefficient with |c| > tol."""
    coeffs = walsh_transform(f).coeffs
    masks = np.nonzero(np.abs(coeffs) > tol)[0]
    out = set()
    for m in masks:
        for i in range(f.n):
            if (int(m) >> i) & 1:
                out.add(i + 1)
    return frozenset(out)


@dataclass(frozen=True)
class DegreeProfile:
    """Squared-coefficient mass per degree, highest degree first.

    masses[0] is the mass at the top degree D of the basis, masses[-1] the
    mass at degree 0. Profiles order lexicographically on this tuple.
    """

    masses: tuple

    def __post_init__(self) -> None:
        if len(self.masses) == 0:
            raise ValueError("profile needs at least the degree-0 slot")

    @property
    def top_degree(self) -> int:
        return len(self.masses) - 1

    def mass_at(self, degree: int) -> float:
        return self.masses[self.top_degree - degree]

    def __lt__(self, other: "DegreeProfile") -> bool:
        return compare_profiles(self, other) < 0

    def __le__(self, other: "DegreeProfile") -> bool:
        return compare_profiles(self, other) <= 0


def compare_profiles(p: DegreeProfile, q: DegreeProfile, tol: float = 0.0) -> int:
    """Lexicographic comparison from the highest degree down; -1, 0 or +1.

    The shorter profile is padded with leading zeros, which represents the
    same mass assignment inside a basis of larger top degree.
    """
    length = max(len(p.masses), len(q.masses))
    a = (0.0,) * (length - len(p.masses)) + tuple(p.masses)
    b = (0.0,) * (length - len(q.masses)) + tuple(q.masses)
    for x, y in zip(a, b):
        if x < y - tol:
            return -1
        if x > y + tol:
            return 1
    return 0


class Basis:
    """A linearly independent family of table functions on one cube.

    :param elements: the member functions.
    :param degrees: exact multilinear degree of each member.
    :param label: short human-readable family name.
    :param tags: per-element identifiers (masks, index pairs, ...).
    """

    def __init__(self, elements, degrees, label: str, tags=None) -> None:
        elements = tuple(elements)
        if not elements:
            raise NotIndependentError("empty basis")
        n = elements[0].n
        for e in elements:
            if e.n != n:
                raise DimensionMismatchError("basis elements on different cubes")
        matrix = np.stack([e.values for e in elements], axis=1)
        sv = np.linalg.svd(matrix, compute_uv=False)
        rank = int(np.sum(sv > RANK_RTOL * sv[0]))
        if rank < len(elements):
            raise NotIndependentError(
                f"{label}: rank {rank} below element count {len(elements)}"
            )
        matrix.setflags(write=False)
        self.n = n
        self.elements = elements
        self.degrees = tuple(int(d) for d in degrees)
        self.label = label
        self.tags = tuple(tags) if tags is not None else tuple(range(len(elements)))
        self.evaluation_matrix = matrix

    def __len__(self) -> int:
        return len(self.elements)

    def subcube_matrix(self, spec: SubcubeSpec) -> np.ndarray:
        """Element values on the prefix subcube, shape (2^n0, R)."""
        if spec.n != self.n:
            raise DimensionMismatchError("spec dimension differs from basis dimension")
        return self.evaluation_matrix[: spec.size]

    def combine(self, coeffs) -> TableFunction:
        c = np.asarray(coeffs, dtype=np.float64)
        if c.shape != (len(self.elements),):
            raise DimensionMismatchError("coefficient count differs from basis size")
        return TableFunction(self.n, self.evaluation_matrix @ c)


def _element_degree(n: int, values: np.ndarray) -> int:
    return FourierCoefficients(n, _fwht(values) / values.size).degree(
        tol=1e-9 * max(1.0, float(np.abs(values).max()))
    )


def fourier_basis(n: int) -> Basis:
    """All 2^n parity functions, in subset-mask order."""
    _check_dim(n)
    pts = cube_points(n)
    elems = []
    for mask in range(1 << n):
        sel = [(mask >> i) & 1 == 1 for i in range(n)]
        vals = pts[:, sel].prod(axis=1).astype(np.float64) if any(sel) else np.ones(len(pts))
        elems.append(TableFunction(n, vals))
    degrees = [_element_degree(n, e.values) for e in elems]
    return Basis(elems, degrees, "fourier", tags=tuple(range(1 << n)))


def projected_basis(V) -> Basis:
    """Products of projection coordinates <v_t, x> over subsets of columns.

    :param V: (n, r) array with orthonormal columns.
    """
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2:
        raise DimensionMismatchError("projection must be a 2-d array")
    n, r = V.shape
    _check_dim(n)
    gram_dev = np.abs(V.T @ V - np.eye(r)).max()
    if gram_dev > ORTHONORMAL_TOL:
        raise NotOrthonormalError(f"max |V^T V - I| = {gram_dev:.3e}")
    Z = cube_points(n).astype(np.float64) @ V
    elems = []
    for mask in range(1 << r):
        vals = np.ones(1 << n)
        for t in range(r):
            if (mask >> t) & 1:
                vals = vals * Z[:, t]
        elems.append(TableFunction(n, vals))
    degrees = [_element_degree(n, e.values) for e in elems]
    return Basis(elems, degrees, "projected", tags=tuple(range(1 << r)))


def make_basis(kind: str, **params) -> Basis:
    """Construct one of the named basis families.

    Kinds: "fourier" (n), "projected" (V), "plaa" (n), "grpe" (mats).
    """
    if kind == "fourier":
        return fourier_basis(params["n"])
    if kind == "projected":
        return projected_basis(params["V"])
    if kind == "plaa":
        from . import plaa

        return plaa.plaa_basis(params["n"])
    if kind == "grpe":
        from . import plaa

        return plaa.grpe_basis(params["mats"])
    raise ValueError(f"unknown basis kind {kind!r}")


def expand_in_basis(f: TableFunction, basis: Basis, tol: float = 1e-9) -> np.ndarray:
    """Coefficients of f in the basis; raises NotInSpanError on a large residual.

    The residual is compared against tol * max(1, sup|f|).
    """
    if f.n != basis.n:
        raise DimensionMismatchError("function and basis on different cubes")
    coeffs, *_ = np.linalg.lstsq(basis.evaluation_matrix, f.values, rcond=None)
    resid = np.abs(basis.evaluation_matrix @ coeffs - f.values).max()
    if resid > tol * max(1.0, float(np.abs(f.values).max())):
        raise NotInSpanError(f"residual sup-norm {resid:.3e} above tolerance")
    return coeffs


def degree_profile(coeffs, basis: Basis) -> DegreeProfile:
    """Mass profile of a coefficient vector with respect to its basis."""
    c = np.asarray(coeffs, dtype=np.float64)
    if c.shape != (len(basis),):
        raise DimensionMismatchError("coefficient count differs from basis size")
    top = max(basis.degrees)
    masses = np.zeros(top + 1)
    for ck, d in zip(c, basis.degrees):
        masses[top - d] += ck * ck
    return DegreeProfile(tuple(float(m) for m in masses))
