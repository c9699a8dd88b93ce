"""Fourier machinery: transforms, bases, profiles, and their invariants."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldhd.errors import (
    DimensionMismatchError,
    NotIndependentError,
    NotInSpanError,
    NotOrthonormalError,
)
from ldhd.hypercube import (
    Basis,
    DegreeProfile,
    FourierCoefficients,
    SubcubeSpec,
    TableFunction,
    compare_profiles,
    cube_points,
    degree_profile,
    expand_in_basis,
    fourier_basis,
    index_of_point,
    inner_product,
    make_basis,
    projected_basis,
    subcube_points,
    support_set,
    walsh_transform,
)

ROTATION = np.array([[0.8, 0.6], [0.6, -0.8]])


def random_table(n, seed):
    rng = np.random.default_rng(seed)
    return TableFunction(n, rng.standard_normal(1 << n))


def test_index_convention():
    # bit (i-1) set exactly when x_i == -1, all-ones point first
    pts = cube_points(2)
    assert pts.tolist() == [[1, 1], [-1, 1], [1, -1], [-1, -1]]
    for m, p in enumerate(pts):
        assert index_of_point(p) == m


def test_index_of_point_rejects_bad_coordinate():
    with pytest.raises(ValueError):
        index_of_point((1, 0))


@pytest.mark.parametrize("n", [0, 21])
def test_dimension_cap(n):
    with pytest.raises(DimensionMismatchError):
        cube_points(n)


def test_subcube_points_examples():
    assert subcube_points(SubcubeSpec(2, 1)).tolist() == [[1, 1], [-1, 1]]
    assert subcube_points(SubcubeSpec(3, 0)).tolist() == [[1, 1, 1]]
    assert subcube_points(SubcubeSpec(10, 6)).shape == (64, 10)


def test_subcube_is_prefix_of_cube():
    spec = SubcubeSpec(4, 2)
    assert np.array_equal(subcube_points(spec), cube_points(4)[: spec.size])


def test_subcube_spec_validation():
    with pytest.raises(DimensionMismatchError):
        SubcubeSpec(3, 4)
    with pytest.raises(DimensionMismatchError):
        SubcubeSpec(3, -1)


def test_table_function_basics():
    f = TableFunction.from_callable(2, lambda x: 4 * x[0] + 3 * x[1])
    assert f.values.tolist() == [7.0, -1.0, 1.0, -7.0]
    assert f((1, -1)) == 1.0
    assert f.subcube_values(SubcubeSpec(2, 1)).tolist() == [7.0, -1.0]
    with pytest.raises(ValueError):
        f.values[0] = 0.0  # table is frozen
    with pytest.raises(DimensionMismatchError):
        TableFunction(2, [1.0, 2.0, 3.0])


def test_walsh_transform_parity():
    f = TableFunction.from_callable(2, lambda x: x[0] * x[1])
    c = walsh_transform(f)
    assert c.coefficient((1, 2)) == pytest.approx(1.0, abs=1e-12)
    rest = [c.coeffs[m] for m in range(4) if m != 3]
    assert np.abs(rest).max() < 1e-12


def test_walsh_transform_constant():
    c = walsh_transform(TableFunction(3, np.ones(8)))
    assert c.coefficient(()) == pytest.approx(1.0, abs=1e-12)
    assert np.abs(c.coeffs[1:]).max() < 1e-12


@given(n=st.integers(1, 12), seed=st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_transform_round_trip(n, seed):
    f = random_table(n, seed)
    back = walsh_transform(f).to_table()
    assert np.abs(back.values - f.values).max() <= 1e-12 * max(
        1.0, np.abs(f.values).max()
    )


@given(n=st.integers(1, 10), seed=st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_parseval(n, seed):
    f = random_table(n, seed)
    mass = float(np.sum(walsh_transform(f).coeffs ** 2))
    assert mass == pytest.approx(inner_product(f, f), abs=1e-10)


def test_inner_product_orthonormality():
    basis = fourier_basis(3)
    G = basis.evaluation_matrix.T @ basis.evaluation_matrix / 8
    assert np.abs(G - np.eye(8)).max() < 1e-12


def test_inner_product_against_direct_loop():
    f, g = random_table(4, 7), random_table(4, 8)
    direct = sum(a * b for a, b in zip(f.values, g.values)) / 16
    assert inner_product(f, g) == pytest.approx(direct, abs=1e-12)
    with pytest.raises(DimensionMismatchError):
        inner_product(f, random_table(3, 9))


def test_support_set_examples():
    f = TableFunction.from_callable(3, lambda x: x[0] * x[2])
    assert support_set(f, tol=1e-9) == frozenset({1, 3})
    assert support_set(TableFunction(3, np.full(8, 2.5)), tol=1e-9) == frozenset()
    g = TableFunction.from_callable(2, lambda x: 4 * x[0] + 3 * x[1])
    assert support_set(g, tol=1e-9) == frozenset({1, 2})


@given(n=st.integers(2, 8), n0=st.integers(1, 4), seed=st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_support_of_subcube_lifted_function(n, n0, seed):
    # f(x) = g(x_1..x_n0) pulled back to the cube never touches later indices
    n0 = min(n0, n)
    rng = np.random.default_rng(seed)
    g = rng.standard_normal(1 << n0)
    pts = cube_points(n)
    masks = np.array([index_of_point(p[:n0]) for p in pts])
    f = TableFunction(n, g[masks])
    assert support_set(f, tol=1e-9) <= frozenset(range(1, n0 + 1))


def test_degree_profile_examples():
    basis = fourier_basis(2)
    c = expand_in_basis(TableFunction.from_callable(2, lambda x: 4 * x[0]), basis)
    assert degree_profile(c, basis).masses == pytest.approx((0.0, 16.0, 0.0))
    c2 = expand_in_basis(
        TableFunction.from_callable(2, lambda x: 4 * x[0] + 3 * x[1]), basis
    )
    assert degree_profile(c2, basis).masses == pytest.approx((0.0, 25.0, 0.0))
    b3 = fourier_basis(3)
    c3 = expand_in_basis(
        TableFunction.from_callable(3, lambda x: x[0] * x[1] * x[2]), b3
    )
    assert degree_profile(c3, b3).masses == pytest.approx((1.0, 0.0, 0.0, 0.0))


def test_compare_profiles():
    a = DegreeProfile((0.0, 16.0, 0.0))
    b = DegreeProfile((1.0, 0.0, 0.0))
    c = DegreeProfile((0.0, 25.0, 0.0))
    assert compare_profiles(a, b) < 0
    assert compare_profiles(c, a) > 0
    assert compare_profiles(a, a) == 0
    assert a < b and a <= a


def test_compare_profiles_pads_leading_zeros():
    # a degree-1 profile embeds into a degree-2 basis with zero top mass
    short = DegreeProfile((16.0, 0.0))
    long = DegreeProfile((0.0, 16.0, 0.0))
    assert compare_profiles(short, long) == 0


def test_profile_needs_degree_zero_slot():
    with pytest.raises(ValueError):
        DegreeProfile(())


def test_mass_at_indexes_from_degree():
    p = DegreeProfile((1.0, 2.0, 3.0))
    assert p.top_degree == 2
    assert p.mass_at(2) == 1.0
    assert p.mass_at(0) == 3.0


def test_projected_identity_equals_fourier():
    fb = make_basis("fourier", n=3)
    pb = make_basis("projected", V=np.eye(3))
    assert np.abs(fb.evaluation_matrix - pb.evaluation_matrix).max() < 1e-12
    assert fb.degrees == pb.degrees


def test_projected_rotation_elements():
    basis = projected_basis(ROTATION)
    pts = cube_points(2).astype(float)
    z1 = 0.8 * pts[:, 0] + 0.6 * pts[:, 1]
    z2 = 0.6 * pts[:, 0] - 0.8 * pts[:, 1]
    expected = [np.ones(4), z1, z2, z1 * z2]
    for elem, want in zip(basis.elements, expected):
        assert np.abs(elem.values - want).max() < 1e-12


def test_projected_requires_orthonormal():
    with pytest.raises(NotOrthonormalError):
        projected_basis(np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(DimensionMismatchError):
        projected_basis(np.ones(3))


def test_expand_in_basis_examples():
    basis = projected_basis(ROTATION)
    f = TableFunction.from_callable(2, lambda x: 4 * x[0] + 3 * x[1])
    coeffs = expand_in_basis(f, basis)
    # 5 * (0.8, 0.6) = (4, 3)
    assert coeffs == pytest.approx([0.0, 5.0, 0.0, 0.0], abs=1e-9)
    e1 = expand_in_basis(basis.elements[1], basis)
    assert e1 == pytest.approx([0.0, 1.0, 0.0, 0.0], abs=1e-9)


def test_expand_in_basis_not_in_span():
    pts = cube_points(2)
    partial = Basis(
        [
            TableFunction(2, np.ones(4)),
            TableFunction(2, (pts[:, 0] * pts[:, 1]).astype(float)),
        ],
        degrees=[0, 2],
        label="partial",
    )
    f = TableFunction.from_callable(2, lambda x: float(x[0]))
    with pytest.raises(NotInSpanError):
        expand_in_basis(f, partial)


def test_basis_rejects_dependent_elements():
    one = TableFunction(2, np.ones(4))
    with pytest.raises(NotIndependentError):
        Basis([one, TableFunction(2, 2 * np.ones(4))], degrees=[0, 0], label="dep")
    with pytest.raises(NotIndependentError):
        Basis([], degrees=[], label="empty")


def test_basis_rejects_mixed_dimensions():
    with pytest.raises(DimensionMismatchError):
        Basis(
            [TableFunction(2, np.ones(4)), TableFunction(3, np.ones(8))],
            degrees=[0, 0],
            label="mixed",
        )


def test_basis_combine_and_subcube_matrix():
    basis = fourier_basis(2)
    f = basis.combine([3.0, 4.0, 0.0, 0.0])
    assert f.values.tolist() == [7.0, -1.0, 7.0, -1.0]
    sub = basis.subcube_matrix(SubcubeSpec(2, 1))
    assert sub.shape == (2, 4)
    assert np.array_equal(sub, basis.evaluation_matrix[:2])
    with pytest.raises(DimensionMismatchError):
        basis.combine([1.0, 2.0])


def test_basis_degrees_are_exact_fourier_degrees():
    # a rank-1 projection collapses the top product to a degenerate degree
    V = np.array([[1.0], [0.0]])
    basis = projected_basis(V)
    assert basis.degrees == (0, 1)


def test_make_basis_unknown_kind():
    with pytest.raises(ValueError):
        make_basis("chebyshev", n=2)


def test_fourier_coefficients_validation():
    c = FourierCoefficients(2, [0.0, 4.0, 3.0, 0.0])
    assert c.coefficient((1,)) == 4.0
    assert c.degree() == 1
    with pytest.raises(DimensionMismatchError):
        c.coefficient((5,))
    with pytest.raises(DimensionMismatchError):
        FourierCoefficients(2, [1.0, 2.0])
