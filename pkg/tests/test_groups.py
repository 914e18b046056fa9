import numpy as np
import pytest
from hypothesis import given, strategies as st

from cocyclekit.errors import DimensionError, DomainError
from cocyclekit.groups import (
    GroupTag,
    cayley_conjugate,
    cayley_deform,
    cayley_tag,
    cone_membership,
    group_inverse,
    is_in_group,
    membership_residual,
    random_algebra_element,
    random_group_element,
    rotation,
    rotation_deform,
    symplectic_form,
)

from oracles import CAYLEY_J

seeds = st.integers(0, 2**32 - 1)


def test_identity_is_in_every_group():
    for tag in GroupTag:
        ok, res = is_in_group(np.eye(4), tag)
        assert ok and res == 0


def test_J_is_symplectic():
    assert is_in_group(symplectic_form(2), GroupTag.SpR)[0]


def test_diag_not_symplectic():
    assert not is_in_group(np.diag([2.0, 1, 1, 1]), GroupTag.SpR)[0]


def test_odd_dimension_rejected():
    with pytest.raises(DimensionError):
        is_in_group(np.eye(3), GroupTag.SpR)


def test_cayley_of_J():
    np.testing.assert_allclose(cayley_conjugate(symplectic_form(1)), CAYLEY_J, atol=1e-15)


@pytest.mark.parametrize("sigma", [0.0, 0.4, -2.1])
@pytest.mark.parametrize("d", [1, 2])
def test_cayley_of_rotation_is_diagonal(sigma, d):
    out = cayley_conjugate(rotation(sigma, d))
    expect = np.diag(np.r_[np.full(d, np.exp(1j * sigma)), np.full(d, np.exp(-1j * sigma))])
    np.testing.assert_allclose(out, expect, atol=1e-14)


def test_cayley_rejects_non_members():
    with pytest.raises(DomainError):
        cayley_conjugate(np.diag([2.0, 1.0]))


def test_rotation_deform_trivial_cases(rng):
    A = random_group_element(2, GroupTag.SpR, rng)
    np.testing.assert_allclose(rotation_deform(A, 0), A, atol=1e-15)
    s = 0.7
    np.testing.assert_allclose(rotation_deform(np.eye(2), s), [[np.cos(s), np.sin(s)], [-np.sin(s), np.cos(s)]])


def test_rotation_deform_cayley_side(rng):
    A = random_group_element(2, GroupTag.SpR, rng)
    z = 0.3 + 0.1j
    lhs = cayley_conjugate(rotation_deform(A, z), check=False)
    d = 2
    scale = np.r_[np.full(d, np.exp(-0.1) * np.exp(0.3j)), np.full(d, np.exp(0.1) * np.exp(-0.3j))]
    rhs = np.diag(scale) @ cayley_conjugate(A)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)
    np.testing.assert_allclose(cayley_deform(cayley_conjugate(A), z), rhs, atol=1e-12)


@pytest.mark.parametrize("W,expected", [("J", True), ("zero", False), ("-J", False)])
def test_cone_examples(W, expected):
    J = symplectic_form(2)
    mat = {"J": J, "zero": np.zeros((4, 4)), "-J": -J}[W]
    assert cone_membership(mat) is expected


@pytest.mark.parametrize("tag", list(GroupTag))
@pytest.mark.parametrize("d", [1, 2, 3])
def test_closure_under_products_and_inverses(tag, d, rng):
    A = random_group_element(d, tag, rng)
    B = random_group_element(d, tag, rng)
    assert membership_residual(A @ B, tag) <= 1e-9
    assert membership_residual(group_inverse(A, tag), tag) <= 1e-9
    np.testing.assert_allclose(group_inverse(A, tag) @ A, np.eye(2 * d), atol=1e-9)


@given(seeds, st.sampled_from([GroupTag.SpR, GroupTag.HSp, GroupTag.SHSp]), st.integers(1, 3))
def test_cayley_homomorphism(seed, tag, d):
    rng = np.random.default_rng(seed)
    A, B = random_group_element(d, tag, rng), random_group_element(d, tag, rng)
    lhs = cayley_conjugate(A @ B, tag, check=False)
    rhs = cayley_conjugate(A, tag) @ cayley_conjugate(B, tag)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10
    assert membership_residual(cayley_conjugate(A, tag), cayley_tag(tag)) <= 1e-9


@given(seeds, st.integers(1, 3))
def test_cone_is_convex(seed, d):
    rng = np.random.default_rng(seed)
    J = symplectic_form(d)
    # J + small algebra elements stay in the cone
    W1 = J + 0.2 * random_algebra_element(d, GroupTag.SpR, rng) / np.sqrt(d)
    W2 = J + 0.2 * random_algebra_element(d, GroupTag.SpR, rng) / np.sqrt(d)
    if cone_membership(W1) and cone_membership(W2):
        assert cone_membership(W1 + W2)


@given(seeds, st.integers(1, 3))
def test_cone_invariant_under_shsp_conjugation(seed, d):
    rng = np.random.default_rng(seed)
    J = symplectic_form(d)
    W = J + 0.3 * random_algebra_element(d, GroupTag.SHSp, rng) / np.sqrt(d)
    g = random_group_element(d, GroupTag.SHSp, rng, scale=0.5)
    if cone_membership(W):
        assert cone_membership(g @ W @ np.linalg.inv(g))
