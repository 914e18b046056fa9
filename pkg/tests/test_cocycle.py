import numpy as np
import pytest
from hypothesis import given, strategies as st

from cocyclekit.cocycle import (
    Cocycle,
    compound,
    iterate,
    lyapunov_spectrum,
    period_map,
    top_exponent_exterior,
)
from cocyclekit.errors import DomainError
from cocyclekit.groups import GroupTag, cone_membership, random_algebra_element, random_group_element, symplectic_form
from cocyclekit.strip import StripPotential, transfer_cocycle

from oracles import FREE_LYAPUNOV

seeds = st.integers(0, 2**32 - 1)
HYPERBOLIC = np.diag([2.0, 0.5])


def _free(E):
    return transfer_cocycle(StripPotential("real_symmetric", np.zeros((1, 1, 1))), E)


def test_zero_steps_is_identity():
    it = iterate(Cocycle.constant(HYPERBOLIC), 0, 0)
    assert np.array_equal(it.matrix, np.eye(2))
    assert it.log_scale == 0.0


def test_constant_power():
    it = iterate(Cocycle.constant(HYPERBOLIC), 0, 5)
    assert np.allclose(it.product, np.diag([32.0, 1 / 32]), atol=1e-12)


@pytest.mark.parametrize("r", [1, 3, 64])
def test_renormalisation_does_not_change_the_product(r):
    rng = np.random.default_rng(5)
    A = Cocycle.periodic(random_group_element(1, GroupTag.SpR, rng, scale=0.5, size=3))
    exact = np.linalg.multi_dot([A.at(k) for k in range(6, -1, -1)])
    assert np.allclose(iterate(A, 0, 7, r=r).product, exact, rtol=1e-10)


@given(seeds, st.integers(1, 12))
def test_forward_times_backward_is_identity(seed, n):
    rng = np.random.default_rng(seed)
    A = Cocycle.periodic(random_group_element(2, GroupTag.SpR, rng, scale=0.4, size=5))
    fwd = iterate(A, n, -n).product      # from f^n x back to x
    bwd = iterate(A, 0, n).product
    assert np.allclose(fwd @ bwd, np.eye(4), atol=1e-8)


def test_period_map_requires_periodic_base():
    A = Cocycle.torus(lambda x: np.eye(2), np.sqrt(2) - 1, 1)
    with pytest.raises(DomainError):
        period_map(A)


def test_constant_hyperbolic_exponents():
    rep = lyapunov_spectrum(Cocycle.constant(HYPERBOLIC))
    assert rep.top == pytest.approx(np.log(2), abs=1e-12)
    assert rep.exponents[1] == pytest.approx(-np.log(2), abs=1e-12)


@pytest.mark.parametrize("E", sorted(FREE_LYAPUNOV))
def test_free_exponent_outside_spectrum(E):
    assert lyapunov_spectrum(_free(E)).top == pytest.approx(FREE_LYAPUNOV[E], abs=1e-6)


@pytest.mark.parametrize("E", [0.0, 1.0])
def test_free_exponent_inside_spectrum_qr(E):
    rep = lyapunov_spectrum(_free(E), n=100_000, method="qr")
    assert abs(rep.top) <= 1e-3


def test_periodic_exact_matches_qr():
    rng = np.random.default_rng(11)
    A = Cocycle.periodic(random_group_element(2, GroupTag.SpR, rng, scale=0.6, size=4))
    exact = lyapunov_spectrum(A, method="exact").exponents
    qr = lyapunov_spectrum(A, n=40_000, method="qr").exponents
    assert np.allclose(exact, qr, atol=5e-3)


@given(seeds, st.sampled_from([1, 2, 3]))
def test_symplectic_pairing(seed, d):
    rng = np.random.default_rng(seed)
    A = Cocycle.periodic(random_group_element(d, GroupTag.SpR, rng, size=3))
    ex = lyapunov_spectrum(A).exponents
    assert np.all(np.diff(ex) <= 1e-12)
    assert np.max(np.abs(ex + ex[::-1])) <= 1e-8


def test_partial_sums_and_Lk():
    rng = np.random.default_rng(2)
    rep = lyapunov_spectrum(Cocycle.periodic(random_group_element(2, GroupTag.SpR, rng, size=2)))
    assert rep.Lk(2) == pytest.approx(rep.exponents[:2].sum())
    assert rep.partial_sums[-1] == pytest.approx(0.0, abs=1e-10)


def test_compound_of_product_is_product_of_compounds(rng):
    M, N = rng.standard_normal((2, 4, 4))
    assert np.allclose(compound(M @ N, 2), compound(M, 2) @ compound(N, 2))
    assert compound(M, 4)[0, 0] == pytest.approx(np.linalg.det(M))


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_exterior_top_exponent_matches_partial_sum(k):
    rng = np.random.default_rng(7)
    A = Cocycle.periodic(random_group_element(2, GroupTag.SpR, rng, size=3))
    assert top_exponent_exterior(A, k) == pytest.approx(lyapunov_spectrum(A).Lk(k), abs=1e-8)


def test_exterior_edge_cases():
    A = Cocycle.constant(HYPERBOLIC)
    assert top_exponent_exterior(A, 2) == pytest.approx(0.0, abs=1e-12)
    assert top_exponent_exterior(A, 1) == pytest.approx(np.log(2))
    with pytest.raises(DomainError):
        top_exponent_exterior(A, 3)


def test_exterior_qr_path_on_torus():
    A = Cocycle.torus(lambda x: HYPERBOLIC, np.sqrt(2) - 1, 1)
    assert top_exponent_exterior(A, 1, n=5000, samples=2) == pytest.approx(np.log(2), abs=1e-3)


def test_shift_base_sampling_is_seeded():
    rng = np.random.default_rng(0)
    mats = random_group_element(1, GroupTag.SpR, rng, size=2)
    A = Cocycle.shift(mats, [0.5, 0.5], span=3000)
    r1 = lyapunov_spectrum(A, n=1000, samples=4, rng=1).exponents
    r2 = lyapunov_spectrum(A, n=1000, samples=4, rng=1).exponents
    assert np.array_equal(r1, r2)
    assert r1[0] > 0


@given(seeds, st.sampled_from([1, 2]))
def test_monotone_cone_is_closed_under_addition(seed, d):
    # W = J P with P positive definite gives Herm(J W) = -P; sums stay in the cone
    rng = np.random.default_rng(seed)
    J = symplectic_form(d)
    cone = []
    for _ in range(2):
        S = rng.standard_normal((2 * d, 2 * d))
        P = S @ S.T + 0.1 * np.eye(2 * d)
        cone.append(J @ P)
    assert all(cone_membership(W) for W in cone)
    assert cone_membership(cone[0] + cone[1])


def test_membership_is_checked_on_construction():
    with pytest.raises(DomainError):
        Cocycle.constant(np.diag([2.0, 2.0]))
    Cocycle.constant(np.diag([2.0, 2.0]), tag=None)


def test_nonpositive_steps_rejected():
    with pytest.raises(DomainError):
        lyapunov_spectrum(Cocycle.constant(HYPERBOLIC), n=0)
