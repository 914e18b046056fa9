import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cocyclekit.bands import (
    ThetaClass,
    band_scan,
    canonical_pair_normalize,
    classify_eigenvalues,
    classify_theta,
    collision_diagnostic,
    find_positive_theta,
    pair_ratio_diagnostic,
    random_generic_periodic,
    spectral_projection,
    theta_period_maps,
)
from cocyclekit.cocycle import Cocycle
from cocyclekit.errors import ConditioningError, DomainError, NonCanonicalSubspaceError
from cocyclekit.groups import GroupTag, random_group_element, symplectic_form
from cocyclekit.strip import transfer_matrix

from oracles import PAIR_RATIO_1_I

seeds = st.integers(0, 2**32 - 1)
IDENTITY = Cocycle.constant(np.eye(2))
HYPERBOLIC = Cocycle.constant(np.diag([2.0, 0.5]))


@pytest.mark.parametrize("theta", [0.3, 1.0, -2.0, 3.0])
def test_identity_rotation_is_a_band(theta):
    assert classify_theta(IDENTITY, theta) == ThetaClass.ALL_SIMPLE_UNIMODULAR
    lam = np.sort_complex(np.linalg.eigvals(theta_period_maps(IDENTITY, [theta])[0]))
    assert np.allclose(np.sort_complex(np.array([np.exp(1j * theta), np.exp(-1j * theta)])), lam)


@pytest.mark.parametrize("theta", [0.0, np.pi])
def test_identity_collides_at_zero_and_pi(theta):
    assert classify_theta(IDENTITY, theta) == ThetaClass.HAS_COLLISION


def test_hyperbolic_is_off_circle():
    assert classify_theta(HYPERBOLIC, 0.0) == ThetaClass.HAS_OFF_CIRCLE


def test_off_circle_takes_precedence():
    cls = classify_eigenvalues(np.array([[2.0, 2.0]]))
    assert cls[0] == ThetaClass.HAS_OFF_CIRCLE


def test_identity_scan_degenerate_reference():
    rep = band_scan(IDENTITY)
    assert len(rep.bands) == 2
    assert sum(b.length for b in rep.bands) == pytest.approx(2 * np.pi, abs=1e-5)
    assert rep.bands[0].b < rep.bands[1].a


def _free_theta_family(n):
    return Cocycle.periodic(np.repeat(transfer_matrix(0.3, np.zeros((1, 1)))[None], n, axis=0))


def test_free_family_bands_obey_bound():
    rep = band_scan(_free_theta_family(8))
    assert rep.bands and rep.bound_ok
    assert rep.max_length <= 2 * np.pi / 8 * 1.05


def test_bands_are_disjoint_and_classified_inside():
    rng = np.random.default_rng(3)
    A = random_generic_periodic(1, 8, rng, scale=0.3)
    rep = band_scan(A)
    for left, right in zip(rep.bands, rep.bands[1:]):
        assert left.b < right.a
    for band in rep.bands:
        for th in np.linspace(band.a, band.b, 9)[1:-1]:
            assert classify_theta(A, th) == ThetaClass.ALL_SIMPLE_UNIMODULAR


@settings(max_examples=5)
@given(seeds, st.sampled_from([1, 2]), st.sampled_from([4, 8]))
def test_random_generic_band_bound(seed, d, n):
    A = random_generic_periodic(d, n, np.random.default_rng(seed), scale=0.3)
    assert band_scan(A).bound_ok


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("n", [4, 8])
def test_energy_bands_of_strip_operator(d, n):
    # the two-step family has period n/2, so its band bound reads 2 pi/(n/2)
    rng = np.random.default_rng(10 * d + n)
    V = rng.standard_normal((n, d, d))
    V = 0.5 * (V + np.swapaxes(V, 1, 2))

    def maps(Es):
        out = []
        for E in Es:
            P = np.eye(2 * d)
            for k in range(n):
                P = transfer_matrix(E, V[k]) @ P
            out.append(P)
        return np.array(out)

    rep = band_scan(maps, theta_range=(-6.0, 6.0), n=n, bound=4 * np.pi / n, grid=200 * n)
    assert rep.bound_ok


def test_callable_scan_needs_period():
    with pytest.raises(DomainError):
        band_scan(lambda th: theta_period_maps(IDENTITY, th))


def test_band_report_json_round_trip():
    rep = band_scan(IDENTITY)
    data = json.loads(rep.to_json())
    assert float(data["bands"][0]["a"]) == rep.bands[0].a
    assert data["n"] == 1


def test_projection_diagonal():
    P = spectral_projection(np.diag([1.0, 2.0, 3.0]), {1})
    assert np.allclose(P, np.diag([0, 1, 0]))


def test_projection_non_normal():
    M = np.array([[1.0, 1.0], [0.0, 2.0]])
    P = spectral_projection(M, {0})
    assert np.allclose(P @ P, P, atol=1e-8)
    assert np.linalg.matrix_rank(P) == 1
    assert np.allclose(M @ P, P @ M, atol=1e-8)


@given(seeds)
def test_projection_complement_sums_to_identity(seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    lam = np.linalg.eigvals(M)
    gaps = np.abs(lam[:, None] - lam[None, :]) + np.diag(np.full(4, np.inf))
    if gaps.min() < 1e-3:
        return
    P = spectral_projection(M, {0, 2})
    Q = spectral_projection(M, {1, 3})
    assert np.allclose(P + Q, np.eye(4), atol=1e-8)
    assert np.linalg.norm(M @ P - P @ M) <= 1e-8 * np.linalg.norm(M) * 10


def test_projection_with_jordan_block():
    M = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 3.0]])
    P = spectral_projection(M, lambda z: abs(z - 1) < 0.5)
    assert np.allclose(P, np.diag([1.0, 1.0, 0.0]), atol=1e-8)


def test_projection_needs_separation():
    with pytest.raises(ConditioningError):
        spectral_projection(np.diag([1.0, 1.0 + 1e-9]), {0})


@pytest.mark.parametrize("l1, l2, expected", [(1j, 1j, 2.0), (1, -1, 0.0), (1, 1j, PAIR_RATIO_1_I)])
def test_pair_ratio(l1, l2, expected):
    assert pair_ratio_diagnostic(l1, l2) == pytest.approx(expected, abs=1e-12)


@given(st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi))
def test_pair_ratio_at_most_two(a, b):
    assert pair_ratio_diagnostic(np.exp(1j * a), np.exp(1j * b)) <= 2 + 1e-12


def test_pair_ratio_needs_unit_circle():
    with pytest.raises(DomainError):
        pair_ratio_diagnostic(2.0, 1.0)


def test_positive_theta_hyperbolic():
    hit = find_positive_theta(HYPERBOLIC)
    assert abs(hit.theta) < 1e-2
    assert hit.L_top == pytest.approx(np.log(2), abs=1e-3)


def test_positive_theta_elliptic_wide_window():
    c, s = np.cos(np.sqrt(2)), np.sin(np.sqrt(2))
    A = Cocycle.constant(np.array([[c, -s], [s, c]]) @ np.diag([1.5, 1 / 1.5]))
    assert find_positive_theta(A) is not None


def test_positive_theta_random_generic():
    A = random_generic_periodic(1, 16, np.random.default_rng(5), scale=0.3)
    hit = find_positive_theta(A)
    assert hit is not None and abs(hit.theta) < 4 * np.pi / 16


def test_positive_theta_none_for_identity_small_window():
    assert find_positive_theta(IDENTITY, C=0.5) is None


def _pairings(v, w):
    J = symplectic_form(len(v) // 2)
    return np.conj(v) @ J @ v, np.conj(w) @ J @ w, np.conj(v) @ J @ w


def test_canonical_standard_pair():
    e = np.eye(4)
    v, w = canonical_pair_normalize(np.stack([e[0], e[2]], axis=1))
    assert np.allclose(_pairings(v, w), [0, 0, 1])


@given(seeds)
def test_canonical_random_plane(seed):
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    try:
        v, w = canonical_pair_normalize(V)
    except NonCanonicalSubspaceError:
        return
    assert np.allclose(_pairings(v, w), [0, 0, 1], atol=1e-10)


def test_canonical_isotropic_plane_rejected():
    e = np.eye(4)
    with pytest.raises(NonCanonicalSubspaceError):
        canonical_pair_normalize(np.stack([e[0], e[1]], axis=1))


def test_collision_diagnostic_identity():
    lhs, rhs = collision_diagnostic(IDENTITY, 0.0)
    assert abs(lhs) < 1e-6 and abs(rhs) < 1e-6


def test_generic_draws_are_periodic_and_tagged():
    A = random_generic_periodic(2, 4, np.random.default_rng(1), scale=0.3)
    assert A.base.n == 4 and A.tag is GroupTag.SHSp
