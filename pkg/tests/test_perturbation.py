import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cocyclekit.cocycle import Cocycle, lyapunov_spectrum
from cocyclekit.errors import DomainError
from cocyclekit.groups import GroupTag, membership_residual, random_algebra_element, random_group_element, symplectic_form
from cocyclekit.perturbation import (
    PerturbationPair,
    contraction_condition,
    density_search,
    harmonicity_scan,
    perturb,
    phi_epsilon,
    phi_weight,
    phi_weight_integral,
    sup_norm,
)

from oracles import CONTRACTION_MARGIN_EPS_01, PHI_WEIGHT_INTEGRAL

seeds = st.integers(0, 2**32 - 1)
J = symplectic_form(1)
Z0 = np.zeros((2, 2))


def _small_algebra(rng, d=1, radius=0.05):
    a = random_algebra_element(d, GroupTag.SpR, rng)
    return a * radius * rng.uniform() / np.linalg.norm(a, 2)


def test_rotation_generator_margin():
    ok, margin = contraction_condition(PerturbationPair(Z0, J, 0.1), 1j, rng=0)
    assert ok
    assert margin == pytest.approx(CONTRACTION_MARGIN_EPS_01, abs=1e-9)


@pytest.mark.parametrize("z", [0.0, 0.5, -0.7])
def test_real_z_is_not_strict(z):
    ok, margin = contraction_condition(PerturbationPair(Z0, J, 0.1), z, rng=0)
    assert not ok
    assert margin <= 1e-12


@settings(max_examples=100)
@given(seeds)
def test_contraction_in_eta_ball(seed):
    rng = np.random.default_rng(seed)
    pair = PerturbationPair(_small_algebra(rng), J, 0.1)
    ok, margin = contraction_condition(pair, (np.sqrt(2) - 1) * 1j, 16, rng)
    assert ok and margin > 0


def test_b_must_be_close_to_J():
    with pytest.raises(DomainError):
        PerturbationPair(Z0, J + 0.1 * np.eye(2), 0.1)
    with pytest.raises(DomainError):
        PerturbationPair(Z0, J, 0.0)


def test_weight_integral():
    assert phi_weight_integral(33) == pytest.approx(PHI_WEIGHT_INTEGRAL, abs=1e-10)
    assert phi_weight(0.0) == pytest.approx(1.0)
    assert phi_weight(np.array([-1.0, 1.0])) == pytest.approx([0.0, 0.0])


def test_perturb_keeps_group_for_real_maps(rng):
    A = Cocycle.periodic(random_group_element(1, GroupTag.SpR, rng, size=3))
    v = np.stack([_small_algebra(rng) for _ in range(3)])
    B = perturb(A, v)
    assert B.tag is GroupTag.SpR
    assert np.max(membership_residual(B.matrices, GroupTag.SpR)) <= 1e-10
    assert perturb(A, 1j * v).tag is None


def test_sup_norm_forms(rng):
    v = np.stack([np.eye(2), 2 * np.eye(2)])
    assert sup_norm(v) == pytest.approx(2.0)
    assert sup_norm(lambda x: x * np.eye(2), samples=[1, 3]) == pytest.approx(3.0)
    with pytest.raises(DomainError):
        sup_norm(lambda x: np.eye(2))


def test_phi_vanishes_for_zero_scale_identity():
    A = Cocycle.constant(np.eye(2))
    assert phi_epsilon(A, PerturbationPair(Z0, J, 1e-9)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_phi_positive_when_middle_node_positive(seed):
    rng = np.random.default_rng(seed)
    A = Cocycle.periodic(random_group_element(1, GroupTag.SpR, rng, scale=0.5, size=3))
    pair = PerturbationPair(_small_algebra(rng), J, 0.2)
    phi, t, gamma = phi_epsilon(A, pair, nodes=17, return_nodes=True)
    assert t[8] == 0.0
    assert np.all(gamma >= -1e-12)
    if gamma[8] > 1e-9:
        assert phi > 0


def test_harmonicity_off_real_axis(rng):
    A = Cocycle.periodic(random_group_element(1, GroupTag.SpR, rng, scale=0.3, size=2))
    pair = PerturbationPair(_small_algebra(rng), J, 0.3)
    assert harmonicity_scan(A, pair, m=16) <= 1e-6


def test_harmonicity_circle_must_stay_inside():
    A = Cocycle.constant(np.eye(2))
    with pytest.raises(DomainError):
        harmonicity_scan(A, PerturbationPair(Z0, J, 0.1), centres=(0.1j,), radius=0.2)


@pytest.mark.parametrize("seed", range(3))
def test_density_search_finds_small_perturbation(seed):
    rng = np.random.default_rng(seed)
    A = Cocycle.periodic(random_group_element(1, GroupTag.SpR, rng, size=4))
    res = density_search(A, 0.5, trials=20, rng=seed)
    assert res.found
    assert res.norm < 0.5
    assert lyapunov_spectrum(perturb(A, res.v)).Lk(1) > 0


def test_density_search_identity():
    res = density_search(Cocycle.constant(np.eye(2)), 0.5, trials=10, rng=0)
    assert res.found and res.norm < 0.5


def test_density_search_budget_failure():
    res = density_search(Cocycle.constant(np.eye(2)), 1e-9, trials=2, rng=0)
    assert not res.found and res.trials == 2
    assert len(res.diagnostics["phi_values"]) == 2


def test_density_search_rejects_other_groups(rng):
    A = Cocycle.periodic(random_group_element(1, GroupTag.SHSp, rng, size=2), tag=GroupTag.SHSp)
    with pytest.raises(DomainError):
        density_search(A, 0.5)
