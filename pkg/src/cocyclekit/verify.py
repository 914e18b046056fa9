"""Quick invariant suite: every structural identity checked on random data.

Each check returns a :class:`CheckResult`; :func:`run_suite` runs them all.
Sizes are small so the suite finishes in well under a minute.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bands import band_scan, random_generic_periodic
from .cocycle import Cocycle, lyapunov_spectrum
from .families import RotationFamily
from .groups import (
    GroupTag,
    cayley_conjugate,
    cayley_tag,
    membership_residual,
    random_algebra_element,
    random_group_element,
    symplectic_form,
)
from .kotani import ld_identities_check, trace_gap
from .perturbation import PerturbationPair, contraction_condition
from .rotation import rotation_function
from .siegel import det_phase_residual, lebesgue_jacobian, mobius, random_disc_point, random_shilov_point, tau, volume_density
from .strip import StripPotential, transfer_cocycle

__all__ = ["CheckResult", "run_suite", "CHECKS"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)


def check_membership(d, rng, count=50):
    worst = 0.0
    for tag in GroupTag:
        M = random_group_element(d, tag, rng, size=count)
        worst = max(worst, float(np.max(membership_residual(M, tag))))
    return CheckResult("membership", worst, 1e-8)


def check_cayley(d, rng, count=50):
    worst = 0.0
    for tag in (GroupTag.SpR, GroupTag.HSp, GroupTag.SHSp):
        A = random_group_element(d, tag, rng, size=count)
        B = random_group_element(d, tag, rng, size=count)
        lhs = cayley_conjugate(A @ B, tag, check=False)
        rhs = cayley_conjugate(A, tag, check=False) @ cayley_conjugate(B, tag, check=False)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        image = cayley_conjugate(A, tag, check=False)
        worst = max(worst, float(np.max(membership_residual(image, cayley_tag(tag)))))
    return CheckResult("cayley-homomorphism", worst, 1e-8)


def _disc_pairs(d, rng, count):
    C = random_group_element(d, GroupTag.SpR, rng, scale=0.5, size=2 * count).reshape(2, count, 2 * d, 2 * d)
    Mc = cayley_conjugate(C, GroupTag.SpR, check=False)
    Z = np.stack([random_disc_point(d, rng) for _ in range(count)])
    return Mc[0], Mc[1], Z


def check_mobius_and_tau(d, rng, count=50):
    M, N, Z = _disc_pairs(d, rng, count)
    act = np.max(np.abs(mobius(M @ N, Z) - mobius(M, mobius(N, Z))))
    law = np.max(np.abs(tau(M @ N, Z) - tau(M, mobius(N, Z)) @ tau(N, Z)))
    return CheckResult("mobius-and-tau-laws", float(max(act, law)), 1e-8)


def check_det_phase(d, rng, count=50):
    M, _, _ = _disc_pairs(d, rng, count)
    worst = max(det_phase_residual(M[k], random_shilov_point(d, rng)) for k in range(count))
    return CheckResult("det-phase-identity", float(worst), 1e-8)


def check_jacobian(d, rng, count=10):
    M, _, Z = _disc_pairs(d, rng, count)
    worst = 0.0
    for k in range(count):
        jac = lebesgue_jacobian(M[k], Z[k])
        pred = volume_density(Z[k], GroupTag.SpR) / volume_density(mobius(M[k], Z[k]), GroupTag.SpR)
        worst = max(worst, abs(jac - pred) / pred)
        alt = np.abs(np.linalg.det(tau(M[k], Z[k]))) ** (-2 * (d + 1))
        worst = max(worst, abs(jac - alt) / alt)
    return CheckResult("volume-jacobian", float(worst), 1e-4)


def check_free_lyapunov(d, rng):
    v = StripPotential("real_symmetric", np.zeros((1, 1, 1)))
    L = lyapunov_spectrum(transfer_cocycle(v, 3.0), samples=1).top
    return CheckResult("free-lyapunov-oracle", abs(L - np.log((3 + np.sqrt(5)) / 2)), 1e-6)


def check_pairing(d, rng, count=5):
    worst = 0.0
    for _ in range(count):
        A = Cocycle.periodic(random_group_element(d, GroupTag.SpR, rng, size=3))
        ex = lyapunov_spectrum(A).exponents
        worst = max(worst, float(np.max(np.abs(ex + ex[::-1]))))
    return CheckResult("exponent-pairing", worst, 1e-8)


def check_rotation_monotone(d, rng, count=3, points=40):
    worst = 0.0
    sig = np.linspace(-np.pi, np.pi, points)
    for _ in range(count):
        fam = RotationFamily(Cocycle.periodic(random_group_element(d, GroupTag.SpR, rng, size=3)))
        rho = np.array([z.rho for z in rotation_function(fam, sig, lyapunov=False)])
        worst = max(worst, float(np.max(np.diff(rho), initial=0.0)))
    return CheckResult("rotation-monotone", worst, 1e-6)


def check_ld_identities(d, rng, count=3):
    worst = 0.0
    for _ in range(count):
        fam = RotationFamily(Cocycle.periodic(random_group_element(d, GroupTag.SpR, rng, size=3)))
        worst = max(worst, *ld_identities_check(fam, 0.3 + 0.1j))
    return CheckResult("ld-identities", worst, 1e-6)


def check_trace_gap(d, rng, count=200):
    worst = 0.0
    for _ in range(count):
        X, Y = random_disc_point(d, rng, symmetric=False), random_disc_point(d, rng, symmetric=False)
        worst = max(worst, -trace_gap(X, Y), abs(trace_gap(X, X)))
    return CheckResult("trace-inequality", worst, 1e-12)


def check_band_bound(d, rng, n=8, count=2):
    worst = 0.0
    for _ in range(count):
        A = random_generic_periodic(d, n, rng, scale=0.3)
        rep = band_scan(A)
        worst = max(worst, rep.max_length / (2 * np.pi / n) - 1)
    return CheckResult("band-length-bound", max(worst, 0.0), 0.05)


def check_contraction(d, rng, count=10):
    worst = np.inf
    J = symplectic_form(d)
    for _ in range(count):
        a = random_algebra_element(d, GroupTag.SpR, rng)
        a *= 0.05 * rng.uniform() / np.linalg.norm(a, 2)
        _, margin = contraction_condition(PerturbationPair(a, J, 0.1), (np.sqrt(2) - 1) * 1j, 16, rng)
        worst = min(worst, margin)
    # residual: how far the worst margin falls short of strict contraction
    return CheckResult("disc-contraction", float(max(0.0, 1e-12 - worst)), 0.0)


CHECKS = [
    check_membership,
    check_cayley,
    check_mobius_and_tau,
    check_det_phase,
    check_jacobian,
    check_free_lyapunov,
    check_pairing,
    check_rotation_monotone,
    check_ld_identities,
    check_trace_gap,
    check_band_bound,
    check_contraction,
]


def run_suite(d: int = 1, seed: int = 0):
    """Run every check with a generator seeded by ``seed``; returns a list of CheckResult."""
    rng = np.random.default_rng(seed)
    return [check(d, rng) for check in CHECKS]
