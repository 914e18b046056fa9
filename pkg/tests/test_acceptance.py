"""Acceptance suite: the eleven release criteria at their stated tolerances.

Each test records one PASS/FAIL line (printed inline and repeated in the
terminal summary) and then asserts.  Wall-clock budgets are part of the
criteria and are asserted too.

Run on its own with ``pytest tests/test_acceptance.py -v``.
"""
import time

import numpy as np
import pytest

from cocyclekit.bands import band_scan, random_generic_periodic
from cocyclekit.cli import main as cli_main
from cocyclekit.cocycle import Cocycle, lyapunov_spectrum
from cocyclekit.families import RotationFamily
from cocyclekit.groups import (
    GroupTag,
    cayley_conjugate,
    membership_residual,
    random_algebra_element,
    random_group_element,
    symplectic_form,
)
from cocyclekit.kotani import (
    boundary_gap_diagnostics,
    key_equation_check,
    ld_identities_check,
    m_minus,
    reconstruct_generators,
    trace_gap,
)
from cocyclekit.perturbation import (
    PerturbationPair,
    contraction_condition,
    density_search,
    perturb,
    phi_epsilon,
)
from cocyclekit.rotation import cauchy_riemann_check, rotation_function
from cocyclekit.siegel import (
    det_phase_residual,
    lebesgue_jacobian,
    mobius,
    random_disc_point,
    random_shilov_point,
    tau,
)
from cocyclekit.strip import StripPotential, energy_family, energy_scan, transfer_cocycle

from oracles import FREE_LYAPUNOV, FREE_M

SEED = 20240601
FREE = StripPotential("real_symmetric", np.zeros((1, 1, 1)))
DECOUPLED = StripPotential("diagonal_from_S", [[0.0, 0.0]], S=[1, 2])

# tags that act on the disc after Cayley conjugation, and tags that already live there
CAYLEY_TAGS = (GroupTag.SpR, GroupTag.HSp, GroupTag.SHSp)
DISC_TAGS = (GroupTag.UddCapSpC, GroupTag.Udd, GroupTag.SUdd)
# det(M·Z) = e^{-2i arg det tau} det Z needs det M = 1
UNIMODULAR = (GroupTag.SpR, GroupTag.SHSp, GroupTag.UddCapSpC, GroupTag.SUdd)
SYMMETRIC_DISC = (GroupTag.SpR, GroupTag.UddCapSpC)


def _rel(a, b):
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


def _random_rotation_family(d, rng, size=3):
    return RotationFamily(Cocycle.periodic(random_group_element(d, GroupTag.SpR, rng, size=size)))


def test_group_and_geometry_suite(criterion):
    rng = np.random.default_rng(SEED)
    count = 1000
    worst = {"membership": 0.0, "cayley": 0.0, "mobius": 0.0, "tau": 0.0, "det-phase": 0.0}
    start = time.perf_counter()
    for d in (1, 2, 3):
        for tag in GroupTag:
            M = random_group_element(d, tag, rng, size=count)
            worst["membership"] = max(worst["membership"], float(np.max(membership_residual(M, tag))))
            if tag not in CAYLEY_TAGS + DISC_TAGS:
                continue
            N = random_group_element(d, tag, rng, size=count)
            if tag in CAYLEY_TAGS:
                Mc, Nc = cayley_conjugate(M, tag, check=False), cayley_conjugate(N, tag, check=False)
                worst["cayley"] = max(worst["cayley"], _rel(cayley_conjugate(M @ N, tag, check=False), Mc @ Nc))
            else:
                Mc, Nc = M, N
            sym = tag in SYMMETRIC_DISC
            Z = np.stack([random_disc_point(d, rng, symmetric=sym) for _ in range(count)])
            worst["mobius"] = max(worst["mobius"], float(np.max(np.abs(mobius(Mc @ Nc, Z) - mobius(Mc, mobius(Nc, Z))))))
            worst["tau"] = max(worst["tau"], _rel(tau(Mc, mobius(Nc, Z)) @ tau(Nc, Z), tau(Mc @ Nc, Z)))
            if tag in UNIMODULAR:
                S = np.stack([random_shilov_point(d, rng, symmetric=sym) for _ in range(count)])
                worst["det-phase"] = max(worst["det-phase"], det_phase_residual(Mc, S))
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) <= 1e-8 and elapsed <= 10
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f" (tol 1e-8), {elapsed:.1f}s / 10s"
    assert criterion(1, "group and geometry identities", ok, detail)


def test_jacobian_identity(criterion):
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    start = time.perf_counter()
    for d in (1, 2):
        C = random_group_element(d, GroupTag.SpR, rng, scale=0.5, size=100)
        Mc = cayley_conjugate(C, GroupTag.SpR, check=False)
        for M in Mc:
            Z = random_disc_point(d, rng)
            jac = lebesgue_jacobian(M, Z)
            pred = abs(np.linalg.det(tau(M, Z))) ** (-2 * (d + 1))
            worst = max(worst, abs(jac - pred) / pred)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-4 and elapsed <= 30
    assert criterion(2, "Jacobian of the disc action", ok,
                     f"max relative error {worst:.1e} (tol 1e-4), {elapsed:.1f}s / 30s")


def test_lyapunov_oracles(criterion):
    start = time.perf_counter()
    outside = max(abs(lyapunov_spectrum(transfer_cocycle(FREE, E)).top - L) for E, L in FREE_LYAPUNOV.items())
    inside = max(abs(lyapunov_spectrum(transfer_cocycle(FREE, E), n=100_000, method="qr").top) for E in (0.0, 1.0))
    rng = np.random.default_rng(SEED + 2)
    pairing = 0.0
    for d in (1, 2, 3):
        for _ in range(5):
            ex = lyapunov_spectrum(Cocycle.periodic(random_group_element(d, GroupTag.SpR, rng, size=4))).exponents
            pairing = max(pairing, float(np.max(np.abs(ex + ex[::-1]))))
    elapsed = time.perf_counter() - start
    ok = outside <= 1e-6 and inside <= 1e-3 and pairing <= 1e-8 and elapsed <= 60
    detail = (f"free outside {outside:.1e} (1e-6), inside |L| {inside:.1e} (1e-3), "
              f"pairing {pairing:.1e} (1e-8), {elapsed:.1f}s / 60s")
    assert criterion(3, "Lyapunov oracles", ok, detail)


def test_rotation_function(criterion):
    rng = np.random.default_rng(SEED + 3)
    start = time.perf_counter()
    sig = np.linspace(-np.pi, np.pi, 200)
    rise = 0.0
    families = []
    for k in range(20):
        fam = _random_rotation_family(1 + k % 2, rng)
        families.append(fam)
        rho = np.array([v.rho for v in rotation_function(fam, sig, lyapunov=False)])
        rise = max(rise, float(np.max(np.diff(rho))))
    free = energy_family(FREE)
    E = np.linspace(-2.0, 2.0, 81)
    rho = np.array([v.rho for v in rotation_function(free, E, sigma_ref=-2.0, lyapunov=False)])
    ids = float(np.max(np.abs(rho + np.arccos(-E / 2))))
    cr = max([cauchy_riemann_check(f, 0.4, 0.1) for f in families[:6]] + [cauchy_riemann_check(free, 0.5, 0.1)])
    elapsed = time.perf_counter() - start
    ok = rise <= 1e-6 and ids <= 1e-3 and cr <= 5e-3 and elapsed <= 300
    detail = (f"largest increase {rise:.1e} (1e-6), free IDS error {ids:.1e} (1e-3), "
              f"Cauchy-Riemann {cr:.1e} (5e-3), {elapsed:.1f}s / 300s")
    assert criterion(4, "rotation function", ok, detail)


def test_kotani_identities(criterion):
    rng = np.random.default_rng(SEED + 4)
    start = time.perf_counter()
    ident, key = 0.0, 0.0
    for k in range(20):
        fam = _random_rotation_family(1 + k % 2, rng)
        for t in (0.05, 0.1, 0.2):
            ident = max(ident, *ld_identities_check(fam, 0.3 + 1j * t))
            key = max(key, key_equation_check(fam, 0.3, t))
    elapsed = time.perf_counter() - start
    ok = ident <= 1e-6 and key <= 5e-3 and elapsed <= 300
    detail = f"tau and q identities {ident:.1e} (1e-6), key equation {key:.1e} (5e-3), {elapsed:.1f}s / 300s"
    assert criterion(5, "m-function identities", ok, detail)


def test_boundary_gap_trend(criterion):
    start = time.perf_counter()
    ok, parts = True, []
    for name, potential in (("free d=1", FREE), ("decoupled strip d=2", DECOUPLED)):
        rows, flags = boundary_gap_diagnostics(energy_family(potential), 0.5, [0.2, 0.1, 0.05, 0.02])
        first, last = rows[0], rows[-1]
        drop = first.D / last.D if last.D > 0 else np.inf
        growth = max(r.I_plus + r.I_minus for r in rows) / (first.I_plus + first.I_minus)
        ok &= flags["complete"] and drop >= 10 and growth <= 10
        parts.append(f"{name} D drop {drop:.1f}x, I growth {growth:.2f}x")
    elapsed = time.perf_counter() - start
    ok = ok and elapsed <= 120
    detail = "; ".join(parts) + f" (drop >= 10, growth <= 10), {elapsed:.1f}s / 120s"
    assert criterion(6, "m+/m- gap as t -> 0", ok, detail)


def test_trace_inequality(criterion):
    rng = np.random.default_rng(SEED + 6)
    low, diag = np.inf, 0.0
    for k in range(10_000):
        d = 1 + k % 3
        X = random_disc_point(d, rng, symmetric=False)
        Y = random_disc_point(d, rng, symmetric=False)
        low = min(low, trace_gap(X, Y))
        diag = max(diag, abs(trace_gap(X, X)))
    ok = low >= -1e-12 and diag <= 1e-12
    assert criterion(7, "trace inequality", ok, f"min gap {low:.2e} (>= -1e-12), |gap(X,X)| {diag:.1e} (1e-12)")


def test_band_length_bound(criterion):
    rng = np.random.default_rng(SEED + 7)
    start = time.perf_counter()
    ns = np.array([4, 8, 16, 32])
    all_ok, slopes = True, {}
    for d in (1, 2):
        longest = []
        for n in ns:
            m = 0.0
            for _ in range(10):
                rep = band_scan(random_generic_periodic(d, int(n), rng, scale=0.3))
                all_ok &= all(b.length <= 2 * np.pi / n * 1.05 for b in rep.bands)
                m = max(m, rep.max_length)
            longest.append(m)
        slopes[d] = float(np.polyfit(np.log(ns), np.log(longest), 1)[0])
    elapsed = time.perf_counter() - start
    ok = all_ok and max(slopes.values()) <= -0.9 and elapsed <= 600
    detail = (f"every band within 2pi/n*1.05: {all_ok}, slopes d=1 {slopes[1]:.2f} d=2 {slopes[2]:.2f} "
              f"(<= -0.9), {elapsed:.1f}s / 600s")
    assert criterion(8, "band length bound", ok, detail)


def test_reconstruction(criterion):
    rng = np.random.default_rng(SEED + 8)
    pair = random_group_element(1, GroupTag.SpR, rng, scale=0.8, size=2)
    pattern = rng.integers(0, 2, 37)
    A = Cocycle.periodic(pair[pattern])
    fam = RotationFamily(A)

    def oracle(z, x):
        return m_minus(fam, z, points=[x], method="iterate").values[0]

    found = reconstruct_generators(oracle, pair, 20, 0, lambda x: x + 1, T=8.0)
    exact = sum(np.array_equal(F, A.at(k)) for k, F in enumerate(found))
    assert criterion(9, "reconstruction from m-", exact == 20, f"{exact}/20 generators recovered exactly at Im z = -8")


def test_perturbation(criterion):
    rng = np.random.default_rng(SEED + 9)
    start = time.perf_counter()
    found = 0
    for k in range(10):
        A = Cocycle.periodic(random_group_element(1, GroupTag.SpR, rng, size=4))
        res = density_search(A, 0.5, trials=100, rng=SEED + k)
        found += bool(res.found and res.norm < 0.5 and lyapunov_spectrum(perturb(A, res.v)).Lk(1) > 0)
    J = symplectic_form(1)
    phi_ok, t0_positive = True, 0
    for _ in range(10):
        A = Cocycle.periodic(random_group_element(1, GroupTag.SpR, rng, scale=0.5, size=3))
        a = random_algebra_element(1, GroupTag.SpR, rng)
        a *= 0.05 * rng.uniform() / np.linalg.norm(a, 2)
        phi, _, gamma = phi_epsilon(A, PerturbationPair(a, J, 0.2), nodes=17, return_nodes=True)
        if gamma[8] > 1e-9:
            t0_positive += 1
            phi_ok &= phi > 0
    margin = np.inf
    for _ in range(100):
        a = random_algebra_element(1, GroupTag.SpR, rng)
        a *= 0.05 * rng.uniform() / np.linalg.norm(a, 2)
        _, m = contraction_condition(PerturbationPair(a, J, 0.1), (np.sqrt(2) - 1) * 1j, 32, rng)
        margin = min(margin, m)
    elapsed = time.perf_counter() - start
    ok = found == 10 and phi_ok and margin > 0
    detail = (f"density search {found}/10, Phi > 0 on all {t0_positive} positive middle nodes: {phi_ok}, "
              f"min contraction margin {margin:.3f} (> 0), {elapsed:.1f}s")
    assert criterion(10, "perturbation", ok, detail)


def test_zero_set_measure_and_determinism(criterion, tmp_path):
    scan = energy_scan(FREE, E_range=(-3.0, 3.0), grid=601)
    argv = ["strip-scan", "--v", "random", "--base", "shift", "--grid", "41", "--n", "500", "--samples", "2",
            "--seed", "11"]
    codes = [cli_main([*argv, "--out", str(tmp_path / run)]) for run in ("a", "b")]
    files = sorted(p.name for p in (tmp_path / "a").glob("*.csv"))
    same = codes == [0, 0] and bool(files) and all(
        (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files)
    ok = abs(scan.M - FREE_M) <= 0.05 and same
    detail = f"free M = {scan.M:.4f} +- {scan.M_err:.4f} (4.0 +- 0.05), byte-identical CSV for equal seeds: {same}"
    assert criterion(11, "zero-exponent measure", ok, detail)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
