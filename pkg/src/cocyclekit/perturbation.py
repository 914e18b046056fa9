"""Regularised perturbations that create positive exponents.

The construction deforms A by exp(eps (z b + (1 - z^2) a)) with b close to
the rotation generator J.  For Im z > 0 (inside the unit disc) the disc
action of that factor is a strict contraction, which makes
z -> L^d(exp(eps (z b + (1 - z^2) a)) A) harmonic, and the weighted average

    Phi_eps(A, a, b) = int_{-1}^{1} (1 - t^2) / |t^2 + 2 i t + 1|^2 L^d(exp(eps (t b + (1 - t^2) a)) A) dt

is positive as soon as the integrand is positive at t = 0.

Algebra-valued maps ``a``, ``b`` and ``v`` are given either as a single
(2d, 2d) matrix (constant), as a stack aligned with ``A.matrices`` (one per
site of a periodic base or per symbol of a shift), or as a callable x -> matrix
for cocycles defined by a generator function.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .cocycle import Cocycle, lyapunov_spectrum
from .errors import BoundaryAtInfinityError, DomainError
from .groups import GroupTag, cayley_element, random_algebra_element, symplectic_form
from .siegel import mobius, random_disc_point, random_shilov_point

__all__ = [
    "PerturbationPair",
    "perturb",
    "sup_norm",
    "contraction_condition",
    "phi_weight",
    "phi_weight_integral",
    "phi_epsilon",
    "DensityResult",
    "density_search",
    "harmonicity_scan",
    "ETA_DEFAULT",
]

log = logging.getLogger(__name__)

ETA_DEFAULT = 0.05
POSITIVE_TOL = 1e-9


def _as_map(field_, A: Cocycle):
    """Normalise an algebra-valued map to an array aligned with A.matrices, or a callable."""
    if callable(field_):
        if A.matrices is not None:
            raise DomainError("pass arrays for cocycles that store their generators")
        return field_
    arr = np.asarray(field_)
    if arr.ndim == 2:
        arr = arr[None]
    if A.matrices is None:
        mat = arr[0]
        if len(arr) != 1:
            raise DomainError("a generator-function cocycle needs a constant or callable map")
        return lambda x: mat
    if len(arr) not in (1, len(A.matrices)):
        raise DomainError(f"map has {len(arr)} entries, the cocycle stores {len(A.matrices)}")
    return np.broadcast_to(arr, A.matrices.shape[:1] + arr.shape[1:])


def _combine(A: Cocycle, fields, coeffs):
    maps = [_as_map(f, A) for f in fields]
    if A.matrices is not None:
        return sum(c * m for c, m in zip(coeffs, maps))
    return lambda x: sum(c * np.asarray(m(x)) for c, m in zip(coeffs, maps))


def sup_norm(v, A: Cocycle = None, samples=None) -> float:
    """Sup over sites of the operator 2-norm (callables are sampled at ``samples``)."""
    if callable(v):
        if samples is None:
            raise DomainError("sampling points needed for a callable map")
        return max(float(np.linalg.norm(v(x), 2)) for x in samples)
    arr = np.asarray(v)
    if arr.ndim == 2:
        arr = arr[None]
    return float(np.max(np.linalg.norm(arr, 2, axis=(-2, -1))))


def perturb(A: Cocycle, v) -> Cocycle:
    """The cocycle x -> exp(v(x)) A(x).

    The result keeps the SpR tag when v is real and A is SpR; complex v gives
    an untagged (complexified) cocycle.
    """
    vm = _as_map(v, A)
    if A.matrices is not None:
        real = np.isrealobj(vm) or np.allclose(np.imag(vm), 0)
        E = expm(np.real(vm) if real else vm)
        mats = E @ A.matrices
        tag = A.tag if real else None
        mats.setflags(write=False)
        return Cocycle(A.base, A.d, tag, None, mats)
    gen = A.generator
    return Cocycle(A.base, A.d, None, lambda x: expm(vm(x)) @ np.asarray(gen(x)), None)


@dataclass
class PerturbationPair:
    """Algebra-valued maps a, b with the deformation scale eps and the closeness parameter eta.

    ``b`` must be eta-close to J at every stored site (checked on construction
    for array maps, and at ``points`` for callables).
    """

    a: object
    b: object
    eps: float
    eta: float = ETA_DEFAULT
    points: list = None

    def __post_init__(self):
        if not self.eps > 0:
            raise DomainError("eps must be positive")
        if self.eta <= 0:
            raise DomainError("eta must be positive")
        self.check()

    def check(self):
        if callable(self.b):
            if self.points is None:
                return
            vals = np.stack([np.asarray(self.b(x)) for x in self.points])
        else:
            vals = np.asarray(self.b)
            if vals.ndim == 2:
                vals = vals[None]
        d = vals.shape[-1] // 2
        dist = np.max(np.linalg.norm(vals - symplectic_form(d), 2, axis=(-2, -1)))
        if dist > self.eta * (1 + 1e-12):
            raise DomainError(f"b is {dist:.3g} away from J, more than eta = {self.eta}")

    def generator_at(self, A: Cocycle, z):
        """The map x -> eps (z b(x) + (1 - z^2) a(x))."""
        return _combine(A, [self.b, self.a], [self.eps * z, self.eps * (1 - z * z)])


def _pair_values(pair: PerturbationPair, points):
    """(b(x), a(x)) stacks at base points; array maps are read by index."""
    def vals(f):
        if callable(f):
            return np.stack([np.asarray(f(x)) for x in points])
        arr = np.asarray(f)
        if arr.ndim == 2:
            return np.broadcast_to(arr, (len(points),) + arr.shape)
        return arr[np.asarray(points) % len(arr)]

    return vals(pair.b), vals(pair.a)


def contraction_condition(pair: PerturbationPair, z, boundary_samples: int = 64, rng=None, points=None,
                          tol: float = 1e-12):
    """Does exp(eps (z b + (1 - z^2) a)) map the closed disc strictly inside itself?

    The Cayley-side action is applied to Shilov boundary samples, to
    norm-one non-unitary boundary samples and to interior samples.

    Returns
    -------
    (bool, float)
        Whether the worst margin ``min(1 - ||image||)`` exceeds ``tol``, and that margin.
    """
    rng = np.random.default_rng(rng)
    if points is None:
        if callable(pair.b) or callable(pair.a):
            raise DomainError("pass base points for callable maps")
        n_sites = max(len(f) if np.ndim(f) == 3 else 1 for f in (pair.b, pair.a))
        points = list(range(n_sites))
    B, Aa = _pair_values(pair, points)
    d = B.shape[-1] // 2
    z = complex(z)
    W = pair.eps * (z * B + (1 - z * z) * Aa)
    C = cayley_element(d)
    Mc = C @ np.stack([expm(w) for w in W]) @ C.conj().T
    Z = [random_shilov_point(d, rng) for _ in range(boundary_samples)]
    Z += [random_disc_point(d, rng, radius=1.0) for _ in range(boundary_samples // 2)]
    Z += [random_disc_point(d, rng) for _ in range(boundary_samples // 4)]
    Z += [np.eye(d, dtype=complex), -np.eye(d, dtype=complex), 1j * np.eye(d), np.zeros((d, d), complex)]
    Z = np.stack(Z)
    margin = np.inf
    for M in Mc:
        try:
            img = mobius(M[None], Z)
        except BoundaryAtInfinityError:
            return False, -np.inf
        margin = min(margin, float(np.min(1 - np.linalg.norm(img, 2, axis=(-2, -1)))))
    return bool(margin > tol), margin


def phi_weight(t):
    """(1 - t^2) / |t^2 + 2 i t + 1|^2."""
    t = np.asarray(t, dtype=float)
    return (1 - t**2) / np.abs(t**2 + 2j * t + 1) ** 2


def phi_weight_integral(nodes: int = 33) -> float:
    """Gauss-Legendre value of the weight integral over (-1, 1)."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    return float(np.sum(w * phi_weight(t)))


def _Ld(A: Cocycle, n, samples, rng):
    return lyapunov_spectrum(A, n=n, samples=samples, rng=rng).Lk(A.d)


def phi_epsilon(A: Cocycle, pair: PerturbationPair, nodes: int = 33, n: int = 10_000, samples: int = 8, rng=None,
                return_nodes: bool = False):
    """Weighted average of L^d(exp(eps (t b + (1 - t^2) a)) A) over t in (-1, 1).

    Gauss-Legendre quadrature with the weight kept explicit.  An odd node
    count puts a node at t = 0.

    Returns
    -------
    float, or (float, t, gamma) with ``return_nodes=True``
    """
    rng = np.random.default_rng(rng)
    t, w = np.polynomial.legendre.leggauss(nodes)
    gamma = np.empty(nodes)
    for k, tk in enumerate(t):
        v = _combine(A, [pair.b, pair.a], [pair.eps * tk, pair.eps * (1 - tk * tk)])
        gamma[k] = _Ld(perturb(A, v), n, samples, rng)
    phi = float(np.sum(w * phi_weight(t) * gamma))
    return (phi, t, gamma) if return_nodes else phi


@dataclass
class DensityResult:
    found: bool
    v: object = None
    Ld: float = None
    norm: float = None
    trials: int = 0
    diagnostics: dict = field(default_factory=dict)


def _random_ball_element(A: Cocycle, eta, rng):
    """Real algebra map with sup norm uniformly in (0, eta)."""
    k = 1 if A.matrices is None else len(A.matrices)
    a = random_algebra_element(A.d, GroupTag.SpR, rng, size=k)
    a = a / np.max(np.linalg.norm(a, 2, axis=(-2, -1)))
    return a * eta * rng.uniform(0.1, 0.99)


def density_search(A: Cocycle, delta: float, eta: float = ETA_DEFAULT, eps: float = None, trials: int = 100,
                   rng=None, n: int = 10_000, samples: int = 8, nodes: int = 33, t_grid: int = 41,
                   s_steps: int = 6) -> DensityResult:
    """Find v with sup norm below ``delta`` and L^d(exp(v) A) > 0.

    Recipe: b = J, eps with eps ||b|| < delta / 2; each trial samples a in the
    eta-ball, evaluates the t = 0 node and Phi_eps(A, a, b), and when Phi_eps
    is positive searches s in (0, min(1, delta / (2 eps ||a||))] and t in
    (-1, 1) for a positive exponent of exp(eps (t b + (1 - t^2) s a)) A.

    Exhausting the trials returns ``found=False`` with diagnostics; the
    budget ``||v|| < delta`` is enforced on every returned v.
    """
    if not delta > 0:
        raise DomainError("delta must be positive")
    if A.tag is not None and GroupTag(A.tag) is not GroupTag.SpR:
        raise DomainError("density search perturbs real symplectic cocycles")
    rng = np.random.default_rng(rng)
    b = symplectic_form(A.d)
    nb = float(np.linalg.norm(b, 2))
    eps = 0.45 * delta / nb if eps is None else eps
    if eps * nb >= delta / 2:
        raise DomainError("eps ||b|| must stay below delta / 2")
    diag = {"eps": eps, "eta": eta, "t0_positive": 0, "phi_positive": 0, "phi_values": []}
    ts = np.linspace(-1, 1, t_grid + 2)[1:-1]
    ts = ts[np.argsort(np.abs(ts), kind="stable")]
    for trial in range(1, trials + 1):
        a = _random_ball_element(A, eta, rng)
        pair = PerturbationPair(a, b, eps, eta)
        phi, _, gamma = phi_epsilon(A, pair, nodes, n, samples, rng, return_nodes=True)
        diag["phi_values"].append(phi)
        if gamma[nodes // 2] > POSITIVE_TOL:
            diag["t0_positive"] += 1
        if not phi > POSITIVE_TOL:
            continue
        diag["phi_positive"] += 1
        na = sup_norm(a)
        s_max = min(1.0, delta / (2 * eps * na))
        for s in s_max * 0.5 ** np.arange(s_steps):
            for t in ts:
                v = _combine(A, [b, a], [eps * t, eps * (1 - t * t) * s])
                nv = sup_norm(v)
                if not nv < delta:
                    continue
                L = _Ld(perturb(A, v), n, samples, rng)
                if L > POSITIVE_TOL:
                    diag["s"], diag["t"] = float(s), float(t)
                    return DensityResult(True, np.asarray(v), float(L), nv, trial, diag)
        log.info("trial %d: positive Phi but no positive node on the (s, t) grid", trial)
    log.info("density search exhausted %d trials", trials)
    return DensityResult(False, None, None, None, trials, diag)


def harmonicity_scan(A: Cocycle, pair: PerturbationPair, centres=(0.5j, 0.3 + 0.5j, -0.3 + 0.5j),
                     radius: float = 0.2, m: int = 32, n: int = 10_000, samples: int = 8, rng=None,
                     check_samples: int = 16) -> float:
    """Largest mean-value residual of z -> L^d(exp(eps (z b + (1 - z^2) a)) A) on circles.

    Raises
    ------
    DomainError
        If a circle leaves the open upper half of the unit disc or the
        contraction condition fails at one of its points.
    """
    rng = np.random.default_rng(rng)
    worst = 0.0
    phis = 2 * np.pi * np.arange(m) / m
    pts = None if A.matrices is None else list(range(len(A.matrices)))
    for c in centres:
        c = complex(c)
        if c.imag - radius <= 0 or abs(c) + radius >= 1:
            raise DomainError("circles must stay inside the upper half of the unit disc")
        zs = c + radius * np.exp(1j * phis)
        vals = []
        for z in zs:
            ok, _ = contraction_condition(pair, z, check_samples, rng, points=pts)
            if not ok:
                raise DomainError(f"contraction fails at z = {z:.4g}")
            vals.append(_Ld(perturb(A, pair.generator_at(A, z)), n, samples, rng))
        centre = _Ld(perturb(A, pair.generator_at(A, c)), n, samples, rng)
        worst = max(worst, abs(float(np.mean(vals)) - centre))
    return worst
