"""Eigenvalue bands of periodic families and the O(1/n) band-length bound.

For a periodic cocycle of period n and the family A_theta = R(theta) A, a
band is a maximal parameter interval on which every eigenvalue of the period
map is simple and of modulus one.  The band length is at most 2 pi / n.
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np
from scipy.linalg import schur, solve_sylvester
from scipy.optimize import minimize_scalar

from .cocycle import Cocycle
from .errors import ConditioningError, DomainError, NonCanonicalSubspaceError, NumericError
from .groups import GroupTag, random_group_element, rotation, symplectic_form

__all__ = [
    "ThetaClass",
    "Band",
    "BandReport",
    "theta_period_maps",
    "classify_eigenvalues",
    "classify_theta",
    "band_scan",
    "spectral_projection",
    "pair_ratio_diagnostic",
    "PositiveTheta",
    "find_positive_theta",
    "canonical_pair_normalize",
    "collision_diagnostic",
    "random_generic_periodic",
    "TOL_UNIT",
    "TOL_SEP",
]

log = logging.getLogger(__name__)

TOL_UNIT = 1e-8
TOL_SEP = 1e-6


class ThetaClass(str, Enum):
    ALL_SIMPLE_UNIMODULAR = "AllSimpleUnimodular"
    HAS_OFF_CIRCLE = "HasOffCircle"
    HAS_COLLISION = "HasCollision"


def _require_periodic(A: Cocycle):
    if not A.is_periodic:
        raise DomainError("band computations need a periodic base")


def theta_period_maps(A: Cocycle, thetas, x: int = 0):
    """Period maps of R(theta) A at every theta (shape (len(thetas), 2d, 2d))."""
    _require_periodic(A)
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    d = A.d
    c, s = np.cos(thetas)[:, None, None], np.sin(thetas)[:, None, None]
    eye = np.eye(d)
    R = np.concatenate([np.concatenate([c * eye, s * eye], -1), np.concatenate([-s * eye, c * eye], -1)], -2)
    n = A.base.n
    P = np.broadcast_to(np.eye(2 * d), R.shape).astype(np.result_type(A.matrices, float))
    for k in range(n):
        P = (R @ A.matrices[(x + k) % n]) @ P
    return P


def classify_eigenvalues(lam, tol_unit: float = TOL_UNIT, tol_sep: float = TOL_SEP):
    """Vectorised classification of eigenvalue rows (shape (..., 2d))."""
    lam = np.asarray(lam)
    if not np.all(np.isfinite(lam)):
        raise NumericError("eigenvalue computation failed")
    off = np.any(np.abs(np.abs(lam) - 1) > tol_unit, axis=-1)
    gaps = np.abs(lam[..., :, None] - lam[..., None, :])
    k = lam.shape[-1]
    gaps[..., np.arange(k), np.arange(k)] = np.inf
    coll = np.min(gaps, axis=(-2, -1)) < tol_sep
    out = np.empty(lam.shape[:-1], dtype=object)
    out[...] = ThetaClass.ALL_SIMPLE_UNIMODULAR
    out[coll] = ThetaClass.HAS_COLLISION
    out[off] = ThetaClass.HAS_OFF_CIRCLE
    return out


def classify_theta(A: Cocycle, theta: float, tol_unit: float = TOL_UNIT, tol_sep: float = TOL_SEP) -> ThetaClass:
    """Classification of the period map of R(theta) A.

    Off-circle eigenvalues take precedence over collisions.
    """
    lam = np.linalg.eigvals(theta_period_maps(A, [theta])[0])
    return classify_eigenvalues(lam[None], tol_unit, tol_sep)[0]


@dataclass
class Band:
    a: float
    b: float
    eigenvalues_mid: list
    bound_ok: bool

    @property
    def length(self):
        return self.b - self.a


@dataclass
class BandReport:
    n: int
    bands: list
    bound: float
    collisions: list = field(default_factory=list)
    parameter_range: tuple = (-np.pi, np.pi)

    @property
    def max_length(self) -> float:
        return max((b.length for b in self.bands), default=0.0)

    @property
    def bound_ok(self) -> bool:
        return all(b.bound_ok for b in self.bands)

    def to_json(self) -> str:
        def enc(o):
            if isinstance(o, complex):
                return [o.real, o.imag]
            raise TypeError(type(o))

        data = {
            "n": self.n,
            "bound": self.bound,
            "parameter_range": list(self.parameter_range),
            "bands": [
                {"a": repr(b.a), "b": repr(b.b), "length": repr(b.length), "bound_ok": b.bound_ok,
                 "eigenvalues_mid": [[float(z.real), float(z.imag)] for z in b.eigenvalues_mid]}
                for b in self.bands
            ],
            "collisions": [repr(float(c)) for c in self.collisions],
        }
        return json.dumps(data, default=enc, indent=2)


def _min_gap(lam):
    """Smallest pairwise eigenvalue distance of every row."""
    lam = np.asarray(lam)
    k = lam.shape[-1]
    gaps = np.abs(lam[..., :, None] - lam[..., None, :])
    gaps[..., np.arange(k), np.arange(k)] = np.inf
    return np.min(gaps, axis=(-2, -1))


def _is_band(cls):
    return cls == ThetaClass.ALL_SIMPLE_UNIMODULAR


def band_scan(A, theta_range=(-np.pi, np.pi), grid: int = None, refine_tol: float = 1e-10,
              tol_unit: float = TOL_UNIT, tol_sep: float = TOL_SEP, n: int = None, bound: float = None,
              slack: float = 0.05) -> BandReport:
    """Bands of a one-parameter family of period maps.

    Parameters
    ----------
    A : Cocycle or callable
        A periodic cocycle (scanned in theta through R(theta) A), or a callable
        mapping an array of parameters to a stack of period maps (then ``n``
        is required).
    theta_range : (float, float)
    grid : int, optional
        Coarse grid size; default 64 n + 1.
    refine_tol : float
        Endpoint bisection tolerance.
    bound : float, optional
        Length bound; defaults to 2 pi / n.  Each band records whether its
        length is within ``bound * (1 + slack)``.

    Returns
    -------
    BandReport
    """
    if isinstance(A, Cocycle):
        _require_periodic(A)
        n = A.base.n

        def maps(th):
            return theta_period_maps(A, th)
    else:
        if n is None:
            raise DomainError("pass the period n with a callable family")
        maps = A
    bound = 2 * np.pi / n if bound is None else bound
    lo, hi = map(float, theta_range)
    grid = 64 * n + 1 if grid is None else grid
    th = np.linspace(lo, hi, grid)

    def eig(ts):
        return np.linalg.eigvals(maps(np.atleast_1d(ts)))

    def classify(ts):
        return classify_eigenvalues(eig(ts), tol_unit, tol_sep)

    lam_grid = eig(th)
    cls = classify_eigenvalues(lam_grid, tol_unit, tol_sep)
    inside = np.array([_is_band(c) for c in cls])

    # eigenvalues can pass through each other between two grid points; every
    # local minimum of the pairwise gap inside a band is minimised and cut
    cuts = {}
    g = _min_gap(lam_grid)
    for k in range(1, grid - 1):
        if not (inside[k - 1] and inside[k] and inside[k + 1]):
            continue
        if not (g[k] <= g[k - 1] and g[k] <= g[k + 1]):
            continue
        res = minimize_scalar(lambda t: float(_min_gap(eig(t))[0]), bounds=(th[k - 1], th[k + 1]),
                              method="bounded", options={"xatol": refine_tol})
        if res.fun < tol_sep:
            cuts[k - 1 if res.x < th[k] else k] = float(res.x)

    def refine(a_in, b_out):
        """Boundary between a parameter inside a band and one outside it."""
        while abs(b_out - a_in) > refine_tol:
            m = 0.5 * (a_in + b_out)
            if _is_band(classify(m)[0]):
                a_in = m
            else:
                b_out = m
        return a_in

    def add_band(a, b):
        mid = 0.5 * (a + b)
        lam = eig(mid)[0]
        bands.append(Band(float(a), float(b), [complex(z) for z in lam], bool(b - a <= bound * (1 + slack))))

    bands, collisions = [], []
    i = 0
    while i < grid:
        if not inside[i]:
            if cls[i] == ThetaClass.HAS_COLLISION:
                collisions.append(float(th[i]))
            i += 1
            continue
        j = i
        while j + 1 < grid and inside[j + 1]:
            j += 1
        a = th[i] if i == 0 else refine(th[i], th[i - 1])
        b = th[j] if j == grid - 1 else refine(th[j], th[j + 1])
        for k in sorted(c for c in cuts if i <= c < j):
            collisions.append(cuts[k])
            add_band(a, cuts[k])
            a = cuts[k]
        add_band(a, b)
        i = j + 1
    collisions.sort()
    return BandReport(n, bands, bound, collisions, (lo, hi))


def _select_mask(lam, selector):
    if callable(selector):
        return np.array([bool(selector(z)) for z in lam])
    mask = np.zeros(len(lam), dtype=bool)
    mask[list(selector)] = True
    return mask


def spectral_projection(M, selector, tol_sep: float = TOL_SEP):
    """Projection onto the invariant subspace of the selected eigenvalues, along the others.

    ``selector`` is a set of indices into ``np.linalg.eigvals(M)`` or a
    predicate on eigenvalues.  The subspace comes from an ordered Schur form,
    so Jordan blocks inside the selection are handled; the complementary
    coupling is removed with a Sylvester solve.  This equals the resolvent
    contour integral around the selected eigenvalues.

    Raises
    ------
    ConditioningError
        If a selected eigenvalue is closer than ``tol_sep`` to an unselected one.
    """
    M = np.asarray(M, dtype=complex)
    lam = np.linalg.eigvals(M)
    mask = _select_mask(lam, selector)
    k = int(mask.sum())
    if k == 0:
        return np.zeros_like(M)
    if k == len(lam):
        return np.eye(len(lam), dtype=complex)
    sel, rest = lam[mask], lam[~mask]
    if np.min(np.abs(sel[:, None] - rest[None, :])) < tol_sep:
        raise ConditioningError("selected eigenvalues are not separated from the rest")

    def keep(z):
        return bool(mask[np.argmin(np.abs(lam - z))])

    T, U, sdim = schur(M, output="complex", sort=keep)
    if sdim != k:
        raise ConditioningError("Schur reordering did not isolate the selected eigenvalues")
    T11, T12, T22 = T[:k, :k], T[:k, k:], T[k:, k:]
    X = solve_sylvester(T11, -T22, -T12)
    Pt = np.zeros_like(T)
    Pt[:k, :k] = np.eye(k)
    Pt[:k, k:] = -X
    return U @ Pt @ U.conj().T


def pair_ratio_diagnostic(l1, l2, tol: float = 1e-8) -> float:
    """|l1 + l2| / |sqrt(l1 l2)| for unimodular l1, l2 (at most 2, equal iff l1 = l2)."""
    l1, l2 = complex(l1), complex(l2)
    if abs(abs(l1) - 1) > tol or abs(abs(l2) - 1) > tol:
        raise DomainError("eigenvalues must lie on the unit circle")
    return abs(l1 + l2) / abs(np.sqrt(l1 * l2))


@dataclass(frozen=True)
class PositiveTheta:
    theta: float
    L_top: float
    L_positive_sum: float


def find_positive_theta(A: Cocycle, C: float = 4 * np.pi, grid: int = 2001, tol: float = 1e-8):
    """Smallest |theta| < C/n on a grid with spectral radius of the period map above 1 + tol.

    Returns None when no such theta exists on the grid.
    """
    _require_periodic(A)
    n = A.base.n
    th = np.linspace(-C / n, C / n, grid)[1:-1]
    th = th[np.argsort(np.abs(th), kind="stable")]
    lam = np.abs(np.linalg.eigvals(theta_period_maps(A, th)))
    rad = lam.max(axis=-1)
    hits = np.nonzero(rad > 1 + tol)[0]
    if len(hits) == 0:
        log.info("no theta with positive exponent in (-%g, %g)", C / n, C / n)
        return None
    j = hits[0]
    big = lam[j][lam[j] > 1]
    return PositiveTheta(float(th[j]), float(np.log(rad[j]) / n), float(np.sum(np.log(big)) / n))


def _hform(u, v):
    """Hermitian symplectic pairing <u, v> = u* J v."""
    J = symplectic_form(len(u) // 2)
    return complex(np.conj(u) @ J @ v)


def canonical_pair_normalize(V, tol: float = 1e-10):
    """Basis (v, w) of span(V) with <v,v> = <w,w> = 0 and <v,w> = 1.

    Raises
    ------
    NonCanonicalSubspaceError
        If the form is degenerate on the plane or has no isotropic vector.
    """
    V = np.asarray(V, dtype=complex)
    if V.ndim != 2 or V.shape[1] != 2:
        raise DomainError("pass a (2d, 2) basis")
    a, b = V[:, 0], V[:, 1]
    G = np.array([[_hform(a, a), _hform(a, b)], [_hform(b, a), _hform(b, b)]])
    scale = np.linalg.norm(a) ** 2 * np.linalg.norm(b) ** 2
    if abs(np.linalg.det(G)) <= tol * scale:
        raise NonCanonicalSubspaceError("the form is degenerate on the plane")
    H = 1j * G
    H = 0.5 * (H + H.conj().T)
    mu, U = np.linalg.eigh(H)
    if not (mu[0] < 0 < mu[1]):
        raise NonCanonicalSubspaceError("the plane contains no isotropic vector")
    if abs(G[0, 0]) <= tol * np.linalg.norm(a) ** 2:
        v, other = a, b
    elif abs(G[1, 1]) <= tol * np.linalg.norm(b) ** 2:
        v, other = b, a
    else:
        c = U[:, 1] / np.sqrt(mu[1]) + U[:, 0] / np.sqrt(-mu[0])
        v = V @ c
        other = a if abs(_hform(v, a)) >= abs(_hform(v, b)) else b
    w = other / _hform(v, other)
    gamma = _hform(w, w).imag
    w = w + 0.5j * gamma * v
    return v, w


def collision_diagnostic(A: Cocycle, theta0: float, h: float = 1e-6, cluster: int = 2):
    """Both sides of 2 tr1' tr2 = tr1 tr2' at a collision theta0.

    tr1 and tr2 are the trace and determinant of the period map restricted to
    the invariant subspace of the ``cluster`` eigenvalues nearest the
    collision value (the symmetric functions of that eigenvalue group).
    """
    P0 = theta_period_maps(A, [theta0])[0]
    lam0 = np.linalg.eigvals(P0)
    gaps = np.abs(lam0[:, None] - lam0[None, :]) + np.diag(np.full(len(lam0), np.inf))
    i, _ = np.unravel_index(np.argmin(gaps), gaps.shape)
    centre = lam0[i]

    def sym(th):
        lam = np.linalg.eigvals(theta_period_maps(A, [th])[0])
        grp = lam[np.argsort(np.abs(lam - centre))[:cluster]]
        return grp.sum(), np.prod(grp)

    t1p, t2p = sym(theta0 + h)
    t1m, t2m = sym(theta0 - h)
    t1, t2 = sym(theta0)
    d1, d2 = (t1p - t1m) / (2 * h), (t2p - t2m) / (2 * h)
    return complex(2 * d1 * t2), complex(t1 * d2)


def _collisions_generic(A: Cocycle, report: BandReport, delta: float = 1e-4):
    """False if some band endpoint is a tangential touching (bands on both sides)."""
    ends = [b.b for b in report.bands] + [b.a for b in report.bands]
    for t in ends:
        left = classify_theta(A, t - delta)
        right = classify_theta(A, t + delta)
        if _is_band(left) and _is_band(right):
            return False
    return True


def random_generic_periodic(d: int, n: int, rng, tag=GroupTag.SHSp, scale: float = 0.5, max_tries: int = 50,
                            theta_range=(-np.pi, np.pi)) -> Cocycle:
    """Random periodic cocycle whose band endpoints are all transversal.

    Draws whose scan finds two bands meeting tangentially at a collision are
    rejected (logged at INFO level).
    """
    for attempt in range(max_tries):
        mats = random_group_element(d, tag, rng, scale=scale, size=n)
        A = Cocycle.periodic(mats, tag)
        rep = band_scan(A, theta_range)
        if _collisions_generic(A, rep):
            return A
        log.info("rejected draw %d: tangential band contact", attempt)
    raise DomainError("no generic draw found")


def band_report_dict(report: BandReport) -> dict:
    return json.loads(report.to_json())
