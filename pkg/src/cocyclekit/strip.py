"""Jacobi matrices on a strip, their transfer cocycles and energy scans.

The eigenvalue equation  u_{n+1} + u_{n-1} + v(f^n x) u_n = E u_n  on
C^d-valued sequences is encoded by the transfer matrices

    A^(E - v)(x) = [[E I - v(x), -I], [I, 0]].

The measure M(v) of energies with vanishing top exponent is estimated on a
grid with one bisection refinement of the cells at the boundary of the
zero set.
"""
from __future__ import annotations

import csv
import json
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .cocycle import Cocycle, FiniteShift, Periodic, TorusRotation, lyapunov_spectrum
from .errors import DomainError, InvalidStripError
from .families import EnergyFamily
from .groups import GroupTag, cone_margin, symplectic_form

__all__ = [
    "PotentialKind",
    "StripPotential",
    "adjacency_from_S",
    "transfer_matrix",
    "transfer_cocycle",
    "energy_family",
    "EnergyScan",
    "energy_scan",
    "MonotonicityReport",
    "E_monotonicity_check",
    "load_potential",
]


class PotentialKind(str, Enum):
    HERMITIAN = "hermitian"
    REAL_SYMMETRIC = "real_symmetric"
    DIAGONAL_FROM_S = "diagonal_from_S"


def _as_point(p):
    return (int(p),) if np.isscalar(p) else tuple(int(c) for c in p)


def adjacency_from_S(S) -> np.ndarray:
    """0/1 nearest-neighbour matrix of a finite connected S in Z^k (l1 metric).

    Raises
    ------
    InvalidStripError
        If S is empty, has repeated points, or is not connected by unit steps.
    """
    pts = [_as_point(p) for p in S]
    if not pts:
        raise InvalidStripError("S is empty")
    if len(set(pts)) != len(pts):
        raise InvalidStripError("S has repeated points")
    if len({len(p) for p in pts}) != 1:
        raise InvalidStripError("S mixes points of different dimension")
    P = np.asarray(pts)
    dist = np.abs(P[:, None, :] - P[None, :, :]).sum(axis=-1)
    adj = (dist == 1).astype(float)
    seen = {0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in np.nonzero(adj[i])[0]:
            if j not in seen:
                seen.add(int(j))
                queue.append(int(j))
    if len(seen) != len(pts):
        raise InvalidStripError("S is not connected")
    return adj


@dataclass(frozen=True)
class StripPotential:
    """Potential on a strip of width d.

    ``values`` is indexed by the base: an array of shape (n, d, d) (or (n, d)
    for ``DIAGONAL_FROM_S``) for periodic and shift bases (symbol-indexed for
    shifts), or a callable x -> matrix (vector) for torus bases.
    """

    kind: PotentialKind
    values: object
    S: tuple = None
    adjacency: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        kind = PotentialKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is PotentialKind.DIAGONAL_FROM_S:
            if self.S is None:
                raise InvalidStripError("DIAGONAL_FROM_S potentials need the point set S")
            S = tuple(_as_point(p) for p in self.S)
            object.__setattr__(self, "S", S)
            object.__setattr__(self, "adjacency", adjacency_from_S(S))
        if callable(self.values):
            return
        vals = np.asarray(self.values)
        if kind is PotentialKind.DIAGONAL_FROM_S:
            vals = vals.reshape(len(vals), -1).astype(float)
            if vals.shape[1] != len(self.S):
                raise InvalidStripError("diagonal values must have one entry per point of S")
        else:
            if vals.ndim == 2:
                vals = vals[None]
            if vals.ndim != 3 or vals.shape[1] != vals.shape[2]:
                raise DomainError(f"potential values must have shape (n, d, d), got {vals.shape}")
            if kind is PotentialKind.REAL_SYMMETRIC:
                if np.iscomplexobj(vals) and np.max(np.abs(vals.imag)) > 0:
                    raise DomainError("real symmetric potential has complex entries")
                vals = np.real(vals).astype(float)
                if np.max(np.abs(vals - np.swapaxes(vals, 1, 2))) > 1e-12:
                    raise DomainError("potential is not symmetric")
            else:
                vals = vals.astype(complex)
                if np.max(np.abs(vals - np.swapaxes(vals, 1, 2).conj())) > 1e-12:
                    raise DomainError("potential is not Hermitian")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def d(self) -> int:
        if self.kind is PotentialKind.DIAGONAL_FROM_S:
            return len(self.S)
        if callable(self.values):
            raise DomainError("width of a callable potential is not stored; pass d explicitly")
        return self.values.shape[-1]

    @property
    def tag(self) -> GroupTag:
        return GroupTag.SHSp if self.kind is PotentialKind.HERMITIAN else GroupTag.SpR

    def matrix(self, v):
        """Full d×d potential matrix from a stored value."""
        v = np.asarray(v)
        if self.kind is PotentialKind.DIAGONAL_FROM_S:
            return np.diag(v) + self.adjacency if v.ndim == 1 else _diag_stack(v) + self.adjacency
        return v

    def matrices(self):
        """Stack of all stored potential matrices."""
        if callable(self.values):
            raise DomainError("callable potentials have no finite table")
        return self.matrix(self.values)

    def sup_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.matrices(), 2, axis=(-2, -1))))


def _diag_stack(v):
    out = np.zeros(v.shape + (v.shape[-1],))
    idx = np.arange(v.shape[-1])
    out[..., idx, idx] = v
    return out


def transfer_matrix(E, V):
    """[[E I - V, -I], [I, 0]] for one matrix or a stack."""
    V = np.asarray(V)
    d = V.shape[-1]
    eye = np.broadcast_to(np.eye(d), V.shape)
    top = np.concatenate([E * eye - V, -eye], axis=-1)
    bot = np.concatenate([eye, np.zeros_like(eye)], axis=-1)
    return np.concatenate([top, bot], axis=-2)


def transfer_cocycle(v: StripPotential, E, base=None, tag=None, d: int = None) -> Cocycle:
    """Cocycle x -> A^(E - v)(x).

    Parameters
    ----------
    v : StripPotential
    E : float or complex
        Complex energies give a complexified cocycle (tag None).
    base : None, Periodic, FiniteShift or TorusRotation
        None means the periodic base of length ``len(v.values)``.  For a
        shift, ``v.values`` is indexed by symbol.
    tag : GroupTag, optional
        Must agree with the kind: real symmetric and diagonal potentials give
        SpR, Hermitian ones SHSp.
    """
    natural = v.tag
    if tag is not None and GroupTag(tag) is not natural:
        raise DomainError(f"a {v.kind.value} potential gives {natural.value} cocycles, not {GroupTag(tag).value}")
    E = complex(E) if np.iscomplexobj(E) else float(E)
    out_tag = natural if (isinstance(E, float) or E.imag == 0) else None
    if isinstance(E, complex) and E.imag == 0:
        E = E.real
    if base is None or isinstance(base, Periodic):
        mats = transfer_matrix(E, v.matrices())
        if base is not None and base.n != len(mats):
            raise DomainError("periodic base length differs from the potential table")
        return Cocycle.periodic(mats, out_tag, check=out_tag is not None)
    if isinstance(base, FiniteShift):
        mats = transfer_matrix(E, v.matrices())
        return Cocycle.shift(mats, base.weights, out_tag, base.span, base.words, check=out_tag is not None)
    if isinstance(base, TorusRotation):
        if not callable(v.values):
            raise DomainError("torus bases need a callable potential")
        width = d if d is not None else (len(v.S) if v.S is not None else None)
        if width is None:
            raise DomainError("pass the strip width d for callable potentials")
        fn = v.values
        return Cocycle(base, width, out_tag, lambda x: transfer_matrix(E, v.matrix(fn(x))), None)
    raise DomainError(f"unsupported base {type(base).__name__}")


def energy_family(v: StripPotential, base=None, d: int = None) -> EnergyFamily:
    """Deformation family z -> A^(z - v) (affine in z)."""
    return EnergyFamily(transfer_cocycle(v, 0.0, base, d=d))


@dataclass
class EnergyScan:
    """Exponents on an energy grid and the derived zero-set measures.

    ``M`` measures {E : top exponent <= threshold}; ``M_d`` measures
    {E : d-th exponent <= threshold}.  Both carry a half-cell uncertainty per
    boundary cell (``M_err``, ``M_d_err``).
    """

    E: np.ndarray
    top: np.ndarray
    Ld: np.ndarray
    Ld_th: np.ndarray
    zero: np.ndarray
    zero_d: np.ndarray
    M: float
    M_err: float
    M_d: float
    M_d_err: float
    threshold: float
    refined_E: np.ndarray = None

    def zero_intervals(self, which: str = "top"):
        """Maximal grid intervals of flagged points."""
        mask = self.zero if which == "top" else self.zero_d
        out, start = [], None
        for i, flag in enumerate(mask):
            if flag and start is None:
                start = i
            if not flag and start is not None:
                out.append((float(self.E[start]), float(self.E[i - 1])))
                start = None
        if start is not None:
            out.append((float(self.E[start]), float(self.E[-1])))
        return out


def _exponents(v, base, E, n, samples, rng, d):
    rep = lyapunov_spectrum(transfer_cocycle(v, E, base, d=d), n=n, samples=samples, rng=rng)
    dd = len(rep.exponents) // 2
    return rep.top, rep.Lk(dd), rep.exponents[dd - 1]


def _measure(E, zero, zero_mid):
    """Grid measure with one bisection: full cells, half cells, and boundary uncertainty."""
    total, err = 0.0, 0.0
    for k in range(len(E) - 1):
        w = E[k + 1] - E[k]
        a, b = zero[k], zero[k + 1]
        if a and b:
            total += w
        elif a != b:
            m = zero_mid[k]
            # the sub-cell whose ends agree is decided; the other is split evenly
            total += 0.5 * w * (1.0 if m else 0.0)
            total += 0.25 * w
            err += 0.25 * w
    return total, err


def energy_scan(v: StripPotential, base=None, E_range=(-3.0, 3.0), grid: int = 601, n: int = 10_000,
                samples: int = 8, L_threshold: float = 1e-3, rng=None, workers: int = 1, d: int = None) -> EnergyScan:
    """Top exponent, L^d and the d-th exponent on a real energy grid.

    Parameters
    ----------
    v : StripPotential
    base : base system (see :func:`transfer_cocycle`)
    E_range : (float, float)
    grid : int
        Number of grid points.
    n, samples : int
        QR length and sample count for non-periodic bases.
    L_threshold : float
        Exponents at or below this value count as zero.
    workers : int
        Thread count for the grid evaluation.

    Returns
    -------
    EnergyScan
    """
    lo, hi = map(float, E_range)
    if not hi > lo:
        raise DomainError("E_range must be increasing")
    E = np.linspace(lo, hi, grid)
    seeds = np.random.SeedSequence(None if rng is None else np.random.default_rng(rng).integers(2**63)).spawn(grid)

    def run(args):
        e, s = args
        return _exponents(v, base, e, n, samples, np.random.default_rng(s), d)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            res = list(pool.map(run, zip(E, seeds)))
    else:
        res = [run(a) for a in zip(E, seeds)]
    top, Ld, Lth = (np.array(c) for c in zip(*res))
    zero = top <= L_threshold
    zero_d = Lth <= L_threshold
    mixed = np.nonzero((zero[:-1] != zero[1:]) | (zero_d[:-1] != zero_d[1:]))[0]
    mids = 0.5 * (E[mixed] + E[mixed + 1])
    mid_seeds = np.random.SeedSequence(len(E)).spawn(len(mids))
    mid_res = [_exponents(v, base, e, n, samples, np.random.default_rng(s), d) for e, s in zip(mids, mid_seeds)]
    zmid = np.zeros(len(E) - 1, dtype=bool)
    zmid_d = np.zeros(len(E) - 1, dtype=bool)
    for k, (t, _, th) in zip(mixed, mid_res):
        zmid[k] = t <= L_threshold
        zmid_d[k] = th <= L_threshold
    M, M_err = _measure(E, zero, zmid)
    M_d, M_d_err = _measure(E, zero_d, zmid_d)
    return EnergyScan(E, top, Ld, Lth, zero, zero_d, M, M_err, M_d, M_d_err, L_threshold, mids)


@dataclass(frozen=True)
class MonotonicityReport:
    """``margin`` is the smallest eigenvalue of -Herm(J dB/dE B^{-1}); positive iff negative definite."""

    ok: bool
    margin: float
    closed_form_residual: float

    def __iter__(self):
        return iter((self.ok, self.margin))


def E_monotonicity_check(v: StripPotential, x: int = 0, E: float = 0.0, h: float = 1e-5) -> MonotonicityReport:
    """Cone test for the two-step family E -> A^(E - v)(f x) A^(E - v)(x).

    The central-difference derivative is compared with the closed form
    [[-I, E - v(f x)], [E - v(f x), -I - (E - v(f x))^2]].
    """
    mats = v.matrices()
    n = len(mats)
    V0, V1 = mats[x % n], mats[(x + 1) % n]

    def B(e):
        return transfer_matrix(e, V1) @ transfer_matrix(e, V0)

    dB = (B(E + h) - B(E - h)) / (2 * h)
    d = V0.shape[-1]
    J = symplectic_form(d)
    W = dB @ np.linalg.inv(B(E))
    JW = J @ W
    eye = np.eye(d)
    K = E * eye - V1
    closed = np.block([[-eye, K], [K.conj().T, -eye - K @ K]])
    herm = 0.5 * (JW + JW.conj().T)
    margin = float(np.min(np.linalg.eigvalsh(-herm)))
    try:
        margin_alg = cone_margin(W, tol=1e-6)
    except DomainError:
        margin_alg = margin
    margin = min(margin, margin_alg)
    return MonotonicityReport(margin > 0, margin, float(np.max(np.abs(JW - closed))))


def load_potential(path, kind=None, S=None) -> StripPotential:
    """Read a potential table from CSV or JSON.

    CSV rows: base index followed by the matrix entries in row-major order
    (or the d diagonal values for ``diagonal_from_S``); lines starting with
    ``#`` and a non-numeric header row are skipped.  Complex entries use
    Python syntax (``1+2j``).

    JSON: ``{"kind": ..., "values": [...], "S": [...]}``.
    """
    path = Path(path)
    if path.suffix.lower() == ".json":
        data = json.loads(path.read_text())
        kind = data.get("kind", kind or "real_symmetric")
        vals = np.asarray(data["values"], dtype=complex)
        if np.all(vals.imag == 0):
            vals = vals.real
        return StripPotential(kind, vals, data.get("S", S))
    kind = PotentialKind(kind or ("diagonal_from_S" if S is not None else "real_symmetric"))
    rows = []
    with path.open(newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                idx = int(row[0])
            except ValueError:
                continue
            rows.append((idx, [complex(c.strip().replace(" ", "")) for c in row[1:]]))
    rows.sort(key=lambda r: r[0])
    vals = np.asarray([r[1] for r in rows])
    if np.all(vals.imag == 0):
        vals = vals.real
    if kind is PotentialKind.DIAGONAL_FROM_S:
        return StripPotential(kind, vals, S)
    dd = int(round(np.sqrt(vals.shape[1])))
    if dd * dd != vals.shape[1]:
        raise DomainError("CSV rows must hold d*d matrix entries")
    return StripPotential(kind, vals.reshape(len(vals), dd, dd), S)
