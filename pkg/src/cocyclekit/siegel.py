"""Siegel disc and half-plane models, Möbius action and the tau multiplier.

Disc points are plain ``(d, d)`` complex arrays.  In the symplectic variant
they are symmetric; in the pseudo-unitary variant they are arbitrary.  The
validators :func:`check_disc_point` and :func:`check_shilov_point` enforce
the model invariants where a function needs them.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BoundaryAtInfinityError, DimensionError, DomainError, PhaseUnwrapError
from .groups import volume_exponent

__all__ = [
    "COND_CAP",
    "blocks",
    "mobius",
    "tau",
    "phi_c",
    "phi_c_inverse",
    "check_disc_point",
    "check_shilov_point",
    "volume_density",
    "boundary_stratum",
    "det_phase_residual",
    "PhaseLift",
    "shilov_phase_step",
    "lebesgue_jacobian",
    "random_disc_point",
    "random_shilov_point",
]

COND_CAP = 1e12


def blocks(M):
    """Split a (..., 2d, 2d) array into its four d×d blocks."""
    M = np.asarray(M)
    n = M.shape[-1]
    if n % 2 or M.shape[-2] != n:
        raise DimensionError(f"expected (2d, 2d) matrices, got {M.shape}")
    d = n // 2
    return M[..., :d, :d], M[..., :d, d:], M[..., d:, :d], M[..., d:, d:]


def _right_solve(X, T):
    """X T^-1 for stacks."""
    return np.swapaxes(np.linalg.solve(np.swapaxes(T, -1, -2), np.swapaxes(X, -1, -2)), -1, -2)


def tau(M, Z):
    """The multiplier tau_M(Z) = C Z + D (blocks of M)."""
    _, _, C, D = blocks(M)
    return C @ Z + D


def mobius(M, Z, cond_cap: float = COND_CAP):
    """Generalized Möbius action M·Z = (A Z + B)(C Z + D)^-1.

    Works on stacks of matrices and/or points.

    Raises
    ------
    BoundaryAtInfinityError
        If the condition number of C Z + D exceeds ``cond_cap``.
    """
    A, B, C, D = blocks(M)
    Z = np.asarray(Z)
    T = C @ Z + D
    cond = np.linalg.cond(T)
    if np.any(~np.isfinite(cond)) or np.any(cond > cond_cap):
        raise BoundaryAtInfinityError("C Z + D is singular: the image lies at the infinite boundary")
    return _right_solve(A @ Z + B, T)


def phi_c(Z):
    """Half-plane to disc: (Z - iI)(Z + iI)^-1."""
    Z = np.asarray(Z, dtype=complex)
    eye = np.eye(Z.shape[-1])
    return _right_solve(Z - 1j * eye, Z + 1j * eye)


def phi_c_inverse(W, cond_cap: float = COND_CAP):
    """Disc to half-plane: i (I + W)(I - W)^-1.

    Raises
    ------
    BoundaryAtInfinityError
        If 1 is (numerically) an eigenvalue of W.
    """
    W = np.asarray(W, dtype=complex)
    eye = np.eye(W.shape[-1])
    T = eye - W
    if np.any(np.linalg.cond(T) > cond_cap):
        raise BoundaryAtInfinityError("1 is in the spectrum of the disc point")
    return 1j * _right_solve(eye + W, T)


def check_disc_point(Z, symmetric: bool = True, closed: bool = False, tol: float = 1e-12):
    """Validate a disc point; returns it as a complex array.

    Raises
    ------
    DomainError
        If the norm condition or the symmetry condition fails.
    """
    Z = np.asarray(Z, dtype=complex)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise DimensionError(f"disc points are square matrices, got {Z.shape}")
    nrm = np.linalg.norm(Z, 2)
    if (closed and nrm > 1 + 1e-9) or (not closed and nrm >= 1):
        raise DomainError(f"operator norm {nrm:.17g} is outside the disc")
    if symmetric and np.linalg.norm(Z - Z.T) > tol * max(1.0, nrm) * 10:
        raise DomainError("disc point is not symmetric")
    return Z


def check_shilov_point(Z, symmetric: bool = True, tol: float = 1e-10):
    Z = np.asarray(Z, dtype=complex)
    d = Z.shape[0]
    if np.linalg.norm(Z.conj().T @ Z - np.eye(d)) > tol:
        raise DomainError("Shilov points are unitary")
    if symmetric and np.linalg.norm(Z - Z.T) > tol:
        raise DomainError("Shilov point is not symmetric")
    return Z


def volume_density(Z, tag):
    """Invariant volume density V(Z) = prod (1 - s_i(Z)^2)^(-p), V(0) = 1.

    p = d + 1 (symplectic variants) or 2d (Hermitian / pseudo-unitary).
    """
    Z = np.asarray(Z)
    d = Z.shape[-1]
    s = np.linalg.svd(Z, compute_uv=False)
    if np.any(s >= 1):
        raise DomainError("volume density is only defined inside the disc")
    p = volume_exponent(tag, d)
    return np.prod(1.0 - s**2, axis=-1) ** (-p)


def boundary_stratum(Z, symmetric: bool = True, tol: float = 1e-9, rank_tol: float = 1e-7) -> int:
    """Stratum index k of a boundary point: rank(I - Z Z̄) = d - k.

    In the general (pseudo-unitary) variant Z Z̄ is replaced by Z* Z.
    Singular values above ``rank_tol`` (relative to ||I|| = 1) count as nonzero.
    """
    Z = np.asarray(Z, dtype=complex)
    d = Z.shape[0]
    nrm = np.linalg.norm(Z, 2)
    if abs(nrm - 1.0) > tol:
        raise DomainError(f"not a boundary point (norm {nrm:.17g})")
    G = np.eye(d) - (Z @ Z.conj() if symmetric else Z.conj().T @ Z)
    s = np.linalg.svd(G, compute_uv=False)
    rank = int(np.sum(s > rank_tol))
    return d - rank


def det_phase_residual(M, Z) -> float:
    """Residual of det(M·Z) = e^{-2i arg det tau} det Z on the Shilov boundary.

    e^{-2i arg w} = conj(w)/w, so the identity is checked without any branch.
    Stacks of (M, Z) are accepted; the largest residual is returned.
    """
    w = np.linalg.det(tau(M, Z))
    lhs = np.linalg.det(mobius(M, Z))
    rhs = np.conj(w) / w * np.linalg.det(Z)
    return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class PhaseLift:
    """Continuous lift of arg det along a tracked path of Shilov points.

    ``history`` holds ``(parameter, value)`` pairs in the order recorded.
    """

    value: float
    history: tuple = field(default_factory=tuple)

    @classmethod
    def start(cls, Z, param: float = 0.0) -> "PhaseLift":
        v = float(np.angle(np.linalg.det(Z)))
        return cls(v, ((float(param), v),))

    def advanced(self, increment: float, param: float) -> "PhaseLift":
        v = self.value + float(increment)
        return PhaseLift(v, self.history + ((float(param), v),))


def _arg_increment(Z0, Z1):
    return float(np.angle(np.linalg.det(Z1) / np.linalg.det(Z0)))


def shilov_phase_step(M, Z, lift: PhaseLift, param=None, max_depth: int = 40, step_bound: float = np.pi / 2):
    """Advance a det-phase lift by the image of Z under M.

    Parameters
    ----------
    M : array or callable
        Either a Cayley-side matrix, or a callable ``s -> matrix`` on [0, 1]
        with ``M(0) = I``.  A callable is a parameter-continuous family, and
        the step is subdivided in ``s`` until every principal increment of
        arg det is below ``step_bound``.  A plain matrix cannot be subdivided.
    Z : array
        Current Shilov point; ``exp(i lift.value)`` should equal ``det Z``.
    lift : PhaseLift
    param : float, optional
        Parameter value recorded in the history (defaults to len(history)).

    Returns
    -------
    PhaseLift
        Lift extended by the unwrapped increment arg det(M·Z) - arg det(Z).

    Raises
    ------
    PhaseUnwrapError
        If the increment cannot be brought below ``step_bound``.
    """
    if param is None:
        param = float(len(lift.history))
    if not callable(M):
        inc = _arg_increment(Z, mobius(M, Z))
        if abs(inc) >= step_bound:
            raise PhaseUnwrapError(
                f"phase increment {inc:.3g} is not below {step_bound:.3g}; pass a continuous family to subdivide"
            )
        return lift.advanced(inc, param)

    total = 0.0
    stack = [(0.0, 1.0, Z, mobius(M(1.0), Z), 0)]
    # depth-first over [0, 1], left segments first, so increments are summed in order
    while stack:
        a, b, Za, Zb, depth = stack.pop()
        inc = _arg_increment(Za, Zb)
        if abs(inc) < step_bound:
            total += inc
            continue
        if depth >= max_depth:
            raise PhaseUnwrapError(f"could not subdivide phase step below {step_bound:.3g}")
        m = 0.5 * (a + b)
        Zm = mobius(M(m), Z)
        stack.append((m, b, Zm, Zb, depth + 1))
        stack.append((a, m, Za, Zm, depth + 1))
    return lift.advanced(total, param)


def _sym_basis(d: int, symmetric: bool):
    """Lebesgue coordinate basis: E_ii, E_ij = e_ij + e_ji (symmetric) or all e_ij."""
    basis = []
    for i in range(d):
        for j in range(d):
            if symmetric and j < i:
                continue
            E = np.zeros((d, d))
            E[i, j] = 1.0
            if symmetric and i != j:
                E[j, i] = 1.0
            basis.append(E)
    return basis


def lebesgue_jacobian(M, Z, symmetric: bool = True, h: float = 1e-6) -> float:
    """Finite-difference real Jacobian determinant of Z -> M·Z.

    Uses central differences in the real and imaginary parts of every
    Lebesgue coordinate (d(d+1)/2 complex coordinates in the symmetric model,
    d^2 in the general one), so holomorphy is not assumed.
    """
    Z = np.asarray(Z, dtype=complex)
    d = Z.shape[0]
    basis = _sym_basis(d, symmetric)

    def coords(W):
        out = []
        for E in basis:
            i, j = np.argwhere(E)[0]
            out.append(W[i, j])
        out = np.asarray(out)
        return np.r_[out.real, out.imag]

    cols = []
    for unit in (1.0, 1j):
        for E in basis:
            dZ = h * unit * E
            cols.append((coords(mobius(M, Z + dZ)) - coords(mobius(M, Z - dZ))) / (2 * h))
    # column order: all real directions then all imaginary directions; rows likewise
    jac = np.array(cols).T
    return float(abs(np.linalg.det(jac)))


def random_disc_point(d: int, rng, symmetric: bool = True, radius=None):
    """Random interior point; ``radius`` fixes the operator norm (default uniform in (0, 0.95))."""
    X = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    if symmetric:
        X = X + X.T
    r = rng.uniform(0.0, 0.95) if radius is None else radius
    return r * X / np.linalg.norm(X, 2)


def random_shilov_point(d: int, rng, symmetric: bool = True):
    """Random unitary (symmetric unitary U Uᵀ in the symplectic model)."""
    X = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    Q, R = np.linalg.qr(X)
    Q = Q * (np.diag(R) / np.abs(np.diag(R)))
    return Q @ Q.T if symmetric else Q
