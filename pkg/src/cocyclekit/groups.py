"""Matrix groups, their Lie algebras and the standard block forms.

All functions accept a single ``(2d, 2d)`` matrix; the residual helpers also
accept stacks of shape ``(..., 2d, 2d)`` so that large random batches can be
checked without a Python loop.

The groups are

========== ==========================================
tag        defining relations
========== ==========================================
SpR        M real, Mᵀ J M = J
SpC        Mᵀ J M = J
UddCapSpC  Mᵀ J M = J and M* S M = S
HSp        M* J M = J
SHSp       M* J M = J and det M = 1
Udd        M* S M = S
SUdd       M* S M = S and det M = 1
========== ==========================================

with ``J = [[0, I], [-I, 0]]`` and ``S = diag(I, -I)``.
"""
from __future__ import annotations

import enum

import numpy as np
from scipy.linalg import expm

from .errors import DimensionError, DomainError

__all__ = [
    "GroupTag",
    "TOL_GROUP",
    "symplectic_form",
    "signature_form",
    "cayley_element",
    "rotation",
    "cayley_rotation_factor",
    "membership_residual",
    "is_in_group",
    "algebra_residual",
    "is_in_algebra",
    "cayley_conjugate",
    "cayley_unconjugate",
    "cayley_tag",
    "rotation_deform",
    "cayley_deform",
    "group_inverse",
    "cone_margin",
    "cone_membership",
    "volume_exponent",
    "is_symplectic_variant",
    "random_algebra_element",
    "random_group_element",
]

TOL_GROUP = 1e-10


class GroupTag(str, enum.Enum):
    SpR = "SpR"
    SpC = "SpC"
    UddCapSpC = "UddCapSpC"
    HSp = "HSp"
    SHSp = "SHSp"
    Udd = "Udd"
    SUdd = "SUdd"


_SYMPLECTIC = {GroupTag.SpR, GroupTag.SpC, GroupTag.UddCapSpC}
_CAYLEY_IMAGE = {
    GroupTag.SpR: GroupTag.UddCapSpC,
    GroupTag.HSp: GroupTag.Udd,
    GroupTag.SHSp: GroupTag.SUdd,
}


def is_symplectic_variant(tag) -> bool:
    """True for the tags whose disc model consists of symmetric matrices."""
    return GroupTag(tag) in _SYMPLECTIC


def volume_exponent(tag, d: int) -> int:
    """Exponent p of the invariant volume density  prod (1 - s_i^2)^(-p).

    p = d + 1 for the symplectic variants (symmetric disc) and p = 2d for the
    Hermitian-symplectic and pseudo-unitary variants (general disc).  The
    Jacobian of a disc map carries |det tau|^(-2p) and the Lyapunov/q
    identity is normalised by 1/(2p).
    """
    return d + 1 if is_symplectic_variant(tag) else 2 * d


def _half_dim(M) -> int:
    M = np.asarray(M)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise DimensionError(f"expected square matrices, got shape {M.shape}")
    n = M.shape[-1]
    if n % 2:
        raise DimensionError(f"matrix size {n} is odd")
    return n // 2


def symplectic_form(d: int) -> np.ndarray:
    """J = [[0, I], [-I, 0]]."""
    eye = np.eye(d)
    zero = np.zeros((d, d))
    return np.block([[zero, eye], [-eye, zero]])


def signature_form(d: int) -> np.ndarray:
    """S = diag(I, -I), the form preserved by U(d,d)."""
    return np.diag(np.r_[np.ones(d), -np.ones(d)])


def cayley_element(d: int) -> np.ndarray:
    """C = (1/sqrt 2) [[I, -iI], [I, iI]].  C is unitary, so C^-1 = C*."""
    eye = np.eye(d)
    return np.block([[eye, -1j * eye], [eye, 1j * eye]]) / np.sqrt(2.0)


def rotation(z, d: int) -> np.ndarray:
    """Block rotation R(z) = [[cos z I, sin z I], [-sin z I, cos z I]] = exp(zJ)."""
    c, s = np.cos(z), np.sin(z)
    eye = np.eye(d)
    return np.block([[c * eye, s * eye], [-s * eye, c * eye]])


def cayley_rotation_factor(z, d: int) -> np.ndarray:
    """C R(z) C^-1 = diag(e^{iz} I, e^{-iz} I)."""
    w = np.exp(1j * complex(z))
    return np.diag(np.r_[np.full(d, w), np.full(d, 1.0 / w)])


def _opnorm(M):
    return np.linalg.norm(M, ord=2, axis=(-2, -1))


def _herm(M):
    return np.conj(np.swapaxes(M, -1, -2))


def _tr(M):
    return np.swapaxes(M, -1, -2)


def membership_residual(M, tag):
    """Scaled defining-relation residual, ||rel(M)|| / (1 + ||M||^2).

    Works on stacks; returns a float or an array of floats.
    """
    tag = GroupTag(tag)
    M = np.asarray(M)
    d = _half_dim(M)
    J = symplectic_form(d)
    S = signature_form(d)
    scale = 1.0 + _opnorm(M) ** 2
    parts = []
    if tag in (GroupTag.SpR, GroupTag.SpC, GroupTag.UddCapSpC):
        parts.append(_opnorm(_tr(M) @ J @ M - J) / scale)
    if tag is GroupTag.SpR:
        parts.append(_opnorm(np.imag(M)) / np.sqrt(scale))
    if tag in (GroupTag.HSp, GroupTag.SHSp):
        parts.append(_opnorm(_herm(M) @ J @ M - J) / scale)
    if tag in (GroupTag.UddCapSpC, GroupTag.Udd, GroupTag.SUdd):
        parts.append(_opnorm(_herm(M) @ S @ M - S) / scale)
    if tag in (GroupTag.SHSp, GroupTag.SUdd):
        parts.append(np.abs(np.linalg.det(M) - 1.0) / scale)
    return np.max(np.stack(parts), axis=0)


def is_in_group(M, tag, tol: float = TOL_GROUP):
    """Return ``(member, residual)`` for a single matrix."""
    res = float(membership_residual(M, tag))
    return res <= tol, res


def algebra_residual(W, tag):
    """Residual of the linearised defining relations, scaled by 1 + ||W||."""
    tag = GroupTag(tag)
    W = np.asarray(W)
    d = _half_dim(W)
    J = symplectic_form(d)
    S = signature_form(d)
    scale = 1.0 + _opnorm(W)
    parts = []
    if tag in (GroupTag.SpR, GroupTag.SpC, GroupTag.UddCapSpC):
        parts.append(_opnorm(_tr(W) @ J + J @ W) / scale)
    if tag is GroupTag.SpR:
        parts.append(_opnorm(np.imag(W)) / scale)
    if tag in (GroupTag.HSp, GroupTag.SHSp):
        parts.append(_opnorm(_herm(W) @ J + J @ W) / scale)
    if tag in (GroupTag.UddCapSpC, GroupTag.Udd, GroupTag.SUdd):
        parts.append(_opnorm(_herm(W) @ S + S @ W) / scale)
    if tag in (GroupTag.SHSp, GroupTag.SUdd):
        parts.append(np.abs(np.trace(W, axis1=-2, axis2=-1)) / scale)
    return np.max(np.stack(parts), axis=0)


def is_in_algebra(W, tag, tol: float = TOL_GROUP):
    res = float(algebra_residual(W, tag))
    return res <= tol, res


def cayley_tag(tag) -> GroupTag:
    """Tag of the Cayley image of a group (SpR -> UddCapSpC, ...)."""
    tag = GroupTag(tag)
    if tag not in _CAYLEY_IMAGE:
        raise DomainError(f"no Cayley image defined for {tag.value}")
    return _CAYLEY_IMAGE[tag]


def cayley_conjugate(A, tag=GroupTag.SpR, tol: float = TOL_GROUP, check: bool = True):
    """Return C A C^-1 for A in Sp(2d,R), HSp(2d) or SHSp(2d).

    Raises
    ------
    DomainError
        If ``check`` is set and A fails the membership test for ``tag``.
    """
    A = np.asarray(A)
    d = _half_dim(A)
    cayley_tag(tag)
    if check:
        ok, res = is_in_group(A, tag, tol)
        if not ok:
            raise DomainError(f"matrix is not in {GroupTag(tag).value} (residual {res:.3g})")
    C = cayley_element(d)
    return C @ A @ C.conj().T


def cayley_unconjugate(Ac):
    """Inverse of :func:`cayley_conjugate`: C^-1 Å C."""
    Ac = np.asarray(Ac)
    C = cayley_element(_half_dim(Ac))
    return C.conj().T @ Ac @ C


def rotation_deform(A, z):
    """A_z = R(z) A.  Defined for any complex z; the theory uses Im z >= 0."""
    A = np.asarray(A)
    return rotation(z, _half_dim(A)) @ A


def cayley_deform(Ac, z):
    """Cayley side of the deformation: diag(e^{iz} I, e^{-iz} I) Å."""
    Ac = np.asarray(Ac)
    w = np.exp(1j * complex(z))
    d = _half_dim(Ac)
    out = np.array(Ac, dtype=complex)
    out[..., :d, :] *= w
    out[..., d:, :] /= w
    return out


def group_inverse(M, tag=None):
    """Inverse exploiting the group structure when the tag allows it.

    SpR/SpC/UddCapSpC: M^-1 = J^-1 Mᵀ J.  HSp/SHSp: J^-1 M* J.
    Udd/SUdd: S M* S.  Otherwise a direct inverse.
    """
    M = np.asarray(M)
    if tag is None:
        return np.linalg.inv(M)
    tag = GroupTag(tag)
    d = _half_dim(M)
    if tag in _SYMPLECTIC:
        J = symplectic_form(d)
        return -J @ _tr(M) @ J
    if tag in (GroupTag.HSp, GroupTag.SHSp):
        J = symplectic_form(d)
        return -J @ _herm(M) @ J
    S = signature_form(d)
    return S @ _herm(M) @ S


def cone_margin(W, tol: float = TOL_GROUP) -> float:
    """Smallest eigenvalue of -Herm(J W); positive iff W is in the monotone cone.

    Raises
    ------
    DomainError
        If W is not in the Hermitian-symplectic algebra (which contains sp(2d,R)).
    """
    W = np.asarray(W)
    d = _half_dim(W)
    ok, res = is_in_algebra(W, GroupTag.HSp, max(tol, 1e-8))
    if not ok:
        raise DomainError(f"W is not a Hermitian-symplectic algebra element (residual {res:.3g})")
    JW = symplectic_form(d) @ W
    H = 0.5 * (JW + JW.conj().T)
    return float(-np.linalg.eigvalsh(H).max())


def cone_membership(W, tol: float = TOL_GROUP) -> bool:
    """True iff the Hermitian part of J W is negative definite (eigenvalues <= -tol)."""
    return cone_margin(W, tol) >= tol


def random_algebra_element(d: int, tag, rng, scale: float = 1.0, size=None):
    """Gaussian random algebra element(s) of the group ``tag``.

    Parameters
    ----------
    d : int
        Half dimension.
    tag : GroupTag
    rng : numpy.random.Generator
    scale : float
        Standard deviation of the underlying Gaussian coordinates.
    size : int, optional
        If given, return a stack of that many elements.
    """
    tag = GroupTag(tag)
    shape = (() if size is None else (size,)) + (2 * d, 2 * d)
    J = symplectic_form(d)
    S = signature_form(d)

    def gauss(cplx):
        X = rng.standard_normal(shape)
        if cplx:
            X = X + 1j * rng.standard_normal(shape)
        return scale * X / np.sqrt(2 * d)

    if tag is GroupTag.SpR:
        X = gauss(False)
        return J @ (X + _tr(X)) / 2
    if tag is GroupTag.SpC:
        X = gauss(True)
        return J @ (X + _tr(X)) / 2
    if tag is GroupTag.UddCapSpC:
        X = gauss(False)
        C = cayley_element(d)
        return C @ (J @ (X + _tr(X)) / 2) @ C.conj().T
    if tag in (GroupTag.HSp, GroupTag.SHSp):
        X = gauss(True)
        W = J @ (X + _herm(X)) / 2
    else:
        X = gauss(True)
        W = S @ (X - _herm(X)) / 2
    if tag in (GroupTag.SHSp, GroupTag.SUdd):
        tr = np.trace(W, axis1=-2, axis2=-1)
        W = W - (tr / (2 * d))[..., None, None] * np.eye(2 * d)
    return W


def random_group_element(d: int, tag, rng, scale: float = 1.0, size=None, factors: int = 2):
    """Random group element(s) built as a product of exponentials of algebra samples."""
    out = None
    for _ in range(factors):
        g = expm(random_algebra_element(d, tag, rng, scale, size))
        out = g if out is None else out @ g
    if GroupTag(tag) is GroupTag.SpR:
        out = np.real(out)
    return out
