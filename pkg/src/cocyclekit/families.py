"""One-parameter holomorphic deformations of a cocycle and their m-fields.

Two families are provided:

* :class:`RotationFamily` -- A_z(x) = R(z) A(x), Cayley side
  diag(e^{iz} I, e^{-iz} I) Å(x).
* :class:`EnergyFamily` -- A_z(x) = A_0(x) + z diag(I, 0), the form taken by
  strip transfer matrices [[zI - v, -I], [I, 0]] as functions of the energy.

Both expose "site data" (the Cayley-side generators at z = 0 along an orbit)
and a vectorised map from (z, site data) to Å_z, which is all the
continuation and fixed-point code needs.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import schur

from .cocycle import Cocycle
from .errors import ConditioningError, DomainError
from .groups import GroupTag, cayley_element, cayley_tag
from .siegel import mobius

__all__ = [
    "DeformedFamily",
    "RotationFamily",
    "EnergyFamily",
    "dominant_graph",
    "periodic_products",
    "periodic_m_field",
]


class DeformedFamily:
    """Base class.  Subclasses define :meth:`cayley` and :meth:`group`."""

    #: True when d/dt Å_{σ+it} = diag(-I, I) Å_{σ+it} (rotation-type families)
    rotation_type = False

    def __init__(self, cocycle: Cocycle):
        self.cocycle = cocycle
        self.d = cocycle.d
        self.tag = GroupTag.SpR if cocycle.tag is None else GroupTag(cocycle.tag)
        self._C = cayley_element(self.d)

    @property
    def base(self):
        return self.cocycle.base

    @property
    def is_periodic(self):
        return self.cocycle.is_periodic

    @property
    def period(self):
        return self.cocycle.base.n

    @property
    def symmetric(self) -> bool:
        """Symmetric disc model (symplectic tags) or general disc model."""
        from .groups import is_symplectic_variant

        return is_symplectic_variant(self.tag)

    def _to_cayley(self, mats):
        return self._C @ mats @ self._C.conj().T

    def sites(self, x, n: int):
        """Cayley-side z = 0 generators Å_0(f^k x), k = 0..n-1."""
        return self._to_cayley(np.asarray(self.cocycle.along(x, n), dtype=complex))

    def backward_sites(self, x, n: int):
        """Å_0(f^{-k} x), k = 1..n."""
        return self._to_cayley(np.asarray(self.cocycle.backward(x, n), dtype=complex))

    def cayley(self, z, sites):
        raise NotImplementedError

    def group(self, z, mats):
        raise NotImplementedError

    def at(self, z) -> Cocycle:
        """The group-side cocycle x -> A_z(x) (complex unless z is real)."""
        return self.cocycle.map_matrices(lambda M: self.group(z, M), tag=None)


class RotationFamily(DeformedFamily):
    """A_z = R(z) A with Cayley side diag(e^{iz} I, e^{-iz} I) Å."""

    rotation_type = True

    def __init__(self, cocycle: Cocycle):
        super().__init__(cocycle)
        cayley_tag(self.tag)  # only SpR / HSp / SHSp cocycles have a disc action

    def cayley(self, z, sites):
        z = np.asarray(z, dtype=complex)
        w = np.exp(1j * z)[..., None, None]
        d = self.d
        sites = np.asarray(sites)
        top = w * sites[..., :d, :]
        bot = sites[..., d:, :] / w
        return np.concatenate(np.broadcast_arrays(top, bot), axis=-2)

    def group(self, z, mats):
        from .groups import rotation

        return rotation(z, self.d) @ mats


class EnergyFamily(DeformedFamily):
    """A_z = A_0 + z diag(I, 0); for strip operators A_0 = A^(-v)."""

    def __init__(self, cocycle: Cocycle):
        super().__init__(cocycle)
        E11 = np.zeros((2 * self.d, 2 * self.d))
        E11[: self.d, : self.d] = np.eye(self.d)
        self._E11 = E11
        self._K = self._C @ E11 @ self._C.conj().T

    def cayley(self, z, sites):
        z = np.asarray(z, dtype=complex)[..., None, None]
        return np.asarray(sites) + z * self._K

    def group(self, z, mats):
        return mats + z * self._E11


def periodic_products(G):
    """Period maps at every site of a periodic stack.

    G has shape (..., p, 2d, 2d) with G[..., k] = Å(f^k x0).  Returns P with
    P[..., k] = Å(f^{k+p-1} x0) ... Å(f^k x0).
    """
    p = G.shape[-3]
    out = np.empty_like(G)
    for k in range(p):
        P = G[..., k, :, :]
        for j in range(1, p):
            P = G[..., (k + j) % p, :, :] @ P
        out[..., k, :, :] = P
    return out


def dominant_graph(P, d: int, largest: bool = True):
    """m with span[m; I] the invariant subspace of the d largest (or smallest) eigenvalues.

    This is the attracting fixed point of Z -> P·Z (largest) or of Z -> P^{-1}·Z
    (smallest) whenever that fixed point lies in the open disc.  A single
    matrix goes through an ordered Schur decomposition.

    Raises
    ------
    ConditioningError
        If the moduli of the d-th and (d+1)-th eigenvalues cannot be separated,
        or the subspace is not a graph over the second block.
    """
    lam = np.sort(np.abs(np.linalg.eigvals(P)))
    lo, hi = (lam[d - 1], lam[d])
    if hi <= lo * (1 + 1e-13):
        raise ConditioningError("eigenvalue moduli do not split into two groups of d")
    thr = np.sqrt(hi * lo)
    keep = (lambda v: abs(v) > thr) if largest else (lambda v: abs(v) < thr)
    _, U, sdim = schur(P, output="complex", sort=keep)
    if sdim != d:
        raise ConditioningError("Schur reordering did not isolate d eigenvalues")
    X, Y = U[:d, :d], U[d:, :d]
    if np.linalg.cond(Y) > 1e12:
        raise ConditioningError("invariant subspace is not a graph over the second block")
    return np.linalg.solve(Y.T, X.T).T


def _graphs(P, d: int, largest: bool):
    """Batched :func:`dominant_graph` via eig, falling back to Schur on poorly split cases."""
    lam, V = np.linalg.eig(P)
    mod = np.abs(lam)
    order = np.argsort(-mod if largest else mod, axis=-1)
    srt = np.take_along_axis(mod, order, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        gap = srt[..., d - 1] / srt[..., d] if largest else srt[..., d] / srt[..., d - 1]
    Vs = np.take_along_axis(V, order[..., None, :d], axis=-1)
    X, Y = Vs[..., :d, :], Vs[..., d:, :]
    condY = np.linalg.cond(Y)
    bad = ~(gap > 1 + 1e-11) | ~(condY < 1e8)
    m = np.empty(P.shape[:-2] + (d, d), dtype=complex)
    good = ~bad
    if np.any(good):
        Yg, Xg = Y[good], X[good]
        m[good] = np.swapaxes(np.linalg.solve(np.swapaxes(Yg, -1, -2), np.swapaxes(Xg, -1, -2)), -1, -2)
    for idx in np.ndindex(bad.shape):
        if bad[idx]:
            m[idx] = dominant_graph(P[idx], d, largest)
    return m


def periodic_m_field(family: DeformedFamily, z, side: str = "plus", polish: int = 2):
    """Exact m-field of a periodic family at all p sites, batched over z.

    Parameters
    ----------
    family : DeformedFamily
        Must have a periodic base.
    z : complex or array of complex
        Im z > 0 for ``side="plus"``, Im z < 0 for ``side="minus"``.
    side : {"plus", "minus"}
    polish : int
        Number of period-map iterations applied to the eigenvector solution;
        the size of the last one is reported as ``cauchy``.

    Returns
    -------
    m : ndarray, shape z.shape + (p, d, d)
        m[..., k, :, :] = m(z, k).
    G : ndarray, shape z.shape + (p, 2d, 2d)
        Cayley-side generators Å_z(k).
    cauchy : ndarray, shape z.shape
        Last successive-iterate difference of the polishing step.
    """
    if not family.is_periodic:
        raise DomainError("exact m-fields need a periodic base")
    z = np.asarray(z, dtype=complex)
    if side == "plus" and np.any(z.imag <= 0) or side == "minus" and np.any(z.imag >= 0):
        raise DomainError("m+ needs Im z > 0 and m- needs Im z < 0")
    p, d = family.period, family.d
    G = family.cayley(z[..., None], family.sites(0, p))
    P = G[..., 0, :, :]
    for k in range(1, p):
        P = G[..., k, :, :] @ P
    cauchy = np.zeros(z.shape)
    if side == "plus":
        m0 = _graphs(P, d, largest=True)
        for _ in range(polish):
            m1 = mobius(P, m0)
            cauchy = np.linalg.norm(m1 - m0, 2, axis=(-2, -1))
            m0 = m1
        ms = [m0]
        for k in range(p - 1):
            ms.append(mobius(G[..., k, :, :], ms[-1]))
    else:
        Pinv = np.linalg.inv(P)
        m0 = _graphs(P, d, largest=False)
        for _ in range(polish):
            m1 = mobius(Pinv, m0)
            cauchy = np.linalg.norm(m1 - m0, 2, axis=(-2, -1))
            m0 = m1
        Ginv = np.linalg.inv(G)
        ms = [None] * p
        ms[0] = cur = m0
        # m(k) = Å(k)^{-1} m(k+1) is the contracting direction for m-
        for k in range(p - 1, 0, -1):
            cur = mobius(Ginv[..., k, :, :], cur)
            ms[k] = cur
    m = np.stack(ms, axis=-3)
    if family.symmetric:
        m = 0.5 * (m + np.swapaxes(m, -1, -2))
    return m, G, cauchy
