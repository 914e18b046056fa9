"""m-functions of a deformed family and the identities built on them.

m+(z, x), Im z > 0, is the attracting invariant section of Z -> Å_z(x)·Z
(the limit of Å_z(f^{-1}x)···Å_z(f^{-k}x)·0); m-(z, x), Im z < 0, is the
invariant section of the same equation that attracts for the inverse maps
(the limit of Å_z(x)^{-1}···Å_z(f^k x)^{-1}·0).

On periodic bases every integral over the base is an exact average over the
period; elsewhere averages are taken over sampled base points.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import subspace_angles

from .cocycle import FiniteShift, Periodic, lyapunov_spectrum
from .errors import AmbiguityError, ConditioningError, ConvergenceError, DomainError, PreconditionError
from .families import DeformedFamily, RotationFamily, periodic_m_field
from .groups import GroupTag, cayley_conjugate, volume_exponent
from .siegel import blocks, mobius, volume_density

__all__ = [
    "MField",
    "m_plus",
    "m_minus",
    "conjugate_relation_check",
    "q_function",
    "q_inverse_closed_form",
    "ld_identities_check",
    "lt_lower_bound",
    "elementary_log_gap",
    "theorem5_diagnostics",
    "boundary_gap_diagnostics",
    "MGapRow",
    "key_equation_check",
    "trace_gap",
    "reconstruct_generators",
    "TOL_M",
]

TOL_M = 1e-9


@dataclass(frozen=True)
class MField:
    """Values of m+ or m- at sampled base points and at their images.

    ``values[s] = m(z, x_s)`` and ``next_values[s] = m(z, f(x_s))``.
    ``generators[s]`` is Å_z(x_s) (Cayley side).
    """

    z: complex
    side: str
    points: tuple
    values: np.ndarray
    next_values: np.ndarray
    generators: np.ndarray
    iterations: int
    residual: float

    def invariance_residual(self) -> float:
        """max_s of the invariance defect, measured in the contracting direction.

        m+: ||m(f x) - Å·m(x)||;  m-: ||m(x) - Å^{-1}·m(f x)||.
        """
        if self.side == "plus":
            diff = self.next_values - mobius(self.generators, self.values)
        else:
            diff = self.values - mobius(np.linalg.inv(self.generators), self.next_values)
        return float(np.max(np.linalg.norm(diff, 2, axis=(-2, -1))))

    def max_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.values, 2, axis=(-2, -1))))


def _limit_along(mats, n_iter, tol, start: int = 16):
    """Limit of M_1 M_2 ··· M_K · 0 as K grows, applying the maps innermost first.

    K doubles from ``start``; iteration stops when the difference of
    consecutive iterates, inflated by the a-posteriori factor 1/(1 - q) with q
    the observed contraction per doubling, is below ``tol``.
    """
    d = mats(0).shape[-1] // 2

    def apply(K):
        W = np.zeros((d, d), dtype=complex)
        for k in range(K - 1, -1, -1):
            W = mobius(mats(k), W)
        return W

    K = start
    prev = apply(K)
    prev_diff = None
    while 2 * K <= n_iter:
        K *= 2
        cur = apply(K)
        diff = float(np.linalg.norm(cur - prev, 2))
        if diff == 0.0:
            return cur, K, 0.0
        if prev_diff is not None:
            q = diff / prev_diff
            if q < 1 - 1e-12 and diff / (1 - q) < tol:
                return cur, K, diff
        if diff < 1e-15:
            return cur, K, diff
        prev, prev_diff = cur, diff
    raise ConvergenceError(f"m-function iteration did not converge within {n_iter} steps", residual=prev_diff)


def _sample_points(family, points, samples, rng, span):
    if points is not None:
        return tuple(points)
    base = family.cocycle.base
    if isinstance(base, Periodic):
        return tuple(range(base.n))
    return tuple(family.cocycle.sample_points(samples, rng, min_span=span))


def _m_iterated(family, z, x, side, n_iter, tol, chunk=256):
    """m(z, x) by iterating products along the (backward or forward) orbit."""
    base = family.cocycle.base
    cache = {}

    def mats(k):
        j = k // chunk
        if j not in cache:
            if side == "plus":
                start = base.step(x, -chunk * j)
                cache[j] = family.cayley(z, family.backward_sites(start, chunk))
            else:
                start = base.step(x, chunk * j)
                cache[j] = np.linalg.inv(family.cayley(z, family.sites(start, chunk)))
        return cache[j][k % chunk]

    return _limit_along(mats, n_iter, tol)


def _m_field(family: DeformedFamily, z, side, points, samples, rng, n_iter, tol, method):
    z = complex(z)
    if side == "plus" and z.imag <= 0:
        raise DomainError("m+ needs Im z > 0")
    if side == "minus" and z.imag >= 0:
        raise DomainError("m- needs Im z < 0")
    base = family.cocycle.base
    if method == "auto":
        method = "exact" if isinstance(base, Periodic) and points is None else "iterate"
    if method == "exact":
        m, G, cauchy = periodic_m_field(family, z, side)
        p = family.period
        nxt = np.roll(m, -1, axis=0)
        return MField(z, side, tuple(range(p)), m, nxt, G, 0, float(cauchy))
    pts = _sample_points(family, points, samples, rng, span=n_iter if isinstance(base, FiniteShift) else 0)
    vals, nxt, gens = [], [], []
    its, res = 0, 0.0
    for x in pts:
        v, k1, r1 = _m_iterated(family, z, x, side, n_iter, tol)
        w, k2, r2 = _m_iterated(family, z, base.step(x), side, n_iter, tol)
        vals.append(v)
        nxt.append(w)
        gens.append(family.cayley(z, family.sites(x, 1)[0]))
        its, res = max(its, k1, k2), max(res, r1, r2)
    vals, nxt = np.asarray(vals), np.asarray(nxt)
    if family.symmetric:
        vals = 0.5 * (vals + np.swapaxes(vals, -1, -2))
        nxt = 0.5 * (nxt + np.swapaxes(nxt, -1, -2))
    return MField(z, side, pts, vals, nxt, np.asarray(gens), its, res)


def m_plus(family: DeformedFamily, z, points=None, samples: int = 8, rng=None, n_iter: int = 100_000,
           tol: float = 1e-12, method: str = "auto") -> MField:
    """m+(z, ·) for Im z > 0.

    Parameters
    ----------
    family : DeformedFamily
    z : complex
    points : sequence, optional
        Base points; defaults to every site (periodic) or ``samples`` sampled points.
    n_iter, tol : int, float
        Iteration cap and Cauchy tolerance (operator norm) for the iterated route.
    method : {"auto", "exact", "iterate"}
        ``exact`` uses the invariant subspace of the period map.

    Raises
    ------
    ConvergenceError
        If the iteration does not settle within ``n_iter`` steps.
    """
    return _m_field(family, z, "plus", points, samples, rng, n_iter, tol, method)


def m_minus(family: DeformedFamily, z, points=None, samples: int = 8, rng=None, n_iter: int = 100_000,
            tol: float = 1e-12, method: str = "auto") -> MField:
    """m-(z, ·) for Im z < 0 (pass z = sigma - i t).  Same options as :func:`m_plus`."""
    return _m_field(family, z, "minus", points, samples, rng, n_iter, tol, method)


def conjugate_relation_check(family: DeformedFamily, z_minus, field: MField = None) -> float:
    """Subspace residual of Å_{conj z}(x)[I; m-(x)*] = [I; m-(f x)*]·mu.

    For symmetric m (symplectic tags) m* = conj(m) and mu must equal
    conj(tau_-) with tau_- the multiplier of m- at z; that defect is included.
    Returns the largest of the principal angle and the multiplier defect.
    """
    z_minus = complex(z_minus)
    field = m_minus(family, z_minus) if field is None else field
    d = family.d
    eye = np.eye(d)
    zp = np.conj(z_minus)
    worst = 0.0
    for x, m, mn, Gm in zip(field.points, field.values, field.next_values, field.generators):
        G = family.cayley(zp, family.sites(x, 1)[0])
        lhs = G @ np.vstack([eye, m.conj().T])
        rhs = np.vstack([eye, mn.conj().T])
        worst = max(worst, float(np.max(subspace_angles(lhs, rhs))))
        if family.symmetric:
            _, _, C, D = blocks(Gm)
            tau_m = C @ m + D
            worst = max(worst, float(np.linalg.norm(lhs[:d] - tau_m.conj(), 2)))
    return worst


def _p(family):
    return volume_exponent(family.tag, family.d)


def q_function(family: DeformedFamily, z, field: MField = None) -> np.ndarray:
    """q(x) = |det tau(Å_z(x), m+(x))|^{-2p} V(m+(f x)) / V(m+(x)) at every field point."""
    field = m_plus(family, z) if field is None else field
    if np.any(np.linalg.norm(field.values, 2, axis=(-2, -1)) >= 1):
        raise DomainError("m+ lies on the boundary; q is undefined")
    p = _p(family)
    _, _, C, D = blocks(field.generators)
    det = np.abs(np.linalg.det(C @ field.values + D))
    V0 = volume_density(field.values, family.tag)
    V1 = volume_density(field.next_values, family.tag)
    return det ** (-2 * p) * V1 / V0


def q_inverse_closed_form(family: DeformedFamily, t: float, m_next) -> np.ndarray:
    """1/q for the rotation family from the singular values of m+(f x).

    Symplectic: e^{-2t(d^2+d)} prod((e^{4t}(1-s^2))/(1-e^{4t}s^2))^{d+1}.
    Hermitian variants replace d^2+d by 2d^2 and d+1 by 2d.
    """
    d = family.d
    s = np.linalg.svd(np.asarray(m_next), compute_uv=False)
    if family.symmetric:
        dim, p = d * d + d, d + 1
    else:
        dim, p = 2 * d * d, 2 * d
    e = np.exp(4 * t)
    return np.exp(-2 * t * dim) * np.prod((e * (1 - s**2) / (1 - e * s**2)) ** p, axis=-1)


def _ld(family, z, n=10_000, samples=8, rng=None):
    return lyapunov_spectrum(family.at(z), n=n, samples=samples, rng=rng).Lk(family.d)


def ld_identities_check(family: DeformedFamily, z, n: int = 10_000, samples: int = 8, rng=None):
    """(|L^d - <ln|det tau|>|, |L^d - <-ln q>/(2p)|) at z, Im z > 0."""
    field = m_plus(family, z, samples=samples, rng=rng)
    Ld = _ld(family, z, n, samples, rng)
    _, _, C, D = blocks(field.generators)
    lt = np.log(np.abs(np.linalg.det(C @ field.values + D))).mean()
    lq = (-np.log(q_function(family, z, field))).mean() / (2 * _p(family))
    return float(abs(Ld - lt)), float(abs(Ld - lq))


def _sv_sum(m):
    s2 = np.linalg.svd(m, compute_uv=False) ** 2
    return np.sum((1 + s2) / (1 - s2), axis=-1)


def lt_lower_bound(family: DeformedFamily, sigma: float, t: float, **kw):
    """L^d/t together with the averaged singular-value sums of m+ and m-.

    Returns ``(ratio, plus, minus)`` with ``plus`` and ``minus`` the means of
    sum_i (1 + s_i^2)/(1 - s_i^2) over the m+ and m- fields at sigma ± i t.
    ``ratio >= plus`` always holds (it follows from the q-identity); the
    m- sum is reported separately because it can exceed ``ratio``.
    """
    mp = m_plus(family, sigma + 1j * t, **kw)
    mm = m_minus(family, sigma - 1j * t, **kw)
    return _ld(family, sigma + 1j * t) / t, float(_sv_sum(mp.values).mean()), float(_sv_sum(mm.values).mean())


def elementary_log_gap(r, s):
    """ln(e^r (1-s)/(1 - e^r s)) - r/(1-s) for r > 0, 0 <= s < e^{-r} (nonnegative)."""
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(r <= 0) or np.any(s < 0) or np.any(s >= np.exp(-r)):
        raise DomainError("need r > 0 and 0 <= s < e^{-r}")
    return r + np.log1p(-s) - np.log1p(-np.exp(r) * s) - r / (1 - s)


@dataclass(frozen=True)
class MGapRow:
    t: float
    I_plus: float
    I_minus: float
    D: float
    Ld_over_t: float
    dLd_dt: float
    converged: bool = True


def _fd_h(t):
    return max(1e-4, t / 100)


def boundary_gap_diagnostics(family: DeformedFamily, sigma0: float, t_list, n: int = 10_000, samples: int = 8,
                             rng=None, threshold: float = 1e-3):
    """Boundary behaviour table of m+ and m- as t decreases to 0.

    Returns
    -------
    rows : list of MGapRow
    flags : dict
        ``bounded``: I+ + I- never exceeds 10 times its value at the largest t.
        ``D_small``: min D is at most a tenth of D at the largest t.
        ``complete``: every t converged.

    Raises
    ------
    PreconditionError
        If the top exponent at sigma0 exceeds ``threshold``, or a t is outside (0, 0.5].
    """
    t_list = sorted((float(t) for t in t_list), reverse=True)
    if any(not 0 < t <= 0.5 for t in t_list):
        raise PreconditionError("t values must lie in (0, 0.5]")
    top = lyapunov_spectrum(family.at(sigma0), n=n, samples=samples, rng=rng).top
    if top > threshold:
        raise PreconditionError(f"top exponent {top:.3g} at sigma0 exceeds {threshold}")
    rows = []
    for t in t_list:
        try:
            mp = m_plus(family, sigma0 + 1j * t, samples=samples, rng=rng)
            mm = m_minus(family, sigma0 - 1j * t, points=None if family.is_periodic else mp.points)
        except (ConvergenceError, ConditioningError):
            rows.append(MGapRow(t, np.nan, np.nan, np.nan, np.nan, np.nan, False))
            continue
        Ip = float(np.mean(1 / (1 - np.linalg.norm(mp.values, 2, axis=(-2, -1)) ** 2)))
        Im = float(np.mean(1 / (1 - np.linalg.norm(mm.values, 2, axis=(-2, -1)) ** 2)))
        D = float(np.mean(np.linalg.norm(mp.values - mm.values, "fro", axis=(-2, -1)) ** 2))
        Ld = _ld(family, sigma0 + 1j * t, n, samples, rng)
        h = _fd_h(t)
        dL = (_ld(family, sigma0 + 1j * (t + h), n, samples, rng) - _ld(family, sigma0 + 1j * (t - h), n, samples, rng)) / (2 * h)
        rows.append(MGapRow(t, Ip, Im, D, Ld / t, dL))
    ok = [r for r in rows if r.converged]
    flags = {"complete": len(ok) == len(rows), "bounded": False, "D_small": False}
    if ok:
        s0 = ok[0].I_plus + ok[0].I_minus
        flags["bounded"] = all(r.I_plus + r.I_minus <= 10 * s0 for r in ok)
        flags["D_small"] = min(r.D for r in ok) <= 0.1 * ok[0].D
    return rows, flags


# name fixed by the public interface
theorem5_diagnostics = boundary_gap_diagnostics


def key_equation_check(family: DeformedFamily, sigma0: float, t: float, n: int = 10_000, samples: int = 8,
                       rng=None, h: float = None) -> float:
    """|<Re tr((I - m-* m+)^{-1}(I + m-* m+))> - dL^d/dt| for the rotation family.

    m+ is taken at sigma0 + i t and m- at sigma0 - i t; m-* reduces to conj(m-)
    for symmetric fields.
    """
    if not isinstance(family, RotationFamily):
        raise DomainError("the key equation holds for rotation families")
    if t <= 0:
        raise DomainError("t must be positive")
    mp = m_plus(family, sigma0 + 1j * t, samples=samples, rng=rng)
    mm = m_minus(family, sigma0 - 1j * t, points=None if family.is_periodic else mp.points)
    eye = np.eye(family.d)
    X = np.swapaxes(mm.values.conj(), -1, -2) @ mp.values
    L = eye - X
    if np.any(np.linalg.cond(L) > 1e12):
        raise ConditioningError("I - m-* m+ is singular")
    lhs = float(np.mean(np.trace(np.linalg.solve(L, eye + X), axis1=-2, axis2=-1).real))
    h = _fd_h(t) if h is None else h
    dL = (_ld(family, sigma0 + 1j * (t + h), n, samples, rng) - _ld(family, sigma0 + 1j * (t - h), n, samples, rng)) / (2 * h)
    return abs(lhs - dL)


def trace_gap(X, Y) -> float:
    """½ sum[(1+s_i(X)^2)/(1-s_i(X)^2) + (same for Y)] - Re tr((I-Y*X)^{-1}(I+Y*X)) - ||X-Y||_HS^2.

    Nonnegative for ||X||, ||Y|| < 1, zero at X = Y.
    """
    X = np.asarray(X, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    if np.linalg.norm(X, 2) >= 1 or np.linalg.norm(Y, 2) >= 1:
        raise DomainError("trace_gap needs ||X||, ||Y|| < 1")
    eye = np.eye(X.shape[-1])
    W = Y.conj().T @ X
    tr = np.trace(np.linalg.solve(eye - W, eye + W)).real
    return float(0.5 * (_sv_sum(X) + _sv_sum(Y)) - tr - np.linalg.norm(X - Y, "fro") ** 2)


def reconstruct_generators(oracle, value_set, steps: int, x, base_step, T: float = 8.0, tag=GroupTag.SpR,
                           inv_tol: float = 1e-6):
    """Recover A(f^n x), 0 <= n < steps, from an m- oracle at z = -iT.

    Parameters
    ----------
    oracle : callable
        ``oracle(z, x)`` returns m-(z, x) for the rotation family.
    value_set : sequence of (2d, 2d) group elements
        Candidate generators; their Cayley images must send 0 to pairwise
        distinct points under the inverse.
    base_step : callable
        x -> f(x).

    Each m-(-iT, f^n x) is matched to the nearest Å^{-1}·0 (its large-T
    limit); the match is confirmed by the invariance equation
    m-(x) = Å_{-iT}(x)^{-1}·m-(f x), checked in that (contracting) direction.

    Raises
    ------
    AmbiguityError
        If the candidates are not separated, a match is not at least twice
        as close as the runner-up, or the invariance check fails.
    """
    cands = [np.asarray(A) for A in value_set]
    Ac = np.asarray([cayley_conjugate(A, tag) for A in cands])
    targets = mobius(np.linalg.inv(Ac), np.zeros((len(cands),) + (Ac.shape[-1] // 2,) * 2))
    if len(cands) > 1:
        pair = np.linalg.norm(targets[:, None] - targets[None, :], 2, axis=(-2, -1))
        pair[np.diag_indices(len(cands))] = np.inf
        if np.min(pair) < 1e-8:
            raise AmbiguityError("value set has coinciding inverse images of 0")
    z = -1j * T
    d = Ac.shape[-1] // 2
    scale = np.r_[np.full(d, np.exp(1j * z)), np.full(d, np.exp(-1j * z))]
    out = []
    m_cur = np.asarray(oracle(z, x))
    for _ in range(steps):
        dist = np.linalg.norm(targets - m_cur, 2, axis=(-2, -1))
        order = np.argsort(dist)
        if len(cands) > 1 and dist[order[1]] < 2 * dist[order[0]]:
            raise AmbiguityError("nearest candidate is not separated from the runner-up")
        j = order[0]
        nxt = base_step(x)
        m_next = np.asarray(oracle(z, nxt))
        Gz = scale[:, None] * Ac[j]
        back = mobius(np.linalg.inv(Gz), m_next)
        if np.linalg.norm(back - m_cur, 2) > inv_tol:
            raise AmbiguityError("identified generator fails the invariance equation")
        out.append(cands[j])
        x, m_cur = nxt, m_next
    return out
