"""Phase calculus for det tau along deformation paths and the rotation function.

For a family z -> Å_z (see :mod:`cocyclekit.families`) the lifted multiplier
phase is tau_hat(Å, Z) = -i log det tau(Å, Z), so

    Re tau_hat = arg det tau,    Im tau_hat = -ln|det tau|.

All lifts are obtained by continuation in the deformation parameter: a path
is cut into segments, and a segment is bisected while any per-site principal
increment of arg det tau reaches ``step_bound`` (pi/2 by default).

The rotation function follows the per-step convention: rho(z) is the average
over sites of the continued phase difference between z and a real reference
point ``sigma_ref`` (so rho(sigma_ref) = 0), with no factor 2 pi.  Together
with L^d it forms zeta = rho - i L^d.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cocycle import lyapunov_spectrum
from .errors import AnchorError, DomainError, PhaseUnwrapError
from .families import DeformedFamily, periodic_m_field
from .siegel import blocks, mobius

__all__ = [
    "RotationPath",
    "ZetaValue",
    "continue_phases",
    "tau_hat",
    "delta_xi",
    "delta_xi_n",
    "ld_value",
    "rotation_function",
    "anchor_diameter",
    "cauchy_riemann_check",
    "subharmonicity_probe",
]

STEP_BOUND = np.pi / 2
MAX_DEPTH = 40


@dataclass
class RotationPath:
    """Piecewise linear path in the closed upper half plane.

    After a continuation, ``phases[j, s]`` holds the lifted arg det tau of
    site s at ``nodes[j]`` and ``logabs[j, s]`` the matching ln|det tau|.
    """

    nodes: np.ndarray
    phases: np.ndarray = None
    logabs: np.ndarray = None

    def __post_init__(self):
        self.nodes = np.atleast_1d(np.asarray(self.nodes, dtype=complex))
        if self.nodes.ndim != 1 or len(self.nodes) < 1:
            raise DomainError("a path needs at least one node")

    @classmethod
    def segment(cls, z0, z1, pieces: int = 1):
        return cls(np.linspace(complex(z0), complex(z1), pieces + 1))

    @property
    def start(self):
        return self.nodes[0]

    @property
    def end(self):
        return self.nodes[-1]

    def parameters(self):
        """Normalised arclength s in [0, 1] of every node."""
        seg = np.abs(np.diff(self.nodes))
        s = np.r_[0.0, np.cumsum(seg)]
        return s / s[-1] if s[-1] > 0 else np.linspace(0.0, 1.0, len(self.nodes))

    def point(self, s):
        """z at normalised arclength s (vectorised)."""
        grid = self.parameters()
        s = np.asarray(s, dtype=float)
        return np.interp(s, grid, self.nodes.real) + 1j * np.interp(s, grid, self.nodes.imag)

    def split(self, j: int):
        """The two sub-paths meeting at node j."""
        return RotationPath(self.nodes[: j + 1]), RotationPath(self.nodes[j:])

    def max_increment(self) -> float:
        if self.phases is None or len(self.nodes) < 2:
            return 0.0
        return float(np.max(np.abs(np.diff(self.phases, axis=0))))


@dataclass(frozen=True)
class ZetaValue:
    """zeta(z) = rho(z) - i L^d(A_z)."""

    z: complex
    rho: float
    Ld: float
    rho_stderr: float = 0.0
    Ld_tau: float = np.nan

    @property
    def zeta(self) -> complex:
        return complex(self.rho, -self.Ld)


def continue_phases(evaluate, chains, step_bound: float = STEP_BOUND, max_depth: int = MAX_DEPTH):
    """Lift arg of a family of nonzero complex functions along piecewise-linear chains.

    Parameters
    ----------
    evaluate : callable
        ``evaluate(w)`` with ``w`` a 1-d array of parameter values returns an
        array of shape ``(len(w), S)`` of nonzero complex numbers (one column
        per site).
    chains : list of 1-d arrays
        Node sequences.  The first node of every chain uses the principal arg.
    step_bound : float
        Segments are bisected while any site's principal increment is at
        least this large.

    Returns
    -------
    phases : list of ndarray, shape (len(chain), S)
    values : list of ndarray, shape (len(chain), S)

    Raises
    ------
    PhaseUnwrapError
        If a segment still needs refinement after ``max_depth`` bisections.
    """
    chains = [np.atleast_1d(np.asarray(c)) for c in chains]
    sizes = [len(c) for c in chains]
    allw = np.concatenate(chains)
    vals = np.asarray(evaluate(allw))
    if vals.ndim == 1:
        vals = vals[:, None]
    if not np.all(np.isfinite(vals)) or np.any(vals == 0):
        raise PhaseUnwrapError("det tau vanished or overflowed on the path")
    S = vals.shape[1]
    offsets = np.r_[0, np.cumsum(sizes)]
    seg_ids, a_idx = [], []
    for c, off in enumerate(offsets[:-1]):
        for j in range(sizes[c] - 1):
            seg_ids.append(off + j)
            a_idx.append(off + j)
    total = np.zeros((len(allw), S))
    seg_ids = np.asarray(seg_ids, dtype=int)
    a_idx = np.asarray(a_idx, dtype=int)
    wa, wb = allw[a_idx], allw[a_idx + 1] if len(a_idx) else allw[:0]
    va, vb = vals[a_idx], vals[a_idx + 1] if len(a_idx) else vals[:0]
    depth = 0
    while len(seg_ids):
        inc = np.angle(vb / va)
        ok = np.all(np.abs(inc) < step_bound, axis=1)
        np.add.at(total, seg_ids[ok], inc[ok])
        bad = ~ok
        if not np.any(bad):
            break
        if depth >= max_depth:
            raise PhaseUnwrapError(f"phase continuation not refined below {step_bound:.3g} after {max_depth} bisections")
        wm = 0.5 * (wa[bad] + wb[bad])
        vm = np.asarray(evaluate(wm))
        if vm.ndim == 1:
            vm = vm[:, None]
        if not np.all(np.isfinite(vm)) or np.any(vm == 0):
            raise PhaseUnwrapError("det tau vanished or overflowed on the path")
        ids = seg_ids[bad]
        seg_ids = np.r_[ids, ids]
        wa, wb = np.r_[wa[bad], wm], np.r_[wm, wb[bad]]
        va, vb = np.concatenate([va[bad], vm]), np.concatenate([vm, vb[bad]])
        depth += 1
    phases, values = [], []
    for c, off in enumerate(offsets[:-1]):
        sl = slice(off, off + sizes[c])
        ph = np.angle(vals[off])[None, :] + np.r_[np.zeros((1, S)), np.cumsum(total[off:off + sizes[c] - 1], axis=0)]
        phases.append(ph)
        values.append(vals[sl])
    return phases, values


def _det_tau(M, Z):
    _, _, C, D = blocks(M)
    return np.linalg.det(C @ Z + D)


def tau_hat(M, Z) -> complex:
    """Principal value of -i log det tau(M, Z)."""
    w = _det_tau(M, Z)
    return complex(np.angle(w), -np.log(np.abs(w)))


# --------------------------------------------------------------------------
# delta xi
# --------------------------------------------------------------------------

def _as_path(path) -> RotationPath:
    return path if isinstance(path, RotationPath) else RotationPath(path)


def delta_xi(family: DeformedFamily, path, x, Z0, Z1, step_bound: float = STEP_BOUND, max_depth: int = MAX_DEPTH):
    """Lifted difference tau_hat(Å_{z1}(x), Z1) - tau_hat(Å_{z0}(x), Z0).

    The point of the disc moves linearly from Z0 to Z1 while z runs along
    ``path`` (any path gives the same value).

    Returns
    -------
    complex
        Real part: continued change of arg det tau.  Imaginary part:
        -(ln|det tau| at the end - ln|det tau| at the start).
    """
    path = _as_path(path)
    site = family.sites(x, 1)[0]
    Z0 = np.asarray(Z0, dtype=complex)
    Z1 = np.asarray(Z1, dtype=complex)

    def evaluate(s):
        z = path.point(s)
        Z = (1 - s)[:, None, None] * Z0 + s[:, None, None] * Z1
        G = family.cayley(z, site)
        return _det_tau(G, Z)[:, None]

    (ph,), (vals,) = continue_phases(evaluate, [path.parameters()], step_bound, max_depth)
    d_arg = ph[-1, 0] - ph[0, 0]
    d_log = np.log(np.abs(vals[-1, 0])) - np.log(np.abs(vals[0, 0]))
    return complex(d_arg, -d_log)


def _orbit(G, Z0):
    """W_0 = Z0, W_{k+1} = G[..., k] · W_k; returns W_0 .. W_{n-1} stacked on axis -3."""
    n = G.shape[-3]
    W = [np.broadcast_to(Z0, G.shape[:-3] + Z0.shape[-2:]).astype(complex)]
    for k in range(n - 1):
        W.append(mobius(G[..., k, :, :], W[-1]))
    return np.stack(W, axis=-3)


def delta_xi_n(family: DeformedFamily, z0, z1, x, Z0, Z1, n: int, path=None,
               step_bound: float = STEP_BOUND, max_depth: int = MAX_DEPTH) -> complex:
    """(1/n) sum_k delta xi(f^k x, Å_{z0}^k(x)·Z0, Å_{z1}^k(x)·Z1).

    The real part depends on (Z0, Z1) only up to 2 d pi / n.
    """
    path = RotationPath.segment(z0, z1) if path is None else _as_path(path)
    if not (np.isclose(path.start, z0) and np.isclose(path.end, z1)):
        raise DomainError("path endpoints must be z0 and z1")
    sites = family.sites(x, n)
    Z0 = np.asarray(Z0, dtype=complex)
    Z1 = np.asarray(Z1, dtype=complex)
    W0 = _orbit(family.cayley(z0, sites), Z0)
    W1 = _orbit(family.cayley(z1, sites), Z1)

    def evaluate(s):
        z = path.point(s)
        Z = (1 - s)[:, None, None, None] * W0[None] + s[:, None, None, None] * W1[None]
        G = family.cayley(z[:, None], sites[None])
        return _det_tau(G, Z)

    (ph,), (vals,) = continue_phases(evaluate, [path.parameters()], step_bound, max_depth)
    d_arg = ph[-1] - ph[0]
    d_log = np.log(np.abs(vals[-1])) - np.log(np.abs(vals[0]))
    return complex(d_arg.mean(), -d_log.mean())


# --------------------------------------------------------------------------
# rotation function
# --------------------------------------------------------------------------

def ld_value(family: DeformedFamily, z, n: int = 10_000, samples: int = 8, rng=None) -> float:
    """L^d(A_z) from the Lyapunov spectrum of the group-side cocycle."""
    rep = lyapunov_spectrum(family.at(z), n=n, samples=samples, rng=rng)
    return rep.Lk(family.d)


def anchor_diameter(family: DeformedFamily, z, x=None, probes: int = 6, rng=None) -> float:
    """Estimated diameter of Å_z(x)·(closed disc), maximised over sites.

    Probes are ±I, ±iI and random unitary (symmetric in the symplectic model)
    boundary points.
    """
    from .siegel import random_shilov_point

    rng = np.random.default_rng(0 if rng is None else rng)
    d = family.d
    pts = [np.eye(d), -np.eye(d), 1j * np.eye(d), -1j * np.eye(d)]
    pts += [random_shilov_point(d, rng, family.symmetric) for _ in range(probes)]
    pts = np.asarray(pts, dtype=complex)
    if family.is_periodic:
        sites = family.sites(0, family.period)
    else:
        x = family.cocycle.sample_points(1, rng, min_span=1)[0] if x is None else x
        sites = family.sites(x, 1)
    G = family.cayley(z, sites)
    imgs = mobius(G[:, None], pts[None])
    diam = 0.0
    for im in imgs:
        diff = im[:, None] - im[None, :]
        diam = max(diam, float(np.max(np.linalg.norm(diff, 2, axis=(-2, -1)))))
    return diam


def _vertical_nodes(sigma, t_top, t_bottom, ratio=2.0):
    if t_bottom >= t_top:
        return np.array([sigma + 1j * t_top, sigma + 1j * t_bottom])
    k = max(1, int(np.ceil(np.log(t_top / t_bottom) / np.log(ratio))))
    return sigma + 1j * np.geomspace(t_top, t_bottom, k + 1)


def _horizontal_nodes(sigmas, T, spacing=0.25):
    """Nodes at height T visiting every value in ``sigmas`` (sorted), max spacing ``spacing``."""
    sig = np.unique(np.asarray(sigmas, dtype=float))
    pts = [sig[0]]
    for a, b in zip(sig[:-1], sig[1:]):
        k = max(1, int(np.ceil((b - a) / spacing)))
        pts.extend(np.linspace(a, b, k + 1)[1:])
    return np.asarray(pts) + 1j * T


def _fixed_point_evaluator(family):
    def evaluate(z):
        m, G, _ = periodic_m_field(family, z, "plus")
        return _det_tau(G, m)

    return evaluate


def _orbit_evaluator(family, points, n, chunk_elems: int = 4_000_000):
    d = family.d
    sites = np.stack([family.sites(x, n) for x in points])  # (S, n, 2d, 2d)
    S = len(points)
    eye = np.eye(d, dtype=complex)
    chunk = max(1, chunk_elems // (S * n))

    def run(z):
        W = np.broadcast_to(eye, (len(z), S, d, d)).astype(complex)
        out = np.empty((len(z), S, n), dtype=complex)
        for k in range(n):
            Gk = family.cayley(z[:, None], sites[None, :, k])
            A_, B_, C, D = blocks(Gk)
            T = C @ W + D
            out[:, :, k] = np.linalg.det(T)
            W = np.swapaxes(np.linalg.solve(np.swapaxes(T, -1, -2), np.swapaxes(A_ @ W + B_, -1, -2)), -1, -2)
        return out.reshape(len(z), -1)

    def evaluate(z):
        z = np.asarray(z, dtype=complex)
        return np.concatenate([run(z[i:i + chunk]) for i in range(0, len(z), chunk)])

    return evaluate


def rotation_function(family: DeformedFamily, targets, n: int = 2000, samples: int = 4, rng=None,
                      anchor_T: float = 5.0, sigma_ref: float = 0.0, method: str = "auto",
                      t_floor: float = 1e-9, anchor_tol: float = 0.5, lyapunov: bool = True,
                      lyapunov_n: int = 10_000, return_paths: bool = False):
    """zeta = rho - i L^d at each target z (Im z >= 0).

    Parameters
    ----------
    family : DeformedFamily
    targets : sequence of complex
    n : int
        Orbit length for the orbit route (non-periodic bases).
    samples : int
        Number of base points averaged on the orbit route.
    anchor_T : float
        Height of the anchor sigma_ref + i T from which all phases are continued.
    sigma_ref : float
        Real reference point; rho(sigma_ref) = 0.
    method : {"auto", "fixed_point", "orbit"}
        ``fixed_point`` (periodic bases) averages tau over the exact m+ field
        at height ``max(t, t_floor)``; ``orbit`` averages n steps of the orbit
        of the identity matrix.
    anchor_tol : float
        Maximal image diameter of the disc under Å at the anchor.
    lyapunov : bool
        Also compute L^d from the Lyapunov spectrum (``ZetaValue.Ld``).

    Returns
    -------
    list of ZetaValue
        In the order of ``targets``; with ``return_paths`` also the list of
        :class:`RotationPath` objects (reference first).

    Raises
    ------
    AnchorError
        If the disc image at the anchor is wider than ``anchor_tol``.
    """
    targets = np.atleast_1d(np.asarray(targets, dtype=complex))
    if np.any(targets.imag < 0):
        raise DomainError("targets must lie in the closed upper half plane")
    if method == "auto":
        method = "fixed_point" if family.is_periodic else "orbit"
    if method == "fixed_point" and not family.is_periodic:
        raise DomainError("the fixed-point route needs a periodic base")
    rng = np.random.default_rng(rng)
    T = max(anchor_T, float(targets.imag.max(initial=0.0)))
    anchor = sigma_ref + 1j * T
    diam = anchor_diameter(family, anchor)
    if diam > anchor_tol:
        raise AnchorError(f"disc image at the anchor has diameter {diam:.3g} > {anchor_tol}; increase anchor_T")

    if method == "fixed_point":
        evaluate = _fixed_point_evaluator(family)
        floor = t_floor
        weights = None
    else:
        points = family.cocycle.sample_points(samples, rng, min_span=n)
        evaluate = _orbit_evaluator(family, points, n)
        floor = 0.0
        weights = len(points)

    ends = np.r_[sigma_ref + 1j * max(0.0, floor), targets.real + 1j * np.maximum(targets.imag, floor)]
    horiz = _horizontal_nodes(np.r_[sigma_ref, ends.real], T)
    start = int(np.argmin(np.abs(horiz - anchor)))
    left, right = horiz[: start + 1][::-1], horiz[start:]
    verts = [_vertical_nodes(e.real, T, e.imag) if e.imag > 0 else np.r_[_vertical_nodes(e.real, T, 1e-12), e]
             for e in ends]
    phases, values = continue_phases(evaluate, [left, right] + verts)
    h_ph = {complex(z): phases[0][j] for j, z in enumerate(left)}
    h_ph.update({complex(z): phases[1][j] for j, z in enumerate(right)})
    finals, logs, paths = [], [], []
    for v_nodes, ph, val in zip(verts, phases[2:], values[2:]):
        top = complex(v_nodes[0])
        key = min(h_ph, key=lambda w: abs(w - top))
        lifted = ph - ph[0] + h_ph[key]
        finals.append(lifted[-1])
        logs.append(np.log(np.abs(val[-1])))
        paths.append(RotationPath(v_nodes, lifted, np.log(np.abs(val))))
    ref = finals[0]
    out = []
    for j, z in enumerate(targets):
        diff = finals[j + 1] - ref
        if weights is None:
            rho, err = float(diff.mean()), 0.0
            ld_tau = float(logs[j + 1].mean())
        else:
            per = diff.reshape(weights, -1).mean(axis=1)
            rho = float(per.mean())
            err = float(per.std(ddof=1) / np.sqrt(weights)) if weights > 1 else 0.0
            ld_tau = float(logs[j + 1].mean())
        Ld = ld_value(family, z, n=lyapunov_n, rng=rng) if lyapunov else np.nan
        out.append(ZetaValue(complex(z), rho, Ld, err, ld_tau))
    if return_paths:
        return out, paths
    return out


# --------------------------------------------------------------------------
# diagnostics
# --------------------------------------------------------------------------

def cauchy_riemann_check(family: DeformedFamily, sigma: float, t: float, h: float = 1e-3, **kwargs) -> float:
    """|dL^d/dt + drho/dsigma| by central differences at sigma + i t.

    Keyword arguments are passed to :func:`rotation_function` and :func:`ld_value`
    (``n``, ``samples``, ``rng``).
    """
    if not t > h > 0:
        raise DomainError("need t > h > 0")
    n = kwargs.pop("n", 2000)
    samples = kwargs.pop("samples", 4)
    rng = kwargs.pop("rng", None)
    vals = rotation_function(family, [sigma + h + 1j * t], n=n, samples=samples, rng=rng,
                             sigma_ref=sigma - h, lyapunov=False, **kwargs)
    # rho at (sigma - h + i t) relative to sigma - h on the axis
    base = rotation_function(family, [sigma - h + 1j * t], n=n, samples=samples, rng=rng,
                             sigma_ref=sigma - h, lyapunov=False, **kwargs)
    drho = (vals[0].rho - base[0].rho) / (2 * h)
    lyap_n = max(n, 10_000)
    up = ld_value(family, sigma + 1j * (t + h), n=lyap_n, rng=np.random.default_rng(1))
    dn = ld_value(family, sigma + 1j * (t - h), n=lyap_n, rng=np.random.default_rng(1))
    dL = (up - dn) / (2 * h)
    return float(abs(dL + drho))


def subharmonicity_probe(family: DeformedFamily, z, r: float, m: int = 64, n: int = 10_000, rng=None) -> float:
    """Circle mean of L^d around z minus L^d(z).

    The circle may touch the real axis; it may not cross it.
    """
    z = complex(z)
    if z.imag - r < -1e-12:
        raise DomainError("the probe circle must stay in the closed upper half plane")
    ang = 2 * np.pi * np.arange(m) / m
    pts = z + r * np.exp(1j * ang)
    pts = pts.real + 1j * np.maximum(pts.imag, 0.0)
    seed = np.random.default_rng(rng).integers(2**32)
    circle = np.mean([ld_value(family, w, n=n, rng=seed) for w in pts])
    return float(circle - ld_value(family, z, n=n, rng=seed))
