"""Base dynamics, cocycle products and Lyapunov spectra.

Three base systems are supported:

* :class:`Periodic` -- ``x -> x + 1 mod n`` with uniform measure.  Averages
  are exact, computed from the period map.
* :class:`TorusRotation` -- ``x -> x + alpha mod 1`` on a k-torus; averages are
  Birkhoff sums along one orbit with block-mean error bars.
* :class:`FiniteShift` -- a Bernoulli shift on ``s`` symbols; base points are
  finite windows of a sampled sequence (see :class:`ShiftPoint`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

import numpy as np

from .errors import DimensionError, DomainError, NumericError
from .groups import GroupTag, TOL_GROUP, group_inverse, membership_residual

__all__ = [
    "Periodic",
    "TorusRotation",
    "FiniteShift",
    "ShiftPoint",
    "Cocycle",
    "Iterate",
    "LyapunovReport",
    "iterate",
    "period_map",
    "lyapunov_spectrum",
    "compound",
    "top_exponent_exterior",
    "RENORM_STEPS",
]

RENORM_STEPS = 10


@dataclass(frozen=True)
class Periodic:
    """Cyclic rotation of n points."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("period must be positive")

    def step(self, x, k=1):
        return (x + k) % self.n

    def sample_points(self, samples=None, rng=None):
        return list(range(self.n))


@dataclass(frozen=True)
class TorusRotation:
    """Rotation x -> x + alpha (mod 1) on the k-torus."""

    alpha: tuple
    x0: tuple = None
    blocks: int = 20

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        if np.any((a < 0) | (a >= 1)):
            raise DomainError("frequency entries must lie in [0, 1)")
        object.__setattr__(self, "alpha", tuple(a))
        x0 = np.zeros_like(a) if self.x0 is None else np.atleast_1d(np.asarray(self.x0, dtype=float))
        object.__setattr__(self, "x0", tuple(x0 % 1.0))

    def step(self, x, k=1):
        return (np.asarray(x, dtype=float) + k * np.asarray(self.alpha)) % 1.0

    def sample_points(self, samples=None, rng=None):
        return [np.asarray(self.x0)]


@dataclass(frozen=True)
class ShiftPoint:
    """A window ``word`` of a two-sided sequence with the current position ``index``."""

    word: tuple
    index: int

    @property
    def symbol(self):
        if not 0 <= self.index < len(self.word):
            raise DomainError("orbit left the sampled window; sample longer words")
        return self.word[self.index]


@dataclass(frozen=True)
class FiniteShift:
    """Bernoulli shift on ``len(weights)`` symbols.

    Parameters
    ----------
    weights : sequence of float
        Symbol probabilities (must sum to 1).
    span : int
        Sampled words have length ``2 * span + 1`` and start at the centre.
    words : sequence of sequences, optional
        Explicit orbit words used instead of random sampling.
    """

    weights: tuple
    span: int = 2000
    words: tuple = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if abs(w.sum() - 1.0) > 1e-12 or np.any(w < 0):
            raise DomainError("shift weights must be a probability vector")
        object.__setattr__(self, "weights", tuple(w))

    @property
    def symbols(self):
        return len(self.weights)

    def step(self, x: ShiftPoint, k=1):
        return ShiftPoint(x.word, x.index + k)

    def sample_points(self, samples=16, rng=None, min_span: int = 0):
        if self.words is not None:
            return [ShiftPoint(tuple(int(s) for s in w), len(w) // 2) for w in self.words]
        rng = np.random.default_rng(rng)
        span = max(self.span, min_span)
        L = 2 * span + 1
        return [
            ShiftPoint(tuple(int(s) for s in rng.choice(self.symbols, size=L, p=self.weights)), span)
            for _ in range(samples)
        ]


@dataclass(frozen=True)
class Cocycle:
    """A base system together with a generator map x -> A(x).

    Periodic cocycles store their generators in ``matrices`` (shape
    ``(n, 2d, 2d)``); other cocycles use the ``generator`` callable.
    ``tag`` may be None for complexified families that leave every group.
    """

    base: object
    d: int
    tag: GroupTag = None
    generator: Callable = None
    matrices: np.ndarray = field(default=None, repr=False)

    # ----- constructors -------------------------------------------------
    @classmethod
    def periodic(cls, matrices, tag=GroupTag.SpR, check: bool = True, tol: float = TOL_GROUP):
        mats = np.asarray(matrices)
        if mats.ndim == 2:
            mats = mats[None]
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2] or mats.shape[1] % 2:
            raise DimensionError(f"expected a stack of (2d, 2d) matrices, got {mats.shape}")
        tag = None if tag is None else GroupTag(tag)
        if check and tag is not None:
            res = np.max(membership_residual(mats, tag))
            if res > tol:
                raise DomainError(f"generator fails membership in {tag.value} (residual {res:.3g})")
        mats = mats.copy()
        mats.setflags(write=False)
        return cls(Periodic(len(mats)), mats.shape[1] // 2, tag, None, mats)

    @classmethod
    def constant(cls, matrix, tag=GroupTag.SpR, check: bool = True):
        return cls.periodic(np.asarray(matrix)[None], tag, check)

    @classmethod
    def torus(cls, fn, alpha, d, tag=GroupTag.SpR, x0=None):
        return cls(TorusRotation(alpha, x0), d, None if tag is None else GroupTag(tag), fn)

    @classmethod
    def shift(cls, symbol_matrices, weights, tag=GroupTag.SpR, span=2000, words=None, check=True):
        mats = np.asarray(symbol_matrices)
        tag = None if tag is None else GroupTag(tag)
        if check and tag is not None:
            res = np.max(membership_residual(mats, tag))
            if res > TOL_GROUP:
                raise DomainError(f"symbol matrix fails membership in {tag.value} (residual {res:.3g})")
        base = FiniteShift(tuple(weights), span, None if words is None else tuple(tuple(w) for w in words))
        mats = mats.copy()
        mats.setflags(write=False)
        return cls(base, mats.shape[1] // 2, tag, None, mats)

    # ----- evaluation ---------------------------------------------------
    @property
    def is_periodic(self) -> bool:
        return isinstance(self.base, Periodic)

    def at(self, x):
        if isinstance(self.base, Periodic):
            return self.matrices[x % self.base.n]
        if isinstance(self.base, FiniteShift) and self.matrices is not None:
            return self.matrices[x.symbol]
        return np.asarray(self.generator(x))

    def along(self, x, n: int):
        """Stack [A(x), A(fx), ..., A(f^{n-1}x)]."""
        if isinstance(self.base, Periodic):
            idx = (x + np.arange(n)) % self.base.n
            return self.matrices[idx]
        if isinstance(self.base, FiniteShift) and self.matrices is not None:
            lo, hi = x.index, x.index + n
            if lo < 0 or hi > len(x.word):
                raise DomainError("orbit left the sampled window; sample longer words")
            return self.matrices[np.asarray(x.word[lo:hi], dtype=int)]
        out = []
        for _ in range(n):
            out.append(self.at(x))
            x = self.base.step(x)
        return np.asarray(out)

    def backward(self, x, n: int):
        """Stack [A(f^{-1}x), A(f^{-2}x), ..., A(f^{-n}x)]."""
        start = self.base.step(x, -n)
        return self.along(start, n)[::-1]

    def sample_points(self, samples=None, rng=None, min_span: int = 0):
        """Base points used for averages; shift windows reach at least ``min_span`` both ways."""
        if isinstance(self.base, FiniteShift):
            return self.base.sample_points(16 if samples is None else samples, rng, min_span)
        return self.base.sample_points(samples, rng)

    def map_matrices(self, fn, tag=None) -> "Cocycle":
        """New cocycle with generator fn(A(x)); ``fn`` must accept stacks."""
        if self.matrices is not None:
            mats = np.asarray(fn(self.matrices))
            mats.setflags(write=False)
            return Cocycle(self.base, self.d, tag, None, mats)
        gen = self.generator
        return Cocycle(self.base, self.d, tag, lambda x: fn(np.asarray(gen(x))), None)


@dataclass(frozen=True)
class Iterate:
    """Renormalised product: the true product is exp(log_scale) * matrix."""

    matrix: np.ndarray
    log_scale: float

    @property
    def product(self):
        return np.exp(self.log_scale) * self.matrix


def _inverses(mats, tag):
    """Generator inverses: J-conjugation for SpR, a direct solve otherwise."""
    if tag is not None and GroupTag(tag) is GroupTag.SpR:
        return group_inverse(mats, tag)
    return np.linalg.inv(mats)


def iterate(A: Cocycle, x, n: int, r: int = RENORM_STEPS) -> Iterate:
    """Cocycle product A^n(x) with a log-scale factor extracted every r steps.

    n > 0: A(f^{n-1}x) ... A(x);  n = 0: identity;
    n < 0: A(f^{n}x)^{-1} ... A(f^{-1}x)^{-1}.
    """
    size = 2 * A.d
    if n == 0:
        return Iterate(np.eye(size), 0.0)
    if n > 0:
        mats = A.along(x, n)
    else:
        mats = _inverses(A.backward(x, -n), A.tag)
    P = np.eye(size, dtype=np.result_type(mats, float))
    log_scale = 0.0
    for k, M in enumerate(mats, 1):
        P = M @ P
        if k % r == 0:
            s = np.linalg.norm(P, 2)
            if not np.isfinite(s) or s == 0:
                raise NumericError("cocycle product overflowed")
            P = P / s
            log_scale += np.log(s)
    return Iterate(P, log_scale)


def period_map(A: Cocycle, x: int = 0):
    """Exact product over one period, A(f^{n-1}x) ... A(x), for periodic cocycles."""
    if not A.is_periodic:
        raise DomainError("period map requires a periodic base")
    P = np.eye(2 * A.d, dtype=np.result_type(A.matrices, float))
    for M in A.along(x, A.base.n):
        P = M @ P
    return P


@dataclass(frozen=True)
class LyapunovReport:
    """Lyapunov exponents L_1 >= ... >= L_2d (nats per step)."""

    exponents: np.ndarray
    n_steps: int
    stderr: np.ndarray
    method: str

    @property
    def partial_sums(self):
        """L^k = L_1 + ... + L_k for k = 1..2d."""
        return np.cumsum(self.exponents)

    def Lk(self, k: int) -> float:
        return float(self.partial_sums[k - 1])

    @property
    def top(self) -> float:
        return float(self.exponents[0])


def _qr_logs(mats, start, r, checkpoints):
    """Accumulated log|R_ii| along a stack of generators, sampled at checkpoints."""
    size = mats.shape[-1]
    Q = np.eye(size, dtype=np.result_type(mats, float)) if start is None else start
    acc = np.zeros(size)
    out = []
    P = Q
    cps = set(checkpoints)
    for k in range(len(mats)):
        P = mats[k] @ P
        if (k + 1) % r == 0 or (k + 1) in cps:
            Q, R = np.linalg.qr(P)
            diag = np.abs(np.diag(R))
            if not np.all(np.isfinite(diag)) or np.any(diag == 0):
                raise NumericError("QR renormalisation failed (overflow or singular product)")
            acc = acc + np.log(diag)
            P = Q
        if (k + 1) in cps:
            out.append(acc.copy())
    return out


def lyapunov_spectrum(A: Cocycle, n: int = 10_000, samples: int = 16, rng=None, r: int = RENORM_STEPS,
                      method: str = "auto") -> LyapunovReport:
    """All 2d Lyapunov exponents.

    Parameters
    ----------
    A : Cocycle
    n : int
        Number of steps per sample for the QR method.
    samples : int
        Number of sampled words for :class:`FiniteShift` bases.
    method : {"auto", "exact", "qr"}
        ``auto`` uses the exact period-map eigenvalues on periodic bases and
        QR-renormalised products otherwise.

    Returns
    -------
    LyapunovReport
    """
    if n < 1:
        raise DomainError("n must be positive")
    if method == "auto":
        method = "exact" if A.is_periodic else "qr"
    size = 2 * A.d
    if method == "exact":
        P = period_map(A)
        lam = np.abs(np.linalg.eigvals(P))
        if np.any(lam == 0) or not np.all(np.isfinite(lam)):
            raise NumericError("period map is singular or overflowed")
        ex = np.sort(np.log(lam))[::-1] / A.base.n
        return LyapunovReport(ex, A.base.n, np.zeros(size), "exact")

    points = A.sample_points(samples, rng, min_span=n)
    if isinstance(A.base, TorusRotation):
        blocks = A.base.blocks
        cps = [int(round(n * (b + 1) / blocks)) for b in range(blocks)]
        logs = _qr_logs(A.along(points[0], n), None, r, cps)
        prev = np.zeros(size)
        est = []
        for cp0, cp1, acc in zip([0] + cps[:-1], cps, logs):
            est.append(np.sort((acc - prev) / (cp1 - cp0))[::-1])
            prev = acc
        est = np.array(est)
        ex = np.sort(logs[-1] / n)[::-1]
        stderr = est.std(axis=0, ddof=1) / np.sqrt(blocks)
        return LyapunovReport(ex, n, stderr, "qr")
    per = []
    for x in points:
        acc = _qr_logs(A.along(x, n), None, r, [n])[-1]
        per.append(np.sort(acc / n)[::-1])
    per = np.array(per)
    ex = per.mean(axis=0)
    stderr = per.std(axis=0, ddof=1) / np.sqrt(len(per)) if len(per) > 1 else np.zeros(size)
    return LyapunovReport(ex, n, stderr, "qr")


def compound(M, k: int):
    """k-th compound matrix: minors indexed by increasing k-subsets (Λ^k M)."""
    M = np.asarray(M)
    size = M.shape[-1]
    if not 1 <= k <= size:
        raise DomainError(f"k must lie in [1, {size}]")
    subsets = list(combinations(range(size), k))
    out = np.empty(M.shape[:-2] + (len(subsets), len(subsets)), dtype=M.dtype)
    for a, I in enumerate(subsets):
        rows = M[..., I, :]
        for b, Jc in enumerate(subsets):
            out[..., a, b] = np.linalg.det(rows[..., :, Jc])
    return out


def top_exponent_exterior(A: Cocycle, k: int, n: int = 10_000, samples: int = 16, rng=None,
                          r: int = RENORM_STEPS) -> float:
    """Top Lyapunov exponent of the exterior-power cocycle Λ^k A (equals L^k)."""
    size = 2 * A.d
    if not 1 <= k <= size:
        raise DomainError(f"k must lie in [1, {size}]")
    if A.is_periodic:
        P = compound(period_map(A), k)
        return float(np.log(np.max(np.abs(np.linalg.eigvals(P)))) / A.base.n)
    rng = np.random.default_rng(rng)
    vals = []
    for x in A.sample_points(samples, rng, min_span=n):
        mats = compound(A.along(x, n), k)
        v = rng.standard_normal(mats.shape[-1]).astype(mats.dtype)
        v /= np.linalg.norm(v)
        acc = 0.0
        for j, M in enumerate(mats, 1):
            v = M @ v
            if j % r == 0 or j == n:
                s = np.linalg.norm(v)
                if not np.isfinite(s) or s == 0:
                    raise NumericError("exterior product overflowed")
                acc += np.log(s)
                v /= s
        vals.append(acc / n)
    return float(np.mean(vals))
