"""Finite-alphabet information measures and discrete memoryless channels.

All quantities are in bits. The convention 0 log 0 = 0 is used throughout,
and channel outputs that carry zero probability are skipped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

PMF_TOL = 1e-12
BA_MAX_ITER = 10_000
BA_TOL = 1e-9
NEWTON_EVERY = 100
NEWTON_MAX_ITER = 60


class CapacityNotConverged(RuntimeError):
    """Alternating maximization ran out of iterations before the bracket closed."""

    def __init__(self, lower: float, upper: float, iterations: int):
        self.lower = lower
        self.upper = upper
        self.iterations = iterations
        super().__init__(
            f"no convergence after {iterations} iterations: "
            f"capacity in [{lower:.12g}, {upper:.12g}]"
        )


def _frozen(a: ArrayLike, ndim: int) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability vector over a finite alphabet."""

    probs: np.ndarray

    def __post_init__(self):
        p = _frozen(self.probs, 1)
        if p.size == 0:
            raise ValueError("empty pmf")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ValueError("pmf entries must be finite and nonnegative")
        if abs(p.sum() - 1.0) > PMF_TOL:
            raise ValueError(f"pmf sums to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_weights(cls, weights: ArrayLike) -> Pmf:
        """Build a pmf by normalizing nonnegative weights."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or w.sum() <= 0:
            raise ValueError("weights must be nonnegative with positive total")
        return cls(w / w.sum())

    @classmethod
    def uniform(cls, n: int) -> Pmf:
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point(cls, n: int, index: int) -> Pmf:
        p = np.zeros(n)
        p[index] = 1.0
        return cls(p)

    def __len__(self) -> int:
        return self.probs.size

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)

    def __repr__(self) -> str:
        return f"Pmf({np.array2string(self.probs, precision=6)})"


@dataclass(frozen=True, eq=False)
class DmcChannel:
    """Row-stochastic transition matrix ``transition[x, y] = p(y|x)``."""

    transition: np.ndarray

    def __post_init__(self):
        w = _frozen(self.transition, 2)
        if w.shape[0] == 0 or w.shape[1] == 0:
            raise ValueError("channel alphabets must be non-empty")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("transition probabilities must be finite and nonnegative")
        bad = np.abs(w.sum(axis=1) - 1.0) > PMF_TOL
        if np.any(bad):
            raise ValueError(f"rows {np.flatnonzero(bad).tolist()} do not sum to 1")
        object.__setattr__(self, "transition", w)

    @property
    def input_size(self) -> int:
        return self.transition.shape[0]

    @property
    def output_size(self) -> int:
        return self.transition.shape[1]

    @classmethod
    def bsc(cls, eps: float) -> DmcChannel:
        if not 0.0 <= eps <= 1.0:
            raise ValueError(f"crossover probability {eps} outside [0, 1]")
        return cls([[1.0 - eps, eps], [eps, 1.0 - eps]])

    @classmethod
    def bec(cls, erasure: float) -> DmcChannel:
        """Binary erasure channel with outputs (0, 1, erased)."""
        if not 0.0 <= erasure <= 1.0:
            raise ValueError(f"erasure probability {erasure} outside [0, 1]")
        return cls([[1.0 - erasure, 0.0, erasure], [0.0, 1.0 - erasure, erasure]])

    @classmethod
    def noiseless(cls, n: int) -> DmcChannel:
        return cls(np.eye(n))

    def restrict_inputs(self, rows: ArrayLike) -> DmcChannel:
        return DmcChannel(self.transition[np.asarray(rows)])


def _xlog2x(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p, dtype=float)
    nz = p > 0
    out[nz] = p[nz] * np.log2(p[nz])
    return out


def binary_entropy(p):
    """Binary entropy H(p) in bits; accepts scalars or arrays."""
    arr = np.asarray(p, dtype=float)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise ValueError(f"binary_entropy argument outside [0, 1]: {p!r}")
    h = -(_xlog2x(np.atleast_1d(arr)) + _xlog2x(1.0 - np.atleast_1d(arr)))
    return float(h[0]) if arr.ndim == 0 else h.reshape(arr.shape)


def _probs(p) -> np.ndarray:
    return p.probs if isinstance(p, Pmf) else Pmf(np.asarray(p, dtype=float)).probs


def _matrix(channel) -> np.ndarray:
    return channel.transition if isinstance(channel, DmcChannel) else DmcChannel(channel).transition


def entropy(p: Pmf | ArrayLike) -> float:
    """Shannon entropy in bits."""
    return float(-_xlog2x(_probs(p)).sum())


def output_distribution(p: Pmf | ArrayLike, channel: DmcChannel) -> np.ndarray:
    probs, w = _probs(p), _matrix(channel)
    if probs.size != w.shape[0]:
        raise ValueError(f"input pmf has {probs.size} symbols, channel expects {w.shape[0]}")
    return probs @ w


def mutual_information(p: Pmf | ArrayLike, channel: DmcChannel) -> float:
    """I(X;Y) = H(Y) - H(Y|X) for input pmf ``p`` over ``channel``."""
    probs, w = _probs(p), _matrix(channel)
    q = output_distribution(probs, w)
    h_y = -_xlog2x(q).sum()
    h_y_given_x = -(probs * _xlog2x(w).sum(axis=1)).sum()
    return float(max(h_y - h_y_given_x, 0.0))


def relative_entropies(p: np.ndarray, w: np.ndarray) -> np.ndarray:
    """D(W(.|x) || pW) in bits for every input symbol x.

    Rows that reach an output of zero total probability get +inf.
    """
    q = p @ w
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(w > 0, w * (np.log2(w) - np.log2(q)), 0.0)
    return terms.sum(axis=1)


def blahut_arimoto(
    w: np.ndarray,
    free: np.ndarray,
    fixed: np.ndarray,
    tol: float = BA_TOL,
    max_iter: int = BA_MAX_ITER,
) -> tuple[float, np.ndarray, float]:
    """Maximize I(X;Y) over inputs whose ``fixed`` coordinates are pinned.

    ``fixed`` holds the pinned mass for every input (ignored where ``free``
    is True); the free coordinates share the remaining mass. Iterates the
    multiplicative update p_x <- p_x 2^{D_x} on the free set and stops once
    the concavity bound ``m * (max_x D_x - sum_x v_x D_x)`` falls below
    ``tol``, where ``m`` is the free mass and ``v`` its normalized share.

    Plain iterations converge slowly when the optimum leaves some inputs
    unused or the channel is nearly useless, so every ``NEWTON_EVERY``
    iterations an active-set Newton step on the optimality conditions is
    tried and kept when it tightens the bound.

    Returns ``(value, p, gap)`` where ``value`` is a lower bound on the
    maximum and ``value + gap`` an upper bound.
    """
    free = np.asarray(free, dtype=bool)
    p = np.where(free, 0.0, fixed).astype(float)
    mass = 1.0 - p.sum()
    if mass <= 0 or not free.any():
        d = relative_entropies(p, w)
        return float(np.sum(p[p > 0] * d[p > 0])), p, 0.0
    p[free] = mass / free.sum()

    for it in range(max_iter + 1):
        d = relative_entropies(p, w)
        support = p > 0
        value = float(np.sum(p[support] * d[support]))
        d_free = d[free]
        gap = float(mass * (d_free.max() - np.dot(p[free], d_free) / mass))
        if gap <= tol:
            return max(value, 0.0), p, max(gap, 0.0)
        if it == max_iter:
            break
        if it and it % NEWTON_EVERY == 0:
            cand = _newton_polish(p, w, free, mass)
            if _gap(cand, w, free, mass) < gap:
                p = cand
                continue
        step = np.exp2(d_free - d_free.max()) * p[free]
        p[free] = mass * step / step.sum()
    raise CapacityNotConverged(value, value + gap, max_iter)


def _value(p: np.ndarray, w: np.ndarray) -> float:
    d = relative_entropies(p, w)
    support = p > 0
    return float(np.sum(p[support] * d[support]))


def _gap(p: np.ndarray, w: np.ndarray, free: np.ndarray, mass: float) -> float:
    d = relative_entropies(p, w)[free]
    return float(mass * d.max() - np.dot(p[free], d))


def _newton_polish(p: np.ndarray, w: np.ndarray, free: np.ndarray, mass: float) -> np.ndarray:
    """Active-set Newton ascent of I(X;Y) over the free coordinates.

    Works on the inputs currently in use, drops inputs whose mass reaches
    zero and re-admits an unused input whose relative entropy beats every
    used one.
    """
    p = p.copy()
    for _ in range(NEWTON_MAX_ITER):
        d = relative_entropies(p, w)
        used = free & (p > 0)
        unused = free & ~used
        if unused.any() and d[unused].max() > d[used].max() + 1e-12:
            x = np.flatnonzero(unused)[np.argmax(d[unused])]
            p[x] = 1e-6 * mass
            p[free] *= mass / p[free].sum()
            continue
        if d[used].max() - d[used].min() < 1e-14:
            break
        idx = np.flatnonzero(used)
        q = p @ w
        live = q > 0
        rows = w[np.ix_(idx, live)]
        # gradient and Hessian in nats; constant offsets cancel on the simplex
        g = d[idx] * np.log(2.0)
        h = -(rows / q[live]) @ rows.T
        # orthonormal basis of the directions that keep the free mass fixed
        z = np.linalg.svd(np.ones((1, idx.size)))[2][1:].T
        lam, vec = np.linalg.eigh(z.T @ h @ z)
        gr = vec.T @ (z.T @ g)
        flat = np.abs(lam) <= 1e-10 * max(np.abs(lam).max(), 1e-300)
        if np.any(flat & (np.abs(gr) > 1e-13)):
            # the objective is linear along flat directions: ride them to the boundary
            coef, full_step = np.where(flat, gr, 0.0), False
        else:
            coef, full_step = np.where(flat, 0.0, -gr / np.where(flat, 1.0, lam)), True
        delta = z @ (vec @ coef)
        shrink = delta < 0
        if not shrink.any():
            break
        ratios = -p[idx][shrink] / delta[shrink]
        t_edge = float(ratios.min())
        edge = idx[shrink][np.argmin(ratios)]
        t = min(1.0, t_edge) if full_step else t_edge
        base = _value(p, w)
        for _ in range(40):
            cand = p.copy()
            cand[idx] = np.maximum(p[idx] + t * delta, 0.0)
            if t == t_edge:
                cand[edge] = 0.0
            cand[free] *= mass / cand[free].sum()
            if _value(cand, w) >= base - 1e-15:
                break
            t *= 0.5
        else:
            break
        p = cand
    return p


def channel_capacity(
    channel: DmcChannel, tol: float = BA_TOL, max_iter: int = BA_MAX_ITER
) -> tuple[float, Pmf]:
    """Capacity in bits and a capacity-achieving input distribution.

    The returned value is within ``tol`` of the true capacity (from below).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    w = _matrix(channel)
    n = w.shape[0]
    value, p, _ = blahut_arimoto(w, np.ones(n, bool), np.zeros(n), tol, max_iter)
    return value, Pmf.from_weights(p)
