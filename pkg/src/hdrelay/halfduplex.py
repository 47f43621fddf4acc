"""Half-duplex relay input model.

The relay alphabet always reserves index 0 for the silence (zero) symbol.
The relay is silent with probability ``1 - p_u`` and otherwise sends a
nonzero symbol drawn from ``p_v``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .infotheory import (
    BA_MAX_ITER,
    BA_TOL,
    DmcChannel,
    Pmf,
    blahut_arimoto,
    channel_capacity,
)

SILENCE = 0


@dataclass(frozen=True)
class RelayAlphabet:
    """Ordered relay input labels; ``symbols[0]`` is the silence symbol."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        if len(self.symbols) < 2:
            raise ValueError("relay alphabet needs silence plus at least one nonzero symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("relay alphabet labels must be distinct")

    @classmethod
    def from_labels(cls, labels: Sequence, silence_index: int = 0) -> RelayAlphabet:
        """Reorder ``labels`` so that the silence symbol comes first."""
        labels = [str(s) for s in labels]
        silence = labels.pop(silence_index)
        return cls(tuple([silence, *labels]))

    @property
    def transmit_symbols(self) -> tuple[str, ...]:
        return self.symbols[1:]


@dataclass(frozen=True, eq=False)
class RelayPolicy:
    """Relay transmit probability ``p_u`` and nonzero-symbol pmf ``p_v``.

    ``p_v`` covers the full relay alphabet and must put no mass on the
    silence symbol.
    """

    p_u: float
    p_v: Pmf

    def __post_init__(self):
        if not 0.0 <= self.p_u <= 1.0:
            raise ValueError(f"p_u={self.p_u} outside [0, 1]")
        if not isinstance(self.p_v, Pmf):
            object.__setattr__(self, "p_v", Pmf(self.p_v))
        if len(self.p_v) < 2:
            raise ValueError("p_v must cover the silence symbol and at least one nonzero symbol")
        if self.p_v.probs[SILENCE] != 0.0:
            raise ValueError("p_v assigns mass to the silence symbol")

    @classmethod
    def from_nonzero(cls, p_u: float, probs) -> RelayPolicy:
        """Policy from a pmf over the nonzero symbols only."""
        return cls(p_u, Pmf(np.concatenate([[0.0], np.asarray(probs, dtype=float)])))


def marginal_x2(policy: RelayPolicy) -> Pmf:
    """p(x2) = p_u p_v(x2) + (1 - p_u) delta(x2)."""
    p = policy.p_u * policy.p_v.probs
    p[SILENCE] += 1.0 - policy.p_u
    return Pmf(p / p.sum())


def _neg_plogp(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    nz = p > 0
    out[nz] = -p[nz] * np.log2(p[nz])
    return out


def mi_relay_dest(policy: RelayPolicy, channel: DmcChannel) -> float:
    """I(X2;Y2) at the given relay policy, built from its silence/transmit parts.

    H(Y2) mixes p(y2|x2=0) with the transmit-state output pmf, and H(Y2|X2)
    weights the per-symbol row entropies by (1 - p_u) and p_u p_v.
    """
    w = channel.transition
    if w.shape[0] != len(policy.p_v):
        raise ValueError(
            f"channel has {w.shape[0]} relay inputs, policy covers {len(policy.p_v)}"
        )
    p_u, p_v = policy.p_u, policy.p_v.probs
    y_silent = w[SILENCE]
    y_transmit = p_v[1:] @ w[1:]
    h_y = _neg_plogp(p_u * y_transmit + (1.0 - p_u) * y_silent).sum()
    row_h = _neg_plogp(w).sum(axis=1)
    h_y_given_x = p_u * (p_v[1:] @ row_h[1:]) + (1.0 - p_u) * row_h[SILENCE]
    return float(max(h_y - h_y_given_x, 0.0))


def mi_relay_dest_slope(policy: RelayPolicy, channel: DmcChannel) -> float:
    """Derivative of I(X2;Y2) in p_u with p_v held fixed, in bits.

    At the optimal p_v this is the slope of the maximized relay term.
    """
    w = channel.transition
    p_u, p_v = policy.p_u, policy.p_v.probs
    y_silent = w[SILENCE]
    y_transmit = p_v[1:] @ w[1:]
    q = p_u * y_transmit + (1.0 - p_u) * y_silent
    diff = y_transmit - y_silent
    nz = q > 0
    row_h = _neg_plogp(w).sum(axis=1)
    dh_y = -float(diff[nz] @ np.log2(q[nz]))
    if np.any(diff[~nz] > 0):
        return float("inf")
    return dh_y - (p_v[1:] @ row_h[1:] - row_h[SILENCE])


def max_mi_relay_dest(
    p_u: float, channel: DmcChannel, tol: float = BA_TOL, max_iter: int = BA_MAX_ITER
) -> tuple[float, Pmf]:
    """Maximize I(X2;Y2) over p_v with the silence mass held at ``1 - p_u``.

    Returns the maximum (within ``tol``, from below) and the maximizing
    ``p_v`` over the full relay alphabet.
    """
    if not 0.0 <= p_u <= 1.0:
        raise ValueError(f"p_u={p_u} outside [0, 1]")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = channel.input_size
    if n < 2:
        raise ValueError("relay channel needs silence plus at least one nonzero input")
    if n == 2:
        p_v = Pmf.point(2, 1)
        return mi_relay_dest(RelayPolicy(p_u, p_v), channel), p_v
    if p_u == 0.0:
        return 0.0, Pmf.from_weights(np.r_[0.0, np.ones(n - 1)])
    if p_u == 1.0:
        value, p_t = channel_capacity(channel.restrict_inputs(np.arange(1, n)), tol, max_iter)
        return value, Pmf(np.r_[0.0, p_t.probs])

    free = np.ones(n, dtype=bool)
    free[SILENCE] = False
    fixed = np.zeros(n)
    fixed[SILENCE] = 1.0 - p_u
    value, p, _ = blahut_arimoto(channel.transition, free, fixed, tol, max_iter)
    p_v = Pmf.from_weights(np.r_[0.0, p[1:]])
    return value, p_v

