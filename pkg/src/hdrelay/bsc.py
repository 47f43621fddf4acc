"""Closed-form capacity when both hops are binary symmetric channels.

With the relay sending the symbol 1 whenever it transmits and the source
using a uniform input, the two terms reduce to

    sr(p_u) = (1 - H(eps1)) (1 - p_u)
    rd(p_u) = H(A) - H(eps2),   A = eps2 (1 - 2 p_u) + p_u.

``rd`` peaks at p_u = 1/2 (A = 1/2).
"""

from __future__ import annotations

from dataclasses import dataclass

from .infotheory import DmcChannel, Pmf, binary_entropy
from .search import bisect_sign_change
from .solver import CapacityResult, Regime

ROOT_TOL = 1e-12


@dataclass(frozen=True)
class BscPair:
    """Crossover probabilities of the source-relay and relay-destination BSCs."""

    eps1: float
    eps2: float

    def __post_init__(self):
        for name in ("eps1", "eps2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 0.5:
                raise ValueError(f"{name}={v} outside [0, 1/2]")

    def channels(self) -> tuple[DmcChannel, DmcChannel]:
        return DmcChannel.bsc(self.eps1), DmcChannel.bsc(self.eps2)


def bsc_objective(pair: BscPair, p_u: float) -> tuple[float, float]:
    """The (source-relay, relay-destination) terms at ``p_u``."""
    if not 0.0 <= p_u <= 1.0:
        raise ValueError(f"p_u={p_u} outside [0, 1]")
    a = pair.eps2 * (1.0 - 2.0 * p_u) + p_u
    sr = (1.0 - binary_entropy(pair.eps1)) * (1.0 - p_u)
    rd = binary_entropy(a) - binary_entropy(pair.eps2)
    return sr, max(rd, 0.0)


def bsc_capacity(pair: BscPair, tol: float = ROOT_TOL) -> CapacityResult:
    """Capacity with BSC links.

    Solves sr(p_u) = rd(p_u) by bisection on [0, 1/2]. A crossing below 1/2
    gives the intersection regime; otherwise p_u = 1/2 and the capacity is
    that of the relay-destination link, 1 - H(eps2).
    """
    src = Pmf.uniform(2)
    relay = Pmf.point(2, 1)

    def result(p_u, regime):
        sr, rd = bsc_objective(pair, p_u)
        crossing = p_u if regime is Regime.INTERSECTION else None
        peak = 0.5 if pair.eps2 < 0.5 else None
        return CapacityResult(min(sr, rd), p_u, regime, src, relay, sr, rd, crossing, peak)

    if pair.eps1 == 0.5:
        return result(0.0, Regime.INTERSECTION)
    if pair.eps2 == 0.5:
        # rd vanishes identically; both terms are zero at p_u = 1
        return result(1.0, Regime.INTERSECTION)

    def diff(p):
        sr, rd = bsc_objective(pair, p)
        return sr - rd

    if diff(0.5) >= 0:
        return result(0.5, Regime.RELAY_LINK_LIMITED)
    lo, hi = bisect_sign_change(diff, 0.0, 0.5, tol)
    return result(0.5 * (lo + hi), Regime.INTERSECTION)


def bsc_conventional_rate(pair: BscPair) -> float:
    """Rate of strictly alternating codeword-by-codeword relaying.

    For equal crossovers this is (1 - H(eps)) / 2; unequal links use the
    smaller of the two link capacities.
    """
    return min(1.0 - binary_entropy(pair.eps1), 1.0 - binary_entropy(pair.eps2)) / 2.0
