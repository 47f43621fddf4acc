"""Capacity of the two-hop half-duplex relay channel for finite-alphabet links.

The capacity is the max over the relay transmit probability P_U of

    min{ C_sr (1 - P_U),  g(P_U) },   g(P_U) = max_{p_v} I(X2;Y2) at P_U,

where C_sr is the source-relay capacity with the relay silent. The first
term decreases linearly and g is concave, so the optimum sits either at the
crossing point P_U' or at the peak P_U'' of g, whichever comes first.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

from .halfduplex import RelayPolicy, max_mi_relay_dest, mi_relay_dest_slope
from .infotheory import BA_TOL, DmcChannel, Pmf, channel_capacity
from .search import bisect_sign_change, golden_section_max

ARG_TOL = 1e-10
PEAK_WINDOW = 1e-6


class Regime(str, enum.Enum):
    INTERSECTION = "intersection"
    RELAY_LINK_LIMITED = "relay-link-limited"


@dataclass(frozen=True)
class CapacityResult:
    capacity: float
    p_u_star: float
    regime: Regime
    src_input: Any
    relay_input: Any
    sr_term: float
    rd_term: float
    p_u_prime: float | None = None
    p_u_doubleprime: float | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        def enc(v):
            if isinstance(v, Pmf):
                return [float(x) for x in v.probs]
            if hasattr(v, "to_dict"):
                return v.to_dict()
            return v

        return {
            "capacity": self.capacity,
            "p_u_star": self.p_u_star,
            "regime": self.regime.value,
            "sr_term": self.sr_term,
            "rd_term": self.rd_term,
            "p_u_prime": self.p_u_prime,
            "p_u_doubleprime": self.p_u_doubleprime,
            "src_input": enc(self.src_input),
            "relay_input": enc(self.relay_input),
            **self.extra,
        }


class RelayObjective:
    """g(p_u) = max_{p_v} I(X2;Y2) with results cached per p_u."""

    def __init__(self, channel: DmcChannel, tol: float = BA_TOL):
        self.channel = channel
        self.tol = tol
        self._cache: dict[float, tuple[float, Pmf]] = {}

    def solve(self, p_u: float) -> tuple[float, Pmf]:
        p_u = float(p_u)
        hit = self._cache.get(p_u)
        if hit is None:
            hit = self._cache[p_u] = max_mi_relay_dest(p_u, self.channel, self.tol)
        return hit

    def __call__(self, p_u: float) -> float:
        return self.solve(p_u)[0]


def sr_term(p_u: float, sr_channel: DmcChannel, tol: float = BA_TOL) -> float:
    """Source-relay term C_sr (1 - p_u)."""
    if not 0.0 <= p_u <= 1.0:
        raise ValueError(f"p_u={p_u} outside [0, 1]")
    return channel_capacity(sr_channel, tol)[0] * (1.0 - p_u)


def solve_pu_doubleprime(
    rd_channel: DmcChannel,
    tol: float = BA_TOL,
    arg_tol: float = ARG_TOL,
    objective: RelayObjective | None = None,
) -> float:
    """Maximizer of the concave relay-destination term over p_u in [0, 1].

    Golden-section search brackets the peak; since the peak is flat to
    second order, the argument is then sharpened by bisecting on the sign
    of the slope of g inside a small window around it.
    """
    g = objective or RelayObjective(rd_channel, tol)
    x = golden_section_max(g, 0.0, 1.0, arg_tol)[0]
    lo, hi = max(x - PEAK_WINDOW, 0.0), min(x + PEAK_WINDOW, 1.0)

    def slope(p: float) -> float:
        return mi_relay_dest_slope(RelayPolicy(p, g.solve(p)[1]), rd_channel)

    if lo < hi and slope(lo) > 0 >= slope(hi):
        lo, hi = bisect_sign_change(slope, lo, hi, 1e-15)
        return 0.5 * (lo + hi)
    return x


def solve_pu_prime(
    sr_channel: DmcChannel,
    rd_channel: DmcChannel,
    pu_upper: float,
    tol: float = BA_TOL,
    arg_tol: float = ARG_TOL,
    objective: RelayObjective | None = None,
    sr_capacity: float | None = None,
) -> float | None:
    """Crossing point of the two terms on ``[0, pu_upper]``.

    Returns None when the source-relay term still exceeds the relay term at
    ``pu_upper`` by more than ``tol`` (relay-link-limited regime). A
    difference within ``tol`` counts as a crossing at ``pu_upper``.
    """
    g = objective or RelayObjective(rd_channel, tol)
    c_sr = channel_capacity(sr_channel, tol)[0] if sr_capacity is None else sr_capacity

    def diff(p: float) -> float:
        return c_sr * (1.0 - p) - g(p)

    d_upper = diff(pu_upper)
    if d_upper > tol:
        return None
    if d_upper > 0:
        return pu_upper
    lo, hi = bisect_sign_change(diff, 0.0, pu_upper, arg_tol)
    return 0.5 * (lo + hi)


def solve_capacity(
    sr_channel: DmcChannel,
    rd_channel: DmcChannel,
    tol: float = BA_TOL,
    arg_tol: float = ARG_TOL,
) -> CapacityResult:
    """Capacity, optimal p_u and achieving input distributions."""
    if rd_channel.input_size < 2:
        raise ValueError("relay alphabet must contain silence plus a nonzero symbol")
    c_sr, src_input = channel_capacity(sr_channel, tol)
    c_rd, _ = channel_capacity(rd_channel, tol)
    g = RelayObjective(rd_channel, tol)

    def result(p_u, regime, p1=None, p2=None):
        rd, p_v = g.solve(p_u)
        sr = c_sr * (1.0 - p_u)
        return CapacityResult(
            capacity=min(sr, rd),
            p_u_star=p_u,
            regime=regime,
            src_input=src_input,
            relay_input=p_v,
            sr_term=sr,
            rd_term=rd,
            p_u_prime=p1,
            p_u_doubleprime=p2,
        )

    # degenerate hops: report the p_u at which both terms vanish
    if c_sr <= tol:
        return result(0.0, Regime.INTERSECTION)
    if c_rd <= tol:
        return result(1.0, Regime.INTERSECTION)

    pu2 = solve_pu_doubleprime(rd_channel, tol, arg_tol, objective=g)
    pu1 = solve_pu_prime(
        sr_channel, rd_channel, pu2, tol, arg_tol, objective=g, sr_capacity=c_sr
    )
    if pu1 is None:
        return result(pu2, Regime.RELAY_LINK_LIMITED, None, pu2)
    return result(pu1, Regime.INTERSECTION, pu1, pu2)
