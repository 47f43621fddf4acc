"""Half-duplex relaying over real AWGN links with average power constraints.

The source uses a Gaussian input, so the source-relay term is
``0.5 log2(1 + P1/sigma1^2) (1 - p_u)``. The relay's transmit-state input is
a discrete set of mass points; together with the silence symbol it turns
the destination output into a Gaussian mixture whose differential entropy
has no closed form. Reported rates integrate that entropy with adaptive
Gauss-Kronrod quadrature; the mass-point search itself uses a fine uniform
grid (trapezoid rule), which is spectrally accurate for Gaussian mixtures.

Distances below are in units of the relay-destination noise standard
deviation inside the search and scaled back on return.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate, optimize
from scipy.special import logsumexp, softmax

from .search import bisect_sign_change, golden_section_max
from .solver import CapacityResult, Regime

LOG2E = math.log2(math.e)
HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
TRUNCATION_SIGMAS = 10.0
GRID_STEP = 0.2
QUAD_TOL = 1e-9
ROOT_TOL = 1e-8
SMALL_K_MAX = 8
GROWTH_LADDER = (12, 16, 24, 32, 48, 64, 96, 128)
DEFAULT_K_MAX = 128
LADDER_STOP_TOL = 1e-5
BRACKET_STEP = 0.02
MERGE_DIST = 1e-3


class QuadratureError(RuntimeError):
    def __init__(self, estimate: float, tol: float):
        self.estimate = estimate
        super().__init__(f"quadrature error estimate {estimate:.3g} exceeds tolerance {tol:.3g}")


def gaussian_entropy(variance: float) -> float:
    """Differential entropy of N(0, variance) in bits."""
    return 0.5 * math.log2(2.0 * math.pi * math.e * variance)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class AwgnPair:
    """Powers and noise variances of the source-relay and relay-destination links."""

    p1: float
    p2: float
    sigma1_sq: float = 1.0
    sigma2_sq: float = 1.0

    def __post_init__(self):
        for name in ("p1", "p2", "sigma1_sq", "sigma2_sq"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name}={v} must be positive and finite")

    @classmethod
    def from_snr_db(cls, snr1_db: float, snr2_db: float | None = None) -> AwgnPair:
        """Unit noise variances with the given link SNRs in dB."""
        snr2_db = snr1_db if snr2_db is None else snr2_db
        return cls(db_to_linear(snr1_db), db_to_linear(snr2_db))

    @property
    def snr1(self) -> float:
        return self.p1 / self.sigma1_sq

    @property
    def snr2(self) -> float:
        return self.p2 / self.sigma2_sq

    @property
    def sr_capacity(self) -> float:
        return 0.5 * math.log2(1.0 + self.snr1)

    @property
    def rd_capacity(self) -> float:
        return 0.5 * math.log2(1.0 + self.snr2)


@dataclass(frozen=True, eq=False)
class MassPointDist:
    """Discrete relay input for the transmit state: ``weights`` at ``locations``."""

    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        x = np.array(self.locations, dtype=float)
        w = np.array(self.weights, dtype=float)
        if x.ndim != 1 or x.shape != w.shape or x.size == 0:
            raise ValueError("locations and weights must be equal-length 1-d arrays")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-10:
            raise ValueError("weights must be nonnegative and sum to 1")
        if np.any(x == 0):
            raise ValueError("mass points may not sit on the silence symbol 0")
        x.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "locations", x)
        object.__setattr__(self, "weights", w)

    @classmethod
    def antipodal(cls, p2: float) -> MassPointDist:
        a = math.sqrt(p2)
        return cls([-a, a], [0.5, 0.5])

    @property
    def k(self) -> int:
        return self.locations.size

    @property
    def power(self) -> float:
        return float(self.weights @ self.locations**2)

    def mirrored(self) -> MassPointDist:
        return MassPointDist(-self.locations, self.weights)

    def to_dict(self) -> dict:
        order = np.argsort(self.locations)
        return {
            "locations": [float(v) for v in self.locations[order]],
            "weights": [float(v) for v in self.weights[order]],
        }


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    """Gaussian mixture density; ``variance`` is shared or given per component."""

    means: np.ndarray
    weights: np.ndarray
    variance: float | np.ndarray

    def __post_init__(self):
        m = np.atleast_1d(np.array(self.means, dtype=float))
        w = np.atleast_1d(np.array(self.weights, dtype=float))
        var = np.broadcast_to(np.array(self.variance, dtype=float), m.shape).copy()
        if m.shape != w.shape:
            raise ValueError("means and weights must have equal length")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-10:
            raise ValueError("mixture weights must be nonnegative and sum to 1")
        if np.any(var <= 0):
            raise ValueError("variance must be positive")
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "variance", var)

    @classmethod
    def relay_output(
        cls, p_u: float, dist: MassPointDist, sigma2_sq: float
    ) -> GaussianMixture:
        """Destination output density: silence at 0 plus the transmit points."""
        return cls(
            np.r_[0.0, dist.locations],
            np.r_[1.0 - p_u, p_u * dist.weights],
            sigma2_sq,
        )

    def logpdf(self, y: ArrayLike) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        keep = self.weights > 0
        m, w, v = self.means[keep], self.weights[keep], self.variance[keep]
        z = -0.5 * (y[..., None] - m) ** 2 / v - 0.5 * np.log(2.0 * np.pi * v)
        return logsumexp(z, b=w, axis=-1)

    def support_intervals(self) -> list[tuple[float, float]]:
        """Merged ``mean +/- 10 sigma`` windows of the nonzero components."""
        keep = self.weights > 0
        sd = np.sqrt(self.variance[keep])
        lo = self.means[keep] - TRUNCATION_SIGMAS * sd
        hi = self.means[keep] + TRUNCATION_SIGMAS * sd
        order = np.argsort(lo)
        merged: list[list[float]] = []
        for a, b in zip(lo[order], hi[order]):
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return [(a, b) for a, b in merged]


def mixture_entropy(mix: GaussianMixture, tol: float = QUAD_TOL) -> float:
    """Differential entropy of ``mix`` in bits by adaptive quadrature.

    Integrates over the union of the components' 10-sigma windows; raises
    ``QuadratureError`` when the accumulated error estimate exceeds ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")

    def integrand(y):
        lp = float(mix.logpdf(y))
        return -math.exp(lp) * lp * LOG2E

    intervals = mix.support_intervals()
    share = tol / len(intervals)
    total, err = 0.0, 0.0
    for a, b in intervals:
        inside = np.unique(mix.means[(mix.means > a) & (mix.means < b)])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, e = integrate.quad(
                integrand, a, b, points=inside if inside.size else None,
                epsabs=share, epsrel=0.0, limit=1000,
            )
        total += val
        err += e
    if err > tol:
        raise QuadratureError(err, tol)
    return total


def rd_rate_awgn(
    p_u: float, dist: MassPointDist, sigma2_sq: float, tol: float = QUAD_TOL
) -> float:
    """I(X2;Y2) in bits for the silence-augmented mass-point relay input."""
    if not 0.0 <= p_u <= 1.0:
        raise ValueError(f"p_u={p_u} outside [0, 1]")
    if p_u == 0.0:
        return 0.0
    h = mixture_entropy(GaussianMixture.relay_output(p_u, dist, sigma2_sq), tol)
    return max(h - gaussian_entropy(sigma2_sq), 0.0)


def sr_rate_awgn(p_u: float, pair: AwgnPair) -> float:
    """Source-relay term with Gaussian source input."""
    if not 0.0 <= p_u <= 1.0:
        raise ValueError(f"p_u={p_u} outside [0, 1]")
    return pair.sr_capacity * (1.0 - p_u)


# --- mass-point search (unit noise variance) ---------------------------------


def _grid_terms(x: np.ndarray, w: np.ndarray, p_u: float):
    """Mutual information (nats) and its partial derivatives on a fixed grid.

    Returns ``(I, D, dI/dx)`` where ``D[k]`` is the relative entropy of the
    k-th transmit component to the output mixture, so that
    ``I = (1 - p_u) D_silence + p_u sum_k w_k D[k]``.
    """
    mu = np.r_[0.0, x]
    a = np.r_[1.0 - p_u, p_u * w]
    lo = math.floor((mu.min() - TRUNCATION_SIGMAS) / GRID_STEP)
    hi = math.ceil((mu.max() + TRUNCATION_SIGMAS) / GRID_STEP)
    y = GRID_STEP * np.arange(lo, hi + 1)
    lphi = -0.5 * (y[None, :] - mu[:, None]) ** 2 - HALF_LOG_2PI
    phi = np.exp(lphi)
    live = a > 0
    top = lphi[live].max(axis=0)
    lf = top + np.log(a[live] @ np.exp(lphi[live] - top))
    d = GRID_STEP * (phi * (lphi - lf)).sum(axis=1)
    grad_x = -a[1:] * GRID_STEP * ((phi[1:] * (y[None, :] - x[:, None])) @ lf)
    return float(a @ d), d[1:], grad_x


def _polish(x: np.ndarray, w: np.ndarray, p_u: float, snr: float, max_iter: int = 5000):
    """Joint quasi-Newton ascent over weights and locations at fixed power.

    Weights are a softmax of free logits; locations are rescaled so the
    average power always equals ``snr``.
    """
    k = x.size

    def unpack(params):
        wt = softmax(params[:k])
        z = params[k:]
        s = wt @ z**2
        return wt, z, s

    def neg(params):
        wt, z, s = unpack(params)
        c = math.sqrt(snr / s)
        value, d, gx = _grid_terms(c * z, wt, p_u)
        gxz = gx @ z
        g_w = p_u * d - 0.5 * gxz * c * z**2 / s
        g_theta = wt * (g_w - wt @ g_w)
        g_z = c * gx - c * gxz * wt * z / s
        return -value, -np.r_[g_theta, g_z]

    start = np.r_[np.log(np.maximum(w, 1e-300)), x]
    res = optimize.minimize(
        neg, start, jac=True, method="L-BFGS-B",
        options={"maxiter": max_iter, "gtol": 1e-8, "ftol": 1e-12},
    )
    params = res.x if -res.fun >= -neg(start)[0] else start
    wt, z, s = unpack(params)
    return z * math.sqrt(snr / s), wt, -neg(params)[0]


def _equispaced(k: int, snr: float):
    x = np.linspace(-1.0, 1.0, k)
    if k % 2:
        # keep clear of the silence symbol
        x = np.linspace(-1.0, 1.0, k + 1)
        x = np.r_[x[: k // 2], x[k // 2 + 1 :]][:k] if k > 1 else np.array([1.0])
    w = np.full(k, 1.0 / k)
    return x * math.sqrt(snr / (w @ x**2)), w


def _random_start(k: int, snr: float, rng: np.random.Generator):
    x = rng.normal(0.0, math.sqrt(snr), k)
    x[x == 0] = math.sqrt(snr)
    w = rng.dirichlet(np.ones(k))
    return x * math.sqrt(snr / (w @ x**2)), w


def _grow(x: np.ndarray, w: np.ndarray, k: int, snr: float):
    """Add points in the widest gaps (silence included) or past the edges."""
    xs, ws = list(x), list(w)
    fill = float(np.mean(w)) / 2
    while len(xs) < k:
        pts = np.sort(np.r_[xs, 0.0])
        gaps = np.diff(pts)
        i = int(np.argmax(gaps))
        if gaps[i] > 1.0:
            new = 0.5 * (pts[i] + pts[i + 1])
        else:
            new = (pts[-1] + 1.0) if len(xs) % 2 else (pts[0] - 1.0)
        xs.append(new)
        ws.append(fill)
    xa, wa = np.array(xs), np.array(ws) / np.sum(ws)
    return xa * math.sqrt(snr / (wa @ xa**2)), wa


def _ladder(k_max: int) -> list[int]:
    small = list(range(2, min(k_max, SMALL_K_MAX) + 1))
    return small + [k for k in GROWTH_LADDER if SMALL_K_MAX < k <= k_max]


def _clean(x: np.ndarray, w: np.ndarray, snr: float):
    """Drop negligible points, merge coincident ones, restore the power."""
    keep = (w > 1e-14) & (x != 0)
    x, w = x[keep], w[keep] / w[keep].sum()
    order = np.argsort(x)
    xs, ws = [], []
    for xi, wi in zip(x[order], w[order]):
        if xs and xi - xs[-1] < MERGE_DIST and np.sign(xi) == np.sign(xs[-1]):
            xs[-1] = (xs[-1] * ws[-1] + xi * wi) / (ws[-1] + wi)
            ws[-1] += wi
        else:
            xs.append(xi)
            ws.append(wi)
    x, w = np.array(xs), np.array(ws)
    return x * math.sqrt(snr / (w @ x**2)), w


def _search(p_u: float, snr: float, k_max: int, restarts: int, seed: int):
    """Best (x, w, value) over the K ladder, unit noise variance."""
    best = None
    prev_value = -np.inf
    for k in _ladder(k_max):
        if k <= SMALL_K_MAX:
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))
            starts = [_equispaced(k, snr)]
            starts += [_random_start(k, snr, rng) for _ in range(restarts)]
        else:
            starts = [_grow(best[0], best[1], k, snr)]
        for x0, w0 in starts:
            cand = _polish(x0, w0, p_u, snr)
            if best is None or cand[2] > best[2]:
                best = cand
        if k > SMALL_K_MAX and best[2] - prev_value < LADDER_STOP_TOL / LOG2E:
            break
        prev_value = best[2]
    return best


def optimize_mass_points(
    p_u: float,
    p2: float,
    sigma2_sq: float,
    k_max: int = DEFAULT_K_MAX,
    tol: float = QUAD_TOL,
    restarts: int = 20,
    seed: int = 0,
) -> tuple[MassPointDist, float]:
    """Search relay mass-point inputs at fixed average power ``p2``.

    Every K from 2 to 8 is tried from a symmetric equispaced start and
    ``restarts`` random starts; beyond 8 the ladder 12, 16, 24, ... is
    followed, each step warm-started by inserting points into the best
    distribution so far, until a step gains less than 1e-5 bits. The best distribution is
    returned with its rate from adaptive quadrature. The value is a lower
    bound on the maximum over all inputs and never decreases with ``k_max``.
    """
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    if not 0.0 <= p_u <= 1.0:
        raise ValueError(f"p_u={p_u} outside [0, 1]")
    if p_u == 0.0:
        # every input is silent; nothing to optimize
        return MassPointDist.antipodal(p2), 0.0
    snr = p2 / sigma2_sq
    x, w, _ = _search(p_u, snr, k_max, restarts, seed)
    x, w = _clean(x, w, snr)
    dist = MassPointDist(x * math.sqrt(sigma2_sq), w)
    return dist, rd_rate_awgn(p_u, dist, sigma2_sq, tol)


# --- capacity and baselines --------------------------------------------------


def gaussian_relay_rate(pair: AwgnPair, tol: float = ROOT_TOL, quad_tol: float = QUAD_TOL) -> float:
    """Achievable rate when the transmitting relay uses a Gaussian input.

    The destination then sees a mixture of N(0, P2 + sigma2^2) with weight
    p_u and N(0, sigma2^2) with weight 1 - p_u; p_u is chosen where the
    source-relay term meets that mixture's mutual information.
    """
    h_noise = gaussian_entropy(pair.sigma2_sq)

    def rd(p):
        if p == 0.0:
            return 0.0
        mix = GaussianMixture([0.0, 0.0], [p, 1.0 - p], [pair.p2 + pair.sigma2_sq, pair.sigma2_sq])
        return max(mixture_entropy(mix, quad_tol) - h_noise, 0.0)

    return _max_min(pair, rd, tol)[0]


def _max_min(pair: AwgnPair, rd, tol: float):
    """max over p of min{sr(p), rd(p)} for concave ``rd`` with rd(0) = 0.

    Returns ``(rate, p_u, regime)``.
    """
    c1 = pair.sr_capacity
    peak, rd_peak = golden_section_max(rd, 0.0, 1.0, tol)
    if c1 * (1.0 - peak) > rd_peak + tol:
        return rd_peak, peak, Regime.RELAY_LINK_LIMITED
    lo, hi = bisect_sign_change(lambda p: c1 * (1.0 - p) - rd(p), 0.0, peak, tol)
    p = 0.5 * (lo + hi)
    return min(c1 * (1.0 - p), rd(p)), p, Regime.INTERSECTION


def awgn_capacity(
    pair: AwgnPair,
    k_max: int = DEFAULT_K_MAX,
    tol: float = ROOT_TOL,
    restarts: int = 20,
    seed: int = 0,
    quad_tol: float = QUAD_TOL,
) -> CapacityResult:
    """Capacity with AWGN links, Gaussian source input and a searched relay input.

    A full mass-point search runs once at the crossing point of the
    Gaussian-input bound; the crossing of the two terms is then bracketed
    by stepping outward from there and refined with Brent's method,
    re-optimizing the relay input at every probe from the nearest
    distribution found so far. The reported capacity is evaluated with
    adaptive quadrature at the final point, so it is an achievable rate.
    """
    c1 = pair.sr_capacity
    snr = pair.snr2
    scale = math.sqrt(pair.sigma2_sq)

    p0 = _gaussian_crossing(pair)
    x, w, _ = _search(p0, snr, k_max, restarts, seed)
    known = {p0: (x, w)}

    def rd_search(p: float) -> float:
        if p <= 0.0:
            return 0.0
        near = min(known, key=lambda q: abs(q - p))
        xs, ws, value = _polish(*known[near], p, snr)
        known[p] = (xs, ws)
        return value * LOG2E

    def diff(p: float) -> float:
        return c1 * (1.0 - p) - rd_search(p)

    bracket = _bracket(diff, p0)
    if bracket is None:
        # relay term stays below the source term: take the peak of the relay term
        p_star, _ = golden_section_max(rd_search, 0.0, 1.0, tol)
        regime = Regime.RELAY_LINK_LIMITED
    else:
        p_star = optimize.brentq(diff, *bracket, xtol=tol)
        rd_search(p_star)
        regime = Regime.INTERSECTION

    xs, ws = _clean(*known[p_star], snr)
    dist = MassPointDist(xs * scale, ws)
    rd = rd_rate_awgn(p_star, dist, pair.sigma2_sq, quad_tol)
    sr = c1 * (1.0 - p_star)
    return CapacityResult(
        capacity=min(sr, rd),
        p_u_star=p_star,
        regime=regime,
        src_input={"gaussian_variance": pair.p1},
        relay_input=dist,
        sr_term=sr,
        rd_term=rd,
        p_u_prime=p_star if regime is Regime.INTERSECTION else None,
    )


def _bracket(diff, p0: float) -> tuple[float, float] | None:
    """Interval around ``p0`` where the decreasing ``diff`` changes sign.

    None when ``diff`` is still positive at p = 1.
    """
    step = BRACKET_STEP
    if diff(p0) > 0:
        lo = p0
        while lo < 1.0:
            hi = min(lo + step, 1.0)
            if diff(hi) <= 0:
                return lo, hi
            lo, step = hi, 2 * step
        return None
    hi = p0
    while True:
        lo = max(hi - step, 0.0)
        if lo == 0.0 or diff(lo) > 0:
            return lo, hi
        hi, step = lo, 2 * step


def _gaussian_crossing(pair: AwgnPair) -> float:
    """Crossing point for the Gaussian relay input, on the search grid."""
    snr, c1 = pair.snr2, pair.sr_capacity
    lo = math.floor(-TRUNCATION_SIGMAS * math.sqrt(1.0 + snr) / GRID_STEP)
    y = GRID_STEP * np.arange(lo, -lo + 1)
    l_wide = -0.5 * y**2 / (1.0 + snr) - 0.5 * math.log(2 * math.pi * (1.0 + snr))
    l_noise = -0.5 * y**2 - HALF_LOG_2PI

    def diff(p):
        lf = logsumexp([l_wide, l_noise], b=[[p], [1.0 - p]], axis=0)
        h = -GRID_STEP * np.sum(np.exp(lf) * lf)
        return c1 * (1.0 - p) - (h - 0.5 * math.log(2 * math.pi * math.e)) * LOG2E

    if diff(1.0 - 1e-12) > 0:
        return 0.5
    return optimize.brentq(diff, 1e-12, 1.0 - 1e-12, xtol=1e-6)


def awgn_conventional_rate(pair: AwgnPair) -> float:
    """Alternating codeword-by-codeword relaying with the best time split.

    The split tau solves tau C_sr = (1 - tau) C_rd, giving
    C_sr C_rd / (C_sr + C_rd); equal SNRs reduce to log2(1 + SNR) / 4.
    """
    c1, c2 = pair.sr_capacity, pair.rd_capacity
    if c1 + c2 == 0:
        return 0.0
    return c1 * c2 / (c1 + c2)


def conventional_snr_gain_db(rate: float, snr_db: float) -> float:
    """How many dB beyond ``snr_db`` symmetric conventional relaying needs to reach ``rate``."""
    return linear_to_db(2.0 ** (4.0 * rate) - 1.0) - snr_db
