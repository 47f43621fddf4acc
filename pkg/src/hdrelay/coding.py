"""Monte Carlo model of the block-Markov half-duplex relaying scheme.

The relay codebook is drawn symbol by symbol: silence with probability
``1 - p_u``, otherwise a symbol from ``p_v``. Within a block the source
transmits its next codeword symbol exactly at the relay's silent slots, so
the silence pattern itself carries the relay's message to the destination.

Decoding is maximum likelihood over the whole codebook, which limits the
model to small codebooks (at most 2**20 codewords).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binomtest

from .halfduplex import SILENCE, RelayPolicy
from .infotheory import DmcChannel, Pmf

MAX_MESSAGE_BITS = 20
IDLE_SYMBOL = 0
DECODE_CHUNK = 1 << 15


class ReceptionMode(str, enum.Enum):
    SWITCHING = "switching"
    FD_LIKE = "fd-like"


class HalfDuplexViolation(AssertionError):
    """A symbol collected by the relay came from a slot where it was transmitting."""


@dataclass(frozen=True)
class CodingConfig:
    k: int
    rate: float
    p_u: float
    n_blocks: int = 8
    seed: int = 0
    reception_mode: ReceptionMode = ReceptionMode.SWITCHING

    def __post_init__(self):
        object.__setattr__(self, "reception_mode", ReceptionMode(self.reception_mode))
        if self.k < 1:
            raise ValueError("block length k must be positive")
        if not self.rate > 0:
            raise ValueError("rate must be positive")
        if not 0.0 < self.p_u < 1.0:
            raise ValueError(f"p_u={self.p_u} must lie strictly inside (0, 1)")
        if self.n_blocks < 1:
            raise ValueError("n_blocks must be at least 1")
        if self.message_bits > MAX_MESSAGE_BITS:
            raise ValueError(
                f"codebook size exceeds desk-scale limit: 2^{self.message_bits} > 2^{MAX_MESSAGE_BITS}"
            )

    @property
    def message_bits(self) -> int:
        # tolerate float noise such as 10 * 0.4 = 4.000000000000001
        return math.ceil(round(self.k * self.rate, 9))

    @property
    def n_codewords(self) -> int:
        return 1 << self.message_bits

    @property
    def source_length(self) -> int:
        return int(math.floor(round(self.k * (1.0 - self.p_u), 9)))

    @property
    def effective_rate(self) -> float:
        return self.n_blocks * self.k * self.rate / ((self.n_blocks + 1) * self.k)


@dataclass(frozen=True, eq=False)
class SourceCodebook:
    codewords: np.ndarray  # (M, floor(k (1 - p_u))) source symbol indices


@dataclass(frozen=True, eq=False)
class RelayCodebook:
    codewords: np.ndarray  # (M, k) relay symbol indices, 0 = silence


@dataclass(frozen=True)
class SimReport:
    relay_block_error_rate: float
    dest_block_error_rate: float
    end_to_end_message_error: float
    effective_rate: float
    trials: int
    relay_blocks: int
    dest_blocks: int
    ci95: dict

    def to_json_dict(self) -> dict:
        return {
            "relay_bler": self.relay_block_error_rate,
            "dest_bler": self.dest_block_error_rate,
            "msg_err": self.end_to_end_message_error,
            "effective_rate": self.effective_rate,
            "trials": self.trials,
            "ci95": {k: list(v) for k, v in self.ci95.items()},
        }


def codebook_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1, trial)))


def build_codebooks(
    config: CodingConfig,
    src_dist: Pmf,
    relay_policy: RelayPolicy,
    rng: np.random.Generator | None = None,
) -> tuple[SourceCodebook, RelayCodebook]:
    """Draw both codebooks i.i.d.; deterministic for a given seed."""
    if abs(relay_policy.p_u - config.p_u) > 1e-12:
        raise ValueError(f"policy p_u={relay_policy.p_u} differs from config p_u={config.p_u}")
    rng = rng if rng is not None else codebook_rng(config.seed)
    m = config.n_codewords
    src = rng.choice(len(src_dist), size=(m, config.source_length), p=src_dist.probs)
    transmit = rng.random((m, config.k)) < config.p_u
    symbols = rng.choice(len(relay_policy.p_v), size=(m, config.k), p=relay_policy.p_v.probs)
    relay = np.where(transmit, symbols, SILENCE)
    return SourceCodebook(src), RelayCodebook(relay)


def channel_output(channel: DmcChannel, inputs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One output sample per input symbol."""
    inputs = np.asarray(inputs, dtype=int)
    if inputs.size == 0:
        return inputs.copy()
    cdf = np.cumsum(channel.transition, axis=1)[inputs]
    u = rng.random(inputs.size)
    y = (u[:, None] >= cdf).sum(axis=1)
    return np.minimum(y, channel.output_size - 1)


def transmit_block(
    src_cw: np.ndarray,
    relay_cw: np.ndarray,
    sr: DmcChannel,
    rd: DmcChannel,
    mode: ReceptionMode,
    rng: np.random.Generator,
    source_schedule: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate one block of k channel uses.

    The source sends its next codeword symbol in each slot it believes the
    relay is silent (``source_schedule``, by default the relay codeword) and
    the idle symbol once its codeword is exhausted. Returns the relay's
    collected outputs at its own silent slots and the destination outputs
    for all k slots.
    """
    relay_cw = np.asarray(relay_cw, dtype=int)
    src_cw = np.asarray(src_cw, dtype=int)
    schedule = relay_cw if source_schedule is None else np.asarray(source_schedule, dtype=int)
    if schedule.shape != relay_cw.shape:
        raise ValueError("source schedule and relay codeword lengths differ")
    mode = ReceptionMode(mode)
    k = relay_cw.size

    # source input per slot; -1 marks a slot where the source stays silent
    x1 = np.full(k, -1)
    src_slots = np.flatnonzero(schedule == SILENCE)
    n_sent = min(src_slots.size, src_cw.size)
    x1[src_slots] = IDLE_SYMBOL
    x1[src_slots[:n_sent]] = src_cw[:n_sent]

    listen = np.flatnonzero(relay_cw == SILENCE)
    # a silent source slot reaches the relay as the idle symbol
    heard = channel_output(sr, np.where(x1[listen] >= 0, x1[listen], IDLE_SYMBOL), rng)
    if mode is ReceptionMode.SWITCHING:
        origin = listen
        relay_rx = heard
    else:
        # the relay listens in every slot and discards those where it transmitted
        full = np.full(k, -1)
        full[listen] = heard
        origin = np.flatnonzero(relay_cw == SILENCE)
        relay_rx = full[origin]
    if np.any(relay_cw[origin] != SILENCE):
        raise HalfDuplexViolation("relay collected a symbol from a transmitting slot")

    dest_rx = channel_output(rd, relay_cw, rng)
    return relay_rx, dest_rx


def _log_matrix(channel: DmcChannel) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(channel.transition)


def _ml_index(codewords: np.ndarray, received: np.ndarray, logw: np.ndarray) -> int:
    best, best_ll = 0, -np.inf
    for start in range(0, codewords.shape[0], DECODE_CHUNK):
        block = codewords[start : start + DECODE_CHUNK]
        ll = logw[block, received[None, :]].sum(axis=1)
        i = int(np.argmax(ll))
        if ll[i] > best_ll:
            best, best_ll = start + i, ll[i]
    return best


def decode_relay(relay_rx: np.ndarray, codebook: SourceCodebook, sr: DmcChannel) -> int:
    """ML estimate of the source message from the relay's collected outputs.

    Only the first ``min(len(relay_rx), L)`` symbols enter the likelihood:
    untransmitted codeword symbols are dropped, surplus idle slots ignored.
    Ties go to the lowest index.
    """
    relay_rx = np.asarray(relay_rx, dtype=int)
    n = min(relay_rx.size, codebook.codewords.shape[1])
    return _ml_index(codebook.codewords[:, :n], relay_rx[:n], _log_matrix(sr))


def decode_dest(dest_rx: np.ndarray, codebook: RelayCodebook, rd: DmcChannel) -> int:
    """ML estimate of the relay message over all k slots, silences included."""
    dest_rx = np.asarray(dest_rx, dtype=int)
    if dest_rx.size != codebook.codewords.shape[1]:
        raise ValueError("destination block length differs from relay codeword length")
    return _ml_index(codebook.codewords, dest_rx, _log_matrix(rd))


def wilson_interval(errors: int, total: int) -> tuple[float, float]:
    if total == 0:
        return (0.0, 1.0)
    ci = binomtest(errors, total).proportion_ci(confidence_level=0.95, method="wilson")
    return (float(ci.low), float(ci.high))


def run_simulation(
    config: CodingConfig,
    sr: DmcChannel,
    rd: DmcChannel,
    src_dist: Pmf,
    policy: RelayPolicy,
    trials: int,
) -> SimReport:
    """Run the N+1 block pipeline ``trials`` times.

    Block 1: source sends w(1), relay silent. Blocks 2..N: source sends
    w(i) while the relay forwards its estimate of w(i-1). Block N+1: the
    relay forwards its estimate of w(N), source silent.

    The relay error rate counts relay estimates that differ from w(i); the
    destination error rate counts destination estimates that differ from
    the message the relay actually forwarded.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    src_book, relay_book = build_codebooks(config, src_dist, policy)
    n, k, m = config.n_blocks, config.k, config.n_codewords
    silent = np.zeros(k, dtype=int)
    relay_err = dest_err = msg_err = 0

    for t in range(trials):
        rng = trial_rng(config.seed, t)
        w = rng.integers(m, size=n)
        w_relay = np.empty(n, dtype=int)
        w_dest = np.empty(n, dtype=int)
        for i in range(n + 1):
            if i < n:
                if i == 0:
                    relay_cw = schedule = silent
                else:
                    relay_cw = relay_book.codewords[w_relay[i - 1]]
                    schedule = relay_book.codewords[w[i - 1]]
                relay_rx, dest_rx = transmit_block(
                    src_book.codewords[w[i]], relay_cw, sr, rd,
                    config.reception_mode, rng, source_schedule=schedule,
                )
                w_relay[i] = decode_relay(relay_rx, src_book, sr)
            else:
                relay_cw = relay_book.codewords[w_relay[n - 1]]
                dest_rx = channel_output(rd, relay_cw, rng)
            if i > 0:
                w_dest[i - 1] = decode_dest(dest_rx, relay_book, rd)
        relay_err += int(np.sum(w_relay != w))
        dest_err += int(np.sum(w_dest != w_relay))
        msg_err += int(np.any(w_dest != w))

    blocks = trials * n
    return SimReport(
        relay_block_error_rate=relay_err / blocks,
        dest_block_error_rate=dest_err / blocks,
        end_to_end_message_error=msg_err / trials,
        effective_rate=config.effective_rate,
        trials=trials,
        relay_blocks=blocks,
        dest_blocks=blocks,
        ci95={
            "relay_bler": wilson_interval(relay_err, blocks),
            "dest_bler": wilson_interval(dest_err, blocks),
            "msg_err": wilson_interval(msg_err, trials),
        },
    )

