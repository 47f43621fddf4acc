"""Capacity and coding tools for the two-hop half-duplex relay channel."""

from .awgn import (
    AwgnPair,
    GaussianMixture,
    MassPointDist,
    awgn_capacity,
    awgn_conventional_rate,
    gaussian_relay_rate,
    mixture_entropy,
    optimize_mass_points,
    rd_rate_awgn,
    sr_rate_awgn,
)
from .bsc import BscPair, bsc_capacity, bsc_conventional_rate, bsc_objective
from .coding import CodingConfig, ReceptionMode, SimReport, run_simulation
from .halfduplex import RelayAlphabet, RelayPolicy, marginal_x2, max_mi_relay_dest, mi_relay_dest
from .infotheory import (
    CapacityNotConverged,
    DmcChannel,
    Pmf,
    binary_entropy,
    channel_capacity,
    entropy,
    mutual_information,
)
from .solver import CapacityResult, Regime, solve_capacity, solve_pu_doubleprime, solve_pu_prime, sr_term

__version__ = "0.1.0"
