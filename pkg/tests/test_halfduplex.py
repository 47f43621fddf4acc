import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from hdrelay.halfduplex import (
    RelayAlphabet,
    RelayPolicy,
    marginal_x2,
    max_mi_relay_dest,
    mi_relay_dest,
    mi_relay_dest_slope,
)
from hdrelay.infotheory import DmcChannel, Pmf, binary_entropy, mutual_information


def random_relay_channel(seed, n_in=None, n_out=None):
    rng = np.random.default_rng(seed)
    n_in = n_in or int(rng.integers(2, 5))
    n_out = n_out or int(rng.integers(2, 5))
    return DmcChannel(rng.dirichlet(np.full(n_out, 0.6), size=n_in))


seeds = st.integers(0, 2**32 - 1)


class TestTypes:
    def test_alphabet_reorders_silence_first(self):
        a = RelayAlphabet.from_labels(["a", "0", "b"], silence_index=1)
        assert a.symbols == ("0", "a", "b")
        assert a.transmit_symbols == ("a", "b")

    def test_alphabet_needs_two_symbols(self):
        with pytest.raises(ValueError):
            RelayAlphabet(("0",))

    def test_policy_rejects_silence_mass(self):
        with pytest.raises(ValueError):
            RelayPolicy(0.5, Pmf([0.1, 0.9]))

    def test_policy_rejects_bad_pu(self):
        with pytest.raises(ValueError):
            RelayPolicy.from_nonzero(1.5, [1.0])


class TestMarginal:
    def test_always_silent(self):
        m = marginal_x2(RelayPolicy.from_nonzero(0.0, [0.3, 0.7]))
        assert np.array_equal(m.probs, [1.0, 0.0, 0.0])

    def test_always_transmit(self):
        m = marginal_x2(RelayPolicy.from_nonzero(1.0, [1.0]))
        assert np.array_equal(m.probs, [0.0, 1.0])

    def test_mixture(self):
        m = marginal_x2(RelayPolicy.from_nonzero(0.3, [0.5, 0.5]))
        assert np.allclose(m.probs, [0.7, 0.15, 0.15], atol=1e-15)


class TestRelayDestMI:
    def test_noiseless(self):
        assert mi_relay_dest(RelayPolicy.from_nonzero(0.5, [1.0]), DmcChannel.bsc(0)) == pytest.approx(1.0)

    def test_useless(self):
        assert mi_relay_dest(RelayPolicy.from_nonzero(0.5, [1.0]), DmcChannel.bsc(0.5)) == pytest.approx(0.0, abs=1e-15)

    def test_bsc_closed_form(self):
        a = 0.1 * (1 - 0.6) + 0.3
        expected = binary_entropy(a) - binary_entropy(0.1)
        value = mi_relay_dest(RelayPolicy.from_nonzero(0.3, [1.0]), DmcChannel.bsc(0.1))
        assert a == pytest.approx(0.34)
        assert value == pytest.approx(expected, abs=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            mi_relay_dest(RelayPolicy.from_nonzero(0.3, [0.5, 0.5]), DmcChannel.bsc(0.1))

    @given(seeds, st.floats(0.0, 1.0))
    def test_two_paths_agree(self, seed, p_u):
        w = random_relay_channel(seed)
        rng = np.random.default_rng(seed + 1)
        policy = RelayPolicy.from_nonzero(p_u, rng.dirichlet(np.ones(w.input_size - 1)))
        assert mi_relay_dest(policy, w) == pytest.approx(
            mutual_information(marginal_x2(policy), w), abs=1e-12
        )


class TestMaxRelayDestMI:
    def test_silent_relay(self):
        for seed in range(5):
            value, p_v = max_mi_relay_dest(0.0, random_relay_channel(seed))
            assert value == 0.0
            assert p_v.probs[0] == 0.0

    def test_noiseless_half(self):
        value, p_v = max_mi_relay_dest(0.5, DmcChannel.noiseless(2))
        assert value == pytest.approx(1.0)
        assert np.array_equal(p_v.probs, [0.0, 1.0])

    def test_bsc_closed_form(self):
        value, _ = max_mi_relay_dest(0.4, DmcChannel.bsc(0.05))
        assert 0.05 * 0.2 + 0.4 == pytest.approx(0.41)
        assert value == pytest.approx(binary_entropy(0.41) - binary_entropy(0.05), abs=1e-12)

    def test_noiseless_ternary_even_split(self):
        value, p_v = max_mi_relay_dest(0.5, DmcChannel.noiseless(3))
        assert value == pytest.approx(1.5, abs=1e-9)
        assert np.allclose(p_v.probs, [0, 0.5, 0.5], atol=1e-5)

    @pytest.mark.parametrize("seed", range(8))
    def test_ternary_against_scalar_oracle(self, seed):
        # two nonzero symbols: p_v = (t, 1 - t), maximize over t directly
        w = random_relay_channel(seed, n_in=3, n_out=3)
        p_u = 0.35
        res = minimize_scalar(
            lambda t: -mi_relay_dest(RelayPolicy.from_nonzero(p_u, [t, 1 - t]), w),
            bounds=(0, 1), method="bounded", options={"xatol": 1e-12},
        )
        oracle = max(-res.fun, *(mi_relay_dest(RelayPolicy.from_nonzero(p_u, e), w) for e in ([1, 0], [0, 1])))
        value, p_v = max_mi_relay_dest(p_u, w, tol=1e-12)
        assert value == pytest.approx(oracle, abs=1e-9)
        assert mi_relay_dest(RelayPolicy(p_u, p_v), w) == pytest.approx(value, abs=1e-12)

    @given(seeds)
    def test_full_transmit_nonnegative(self, seed):
        value, p_v = max_mi_relay_dest(1.0, random_relay_channel(seed))
        assert value >= 0.0
        assert p_v.probs[0] == 0.0

    @given(seeds, st.floats(0.01, 0.99))
    def test_pinned_silence(self, seed, p_u):
        _, p_v = max_mi_relay_dest(p_u, random_relay_channel(seed))
        assert p_v.probs[0] == 0.0
        assert abs(p_v.probs.sum() - 1) < 1e-12

    @given(seeds, st.floats(0.01, 0.99))
    def test_dominates_random_policies(self, seed, p_u):
        w = random_relay_channel(seed)
        value, _ = max_mi_relay_dest(p_u, w)
        rng = np.random.default_rng(seed)
        for _ in range(20):
            policy = RelayPolicy.from_nonzero(p_u, rng.dirichlet(np.ones(w.input_size - 1)))
            assert mi_relay_dest(policy, w) <= value + 1e-9

    @given(seeds)
    def test_concave_in_pu(self, seed):
        w = random_relay_channel(seed)
        grid = np.linspace(0, 1, 21)
        g = np.array([max_mi_relay_dest(p, w, tol=1e-11)[0] for p in grid])
        assert np.all(g[1:-1] >= 0.5 * (g[:-2] + g[2:]) - 1e-9)


@given(seeds, st.floats(0.05, 0.95))
def test_slope_matches_finite_difference(seed, p_u):
    w = random_relay_channel(seed)
    probs = np.random.default_rng(seed).dirichlet(np.ones(w.input_size - 1))
    h = 1e-6

    def f(p):
        return mi_relay_dest(RelayPolicy.from_nonzero(p, probs), w)

    fd = (f(p_u + h) - f(p_u - h)) / (2 * h)
    assert mi_relay_dest_slope(RelayPolicy.from_nonzero(p_u, probs), w) == pytest.approx(fd, abs=1e-7)
