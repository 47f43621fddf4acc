import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from hdrelay.awgn import (
    AwgnPair,
    GaussianMixture,
    MassPointDist,
    QuadratureError,
    awgn_capacity,
    awgn_conventional_rate,
    conventional_snr_gain_db,
    gaussian_entropy,
    gaussian_relay_rate,
    mixture_entropy,
    optimize_mass_points,
    rd_rate_awgn,
    sr_rate_awgn,
)
from hdrelay.solver import Regime

HALF_LOG_2PIE = 0.5 * math.log2(2 * math.pi * math.e)


def entropy_mp(means, weights, var):
    """Mixture entropy in bits with mpmath quadrature split at the means."""
    mpmath.mp.dps = 30
    sd = mpmath.sqrt(var)

    def f(y):
        dens = sum(w * mpmath.npdf(y, m, sd) for m, w in zip(means, weights) if w > 0)
        return -dens * mpmath.log(dens, 2) if dens > 0 else mpmath.mpf(0)

    lo, hi = min(means) - 12 * float(sd), max(means) + 12 * float(sd)
    pts = [lo, *sorted(set(means)), hi]
    return float(mpmath.quad(f, pts))


@pytest.fixture(scope="module")
def ten_db():
    pair = AwgnPair.from_snr_db(10)
    return pair, awgn_capacity(pair), gaussian_relay_rate(pair)


class TestTypes:
    def test_pair_positive(self):
        with pytest.raises(ValueError):
            AwgnPair(1.0, 0.0)

    def test_from_db(self):
        pair = AwgnPair.from_snr_db(10, 20)
        assert pair.snr1 == pytest.approx(10) and pair.snr2 == pytest.approx(100)

    def test_mass_points_reject_silence(self):
        with pytest.raises(ValueError):
            MassPointDist([0.0, 1.0], [0.5, 0.5])

    def test_mass_points_weights(self):
        with pytest.raises(ValueError):
            MassPointDist([1.0, 2.0], [0.5, 0.6])


class TestMixtureEntropy:
    def test_single_gaussian(self):
        assert mixture_entropy(GaussianMixture([0.0], [1.0], 2.5)) == pytest.approx(gaussian_entropy(2.5), abs=1e-9)

    def test_separated(self):
        mix = GaussianMixture([-100.0, 100.0], [0.5, 0.5], 1.0)
        assert mixture_entropy(mix) == pytest.approx(1 + HALF_LOG_2PIE, abs=1e-6)

    def test_coincident(self):
        mix = GaussianMixture([0.0, 0.0], [0.3, 0.7], 4.0)
        assert mixture_entropy(mix) == pytest.approx(0.5 * math.log2(2 * math.pi * math.e * 4), abs=1e-9)

    def test_unequal_variances(self):
        mix = GaussianMixture([0.0, 0.0], [0.4, 0.6], [11.0, 1.0])
        assert mixture_entropy(mix) == pytest.approx(_two_var_mp(0.4, 11.0, 1.0), abs=1e-8)

    def test_failure_reports_estimate(self):
        mix = GaussianMixture([0.0, 3.0, 40.0], [0.2, 0.3, 0.5], 1.0)
        with pytest.raises(QuadratureError) as err:
            mixture_entropy(mix, tol=1e-300)
        assert err.value.estimate > 0

    @settings(max_examples=15)
    @given(st.integers(0, 2**32 - 1))
    def test_against_mpmath(self, seed):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, 5))
        means = list(rng.normal(0, 4, k))
        weights = list(rng.dirichlet(np.ones(k)))
        var = float(rng.uniform(0.3, 3))
        value = mixture_entropy(GaussianMixture(means, weights, var))
        assert value == pytest.approx(entropy_mp(means, weights, var), abs=1e-8)
        assert value >= gaussian_entropy(var) - 1e-9


def _two_var_mp(w, v1, v2):
    mpmath.mp.dps = 30

    def f(y):
        d = w * mpmath.npdf(y, 0, mpmath.sqrt(v1)) + (1 - w) * mpmath.npdf(y, 0, mpmath.sqrt(v2))
        return -d * mpmath.log(d, 2)

    s = 12 * math.sqrt(max(v1, v2))
    return float(mpmath.quad(f, [-s, 0, s]))


class TestRates:
    def test_silent(self):
        assert rd_rate_awgn(0.0, MassPointDist([1.0], [1.0]), 1.0) == 0.0

    def test_deterministic_input(self):
        assert rd_rate_awgn(1.0, MassPointDist([math.sqrt(5)], [1.0]), 1.0) == pytest.approx(0.0, abs=1e-9)

    def test_on_off(self):
        value = rd_rate_awgn(0.5, MassPointDist([4.0], [1.0]), 1.0, tol=1e-10)
        oracle = entropy_mp([0.0, 4.0], [0.5, 0.5], 1.0) - HALF_LOG_2PIE
        assert value == pytest.approx(oracle, abs=1e-9)
        assert 0.9 < value < 1.0

    @settings(max_examples=15)
    @given(st.integers(0, 2**32 - 1), st.floats(0.05, 1.0))
    def test_sign_flip(self, seed, p_u):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, 6))
        x = rng.normal(0, 3, k)
        x[x == 0] = 1.0
        dist = MassPointDist(x, rng.dirichlet(np.ones(k)))
        assert rd_rate_awgn(p_u, dist, 1.7) == pytest.approx(rd_rate_awgn(p_u, dist.mirrored(), 1.7), abs=1e-9)

    def test_sr_examples(self):
        assert sr_rate_awgn(1.0, AwgnPair(3, 1)) == 0.0
        assert sr_rate_awgn(0.0, AwgnPair(3, 1)) == pytest.approx(1.0)
        assert sr_rate_awgn(0.5, AwgnPair(15, 1)) == pytest.approx(1.0)

    def test_conventional(self):
        assert awgn_conventional_rate(AwgnPair(15, 15)) == pytest.approx(1.0)
        assert awgn_conventional_rate(AwgnPair(1e-30, 1e-30)) == pytest.approx(0.0, abs=1e-20)
        assert awgn_conventional_rate(AwgnPair.from_snr_db(10)) == pytest.approx(0.25 * math.log2(11), abs=1e-12)
        assert awgn_conventional_rate(AwgnPair.from_snr_db(10)) == pytest.approx(0.86486, abs=1e-5)

    def test_conventional_time_sharing(self):
        pair = AwgnPair(3, 15)  # link capacities 1 and 2
        assert awgn_conventional_rate(pair) == pytest.approx(2 / 3)

    def test_gain_inverts_conventional(self):
        assert conventional_snr_gain_db(awgn_conventional_rate(AwgnPair.from_snr_db(17)), 17) == pytest.approx(0, abs=1e-9)


class TestMassPointSearch:
    @pytest.mark.parametrize("snr_db", [-10, 0, 10, 20])
    def test_beats_antipodal(self, snr_db):
        p2 = 10 ** (snr_db / 10)
        dist, value = optimize_mass_points(0.5, p2, 1.0, k_max=8)
        assert value >= rd_rate_awgn(0.5, MassPointDist.antipodal(p2), 1.0) - 1e-9

    @pytest.mark.parametrize("snr_db", [0, 10, 20])
    def test_power_and_support(self, snr_db):
        p2 = 10 ** (snr_db / 10)
        dist, value = optimize_mass_points(0.4, p2, 2.0, k_max=8)
        assert dist.power == pytest.approx(p2, rel=1e-6)
        assert np.all(dist.locations != 0)
        assert dist.weights.sum() == pytest.approx(1.0, abs=1e-10)
        assert value == pytest.approx(rd_rate_awgn(0.4, dist, 2.0), abs=1e-12)

    def test_low_snr_two_point_grid_oracle(self):
        p2 = 0.01
        _, value = optimize_mass_points(0.5, p2, 1.0, k_max=8)
        best = 0.0
        # two points a < 0 < b with weights (w, 1 - w) on the power shell
        for w in np.linspace(0.05, 0.95, 19):
            for r in np.linspace(0.05, 0.95, 19):
                a = -math.sqrt(r * p2 / w)
                b = math.sqrt((1 - r) * p2 / (1 - w))
                best = max(best, rd_rate_awgn(0.5, MassPointDist([a, b], [w, 1 - w]), 1.0))
        assert value >= best - 1e-9
        assert value >= rd_rate_awgn(0.5, MassPointDist.antipodal(p2), 1.0) - 1e-9

    @pytest.mark.parametrize("snr_db", [0, 10])
    def test_two_points_against_one_parameter_oracle(self, snr_db):
        # equal weights, locations -a and sqrt(2 P - a^2)
        p2 = 10 ** (snr_db / 10)

        def neg(a):
            return -rd_rate_awgn(0.5, MassPointDist([-a, math.sqrt(2 * p2 - a * a)], [0.5, 0.5]), 1.0)

        res = minimize_scalar(neg, bounds=(1e-6, math.sqrt(2 * p2) - 1e-6), method="bounded", options={"xatol": 1e-10})
        _, value = optimize_mass_points(0.5, p2, 1.0, k_max=2)
        assert value >= -res.fun - 1e-9

    def test_monotone_in_k_max(self):
        values = [optimize_mass_points(0.6, 30.0, 1.0, k_max=k)[1] for k in (2, 4, 6, 8)]
        assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))

    def test_reproducible(self):
        a = optimize_mass_points(0.5, 10.0, 1.0, k_max=6, seed=3)
        b = optimize_mass_points(0.5, 10.0, 1.0, k_max=6, seed=3)
        assert a[1] == b[1]
        assert np.array_equal(a[0].locations, b[0].locations)

    def test_scale_invariance(self):
        _, v1 = optimize_mass_points(0.5, 10.0, 1.0, k_max=4)
        _, v2 = optimize_mass_points(0.5, 40.0, 4.0, k_max=4)
        assert v1 == pytest.approx(v2, abs=1e-8)


class TestCapacity:
    def test_bounds_at_10db(self, ten_db):
        pair, res, r_gauss = ten_db
        assert 0.25 * math.log2(11) < res.capacity < 0.5 * math.log2(11)
        assert res.capacity >= r_gauss
        assert r_gauss >= awgn_conventional_rate(pair)

    def test_terms_meet(self, ten_db):
        _, res, _ = ten_db
        assert res.regime is Regime.INTERSECTION
        assert res.capacity == pytest.approx(min(res.sr_term, res.rd_term))
        assert abs(res.sr_term - res.rd_term) < 1e-6

    def test_weak_first_hop(self):
        pair = AwgnPair(1.0, 10.0, sigma1_sq=1e6)
        res = awgn_capacity(pair, k_max=8)
        assert res.capacity <= pair.sr_capacity + 1e-12
        assert res.capacity < 1e-6

    def test_gaussian_rate_vanishes_with_power(self):
        assert gaussian_relay_rate(AwgnPair(10.0, 1e-8)) < 1e-6
