import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thzplan import linkbudget as lb

# frozen from 40-digit evaluations of the same formulas
SPREADING_1M_570GHZ = 570857923.6309123
TAU_570GHZ_60PCT = 0.4411212627442344
RATE_2M_TABLE_DEFAULTS = 69347096910.03869
RADIUS_S01_TABLE_DEFAULTS = 11.085529606246127
W_AT_1 = 0.5671432904097839


def table_params(**kw):
    return lb.LinkBudgetParams(**kw)


class TestAntennaGain:
    def test_ten_degree_beam(self):
        g = lb.antenna_gain(10.0)
        assert g == 525.25
        assert 10 * math.log10(g) == pytest.approx(27.2, abs=0.05)

    def test_unity_gain_beamwidth(self):
        assert lb.antenna_gain(math.sqrt(52525.0)) == pytest.approx(1.0, rel=1e-12)

    def test_five_degree_beam(self):
        assert lb.antenna_gain(5.0) == 2101.0

    @pytest.mark.parametrize("bad", [0.0, -1.0, 360.0001, 1e9])
    def test_domain(self, bad):
        with pytest.raises(ValueError):
            lb.antenna_gain(bad)

    @given(st.floats(min_value=0.01, max_value=360.0))
    def test_gain_times_width_squared_is_constant(self, delta):
        assert lb.antenna_gain(delta) * delta * delta == pytest.approx(52525.0, rel=1e-12)


class TestAbsorption:
    def test_override_passthrough(self):
        assert lb.absorption_coefficient(1.0, 0.9, 40.0, tau_override=0.05) == 0.05

    def test_zero_humidity(self):
        assert lb.absorption_coefficient(570e9, 0.0) == 0.0

    def test_table_value_at_570ghz(self):
        assert lb.absorption_coefficient(570e9, 0.60, 25.0) == pytest.approx(
            TAU_570GHZ_60PCT, rel=1e-12
        )

    def test_linear_humidity_scaling(self):
        base = lb.absorption_coefficient(570e9, 0.60)
        assert lb.absorption_coefficient(570e9, 0.30) == pytest.approx(base / 2, rel=1e-12)

    def test_interpolates_between_rows(self):
        t = lb.AbsorptionTable.default()
        f0, f1 = t.frequency_hz[10], t.frequency_hz[11]
        mid = 0.5 * (f0 + f1)
        expect = 0.5 * (t.tau_per_m[10] + t.tau_per_m[11])
        assert t.tau(mid, t.reference_humidity) == pytest.approx(expect, rel=1e-12)

    def test_out_of_range_frequency(self):
        with pytest.raises(ValueError):
            lb.absorption_coefficient(5e9, 0.6)
        with pytest.raises(ValueError):
            lb.absorption_coefficient(2e12, 0.6)

    def test_temperature_ignored_by_table(self):
        a = lb.absorption_coefficient(570e9, 0.6, 0.0)
        b = lb.absorption_coefficient(570e9, 0.6, 40.0)
        assert a == b


class TestPathLoss:
    def test_spreading_term_at_one_meter(self):
        p = table_params(tau_override=0.0)
        loss = lb.total_path_loss(1.0, p)
        assert loss == pytest.approx(SPREADING_1M_570GHZ, rel=1e-12)
        assert 10 * math.log10(loss) == pytest.approx(87.565, abs=2e-3)

    def test_inverse_square_when_absorption_free(self):
        p = table_params(tau_override=0.0)
        assert lb.total_path_loss(2.0, p) == pytest.approx(
            4.0 * lb.total_path_loss(1.0, p), rel=1e-12
        )

    def test_doubling_with_absorption(self):
        p = table_params(tau_override=0.1)
        ratio = lb.total_path_loss(2.0, p) / lb.total_path_loss(1.0, p)
        assert ratio == pytest.approx(4.0 * math.exp(0.1), rel=1e-12)

    def test_rejects_nonpositive_distance(self):
        p = table_params()
        for d in (0.0, -1.0):
            with pytest.raises(ValueError):
                lb.total_path_loss(d, p)
            with pytest.raises(ValueError):
                lb.achievable_rate(d, p)

    @given(st.floats(min_value=0.05, max_value=50.0), st.floats(min_value=0.0, max_value=2.0))
    def test_strictly_increasing(self, d, tau):
        p = table_params(tau_override=tau)
        assert lb.total_path_loss(d * 1.001, p) > lb.total_path_loss(d, p)

    def test_array_input(self):
        p = table_params()
        d = np.array([1.0, 2.0, 3.0])
        out = lb.total_path_loss(d, p)
        assert out.shape == (3,)
        assert out[0] == lb.total_path_loss(1.0, p)


class TestAchievableRate:
    def test_unit_snr_gives_bandwidth(self):
        # pick P_t so the received SNR at 3 m is exactly 1
        d = 3.0
        base = table_params(tau_override=0.02)
        loss = lb.total_path_loss(d, base)
        g = lb.antenna_gain(base.tx_beamwidth_deg) ** 2
        p_t = loss * base.noise_psd_w_hz * base.bandwidth_hz / g
        p = table_params(tau_override=0.02, p_t_w=p_t)
        assert lb.achievable_rate(d, p) == pytest.approx(p.bandwidth_hz, rel=1e-12)

    def test_vanishing_power(self):
        p = table_params(p_t_w=1e-30)
        assert lb.achievable_rate(5.0, p) < 1.0

    def test_table_defaults_at_two_meters(self):
        assert lb.achievable_rate(2.0, table_params()) == pytest.approx(
            RATE_2M_TABLE_DEFAULTS, rel=1e-12
        )

    @given(st.floats(min_value=0.1, max_value=30.0))
    def test_strictly_decreasing(self, d):
        p = table_params()
        assert lb.achievable_rate(d * 1.001, p) < lb.achievable_rate(d, p)


def fixed_point_w(x, iters=500):
    """Contraction oracle for x > 0: w = x e^(-w) halved toward stability."""
    w = 0.5
    for _ in range(iters):
        w = 0.5 * (w + x * math.exp(-w))
    return w


class TestLambertW:
    def test_zero(self):
        assert lb.lambert_w0(0.0) == 0.0

    def test_at_e(self):
        assert lb.lambert_w0(math.e) == pytest.approx(1.0, rel=1e-12)

    def test_at_one_against_fixed_point_oracle(self):
        assert fixed_point_w(1.0) == pytest.approx(W_AT_1, rel=1e-12)
        assert lb.lambert_w0(1.0) == pytest.approx(W_AT_1, rel=1e-11)

    def test_branch_point(self):
        w = lb.lambert_w0(-math.exp(-1.0))
        assert w == pytest.approx(-1.0, abs=1e-6)

    def test_domain(self):
        with pytest.raises(ValueError):
            lb.lambert_w0(-math.exp(-1.0) - 1e-9)

    @given(st.floats(min_value=-math.exp(-1.0) + 1e-9, max_value=1e6))
    def test_defining_identity(self, x):
        w = lb.lambert_w0(x)
        assert abs(w * math.exp(w) - x) <= 1e-12 * max(1.0, abs(x))
        assert w >= -1.0


def random_radius_params(rng):
    f_c = rng.uniform(100e9, 1e12)
    tau = rng.uniform(0.0, 5.0)
    s = rng.uniform(0.01, 10.0)
    p_t = rng.uniform(1e-6, 10e-3)
    return lb.LinkBudgetParams(f_c_hz=f_c, p_t_w=p_t, tau_override=tau), s


class TestCoverageRadius:
    def test_absorption_free_square_root(self):
        # contrive P_t so the radius constant is exactly 25
        s = 0.5
        base = table_params(tau_override=0.0)
        g = lb.antenna_gain(base.tx_beamwidth_deg) ** 2
        k_unit = g / (
            base.noise_psd_w_hz * base.bandwidth_hz
            * (4 * math.pi * base.f_c_hz / lb.SPEED_OF_LIGHT) ** 2
            * (2 ** s - 1)
        )
        p = table_params(tau_override=0.0, p_t_w=25.0 / k_unit)
        assert lb.coverage_radius(p, s) == pytest.approx(5.0, rel=1e-12)
        assert lb.coverage_radius_bruteforce(p, s) == pytest.approx(5.0, abs=1e-6)
        assert lb.coverage_radius_ceiled(p, s) == 5

    def test_unit_lambert_argument(self):
        # tau sqrt(K)/2 = e makes the radius exactly 2/tau
        s = 0.5
        tau = 0.5
        base = table_params(tau_override=tau)
        g = lb.antenna_gain(base.tx_beamwidth_deg) ** 2
        k_unit = g / (
            base.noise_psd_w_hz * base.bandwidth_hz
            * (4 * math.pi * base.f_c_hz / lb.SPEED_OF_LIGHT) ** 2
            * (2 ** s - 1)
        )
        k_target = (2.0 * math.e / tau) ** 2
        p = table_params(tau_override=tau, p_t_w=k_target / k_unit)
        assert lb.coverage_radius(p, s) == pytest.approx(2.0 / tau, rel=1e-12)

    def test_table_defaults(self):
        p = table_params()
        assert lb.coverage_radius(p, 0.1) == pytest.approx(
            RADIUS_S01_TABLE_DEFAULTS, rel=1e-11
        )
        assert abs(lb.coverage_radius(p, 0.1) - lb.coverage_radius_bruteforce(p, 0.1)) < 1e-6

    def test_rejects_nonpositive_spectral_efficiency(self):
        with pytest.raises(ValueError):
            lb.coverage_radius(table_params(), 0.0)

    def test_oracle_agreement_randomized(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            p, s = random_radius_params(rng)
            closed = lb.coverage_radius(p, s)
            brute = lb.coverage_radius_bruteforce(p, s)
            assert abs(closed - brute) <= max(1e-6, 4e-15 * closed)

    def test_rate_at_radius_recovers_spectral_efficiency(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            p, s = random_radius_params(rng)
            r = lb.coverage_radius(p, s)
            assert lb.achievable_rate(r, p) / p.bandwidth_hz == pytest.approx(s, rel=1e-9)


class TestParams:
    @pytest.mark.parametrize("field,value", [
        ("f_c_hz", 0.0), ("bandwidth_hz", -1.0), ("p_t_w", 0.0),
        ("noise_psd_w_hz", 0.0), ("tx_beamwidth_deg", 0.0),
        ("rx_beamwidth_deg", 400.0), ("humidity", 1.5), ("tau_override", -0.1),
    ])
    def test_invalid_fields(self, field, value):
        with pytest.raises(ValueError):
            lb.LinkBudgetParams(**{field: value})
