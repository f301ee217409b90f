"""
Test Suite for the objective quantizer
Covers scalar quantization, the Q_p schedule and quantization-error statistics
"""

import math

import numpy as np
import pytest


class TestQuantize:
    """Test cases for quantize()"""

    def test_zero_is_on_the_lattice(self):
        """Test 0 quantizes to 0 with zero fraction"""
        from src.quantizer import quantize

        result = quantize(0.0, 7)
        assert result.quantized == 0.0
        assert result.fraction == 0.0
        assert result.q_param == 7.0

    def test_rounds_up_to_nearest_step(self):
        """Test x=0.6 at Q_p=1 quantizes to 1 with fraction 0.4"""
        from src.quantizer import quantize

        result = quantize(0.6, 1)
        assert result.quantized == 1.0
        assert result.fraction == pytest.approx(0.4)

    def test_negative_values_use_true_floor(self):
        """Test x=-0.3 at Q_p=2 quantizes to -0.5 with fraction -0.4"""
        from src.quantizer import quantize

        result = quantize(-0.3, 2)
        assert result.quantized == -0.5
        assert result.fraction == pytest.approx(-0.4)

    def test_exact_tie_rounds_half_up(self):
        """Test a value halfway between lattice points goes to the upper one"""
        from src.quantizer import quantize

        result = quantize(0.5, 1)
        assert result.quantized == 1.0
        assert result.fraction == 0.5

    def test_lattice_index(self):
        """Test lattice_index recovers the integer multiple of the step"""
        from src.quantizer import quantize

        assert quantize(2.3, 4).lattice_index == 9
        assert quantize(-2.3, 4).lattice_index == -9

    def test_rejects_non_finite_input(self):
        """Test NaN and infinities raise InvalidArgumentError"""
        from src.quantizer import quantize
        from src.errors import InvalidArgumentError

        for bad in (math.nan, math.inf, -math.inf):
            with pytest.raises(InvalidArgumentError):
                quantize(bad, 1.0)

    def test_rejects_non_positive_q_param(self):
        """Test Q_p <= 0 raises InvalidArgumentError"""
        from src.quantizer import quantize
        from src.errors import InvalidArgumentError

        for bad in (0.0, -1.0, math.inf, math.nan):
            with pytest.raises(InvalidArgumentError):
                quantize(1.0, bad)

    def test_invalid_argument_is_a_value_error(self):
        """Test callers can catch quantizer errors as ValueError"""
        from src.quantizer import quantize

        with pytest.raises(ValueError):
            quantize(1.0, 0.0)


class TestQuantizeProperties:
    """Randomized properties of quantize() over 10^5 inputs per Q_p"""

    Q_LEVELS = (0.25, 1.0, 3.0, 7.5, 1024.0)

    def _samples(self, q_param, n=100_000):
        rng = np.random.default_rng(1234)
        uniform = rng.uniform(-1000.0, 1000.0, n - 20_000)
        k = rng.integers(-int(1000 * q_param), int(1000 * q_param), 10_000)
        jitter = rng.choice([-1e-9, 0.0, 1e-9], 10_000)
        # lattice points and exact ties, each nudged to either side
        on_lattice = k / q_param + jitter
        on_tie = (k + 0.5) / q_param + jitter
        return np.concatenate([uniform, on_lattice, on_tie])

    def test_idempotent(self):
        """Test quantizing a quantized value changes nothing"""
        from src.quantizer import quantize_array

        for q in self.Q_LEVELS:
            once = quantize_array(self._samples(q), q)
            np.testing.assert_array_equal(quantize_array(once, q), once)

    def test_half_step_bound(self):
        """Test |x^Q - x| <= 1/(2 Q_p)"""
        from src.quantizer import quantize_array

        for q in self.Q_LEVELS:
            values = self._samples(q)
            assert np.all(np.abs(quantize_array(values, q) - values) <= 0.5 / q + 1e-9)

    def test_fraction_range(self):
        """Test the fraction Q_p (x^Q - x) stays in (-1/2, 1/2] up to rounding"""
        from src.quantizer import quantize_array

        for q in self.Q_LEVELS:
            values = self._samples(q)
            fraction = q * (quantize_array(values, q) - values)
            assert np.all(fraction > -0.5 - 1e-6)
            assert np.all(fraction <= 0.5 + 1e-6)

    def test_lattice_membership(self):
        """Test Q_p * x^Q is an integer"""
        from src.quantizer import quantize_array

        for q in self.Q_LEVELS:
            scaled = q * quantize_array(self._samples(q), q)
            assert np.all(np.abs(scaled - np.round(scaled)) <= 1e-9 * np.maximum(1.0, np.abs(scaled)))

    def test_scalar_form_matches_array_form(self):
        """Test quantize agrees with quantize_array and rebuilds x^Q from its fraction"""
        from src.quantizer import quantize, quantize_array

        for q in self.Q_LEVELS:
            values = self._samples(q)[::10]
            expected = quantize_array(values, q)
            for x, xq in zip(values, expected):
                result = quantize(x, q)
                assert result.quantized == xq
                assert result.quantized == pytest.approx(result.raw + result.fraction / q, abs=1e-9)

    def test_exact_ties_round_up(self):
        """Test exact ties land on the upper lattice point with fraction 1/2"""
        from src.quantizer import quantize_array

        ties = np.arange(-50, 50) + 0.5
        np.testing.assert_array_equal(quantize_array(ties, 1.0), ties + 0.5)


class TestQuantizationSchedule:
    """Test cases for QuantizationSchedule"""

    def test_schedule_q_examples(self):
        """Test Q_p = eta * base^power"""
        from src.quantizer import QuantizationSchedule, schedule_q

        assert schedule_q(QuantizationSchedule(eta=0.5, base=2, power=0)) == 0.5
        assert schedule_q(QuantizationSchedule(eta=0.5, base=2, power=3)) == 4.0
        assert schedule_q(QuantizationSchedule(eta=1.0, base=2, power=10)) == 1024.0

    def test_step_is_reciprocal(self):
        """Test step == 1 / Q_p"""
        from src.quantizer import QuantizationSchedule

        schedule = QuantizationSchedule(eta=0.25, power=3)
        assert schedule.step == 0.5

    def test_advance_increments_power(self):
        """Test advance moves power 3 -> 4 without saturation"""
        from src.quantizer import QuantizationSchedule, advance

        schedule, saturated = advance(QuantizationSchedule(eta=1.0, power=3, power_cap=40))
        assert schedule.power == 4
        assert saturated is False

    def test_advance_at_cap_is_a_no_op(self):
        """Test advancing at the cap keeps power and reports saturation"""
        from src.quantizer import QuantizationSchedule

        start = QuantizationSchedule(eta=1.0, power=40, power_cap=40)
        schedule, saturated = start.advance()
        assert schedule.power == 40
        assert saturated is True
        assert schedule == start

    def test_repeated_advance_is_monotone(self):
        """Test k advances from power 0 reach power k with nondecreasing Q_p"""
        from src.quantizer import QuantizationSchedule

        schedule = QuantizationSchedule(eta=0.125, base=3, power_cap=25)
        previous = schedule.q_param
        for k in range(1, 26):
            schedule, saturated = schedule.advance()
            assert schedule.power == k
            assert schedule.q_param >= previous
            previous = schedule.q_param
        assert schedule.saturated

    def test_schedule_is_immutable(self):
        """Test advance returns a new schedule and leaves the old one alone"""
        from src.quantizer import QuantizationSchedule

        original = QuantizationSchedule(eta=1.0)
        original.advance()
        assert original.power == 0

    def test_invalid_schedules_raise(self):
        """Test constructor validation"""
        from src.quantizer import QuantizationSchedule
        from src.errors import InvalidArgumentError

        with pytest.raises(InvalidArgumentError):
            QuantizationSchedule(eta=0.0)
        with pytest.raises(InvalidArgumentError):
            QuantizationSchedule(eta=1.0, base=1)
        with pytest.raises(InvalidArgumentError):
            QuantizationSchedule(eta=1.0, power=5, power_cap=4)
        with pytest.raises(InvalidArgumentError):
            QuantizationSchedule(eta=1.0, power=-1)

    def test_from_initial_value(self):
        """Test the schedule built from f0 starts at power 0 with eta from initial_eta"""
        from src.quantizer import QuantizationSchedule

        schedule = QuantizationSchedule.from_initial_value(5.0)
        assert schedule.eta == 0.25
        assert schedule.power == 0
        assert schedule.q_param == 0.25


class TestInitialEta:
    """Test cases for initial_eta()"""

    def test_examples(self):
        """Test eta = base^-floor(log_base(f0 + 1))"""
        from src.quantizer import initial_eta

        assert initial_eta(0.0, 2) == 1.0
        assert initial_eta(5.0, 2) == 0.25
        assert initial_eta(100.0, 2) == 0.015625

    def test_exact_powers_of_the_base(self):
        """Test f0 + 1 landing exactly on a power is not lost to log rounding"""
        from src.quantizer import initial_eta

        assert initial_eta(999.0, 10) == pytest.approx(1e-3)
        assert initial_eta(7.0, 2) == 0.125
        assert initial_eta(6.999, 2) == 0.25

    def test_rejects_negative_or_non_finite(self):
        """Test f0 < 0 and non-finite f0 raise"""
        from src.quantizer import initial_eta
        from src.errors import InvalidArgumentError

        for bad in (-1.0, math.inf, math.nan):
            with pytest.raises(InvalidArgumentError):
                initial_eta(bad, 2)


class TestErrorStatistics:
    """Test cases for error_statistics()"""

    def test_lattice_samples_have_zero_error(self):
        """Test samples on the lattice give zero mean and variance"""
        from src.quantizer import error_statistics

        samples = np.arange(-40, 41) / 4.0
        stats = error_statistics(samples, 4.0)
        assert stats.mean == 0.0
        assert stats.variance == 0.0
        assert stats.lag1_autocorr == 0.0

    def test_target_variance(self):
        """Test the reported target variance is 1/(12 Q_p^2)"""
        from src.quantizer import error_statistics

        stats = error_statistics([0.1, 0.7, 1.3], 1.0)
        assert stats.target_variance == pytest.approx(1.0 / 12.0)
        assert stats.n == 3

    def test_needs_two_samples(self):
        """Test fewer than 2 samples raise"""
        from src.quantizer import error_statistics
        from src.errors import InvalidArgumentError

        with pytest.raises(InvalidArgumentError):
            error_statistics([1.0], 1.0)

    def test_white_noise_statistics(self):
        """Test 10^6 Uniform(-100, 100) samples at Q_p in {1, 4, 16} against the white-noise model"""
        from src.quantizer import error_statistics, ks_critical_value

        samples = np.random.default_rng(0).uniform(-100.0, 100.0, 1_000_000)
        for q_param in (1.0, 4.0, 16.0):
            stats = error_statistics(samples, q_param)
            assert stats.n == 1_000_000
            assert abs(stats.mean) < 3.0 * stats.mean_standard_error
            assert stats.variance == pytest.approx(stats.target_variance, rel=0.02)
            assert stats.ks_uniform < ks_critical_value(stats.n, alpha=0.01)
            assert abs(stats.lag1_autocorr) < 0.01

    def test_ks_critical_value(self):
        """Test the asymptotic KS critical value at 5%"""
        from src.quantizer import ks_critical_value

        assert ks_critical_value(100, 0.05) == pytest.approx(0.1358, rel=1e-3)
