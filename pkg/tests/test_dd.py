"""Tests for pulse sequences, the filter function and the pulsed kernels."""

import math

import numpy as np
import pytest
from scipy import integrate

from src.bath import DiscreteBath, OhmicBath
from src.dd import (
    PulseSequence,
    bang_bang,
    bang_bang_interval,
    build_sequence,
    filter_f,
    jx_with_dd,
    jx_with_dd_series,
    pulsed_kernels,
    switching_coefficients,
    tilde_correlation_phase,
    tilde_delta_kernel,
    tilde_gamma_kernel,
    tilde_omega0,
    udd,
)
from src.dynamics import DephasingEngine, jx
from src.errors import DomainError, SequenceError
from src.models import SequenceType
from src.spin import PreparedState


def _filter_by_quadrature(seq, omega):
    """-i omega int_0^t e^{i omega s} f(s) ds, one quad per constant stretch."""
    total = 0j
    for sign, a, b in zip(seq.signs, seq.nodes[:-1], seq.nodes[1:]):
        re = integrate.quad(lambda s: math.cos(omega * s), a, b, epsabs=1e-14, epsrel=1e-13)[0]
        im = integrate.quad(lambda s: math.sin(omega * s), a, b, epsabs=1e-14, epsrel=1e-13)[0]
        total += sign * (re + 1j * im)
    return -1j * omega * total


def _twisting_by_time_quadrature(seq, G, omega_c):
    """D~ for an Ohmic bath from the double time integral.

    The frequency integral of J(omega) sin(omega (t2 - t1)) is done in closed
    form, leaving -int int f(t1) f(t2) K(t1 - t2) over t2 < t1 with
    K(u) = 2 G omega_c^3 u / (1 + omega_c^2 u^2)^2.
    """

    def kernel(t2, t1):
        u = t1 - t2
        return 2 * G * omega_c ** 3 * u / (1 + (omega_c * u) ** 2) ** 2

    starts, ends, signs = seq.nodes[:-1], seq.nodes[1:], seq.signs
    total = 0.0
    for i in range(signs.size):
        for j in range(i + 1):
            if i == j:
                value = integrate.dblquad(kernel, starts[i], ends[i], lambda x: starts[i], lambda x: x, epsabs=1e-15, epsrel=1e-11)[0]
            else:
                value = integrate.dblquad(
                    kernel, starts[i], ends[i], lambda x, j=j: starts[j], lambda x, j=j: ends[j], epsabs=1e-15, epsrel=1e-11
                )[0]
            total += signs[i] * signs[j] * value
    return -total


class TestPulseSequences:
    """Sequence generators and validation."""

    def test_bang_bang_timings(self):
        """t = 0.1, N_d = 4 gives pulses every 0.02."""
        seq = bang_bang(0.1, 4)
        assert seq.timings == pytest.approx((0.02, 0.04, 0.06, 0.08), rel=1e-14)
        assert seq.generator is SequenceType.BANG_BANG

    def test_bang_bang_empty(self):
        """N_d = 0 is the empty sequence."""
        assert bang_bang(0.1, 0).n_pulses == 0

    def test_bang_bang_interval_commensurate(self):
        """tau = 0.002 over t = 0.1 gives 49 pulses at 0.002 k."""
        seq = bang_bang_interval(0.1, 0.002)
        assert seq.n_pulses == 49
        assert seq.timings == pytest.approx(tuple(0.002 * k for k in range(1, 50)), rel=1e-12)

    def test_bang_bang_interval_remainder(self):
        """A non-dividing tau stops before the end."""
        seq = bang_bang_interval(0.1, 0.03)
        assert seq.timings == pytest.approx((0.03, 0.06, 0.09), rel=1e-14)
        assert seq.describe()["interval"] == 0.03

    def test_udd_single_pulse(self):
        """N_d = 1 puts the pulse at t/2."""
        assert udd(0.3, 1).timings == pytest.approx((0.15,), rel=1e-15)

    def test_udd_first_pulse(self):
        """N_d = 4, t = 0.1: t_1 = 0.1 sin^2(pi/10)."""
        seq = udd(0.1, 4)
        assert seq.timings[0] == pytest.approx(0.0095492, rel=1e-5)
        assert seq.timings == pytest.approx((0.0095492, 0.034549, 0.065451, 0.090451), rel=1e-4)

    @pytest.mark.parametrize("n", range(1, 21))
    def test_udd_symmetric(self, n):
        """t_j + t_{N_d+1-j} = t."""
        timings = np.array(udd(1.0, n).timings)
        assert timings + timings[::-1] == pytest.approx(np.ones(n), abs=1e-15)

    @pytest.mark.parametrize("n", range(0, 30))
    def test_coefficients_sum_to_zero(self, n):
        """The switching coefficients cancel exactly."""
        c = switching_coefficients(n)
        assert c.sum() == 0
        assert c[0] == 1
        assert c[-1] == (-1) ** (n + 1)

    @pytest.mark.parametrize(
        "total,timings",
        [(0.1, (0.05, 0.02)), (0.1, (0.03, 0.03)), (0.1, (0.1,)), (0.1, (0.0,)), (0.0, ()), (float("nan"), ())],
    )
    def test_invalid_sequences(self, total, timings):
        """Unordered, boundary and non-positive timings are rejected."""
        with pytest.raises(SequenceError):
            PulseSequence(total, timings)

    def test_invalid_generators(self):
        """Generators reject bad counts and intervals."""
        with pytest.raises(SequenceError):
            udd(0.1, 0)
        with pytest.raises(SequenceError):
            bang_bang(0.1, -1)
        with pytest.raises(SequenceError):
            bang_bang_interval(0.1, 0.0)

    def test_build_sequence(self):
        """Config-style descriptions dispatch to the generators."""
        assert build_sequence("udd", 0.1, n_pulses=4).timings == udd(0.1, 4).timings
        assert build_sequence("bang_bang", 0.1, interval=0.02).n_pulses == 4
        assert build_sequence("explicit", 0.1, timings=[0.01, 0.05]).timings == (0.01, 0.05)
        with pytest.raises(SequenceError):
            build_sequence("explicit", 0.1)
        with pytest.raises(SequenceError):
            build_sequence("udd", 0.1)

    def test_truncated(self):
        """Truncation keeps the pulses before the new end time."""
        seq = udd(0.1, 4)
        cut = seq.truncated(0.05)
        assert cut.total_time == 0.05
        assert cut.timings == seq.timings[:2]
        assert seq.truncated(0.1) is seq
        with pytest.raises(SequenceError):
            seq.truncated(0.2)

    def test_describe(self):
        """describe() names the generator."""
        assert udd(0.1, 4).describe() == {"type": "udd", "total_time": 0.1, "n_pulses": 4}


class TestFilterFunction:
    """f(omega, t) = sum_p c_p e^{i omega t_p}."""

    def test_empty_sequence(self):
        """N_d = 0 gives 1 - e^{i omega t}."""
        seq = PulseSequence(0.7)
        for w in (0.0, 0.3, 12.0):
            assert filter_f(seq, w) == pytest.approx(1 - np.exp(1j * w * 0.7), abs=1e-15)

    def test_zero_frequency(self):
        """f(0, t) = 0 for any sequence."""
        assert filter_f(udd(0.1, 7), 0.0) == 0

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_low_frequency(self, n):
        """|f| <= 1e-10 at omega t = 1e-6 for UDD."""
        t = 0.1
        assert abs(filter_f(udd(t, n), 1e-6 / t)) <= 1e-10

    def test_array_input(self):
        """Arrays keep their shape."""
        out = filter_f(bang_bang(1.0, 3), np.array([[0.1, 1.0], [5.0, 10.0]]))
        assert out.shape == (2, 2)
        assert out[1, 0] == pytest.approx(filter_f(bang_bang(1.0, 3), 5.0))

    def test_negative_frequency(self):
        """omega < 0 is outside the domain."""
        with pytest.raises(DomainError):
            filter_f(udd(0.1, 2), -1.0)

    def test_matches_direct_integral(self):
        """The coefficient sum equals -i omega int e^{i omega s} f(s) ds on random sequences."""
        rng = np.random.default_rng(20240117)
        for _ in range(100):
            t = rng.uniform(0.05, 2.0)
            n = int(rng.integers(0, 7))
            timings = tuple(np.sort(rng.uniform(0.01 * t, 0.99 * t, n)))
            seq = PulseSequence(t, timings)
            w = rng.uniform(0.0, 50.0)
            assert abs(filter_f(seq, w) - _filter_by_quadrature(seq, w)) <= 1e-10

    def test_high_precision_matches_float(self):
        """The mpmath path agrees with the float path where both are accurate."""
        seq = udd(0.1, 4)
        assert filter_f(seq, 30.0, dps=40) == pytest.approx(filter_f(seq, 30.0), abs=1e-13)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_udd_order(self, n):
        """log|f| against log(omega t) has slope N_d + 1 on [1e-3, 1e-2]."""
        t = 0.1
        x = np.logspace(-3, -2, 12)
        f = filter_f(udd(t, n), x / t, dps=50)
        slope = np.polyfit(np.log(x), np.log(np.abs(f)), 1)[0]
        assert slope == pytest.approx(n + 1, abs=0.1)


class TestPulsedKernels:
    """omega0~, B~, D~ and S."""

    def test_empty_sequence_reduces(self, figure_bath):
        """N_d = 0 returns omega0, B, D and -Phi."""
        t = 0.37
        seq = PulseSequence(t)
        assert tilde_omega0(seq, 0.1) == pytest.approx(0.1, rel=1e-15)
        assert tilde_gamma_kernel(seq, figure_bath) == pytest.approx(figure_bath.gamma_kernel(t), rel=1e-10)
        assert tilde_delta_kernel(seq, figure_bath) == pytest.approx(figure_bath.delta_kernel(t), rel=1e-10)
        assert tilde_correlation_phase(seq, figure_bath) == pytest.approx(-figure_bath.phi(t), rel=1e-10)

    @pytest.mark.parametrize("n", [1, 3, 7])
    def test_bang_bang_odd_cancels_precession(self, n):
        """Equal alternating intervals average omega0 to zero."""
        assert tilde_omega0(bang_bang(0.1, n), 0.1) == pytest.approx(0.0, abs=1e-15)

    def test_omega0_by_quadrature(self):
        """UDD N_d = 4: (omega0/t) int f matches quadrature."""
        seq = udd(0.1, 4)

        def switching(s):
            return float(seq.signs[np.searchsorted(seq.timings, s)])

        area = integrate.quad(switching, 0.0, 0.1, points=seq.timings, epsabs=1e-14)[0]
        assert tilde_omega0(seq, 0.1) == pytest.approx(0.1 * area / 0.1, abs=1e-12)

    def test_gamma_by_quadrature(self, figure_bath):
        """B~ = (1/2) int J coth |f|^2 / omega^2 for UDD N_d = 4 at t = 0.1."""
        seq = udd(0.1, 4)
        beta = figure_bath.beta

        def integrand(w):
            return 0.5 * figure_bath.spectral_density(w) / math.tanh(beta * w / 2) * abs(filter_f(seq, w)) ** 2 / w ** 2

        ref = integrate.quad(integrand, 0.0, 600.0, limit=500, epsabs=1e-16, epsrel=1e-11)[0]
        assert tilde_gamma_kernel(seq, figure_bath) == pytest.approx(ref, rel=1e-7, abs=1e-16)

    def test_gamma_nonnegative(self, figure_bath):
        """B~ >= 0 on random sequences."""
        rng = np.random.default_rng(5)
        for _ in range(20):
            timings = tuple(np.sort(rng.uniform(0.001, 0.099, int(rng.integers(1, 9)))))
            assert tilde_gamma_kernel(PulseSequence(0.1, timings), figure_bath) >= 0

    @pytest.mark.parametrize("seq", [PulseSequence(0.1), bang_bang(0.1, 4), udd(0.1, 4)], ids=["none", "bb4", "udd4"])
    def test_delta_methods_agree(self, figure_bath, seq):
        """The bath-kernel combination matches the frequency quadrature."""
        kernel = tilde_delta_kernel(seq, figure_bath, method="kernel")
        quadrature = tilde_delta_kernel(seq, figure_bath, method="quadrature")
        assert kernel == pytest.approx(quadrature, rel=1e-6, abs=1e-14)

    def test_delta_by_time_quadrature(self, figure_bath):
        """Bang-bang N_d = 4 against the brute-force double time integral."""
        seq = bang_bang(0.1, 4)
        ref = _twisting_by_time_quadrature(seq, figure_bath.G, figure_bath.omega_c)
        assert tilde_delta_kernel(seq, figure_bath) == pytest.approx(ref, rel=1e-6, abs=1e-14)

    def test_delta_without_coupling(self):
        """G = 0 gives D~ = 0."""
        assert tilde_delta_kernel(udd(0.1, 4), OhmicBath(0.0, 10.0)) == 0.0

    def test_delta_errors(self, single_mode_bath, figure_bath):
        """Quadrature needs a continuous spectrum; methods are checked."""
        with pytest.raises(DomainError):
            tilde_delta_kernel(udd(0.1, 2), single_mode_bath, method="quadrature")
        with pytest.raises(DomainError):
            tilde_delta_kernel(udd(0.1, 2), figure_bath, method="simpson")

    def test_phase_by_quadrature(self, figure_bath):
        """S = int J Im f / omega^2 for bang-bang and UDD."""
        for seq in (bang_bang(0.1, 4), udd(0.1, 4)):

            def integrand(w, seq=seq):
                return figure_bath.spectral_density(w) * filter_f(seq, w).imag / w ** 2

            ref = integrate.quad(integrand, 0.0, 600.0, limit=500, epsabs=1e-15, epsrel=1e-12)[0]
            assert tilde_correlation_phase(seq, figure_bath) == pytest.approx(ref, rel=1e-8, abs=1e-12)

    def test_udd_suppresses_phase(self, figure_bath):
        """Four UDD pulses shrink |S| far below Phi and below bang-bang."""
        t = 0.1
        s_udd = tilde_correlation_phase(udd(t, 4), figure_bath)
        s_bb = tilde_correlation_phase(bang_bang(t, 4), figure_bath)
        assert abs(s_udd) <= 2e-3 * figure_bath.phi(t)
        assert abs(s_udd) <= 0.01 * abs(s_bb)

    @pytest.mark.parametrize("tau", [0.02, 0.01, 0.005, 0.002])
    def test_pulse_doubling(self, figure_bath, tau):
        """Halving the bang-bang interval does not raise B~."""
        coarse = tilde_gamma_kernel(bang_bang_interval(0.1, tau), figure_bath)
        fine = tilde_gamma_kernel(bang_bang_interval(0.1, tau / 2), figure_bath)
        assert fine <= coarse

    def test_discrete_bath(self):
        """The kernel method works on any bath."""
        bath = DiscreteBath(((1.0, 0.1),), beta=2.0)
        k = pulsed_kernels(udd(1.0, 2), bath, 0.5)
        assert k.B_tilde >= 0
        assert set(k.as_dict()) == {"t", "omega0_tilde", "B_tilde", "D_tilde", "S"}


class TestJxWithPulses:
    """j_x assembled from the pulsed kernels."""

    def test_empty_sequence_matches_free(self, figure_bath):
        """No pulses reproduces the unpulsed j_x."""
        for mode in ("none", "exact", "large_N"):
            free = jx(0.3, 50, figure_bath, correlation_mode=mode, omega0=0.1)
            pulsed = jx_with_dd(0.3, PulseSequence(0.3), 50, figure_bath, correlation_mode=mode, omega0=0.1)
            assert pulsed == pytest.approx(free, abs=1e-12)

    def test_time_mismatch(self, figure_bath):
        """The sequence must end at the evaluation time."""
        with pytest.raises(SequenceError):
            jx_with_dd(0.2, udd(0.1, 4), 10, figure_bath)

    def test_udd_recovers(self, figure_bath):
        """N = 20000, four UDD pulses: j_x(0.1) within 0.02 of 1."""
        value = jx_with_dd(0.1, udd(0.1, 4), 20000, figure_bath, correlation_mode="exact", omega0=0.1)
        assert value == pytest.approx(1.0, abs=0.02)

    def test_series_matches_pointwise(self, figure_bath):
        """The series truncates the train at each time."""
        seq = udd(0.1, 4)
        engine = DephasingEngine(figure_bath, PreparedState.coherent(200), 0.1)
        series = jx_with_dd_series([0.0, 0.05, 0.1], seq, engine, "exact")
        assert series[0] == pytest.approx(1.0, abs=1e-10)
        assert series[1] == pytest.approx(
            jx_with_dd(0.05, seq.truncated(0.05), 200, figure_bath, correlation_mode="exact", omega0=0.1), abs=1e-14
        )
        assert series[2] == pytest.approx(
            jx_with_dd(0.1, seq, 200, figure_bath, correlation_mode="exact", omega0=0.1), abs=1e-14
        )
