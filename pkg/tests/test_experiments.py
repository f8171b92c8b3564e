import math

import numpy as np
import pytest

from mqecho import (
    LoschmidtSpec,
    PartialEchoSpec,
    SpinSystem,
    build_hamiltonian,
    echo_delta_sweep,
    echo_quadratic_check,
    echo_tau_sweep,
    evolve,
    from_preset,
    correlation_functions,
    correlation_time,
    harmonic_decomposition,
    loschmidt_echo,
    local_field,
    make_propagator,
    mq_spectrum,
    partial_echo,
    perturbation_hamiltonian,
    second_moment,
    second_order_echo,
    spin_diffusion,
    total_operator,
    trace_product,
    weak_irrev_prediction,
    weak_irrev_scan,
)
from mqecho.experiments import _offset_operator, fid_decay_time
from mqecho.hamiltonians import (
    HamiltonianSpec,
    chain_couplings,
    dipolar_couplings,
    line_positions,
    random_couplings,
)
from mqecho.spinops import commutator, random_deviation


def maxabs(a):
    return np.abs(a).max()


class TestLoschmidtEcho:
    def test_no_kick_is_perfect(self, random_dipolar6):
        sys, h = random_dipolar6
        m = loschmidt_echo(LoschmidtSpec(sys, h, delta=0.0, tau=2.3))
        assert m == pytest.approx(1.0, abs=1e-12)

    def test_zero_time_commuting_kick(self, random_dipolar6):
        sys, h = random_dipolar6
        for delta in (0.3, 1.7):
            m = loschmidt_echo(LoschmidtSpec(sys, h, delta=delta, tau=0.0))
            assert m == pytest.approx(1.0, abs=1e-12)

    def test_fourier_identity(self, random_dipolar6):
        sys, h = random_dipolar6
        prop = make_propagator(h)
        sx = total_operator(sys, "x")
        norm = trace_product(sx, sx).real
        for tau in (0.8, 2.4):
            spec = mq_spectrum(evolve(prop, sx, tau), sys, norm)
            for delta in (0.1, 0.5, 1.0):
                m = loschmidt_echo(LoschmidtSpec(sys, h, delta, tau))
                fourier = sum(spec[int(n)] * math.cos(n * delta)
                              for n in spec.orders)
                assert abs(m - fourier) < 1e-9

    def test_even_in_delta_and_bounded(self, random_dipolar6):
        sys, h = random_dipolar6
        spec = LoschmidtSpec(sys, h, 0.0, 1.9)
        deltas = np.array([0.2, 0.9, 2.5])
        plus = echo_delta_sweep(spec, deltas)
        minus = echo_delta_sweep(spec, -deltas)
        assert maxabs(plus - minus) < 1e-10
        assert np.all(plus <= 1.0 + 1e-10)

    def test_tau_sweep_matches_pointwise(self, random_dipolar6):
        sys, h = random_dipolar6
        taus = [0.5, 1.5]
        swept = echo_tau_sweep(LoschmidtSpec(sys, h, 0.4, 0.0), taus)
        single = [loschmidt_echo(LoschmidtSpec(sys, h, 0.4, t)) for t in taus]
        assert maxabs(swept - np.array(single)) < 1e-12


class TestQuadraticDecayLaw:
    def test_commuting_case_no_decay(self):
        # H = zz with rho0 = V = S_z-ish symmetry: use H that commutes with S_x
        sys = SpinSystem(3, "x")
        h = build_hamiltonian(sys, from_preset("xx", chain_couplings(3)))
        spec = LoschmidtSpec(sys, h, 0.0, 2.0)
        amps = echo_delta_sweep(spec, [0.05, 0.2, 1.0])
        assert maxabs(amps - 1.0) < 1e-10

    def test_extrapolation_matches_half_m2(self, random_dipolar6):
        sys, h = random_dipolar6
        omega_loc = local_field(h, total_operator(sys, "x"))
        rep = echo_quadratic_check(LoschmidtSpec(sys, h, 0.0, 2.0 / omega_loc))
        assert rep.rel_discrepancy < 1e-4
        assert abs(rep.slope_at_zero) < 1e-8

    def test_degenerate_grid_rejected(self, random_dipolar6):
        sys, h = random_dipolar6
        spec = LoschmidtSpec(sys, h, 0.0, 1.0)
        with pytest.raises(ValueError):
            echo_quadratic_check(spec, delta_grid=[0.1, 0.09])
        with pytest.raises(ValueError):
            echo_quadratic_check(spec, delta_grid=[0.5, 0.3, 0.1])


class TestPerturbationHamiltonian:
    def test_zero_delta(self, random_dipolar6):
        _, h = random_dipolar6
        assert perturbation_hamiltonian(h, 0.0).norm() == 0.0

    def test_hermitian(self, random_dipolar6):
        _, h = random_dipolar6
        hp = perturbation_hamiltonian(h, 0.3)
        assert maxabs(hp.mat - hp.mat.conj().T) < 1e-12 * max(1e-300,
                                                              maxabs(hp.mat))

    def test_harmonic_content(self, random_dipolar6):
        # H' = i delta [S_x, H] has harmonics i delta n H_n
        sys, h = random_dipolar6
        delta = 0.2
        dec = harmonic_decomposition(h, sys)
        dec_p = harmonic_decomposition(perturbation_hamiltonian(h, delta), sys)
        scale = maxabs(h.mat)
        for n in dec.orders():
            expected = 1j * delta * n * dec[n].mat
            assert maxabs(dec_p[n].mat - expected) < 1e-10 * scale


class TestSecondOrderEcho:
    def test_zero_tau(self, random_dipolar6):
        _, h = random_dipolar6
        assert second_order_echo(h, 1e-3, 0.0) == 1.0

    def test_matches_direct_echo_at_small_delta(self, dipolar_ring6):
        sys, h = dipolar_ring6
        omega_loc = local_field(h, total_operator(sys, "x"))
        tau = 2.0 / omega_loc
        delta = 1e-3
        approx = second_order_echo(h, delta, tau)
        direct = loschmidt_echo(LoschmidtSpec(sys, h, delta, tau))
        assert abs(approx - direct) < 1e-9

    def test_coefficient_equals_half_m2(self, dipolar_ring6):
        sys, h = dipolar_ring6
        sx = total_operator(sys, "x")
        omega_loc = local_field(h, sx)
        tau = 2.0 / omega_loc
        delta = 1e-3
        coefficient = (1.0 - second_order_echo(h, delta, tau)) / delta ** 2
        norm = trace_product(sx, sx).real
        rho_tau = evolve(make_propagator(h), sx, tau)
        half_m2 = 0.5 * second_moment(mq_spectrum(rho_tau, sys, norm))
        assert coefficient == pytest.approx(half_m2, rel=1e-6)


class TestCorrelationAnalysis:
    def test_zero_harmonics_zero_series(self, random_dipolar6):
        sys, h = random_dipolar6
        times = np.linspace(0.0, 5.0, 64)
        g = correlation_functions(h, times)
        assert maxabs(g[1]) == 0.0 and maxabs(g[-1]) == 0.0

    def test_initial_values_match_static_traces(self, random_dipolar6):
        sys, h = random_dipolar6
        sx = total_operator(sys, "x")
        norm = trace_product(sx, sx).real
        dec = harmonic_decomposition(h, sys)
        times = np.linspace(0.0, 3.0, 32)
        g = correlation_functions(h, times, harmonics=dec)
        for n in (-2, 0, 2):
            assert g[n][0].real == pytest.approx(dec.pair_trace(n) / norm,
                                                 rel=1e-10)
            assert g[n][0].real >= 0.0

    def test_gaussian_correlation_time_oracle(self):
        sigma = 0.8
        times = np.linspace(0.0, 12 * sigma, 4001)
        g = np.exp(-times ** 2 / (2 * sigma ** 2)).astype(complex)
        res = correlation_time(times, g)
        assert not res.diverges
        assert res.tau == pytest.approx(sigma * math.sqrt(math.pi / 2),
                                        abs=1e-4)

    def test_zz_correlations_do_not_decay(self):
        sys = SpinSystem(8, "x")
        h = build_hamiltonian(sys, from_preset("zz", chain_couplings(8)))
        omega_loc = local_field(h, total_operator(sys, "x"))
        times = np.linspace(0.0, 40.0 / omega_loc, 2000)
        g = correlation_functions(h, times)
        res = correlation_time(times, g[2])
        assert res.diverges
        # persistent recurrences: the late envelope keeps returning to g(0)
        half = times.size // 2
        peak = np.abs(g[2][half:]).max() / g[2][0].real
        assert peak >= 0.5

    def test_zero_initial_value_rejected(self):
        times = np.linspace(0.0, 1.0, 64)
        with pytest.raises(ValueError, match="positive"):
            correlation_time(times, np.zeros(64, dtype=complex))


@pytest.fixture(scope="module")
def chain8():
    sys = SpinSystem(8, "x")
    table = dipolar_couplings(line_positions(8), (0, 0, 1), 1.0)
    return sys, build_hamiltonian(sys, from_preset("dipolar-secular", table))


@pytest.fixture(scope="module")
def chain6():
    sys = SpinSystem(6, "z")
    table = dipolar_couplings(line_positions(6), (0, 0, 1), 1.0)
    h = build_hamiltonian(sys, from_preset("dipolar-secular", table))
    pattern = np.arange(6) - 2.5
    offsets = pattern * (0.1 / local_field(_offset_operator(sys, pattern), h))
    return sys, h, offsets


class TestWeakIrreversibility:
    def test_prediction_structure(self, chain8):
        sys, h = chain8
        omega_loc = local_field(h, total_operator(sys, "x"))
        times = np.linspace(0.0, 40.0 / omega_loc, 2000)
        rep = weak_irrev_prediction(h, delta=0.02, times=times)
        assert rep.applicable
        # only |n| = 2 contributes for bilinear couplings
        assert set(rep.correlation_times) == {-2, 2}
        assert rep.echo_decay_slope == pytest.approx(
            0.5 * 0.02 ** 2 * rep.m2_slope)
        assert rep.criterion_sum > 0.0
        assert rep.m2_slope_estimate == pytest.approx(omega_loc)

    def test_zz_flagged_not_applicable(self):
        sys = SpinSystem(8, "x")
        h = build_hamiltonian(sys, from_preset("zz", chain_couplings(8)))
        omega_loc = local_field(h, total_operator(sys, "x"))
        times = np.linspace(0.0, 40.0 / omega_loc, 2000)
        rep = weak_irrev_prediction(h, delta=0.02, times=times)
        assert not rep.applicable
        assert rep.m2_slope is None
        assert any(r.diverges for r in rep.correlation_times.values())

    def test_measured_slopes_consistent(self, chain8):
        sys, h = chain8
        omega_loc = local_field(h, total_operator(sys, "x"))
        taus = np.linspace(3.0 / omega_loc, 6.0 / omega_loc, 5)
        scan = weak_irrev_scan(LoschmidtSpec(sys, h, 0.0, 0.0), taus)
        # the echo-decay coefficient extrapolated to delta -> 0 IS half m2
        assert scan.decay_slope == pytest.approx(0.5 * scan.m2_slope,
                                                 rel=1e-6)


class TestPartialEcho:
    def test_flip_maps_offsets_to_negative(self, chain6):
        sys, h, offsets = chain6
        res = partial_echo(PartialEchoSpec(h, offsets, tau=2.0))
        assert res.flip_identity_error < 1e-10
        assert res.delta_to_h_ratio == pytest.approx(0.1, rel=1e-10)

    def test_no_offsets_no_echo_feature(self, chain6):
        # with Delta = 0 the pi pulse commutes with everything relevant:
        # the trajectory after the pulse equals the plain FID continuation
        sys, h, _ = chain6
        res = partial_echo(PartialEchoSpec(h, np.zeros(6), tau=2.0))
        assert maxabs(res.magnitude - res.baseline_magnitude) < 1e-10

    def test_echo_amplitude_order_of_magnitude(self, chain6):
        sys, h, offsets = chain6
        h_total = h + _offset_operator(sys, offsets)
        t2 = fid_decay_time(make_propagator(h_total), sys, horizon=10.0)
        res = partial_echo(PartialEchoSpec(h, offsets, tau=10.0 * t2))
        assert res.delta_to_h_ratio / 3 <= res.echo_amplitude \
            <= 3 * res.delta_to_h_ratio

    def test_non_invariant_hamiltonian_rejected(self):
        sys = SpinSystem(3, "z")
        spec = HamiltonianSpec(0, 0, 0, np.zeros((3, 3)),
                               offsets=[0.5, -0.2, 0.1], offset_axis="z")
        h = build_hamiltonian(sys, spec)  # pure offsets: flips under pi_x
        with pytest.raises(ValueError, match="invariant"):
            partial_echo(PartialEchoSpec(h, np.zeros(3), tau=1.0))


class TestSpinDiffusion:
    def test_pair_full_exchange(self):
        sys = SpinSystem(2, "z")
        h = build_hamiltonian(sys, from_preset("dipolar-secular",
                                               chain_couplings(2)))
        res = spin_diffusion(h, 0, horizon=200.0, n_samples=4001)
        assert res.time_averages[0] == pytest.approx(0.5, abs=0.01)
        assert maxabs(res.conservation - 1.0) < 1e-10

    def test_chain_source_stays_above_equilibrium(self):
        sys = SpinSystem(6, "z")
        h = build_hamiltonian(sys, from_preset("dipolar-secular",
                                               chain_couplings(6)))
        omega_loc = local_field(h, total_operator(sys, "x"))
        res = spin_diffusion(h, 0, horizon=200.0 / omega_loc, n_samples=800)
        assert maxabs(res.conservation - 1.0) < 1e-10
        assert res.time_averages[0] > res.equilibrium
        assert res.minima[0] > 0.0

    def test_non_conserving_warns(self):
        sys = SpinSystem(3, "z")
        h = build_hamiltonian(sys, from_preset("yy-zz", chain_couplings(3)))
        with pytest.warns(UserWarning, match="conserve"):
            spin_diffusion(h, 0, horizon=5.0, n_samples=32)
