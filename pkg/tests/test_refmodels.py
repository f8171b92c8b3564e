import math

import numpy as np
import pytest

from mqecho import (
    SpinSystem,
    brute_force_intensities,
    build_hamiltonian,
    evolve,
    from_preset,
    ladder_operator,
    make_propagator,
    mq_spectrum,
    nn_chain_check,
    second_moment,
    total_operator,
    trace_product,
    zz_fid_analytic,
    zz_growth_check,
    zz_pair_mq_analytic,
)
from mqecho.hamiltonians import (
    HamiltonianSpec,
    chain_couplings,
    complete_couplings,
    m2_absorption,
    random_couplings,
)
from mqecho.spinops import random_deviation


class TestZZModel:
    def test_fid_trivial_cases(self):
        times = np.linspace(0.0, 5.0, 7)
        flat = zz_fid_analytic(np.zeros((4, 4)), 1.0, times)
        assert np.allclose(flat, 1.0)
        pair = zz_fid_analytic([[0.0, 0.7], [0.7, 0.0]], 1.0, times)
        assert np.allclose(pair, np.cos(0.7 * times / 2), atol=1e-14)

    def test_fid_matches_dense_n8(self):
        table = random_couplings(8, seed=11)
        c = math.sqrt(2.0)
        sys = SpinSystem(8, "x")
        h = build_hamiltonian(sys, from_preset("zz", table))
        prop = make_propagator(h)
        sx = total_operator(sys, "x")
        norm = trace_product(sx, sx).real
        times = np.linspace(0.0, 12.0, 50)
        dense = np.array([trace_product(sx, evolve(prop, sx, t)).real / norm
                          for t in times])
        assert np.abs(dense - zz_fid_analytic(table, c, times)).max() < 1e-10

    def test_pair_spectrum_closed_form(self):
        b, c = 0.7, math.sqrt(2.0)
        spec0 = zz_pair_mq_analytic(b, c, 0.0)
        assert spec0[0] == pytest.approx(1.0)
        t_flip = math.pi / (c * b)
        spec = zz_pair_mq_analytic(b, c, t_flip)
        assert spec[0] == pytest.approx(0.0, abs=1e-12)
        assert spec[2] == pytest.approx(0.5)
        assert second_moment(spec) == pytest.approx(4.0)

    def test_pair_spectrum_matches_dense(self):
        b, c, t = 0.7, math.sqrt(2.0), 2.1
        sys = SpinSystem(2, "x")
        h = build_hamiltonian(sys, from_preset("zz", [[0, b], [b, 0]]))
        sx = total_operator(sys, "x")
        norm = trace_product(sx, sx).real
        dense = mq_spectrum(evolve(make_propagator(h), sx, t), sys, norm)
        analytic = zz_pair_mq_analytic(b, c, t)
        for n in (-2, 0, 2):
            assert dense[n] == pytest.approx(analytic[n], abs=1e-10)

    def test_growth_quadratic_with_bracketed_coefficient(self):
        table = complete_couplings(8, 1.0)
        rep = zz_growth_check(8, table, math.sqrt(2.0))
        assert rep.passed
        assert rep.measured["exponent"] == pytest.approx(2.0, abs=0.02)
        m2_line = m2_absorption(math.sqrt(2.0) * table)
        assert rep.measured["coefficient"] == pytest.approx(4 * m2_line,
                                                            rel=0.05)

    def test_growth_pair_coefficient_is_short_time_value(self):
        b, c = 1.0, 1.0
        rep = zz_growth_check(2, [[0, b], [b, 0]], c)
        assert rep.passed
        # short-time law 4 M2 t^2 up to the window's O(t^2) correction
        assert rep.measured["coefficient"] == pytest.approx(
            4 * m2_absorption(np.array([[0, b], [b, 0.0]])), rel=0.02)

    def test_growth_zero_couplings_trivial_pass(self):
        rep = zz_growth_check(4, np.zeros((4, 4)), 1.0)
        assert rep.passed

    def test_growth_saturated_window_rejected(self):
        with pytest.raises(ValueError, match="saturation"):
            zz_growth_check(2, [[0, 1.0], [1.0, 0]], 1.0, window=(5.0, 50.0))


class TestNearestNeighborChain:
    def test_two_order_confinement(self):
        rep = nn_chain_check(8, 1.0)
        assert rep.passed
        assert rep.measured["max_off_support"] <= 1e-10
        assert rep.measured["max_m2"] <= 4.0 + 1e-9
        assert rep.measured["worst_echo_excess"] <= 1e-9

    def test_small_chain_odd_orders_vanish(self):
        sys = SpinSystem(3, "x")
        h = build_hamiltonian(sys, from_preset("yy-zz", chain_couplings(3)))
        prop = make_propagator(h)
        sx = total_operator(sys, "x")
        norm = trace_product(sx, sx).real
        for t in np.linspace(0.0, 20.0, 21):
            spec = mq_spectrum(evolve(prop, sx, t), sys, norm)
            for n in (1, -1, 3, -3):
                assert spec[n] < 1e-10

    def test_long_range_negative_control(self):
        rep = nn_chain_check(8, 1.0, next_nearest=0.5)
        assert not rep.passed
        assert rep.measured["max_off_support"] >= 1e-3


class TestBruteForceIntensities:
    def test_invariant_state_any_grid(self, sys4):
        sx = total_operator(sys4, "x")
        for k in (1, 3, 8):
            spec = brute_force_intensities(sx, sys4, k)
            assert spec[0] == pytest.approx(1.0, abs=1e-12)

    def test_matches_masking_at_nyquist(self, rng):
        sys = SpinSystem(6, "x")
        for _ in range(3):
            rho = random_deviation(sys, rng)
            norm = trace_product(rho, rho).real
            brute = brute_force_intensities(rho, sys, 2 * 6 + 2, norm=norm)
            mask = mq_spectrum(rho, sys, norm)
            for n in range(-6, 7):
                assert brute[n] == pytest.approx(mask[n], abs=1e-10)

    def test_sub_nyquist_aliases(self, sys4):
        # negative control: a pure 4-quantum state folded onto a 3-angle grid
        op4 = (ladder_operator(sys4, 0, +1) @ ladder_operator(sys4, 1, +1)
               @ ladder_operator(sys4, 2, +1) @ ladder_operator(sys4, 3, +1))
        rho = op4 + op4.dag()
        norm = trace_product(rho, rho).real
        aliased = brute_force_intensities(rho, sys4, 3, norm=norm)
        exact = mq_spectrum(rho, sys4, norm)
        assert exact[4] == pytest.approx(0.5, abs=1e-12)
        # 4Q content folds onto order 4 - 3 = 1 of the coarse grid
        assert aliased[1] == pytest.approx(0.5, abs=1e-12)
        assert abs(aliased[1] - exact[1]) > 1e-3
