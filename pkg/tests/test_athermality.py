import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from athermal import athermality as ath
from athermal.errors import DomainError
from athermal.spectral import EnergySpectrum

LN2 = math.log(2)

# exact values from a 40-digit mpmath evaluation of the same integrals
REFERENCE = [
    ((0.2, 0.3, 0.5), (0.0, 1.0, 2.5), 0.7, 2.6306736036745411504, 0.50562707032915262705),
    ((0.1, 0.4, 0.05, 0.45), (0.0, 0.3, 1.1, 2.0), 1.3, 1.8283363144594178479, 0.67348026559363888304),
]


@st.composite
def systems(draw, max_dim=6):
    d = draw(st.integers(2, max_dim))
    gaps = draw(st.lists(st.floats(0.05, 3.0), min_size=d - 1, max_size=d - 1))
    energies = np.concatenate([[0.0], np.cumsum(gaps)])
    raw = np.array(draw(st.lists(st.floats(0, 1), min_size=d, max_size=d)))
    if raw.sum() < 1e-3:
        raw[0] = 1.0
    beta = draw(st.floats(0, 4))
    return raw / raw.sum(), energies, beta


class TestBetaOrdering:
    def test_worked_qubit(self):
        o = ath.beta_order([0.5, 0.5], [0, 1], LN2)
        np.testing.assert_allclose(o.weights, [1.0, 0.5], rtol=1e-15)
        np.testing.assert_allclose(o.widths, [0.5, 1.0], rtol=1e-15)
        assert list(o.permutation) == [1, 0]

    def test_gibbs_is_flat(self):
        e = np.array([0.0, 0.4, 1.7])
        o = ath.beta_order(ath.gibbs_state(e, 0.9), e, 0.9)
        np.testing.assert_allclose(o.weights, 1 / o.partition_function, rtol=1e-14)

    def test_infinite_temperature_sorts_probabilities(self):
        o = ath.beta_order([0.1, 0.6, 0.3], [0, 1, 2], 0.0)
        np.testing.assert_array_equal(o.weights, [0.6, 0.3, 0.1])

    def test_zero_levels_last_by_energy(self):
        o = ath.beta_order([0.0, 1.0, 0.0], [0, 1, 2], 1.0)
        assert list(o.permutation) == [1, 0, 2]

    @pytest.mark.parametrize("beta", [-1.0, math.inf, math.nan])
    def test_bad_beta(self, beta):
        with pytest.raises(DomainError):
            ath.beta_order([0.5, 0.5], [0, 1], beta)

    def test_overflow_guard(self):
        with pytest.raises(DomainError):
            ath.max_qfi_thermal([0.5, 0.5], [0, 1], 800.0)


class TestStepFunctions:
    def test_energy_steps(self):
        down, up = ath.build_energy_steps([0, 1], LN2)
        assert down.segments == [(0.5, 1.0), (1.0, 0.0)]
        assert down(0.49) == 1.0 and down(0.5) == 0.0
        assert up(0.2) == 0.0 and up(1.2) == 1.0

    def test_single_level(self):
        down, _ = ath.build_energy_steps([0.0], 3.0)
        assert down.segments == [(1.0, 0.0)]

    def test_unit_widths_at_infinite_temperature(self):
        down, _ = ath.build_energy_steps([0, 1, 2], 0.0)
        assert down.segments == [(1.0, 2.0), (1.0, 1.0), (1.0, 0.0)]

    def test_q_steps_cover_partition_function(self):
        e = [0.0, 0.5, 2.0]
        down, _ = ath.build_q_steps([0.2, 0.3, 0.5], e, 1.1)
        assert down.length == pytest.approx(math.fsum(math.exp(-1.1 * x) for x in e), rel=1e-15)
        assert np.all(np.diff(down.values) <= 0)

    def test_rejects_bad_widths(self):
        with pytest.raises(DomainError):
            ath.StepFunction([1.0, 0.0], [1.0, 2.0])


class TestMaxQfiThermal:
    def test_worked_qubit(self):
        assert ath.max_qfi_thermal([0.5, 0.5], [0, 1], LN2) == pytest.approx(1 / 12, rel=1e-14)

    @pytest.mark.parametrize("p, e, beta, value, _", REFERENCE)
    def test_reference_values(self, p, e, beta, value, _):
        assert ath.max_qfi_thermal(p, e, beta) == pytest.approx(value, rel=1e-13)
        assert ath.max_qfi_thermal(p, e, beta, full_range=True) == pytest.approx(value, rel=1e-12)

    def test_gibbs_vanishes(self):
        e = [0.0, 0.7, 1.0, 2.2]
        assert ath.max_qfi_thermal(ath.gibbs_state(e, 1.3), e, 1.3) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("beta", [0.0, 0.5, 3.0])
    def test_excited_state_gives_top_energy_squared(self, beta):
        assert ath.max_qfi_thermal([0, 0, 1], [0, 1, 2.5], beta) == pytest.approx(6.25, rel=1e-13)

    def test_segment_table_sums_to_value(self):
        p, e, beta = REFERENCE[0][:3]
        rows = ath.step_segments(p, e, beta)
        assert math.fsum(r[-1] for r in rows) == pytest.approx(REFERENCE[0][3], rel=1e-12)
        assert rows[0][0] == 0.0
        assert all(a[1] == b[0] for a, b in zip(rows, rows[1:]))

    @settings(max_examples=100, deadline=None)
    @given(systems())
    def test_half_and_full_range_agree(self, sys):
        p, e, beta = sys
        a = ath.max_qfi_thermal(p, e, beta)
        b = ath.max_qfi_thermal(p, e, beta, full_range=True)
        # full-range breakpoints are differences of O(Z) sums: rounding of order
        # eps * Z per breakpoint, weighted by the largest q and squared spread
        o = ath.beta_order(p, e, beta)
        scale = o.weights[0] * o.partition_function * (e[-1] - e[0]) ** 2
        assert abs(a - b) <= 1e-14 * len(p) * scale + 1e-12 * a

    @settings(max_examples=100, deadline=None)
    @given(systems(), st.floats(-5, 5))
    def test_energy_shift_invariance(self, sys, c):
        p, e, beta = sys
        shifted = EnergySpectrum(e + c, shift_to_zero=False)
        assert shifted.energies[0] == c
        a = ath.max_qfi_thermal(p, e, beta)
        b = ath.max_qfi_thermal(p, shifted, beta)
        s1 = ath.interaction_speed(p, e, beta)
        s2 = ath.interaction_speed(p, shifted, beta)
        assert b == pytest.approx(a, rel=1e-10, abs=1e-10)
        assert s2 == pytest.approx(s1, rel=1e-10, abs=1e-10)

    @settings(max_examples=100, deadline=None)
    @given(systems())
    def test_bounded_by_fixed_spectrum_maximum_at_infinite_temperature(self, sys):
        p, e, _ = sys
        _, high = ath.qfi_temperature_limits(p, e)
        assert ath.max_qfi_thermal(p, e, 0.0) == pytest.approx(high, rel=1e-12, abs=1e-14)

    def test_tie_order_irrelevant(self):
        # levels 0 and 1 share q = p e^{beta eps}; nudging either way flips their order
        beta = 0.8
        e = [0.0, 1.0, 2.0]

        def value(nudge):
            p = np.array([math.exp(beta) + nudge, 1.0, 1.5])
            return ath.max_qfi_thermal(p / p.sum(), e, beta)

        tied = value(0.0)
        assert tied > 0
        assert value(1e-9) == pytest.approx(tied, rel=1e-8)
        assert value(-1e-9) == pytest.approx(tied, rel=1e-8)


class TestQubitAndLimits:
    def test_qubit_closed_form(self):
        assert ath.max_qfi_qubit(0.5, 0.5, 1.0, LN2) == pytest.approx(1 / 12, rel=1e-15)
        assert ath.max_qfi_qubit(0.0, 1.0, 2.0, 0.4) == pytest.approx(4.0)
        x = math.exp(-1.5)
        assert ath.max_qfi_qubit(1 / (1 + x), x / (1 + x), 1.0, 1.5) == pytest.approx(0.0, abs=1e-16)

    def test_qubit_validation(self):
        with pytest.raises(DomainError):
            ath.max_qfi_qubit(0.6, 0.6, 1.0, 1.0)

    def test_limits(self):
        assert ath.qfi_temperature_limits([0, 1], [0, 1.5]) == pytest.approx((2.25, 2.25))
        assert ath.qfi_temperature_limits([0.75, 0.25], [0, 1]) == pytest.approx((0.25, 0.25))
        assert ath.qfi_temperature_limits([0.25] * 4, [0, 1, 2, 3])[1] == 0.0

    def test_infinite_temperature_qubit_formula(self):
        for p1 in (0.0, 0.2, 0.5, 0.9):
            assert ath.max_qfi_thermal([1 - p1, p1], [0, 1], 0.0) == pytest.approx((2 * p1 - 1) ** 2, abs=1e-15)


class TestInteractionSpeed:
    def test_worked_qubit(self):
        assert ath.interaction_speed([0.5, 0.5], [0, 1], LN2) == pytest.approx(1 / 12, rel=1e-14)

    @pytest.mark.parametrize("beta, eps", [(0.0, 1.0), (0.3, 2.0), (5.0, 7.0)])
    def test_excited_qubit_is_one(self, beta, eps):
        assert ath.interaction_speed([0, 1], [0, eps], beta) == pytest.approx(1.0, rel=1e-14)

    @pytest.mark.parametrize("p, e, beta, _, speed", REFERENCE)
    def test_reference_values(self, p, e, beta, _, speed):
        assert ath.interaction_speed(p, e, beta) == pytest.approx(speed, rel=1e-13)

    @settings(max_examples=100, deadline=None)
    @given(systems())
    def test_nonnegative_and_zero_only_for_gibbs(self, sys):
        p, e, beta = sys
        s = ath.interaction_speed(p, e, beta)
        assert s >= 0
        gibbs = ath.gibbs_state(e, beta).probs
        if np.max(np.abs(p - gibbs)) > 1e-6:
            assert s > 0
        assert ath.interaction_speed(gibbs, e, beta) == pytest.approx(0.0, abs=1e-14)


class TestThermoMajorization:
    def test_pure_ground_state_curve(self):
        beta = 0.8
        c = ath.thermo_curve([1, 0], [0, 1], beta)
        np.testing.assert_allclose(c.points, [[0, 0], [1, 1], [1 + math.exp(-beta), 1]])

    def test_gibbs_curve_is_straight(self):
        e = [0.0, 0.4, 1.0]
        c = ath.thermo_curve(ath.gibbs_state(e, 2.0), e, 2.0)
        np.testing.assert_allclose(c.ys, c.xs / c.xs[-1], atol=1e-15)

    def test_infinite_temperature_is_lorenz_curve(self):
        c = ath.thermo_curve([0.2, 0.5, 0.3], [0, 1, 2], 0.0)
        np.testing.assert_allclose(c.ys, [0, 0.5, 0.8, 1.0])

    def test_worked_pair(self):
        assert ath.thermo_majorizes([0.5, 0.5], [0, 1], [0, 1], LN2) is True
        assert ath.thermo_majorizes([0, 1], [0.5, 0.5], [0, 1], LN2) is False

    @settings(max_examples=50, deadline=None)
    @given(systems())
    def test_reflexive_and_gibbs_is_minimal(self, sys):
        p, e, beta = sys
        assert ath.thermo_majorizes(p, p, e, beta)
        assert ath.thermo_majorizes(ath.gibbs_state(e, beta), p, e, beta)


class TestGibbsStochasticMaps:
    @settings(max_examples=50, deadline=None)
    @given(systems(), st.integers(0, 2**32 - 1))
    def test_map_fixes_gibbs_and_is_stochastic(self, sys, seed):
        _, e, beta = sys
        T = ath.random_gibbs_stochastic_map(e, beta, np.random.default_rng(seed))
        np.testing.assert_allclose(T.sum(axis=0), 1.0, atol=1e-14)
        assert np.all(T >= 0)
        g = ath.gibbs_state(e, beta).probs
        np.testing.assert_allclose(T @ g, g, atol=1e-14)

    @settings(max_examples=100, deadline=None)
    @given(systems(max_dim=4), st.integers(0, 2**32 - 1))
    def test_value_never_increases(self, sys, seed):
        p, e, beta = sys
        rng = np.random.default_rng(seed)
        after = ath.apply_stochastic(ath.random_gibbs_stochastic_map(e, beta, rng), p)
        assert ath.thermo_majorizes(after, p, e, beta)
        assert ath.max_qfi_thermal(after, e, beta) <= ath.max_qfi_thermal(p, e, beta) + 1e-10
