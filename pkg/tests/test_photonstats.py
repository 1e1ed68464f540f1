import math

import numpy as np
import pytest

from heatlaser import (
    BathSpec,
    LaserCoefficients,
    TruncationError,
    build_three_level,
    coefficient_flow,
    distribution_moments,
    elimination_flow,
    lasing_gain,
    output_power,
    pn_derivative,
    rough_estimate_mean,
    saturated_power,
    scully_lamb_coefficients,
    steady_distribution,
)

from conftest import make_fig2_model, make_fig5_model, random_four_level, random_three_level

# exact rational evaluations at gamma = 32, g = 14, n_c = 1/20, n_h = 1
FIG2_A_AT_1 = 2.5952080706179066
FIG2_AB_AT_1 = 0.2471626733921816
FIG2_BCOEFF_AT_1 = 1.0323151901330845
# closed-form moments at n_h = 2, cross-checked against direct summation
FIG2_MEAN_AT_2 = 4.37929403012336
FIG2_VAR_AT_2 = 7.24802433465372


def test_coefficients_limits():
    assert scully_lamb_coefficients(make_fig2_model(n_h=0.0)).A == 0.0
    assert scully_lamb_coefficients(make_fig2_model(n_c=0.0)).A_b == 0.0
    # four-level absorption needs both the cold and the ancilla occupation
    assert scully_lamb_coefficients(make_fig5_model(n_a=0.0)).A_b == 0.0


def test_coefficients_frozen_point():
    coeffs = scully_lamb_coefficients(make_fig2_model(n_h=1.0))
    assert coeffs.A == pytest.approx(FIG2_A_AT_1, rel=1e-14)
    assert coeffs.A_b == pytest.approx(FIG2_AB_AT_1, rel=1e-14)
    assert coeffs.B == pytest.approx(FIG2_BCOEFF_AT_1, rel=1e-14)
    assert coeffs.kappa == 1.0


def test_coefficient_validation():
    with pytest.raises(ValueError):
        LaserCoefficients(-1.0, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        LaserCoefficients(1.0, 0.0, 0.1, 0.0)


def test_gain_identity(rng):
    for make in (random_three_level, random_four_level):
        for _ in range(300):
            model = make(rng)
            coeffs = scully_lamb_coefficients(model)
            assert coeffs.A - coeffs.A_b == pytest.approx(lasing_gain(model), rel=1e-10)


# ---------------------------------------------------------------------------
# elimination oracle
# ---------------------------------------------------------------------------

def test_elimination_flow_vacuum_rung():
    model = make_fig2_model(n_h=1.3)
    coeffs = scully_lamb_coefficients(model)
    flow = elimination_flow(model, 1, 1.0, 0.0)
    assert flow == pytest.approx(coefficient_flow(coeffs, 1, 1.0, 0.0), rel=1e-12)
    # closed form (A * 1) / (1 + B/A)
    expected = coeffs.A / (1.0 + coeffs.B / coeffs.A)
    assert flow == pytest.approx(expected, rel=1e-12)


def test_elimination_flow_balanced():
    model = make_fig2_model(n_h=0.3, n_c=0.3)
    assert abs(elimination_flow(model, 4, 0.2, 0.2)) < 1e-14


def test_elimination_flow_four_level_no_absorption():
    model = make_fig5_model(n_h=0.9, n_c=0.0, n_a=0.0)
    coeffs = scully_lamb_coefficients(model)
    flow = elimination_flow(model, 3, 0.4, 0.0)
    assert flow == pytest.approx(coefficient_flow(coeffs, 3, 0.4, 0.0), rel=1e-11)
    assert flow > 0.0


@pytest.mark.parametrize("make", [random_three_level, random_four_level])
def test_elimination_flow_matches_closed_form(make, rng):
    for _ in range(50):
        model = make(rng)
        n = int(rng.integers(1, 60))
        p_nm1, p_n = rng.uniform(0.0, 1.0, 2)
        closed = coefficient_flow(scully_lamb_coefficients(model), n, p_nm1, p_n)
        solved = elimination_flow(model, n, p_nm1, p_n)
        assert solved == pytest.approx(closed, rel=1e-10, abs=1e-13)


def test_elimination_flow_degenerate_rates():
    frozen = build_three_level(BathSpec(0.0, 0.5), BathSpec(0.0, 0.1), 14.0, 1.0)
    with pytest.raises(ValueError):
        elimination_flow(frozen, 2, 0.3, 0.2)
    with pytest.raises(ValueError):
        elimination_flow(make_fig2_model(), 0, 0.3, 0.2)


# ---------------------------------------------------------------------------
# steady distribution
# ---------------------------------------------------------------------------

def test_vacuum_when_pump_off():
    dist = steady_distribution(scully_lamb_coefficients(make_fig2_model(n_h=0.0)), 10)
    assert dist.probabilities[0] == 1.0
    assert dist.probabilities[1:].max() == 0.0
    assert dist.mean == 0.0


def test_detailed_balance():
    coeffs = scully_lamb_coefficients(make_fig2_model(n_h=2.0))
    p = steady_distribution(coeffs).probabilities
    n = np.arange(1, p.size)
    lhs = p[1:] * (coeffs.A_b + coeffs.kappa * (1.0 + n * coeffs.B / coeffs.A))
    rhs = p[:-1] * coeffs.A
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12)


def test_below_threshold_geometric_decay():
    # negligible saturation: ratio is essentially constant A/(A_b + kappa) <= 1
    coeffs = LaserCoefficients(0.5, 0.2, 1e-5, 1.0)
    p = steady_distribution(coeffs).probabilities
    ratios = p[1:12] / p[:11]
    np.testing.assert_allclose(ratios, 0.5 / 1.2, rtol=1e-3)
    assert np.all(ratios <= 1.0)
    # a model below threshold decays monotonically from the vacuum
    dist = steady_distribution(scully_lamb_coefficients(make_fig2_model(n_h=0.1)))
    assert dist.peak_index == 0
    assert np.all(np.diff(dist.probabilities) < 0)


def test_peak_location_matches_closed_form():
    for nh in (0.507, 1.0, 2.629):
        coeffs = scully_lamb_coefficients(make_fig2_model(n_h=nh))
        dist = steady_distribution(coeffs)
        peak = distribution_moments(coeffs).peak
        assert peak >= 0.0
        assert abs(dist.peak_index - peak) <= 1.0


def test_truncation_violation_raises():
    coeffs = scully_lamb_coefficients(make_fig2_model(n_h=2.0))
    with pytest.raises(TruncationError):
        steady_distribution(coeffs, n_max=5)


# ---------------------------------------------------------------------------
# the P_n equation
# ---------------------------------------------------------------------------

def test_steady_distribution_is_stationary():
    coeffs = scully_lamb_coefficients(make_fig2_model(n_h=1.0))
    dist = steady_distribution(coeffs)
    deriv = pn_derivative(coeffs, dist.probabilities)
    assert np.abs(deriv).max() < 1e-10


def test_pure_decay_chain():
    coeffs = LaserCoefficients(0.0, 0.0, 0.0, 1.0)
    vacuum = np.zeros(8)
    vacuum[0] = 1.0
    assert np.abs(pn_derivative(coeffs, vacuum)).max() == 0.0
    excited = np.zeros(8)
    excited[3] = 1.0
    deriv = pn_derivative(coeffs, excited)
    assert deriv[3] == pytest.approx(-3.0)  # kappa * n
    assert deriv[2] == pytest.approx(3.0)


def test_probability_conservation(rng):
    coeffs = scully_lamb_coefficients(make_fig2_model(n_h=1.7))
    for _ in range(50):
        p = rng.uniform(0.0, 1.0, 40)
        assert abs(pn_derivative(coeffs, p).sum()) < 1e-12 * max(1.0, p.sum())


# ---------------------------------------------------------------------------
# moments and power
# ---------------------------------------------------------------------------

def test_moments_match_direct_summation():
    coeffs = scully_lamb_coefficients(make_fig2_model(n_h=2.0))
    moments = distribution_moments(coeffs)
    dist = steady_distribution(coeffs)
    assert moments.mean == pytest.approx(FIG2_MEAN_AT_2, rel=1e-12)
    assert moments.variance == pytest.approx(FIG2_VAR_AT_2, rel=1e-12)
    assert moments.mean == pytest.approx(dist.mean, rel=1e-8)
    assert moments.variance == pytest.approx(dist.variance, rel=1e-8)


def test_moment_identities(rng):
    for _ in range(25):
        model = random_three_level(rng)
        coeffs = scully_lamb_coefficients(model)
        if coeffs.A - coeffs.A_b - coeffs.kappa < 0.2:
            continue  # keep the support comfortably resolved
        p = steady_distribution(coeffs).probabilities
        n = np.arange(p.size)
        kb = coeffs.kappa * coeffs.B
        x = coeffs.A**2 / kb
        y = coeffs.A * (coeffs.kappa + coeffs.A_b) / kb
        mean = float(n @ p)
        second = float((n * n) @ p)
        assert x - y + y * p[0] == pytest.approx(mean, rel=1e-8)
        assert (mean + 1.0) * x - mean * y == pytest.approx(second, rel=1e-8)


def test_super_poissonian_far_above_threshold():
    coeffs = LaserCoefficients(8.0, 0.5, 0.8, 1.0)
    moments = distribution_moments(coeffs)
    assert moments.fano > 1.0
    expected = 1.0 + (coeffs.A_b + coeffs.kappa) / (coeffs.A - coeffs.A_b - coeffs.kappa)
    assert moments.fano == pytest.approx(expected, rel=1e-6)


def test_fano_approaches_poisson():
    fanos = [
        distribution_moments(LaserCoefficients(a, 0.3, 0.1 * a, 1.0)).fano
        for a in (5.0, 20.0, 80.0, 320.0)
    ]
    assert all(f > 1.0 for f in fanos)
    assert all(a > b for a, b in zip(fanos, fanos[1:]))
    assert fanos[-1] == pytest.approx(1.0, abs=5e-3)


def test_threshold_consistency(rng):
    # peak >= 0 iff A - A_b >= kappa iff G >= kappa
    for _ in range(200):
        model = random_three_level(rng)
        coeffs = scully_lamb_coefficients(model)
        if coeffs.A == 0.0:
            continue
        peak = distribution_moments(coeffs).peak
        assert (peak >= 0.0) == (coeffs.A - coeffs.A_b - coeffs.kappa >= 0.0)
        assert (peak >= 0.0) == (lasing_gain(model) >= model.kappa - 1e-12)


def test_output_power():
    model = make_fig2_model()
    assert output_power(model, 0.0) == 0.0
    assert output_power(model, 2.5) == pytest.approx(2.5)  # Omega_l = kappa = 1
    with pytest.raises(ValueError):
        output_power(model, -1.0)


def test_saturated_power_deep_lasing():
    # kappa = 0.05 puts the engine far above threshold, P_0 ~ 1e-51
    model = make_fig2_model(n_h=2.0, kappa=0.05)
    coeffs = scully_lamb_coefficients(model)
    dist = steady_distribution(coeffs)
    assert dist.probabilities[0] < 1e-6
    exact = output_power(model, distribution_moments(coeffs).mean)
    assert saturated_power(model) == pytest.approx(exact, rel=1e-8)
    # explicit three-level rational form of the same quantity
    gh, gc, nh, nc = model.gamma_h, model.gamma_c, model.n_h, model.n_c
    gamma_ = gh * (nh + 1) + gc * (nc + 1)
    phi = 3 * nh * nc + 2 * (nh + nc) + 1
    explicit = (
        model.lasing_frequency
        * gh
        * gc
        * (nh - nc - model.kappa / (4 * model.g**2) * gamma_ * phi)
        / (gh * (3 * nh + 1) + gc * (3 * nc + 1))
    )
    assert saturated_power(model) == pytest.approx(explicit, rel=1e-12)


def test_saturated_power_decreases_with_kappa():
    powers = [saturated_power(make_fig2_model(n_h=2.0, kappa=k)) for k in (0.5, 1.0, 1.5)]
    assert powers[0] > powers[1] > powers[2]


def test_rough_estimate():
    assert rough_estimate_mean(make_fig2_model(n_h=0.0)) == pytest.approx(
        -(32.0**2) / (8 * 14.0**2), rel=1e-14
    )
    # mid-range check against the exact mean; the formula assumes an empty
    # cold bath so the band is loose
    model = make_fig2_model(n_h=4.0)
    exact = distribution_moments(scully_lamb_coefficients(model)).mean
    assert abs(rough_estimate_mean(model) - exact) / exact < 0.25
    # the depletion term grows monotonically with the hot occupation
    second = [
        (32.0**2 / (4 * 14.0**2)) * (nh + 1) * (2 * nh + 1) / (3 * nh + 2)
        for nh in np.linspace(0.0, 10.0, 30)
    ]
    assert all(b > a for a, b in zip(second, second[1:]))
    with pytest.raises(ValueError):
        rough_estimate_mean(make_fig5_model())
    with pytest.raises(ValueError):
        rough_estimate_mean(
            build_three_level(BathSpec(32.0, 1.0), BathSpec(16.0, 0.05), 14.0, 1.0)
        )
