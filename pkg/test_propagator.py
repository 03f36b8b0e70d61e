"""
Pruebas de supervivencia, amplitudes cruzadas, propagadores de ondas y norma temporal
"""
import math

import numpy as np
import pytest

from decaylab.config import DEFAULT_TOL
from decaylab.errors import ErrorCode, LabError
from decaylab.propagator import (
    cross_amplitude,
    cross_density,
    cross_series,
    cumulative_l2,
    lifetime_norm_time,
    survival_amplitude,
    survival_series,
    time_l2_norm,
    wave_amplitudes,
    wave_lifetime_norm,
    wave_pairing,
)
from decaylab.schemas import AmplitudeKind
from decaylab.spectral_model import build_model, catalog_state, density_of, lifetime_norm_frequency


@pytest.fixture
def wave3():
    return build_model("wave", {"kind": "sqrt_laplacian", "n": 3})


@pytest.fixture
def wave_state(wave3):
    """e(λ) = λe^{−λ}: ψ = (1 − it)^{−2}"""
    return catalog_state(wave3, "exponential", {"power": 1})


def test_survival_of_exponential(laplacian3, exponential_state):
    assert survival_amplitude(laplacian3, exponential_state, 1.0) == pytest.approx(1.0 / (1.0 - 1j), abs=1e-9)
    assert survival_amplitude(laplacian3, exponential_state, 0.0) == pytest.approx(1.0, abs=1e-9)


def test_survival_of_gaussian_on_real_line(electric_field):
    state = catalog_state(electric_field, "gaussian", {"mu": 0.5, "sigma": 1.0})
    t = np.array([0.5, 2.0, 6.0])
    series = survival_series(electric_field, state, t)
    assert np.max(np.abs(series.values - state.closed_form(t))) <= 1e-9


def test_state_from_another_model_is_rejected(laplacian3, electric_field, exponential_state):
    with pytest.raises(LabError) as err:
        survival_amplitude(electric_field, exponential_state, 1.0)
    assert err.value.code == ErrorCode.PARAMS_OUT_OF_RANGE


def test_cross_with_itself_is_survival(laplacian3, exponential_state, log_grid):
    cross = cross_series(laplacian3, exponential_state, exponential_state, log_grid)
    survival = survival_series(laplacian3, exponential_state, log_grid)
    assert cross.kind == AmplitudeKind.CROSS
    assert np.max(np.abs(cross.values - survival.values)) <= 1e-9


def test_cross_of_shifted_gaussians(electric_field):
    """e^{−1/4}e^{it/2}e^{−t²/4} para gaussianas centradas en 0 y 1"""
    v = catalog_state(electric_field, "gaussian", {"mu": 0.0, "sigma": 1.0})
    u = catalog_state(electric_field, "gaussian", {"mu": 1.0, "sigma": 1.0})
    for t in (0.0, 2.0):
        expected = math.exp(-0.25) * np.exp(0.5j * t - 0.25 * t * t)
        assert cross_amplitude(electric_field, v, u, t) == pytest.approx(expected, abs=1e-9)


def test_disjoint_supports_give_zero(electric_field):
    left = catalog_state(electric_field, "bump", {"center": -3.0, "width": 1.0, "power": 2})
    right = catalog_state(electric_field, "bump", {"center": 3.0, "width": 1.0, "power": 2})
    assert cross_density(electric_field, left, right).empty
    series = cross_series(electric_field, left, right, [0.0, 1.0, 10.0])
    assert np.all(series.values == 0)
    assert series.converged


def test_wave_amplitudes(wave3, wave_state):
    t = np.array([0.0, 1.0, 3.0])
    u1, u2 = wave_amplitudes(wave3, wave_state, wave_state, t)
    assert u1.kind == AmplitudeKind.WAVE_U1
    assert np.max(np.abs(u1.values - (1.0 - t ** 2) / (1.0 + t ** 2) ** 2)) <= 1e-8
    assert u2.values[0] == 0
    assert np.max(np.abs(u2.values - t / (1.0 + t ** 2))) <= 1e-8
    pairing = wave_pairing(wave3, wave_state, wave_state, t)
    assert np.allclose(pairing.values, u1.values + u2.values)


def test_sine_pairing_needs_vanishing_density(wave3):
    flat = catalog_state(wave3, "exponential", {"power": 0})
    with pytest.raises(LabError) as err:
        wave_amplitudes(wave3, flat, flat, [1.0])
    assert err.value.code == ErrorCode.DIVISION_NEAR_THRESHOLD


def test_wave_lifetime_norms(wave3, wave_state):
    norms = wave_lifetime_norm(wave3, wave_state, wave_state)
    assert norms.norm_u1 == pytest.approx(0.5 * math.sqrt(math.pi), rel=1e-6)
    assert norms.norm_u2 == pytest.approx(math.sqrt(0.5 * math.pi), rel=1e-6)
    assert norms.bracket == pytest.approx(math.sqrt(norms.norm_u1) + math.sqrt(norms.norm_u2))


def test_wave_lifetime_requires_positive_spectrum(electric_field):
    state = catalog_state(electric_field, "gaussian")
    with pytest.raises(LabError) as err:
        wave_lifetime_norm(electric_field, state, state)
    assert err.value.code == ErrorCode.PARAMS_OUT_OF_RANGE


def test_cumulative_l2():
    edges = np.array([0.0, 1.0, 2.0, 4.0])
    total = cumulative_l2(lambda s: np.exp(-np.asarray(s)), edges)
    assert total[0] == 0.0
    assert np.allclose(total, 0.5 * (1.0 - np.exp(-2.0 * edges)), atol=1e-12)


def test_time_norm_matches_frequency_norm(laplacian3, exponential_state):
    frequency = lifetime_norm_frequency(density_of(exponential_state, laplacian3))
    assert lifetime_norm_time(laplacian3, exponential_state) == pytest.approx(frequency, rel=1e-3)


def test_slow_tail_only_gives_lower_bound():
    with pytest.raises(LabError) as err:
        time_l2_norm(lambda t: (1.0 + np.asarray(t) ** 2) ** -0.2 + 0j, 1.0)
    assert err.value.code == ErrorCode.TAIL_UNBOUNDED
    assert err.value.payload["lower_bound"] > 0


def test_lifetime_norm_time_for_non_evanescent_state(unit_weight):
    state = catalog_state(unit_weight, "power_counterexample", {"theta": 0.3})
    assert lifetime_norm_time(unit_weight, state) == math.inf


@pytest.mark.parametrize("state_id, params", [
    ("exponential", {}),
    ("gaussian_laplacian", {"n": 3}),
    ("kzero_family", {"k": 3}),
])
def test_survival_never_exceeds_its_value_at_zero(laplacian3, log_grid, state_id, params):
    state = catalog_state(laplacian3, state_id, params)
    series = survival_series(laplacian3, state, np.concatenate(([0.0], log_grid)))
    assert series.values[0].real == pytest.approx(state.norm_sq, rel=1e-9)
    assert np.all(series.abs <= series.values[0].real + 1e-9)


def test_cosine_pairing_is_even_part_of_survival(wave3, wave_state):
    """ψ¹(t) = ½(ψ(t) + ψ(−t)) con f = g"""
    t = np.array([0.5, 2.0, 7.5, 40.0])
    survival = survival_series(wave3, wave_state, np.concatenate((-t[::-1], t)), DEFAULT_TOL).values
    even = 0.5 * (survival[len(t):] + survival[:len(t)][::-1])
    u1, _ = wave_amplitudes(wave3, wave_state, wave_state, t, DEFAULT_TOL)
    assert np.max(np.abs(u1.values - even)) <= 10 * DEFAULT_TOL
