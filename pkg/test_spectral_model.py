"""
Pruebas de los catálogos de modelos y estados
"""
import math
from dataclasses import replace

import numpy as np
import pytest

from decaylab.errors import ErrorCode, LabError
from decaylab.schemas import EvanescentClass
from decaylab.spectral_model import (
    build_model,
    catalog_state,
    closed_form_amplitude,
    density_of,
    endpoint_slope,
    evanescent_class,
    lifetime_norm_frequency,
    list_models,
    list_states,
    threshold_defects,
)


def test_unknown_model():
    with pytest.raises(LabError) as err:
        build_model("harmonic_oscillator")
    assert err.value.code == ErrorCode.UNKNOWN_ID


@pytest.mark.parametrize("model_id, params", [
    ("homogeneous", {"theta": 2.0}),
    ("fractional", {"s": 0.0}),
    ("dirac", {"m": -1.0}),
    ("wave", {"kind": "schrodinger"}),
])
def test_parameters_out_of_range(model_id, params):
    with pytest.raises(LabError) as err:
        build_model(model_id, params)
    assert err.value.code == ErrorCode.PARAMS_OUT_OF_RANGE


def test_laplacian_symbol(laplacian3):
    assert laplacian3.label == "laplacian(n=3)"
    assert float(laplacian3.theta(np.array([1.5]))[0]) == pytest.approx(3.0)
    assert laplacian3.homogeneity == 2.0
    assert laplacian3.theta_order_at(0.0) == 1.0
    assert threshold_defects(laplacian3) == []


def test_dirac_threshold():
    dirac = build_model("dirac", {"m": 1.0})
    assert dirac.support == ((1.0, math.inf),)
    assert float(dirac.theta(np.array([2.0]))[0]) == pytest.approx(math.sqrt(3.0) / 2.0)
    assert dirac.theta_order_at(1.0) == 0.5


def test_wave_klein_gordon_variant():
    wave = build_model("wave", {"kind": "klein_gordon", "m": 1.0})
    assert wave.id == "wave"
    assert [rule.tag for rule in wave.exponent_rules] == ["P7.9"]


@pytest.mark.parametrize("state_id, params", [
    ("exponential", {}),
    ("exponential", {"power": 1.5}),
    ("gaussian_laplacian", {"n": 3}),
    ("power_counterexample", {"theta": 0.25}),
    ("kzero_family", {"k": 3}),
])
def test_catalog_states_have_positive_norm(laplacian3, state_id, params):
    state = catalog_state(laplacian3, state_id, params)
    assert state.norm_sq > 0
    assert state.model_label == laplacian3.label


def test_exponential_is_normalized(exponential_state):
    assert exponential_state.norm_sq == pytest.approx(1.0, abs=1e-9)


def test_kzero_family_rejects_even_order(laplacian3):
    with pytest.raises(LabError) as err:
        catalog_state(laplacian3, "kzero_family", {"k": 2})
    assert err.value.code == ErrorCode.PARAMS_OUT_OF_RANGE


def test_unknown_state(laplacian3):
    with pytest.raises(LabError) as err:
        catalog_state(laplacian3, "coherent")
    assert err.value.code == ErrorCode.UNKNOWN_ID


def test_bump_must_fit_in_support(laplacian3):
    with pytest.raises(LabError):
        catalog_state(laplacian3, "bump", {"center": 0.5, "width": 1.0})


def test_density_belongs_to_its_model(exponential_state, electric_field):
    with pytest.raises(LabError) as err:
        density_of(exponential_state, electric_field)
    assert err.value.code == ErrorCode.PARAMS_OUT_OF_RANGE


def test_lifetime_norm_of_exponential(laplacian3, exponential_state):
    """[u]_H = (2π∫e^{−2λ})^{1/4} = π^{1/4}"""
    value = lifetime_norm_frequency(density_of(exponential_state, laplacian3))
    assert value == pytest.approx(math.pi ** 0.25, rel=1e-9)


@pytest.mark.parametrize("c", [2.0, 4.0, 10.0])
def test_scaled_density_scales_lifetime_norm(laplacian3, exponential_state, c):
    density = density_of(exponential_state, laplacian3)
    assert lifetime_norm_frequency(density.scaled(c)) == pytest.approx(math.sqrt(c) * math.pi ** 0.25, rel=1e-9)
    assert lifetime_norm_frequency(density.scaled(0.0)) == 0.0


@pytest.mark.parametrize("theta, expected", [
    (0.2, EvanescentClass.IN_CE),
    (0.3, EvanescentClass.NEITHER),
])
def test_counterexample_classes(unit_weight, theta, expected):
    state = catalog_state(unit_weight, "power_counterexample", {"theta": theta})
    assert evanescent_class(density_of(state, unit_weight)) == expected


@pytest.mark.parametrize("theta", [0.25, 0.4])
def test_counterexample_profile_on_weighted_model(laplacian3, theta):
    """|v|² = λ^{−2θ} también con h = λ^{1/2}; la densidad lleva el exponente 1/2 − 2θ"""
    state = catalog_state(laplacian3, "power_counterexample", {"theta": theta})
    assert state.endpoint_exponents[0][0] == pytest.approx(-2.0 * theta)
    assert state.endpoint_exponents[0][0] > -1.0
    assert state.density_exponents[0][0] == pytest.approx(0.5 - 2.0 * theta)
    assert endpoint_slope(state, laplacian3, 0.0) == pytest.approx(-2.0 * theta, abs=0.1)


def test_counterexample_endpoint_exponent(laplacian3):
    state = catalog_state(laplacian3, "power_counterexample", {"theta": 0.25})
    assert state.endpoint_exponents[0][0] == -0.5


def test_bounded_density_is_in_ce_infinity(laplacian3, exponential_state):
    assert evanescent_class(density_of(exponential_state, laplacian3)) == EvanescentClass.IN_CE_INFINITY


def test_declared_endpoint_exponent_matches_slope(laplacian3):
    """|v|² = e/h ~ λ^{1/2} para e = λe^{−λ} sobre h = λ^{1/2}"""
    state = catalog_state(laplacian3, "exponential", {"power": 1.0})
    slope = endpoint_slope(state, laplacian3, 0.0)
    assert slope == pytest.approx(state.endpoint_exponents[0][0], abs=0.1)
    assert slope == pytest.approx(0.5, abs=0.1)


def test_regularity_flags_near_mass_threshold():
    dirac = build_model("dirac", {"m": 1.0})
    state = catalog_state(dirac, "exponential", {"power": 1})
    assert state.flags.domain_power == 1
    assert state.flags.ce_power == 1


def test_closed_forms(laplacian3, gaussian_laplacian_state):
    closed = closed_form_amplitude(gaussian_laplacian_state)
    assert abs(closed(np.array([1.0]))[0]) == pytest.approx(2.0 ** -0.75)
    kzero = catalog_state(laplacian3, "kzero_family", {"k": 3})
    assert kzero.kzero_order == 3
    # e = λe^{−λ} ⇒ ψ = (1 − it)^{−2}
    assert closed_form_amplitude(kzero)(np.array([0.0]))[0] == pytest.approx(1.0)


def test_gaussian_state_on_real_line(electric_field):
    state = catalog_state(electric_field, "gaussian", {"mu": 1.0, "sigma": 0.5})
    assert state.norm_sq == pytest.approx(1.0, abs=1e-9)
    t = np.array([2.0])
    assert state.closed_form(t)[0] == pytest.approx(np.exp(2j - 0.25 * 0.25 * 4.0))


def test_catalog_listings():
    models = list_models()
    assert "dirac | θ(λ)=√(λ²−m²)/λ | Prop 7.7" in models
    assert any(row.startswith("custom |") for row in models)
    assert list_models() == models
    assert any(row.startswith("power_counterexample |") for row in list_states())


def test_custom_model_and_state():
    model = build_model("custom", {"theta": lambda lam: np.ones_like(np.asarray(lam, dtype=float)),
                                   "support": ((-1.0, 1.0),)})
    state = catalog_state(model, "custom", {"profile": lambda lam: np.cos(0.5 * math.pi * np.asarray(lam)),
                                           "endpoint_exponents": [(2.0, 2.0)]})
    assert state.norm_sq == pytest.approx(1.0, abs=1e-9)
    assert replace(state, norm_sq=0.0).norm_sq == 0.0
