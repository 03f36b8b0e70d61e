"""
Pruebas de las desigualdades explícitas y sus complementos
"""
import math
from dataclasses import replace

import numpy as np
import pytest

from decaylab.errors import ErrorCode, LabError
from decaylab.oscillatory_quad import AmplitudeSeries
from decaylab.schemas import CheckStatus
from decaylab.spectral_model import build_model, catalog_state
from decaylab.theorem_checks import (
    LEMMA_FUNCTIONS,
    LemmaFunction,
    check_bounded_function_lemma,
    check_commutator_bound,
    check_density_inequalities,
    check_energy_inequality,
    check_interference_inequality,
    check_inverse_commutator_bound,
    check_l2_derivative_decay,
    check_sqrt_decay_lemma,
    evanescent_states,
    lemma_constant,
)

LEMMA_GRID = np.logspace(-1, 2, 30)


def closed_series(t, values):
    values = np.asarray(values, dtype=complex)
    return AmplitudeSeries(t=t, values=values, errors=np.zeros(len(t)), flags=np.ones(len(t), dtype=bool))


# ========== LEMA t^{−1/2} ==========
def test_lemma_constant():
    assert lemma_constant(2.0) == pytest.approx(2.0 ** 1.5)
    assert lemma_constant(3.0) == pytest.approx(2.0 ** 1.5 * 2.0 ** (-1.0 / 6.0))


def test_lemma_for_exponential():
    result = check_sqrt_decay_lemma(LEMMA_FUNCTIONS["exp"], [1.0])
    assert result.status == CheckStatus.PASS
    assert result.payload["norm_g"] == pytest.approx(2.0 ** -0.5, rel=1e-8)
    assert result.payload["norm_delta_g"] == pytest.approx(0.5, rel=1e-8)
    assert result.rhs[0] == pytest.approx(2.0 ** 0.75, rel=1e-8)
    assert result.lhs[0] == pytest.approx(2.0 ** -0.5, rel=1e-8)


@pytest.mark.parametrize("name", sorted(LEMMA_FUNCTIONS))
def test_lemma_holds_for_catalog_functions(name):
    assert check_sqrt_decay_lemma(LEMMA_FUNCTIONS[name], LEMMA_GRID).status == CheckStatus.PASS


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_lemma_holds_for_other_exponents(p):
    result = check_sqrt_decay_lemma(LEMMA_FUNCTIONS["x_exp"].with_p(p), LEMMA_GRID)
    assert result.status == CheckStatus.PASS
    assert result.payload["q"] == pytest.approx(p / (p - 1.0))


def test_lemma_for_zero_function():
    zero = LemmaFunction("zero", lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                         lambda x: np.zeros_like(np.asarray(x, dtype=float)))
    result = check_sqrt_decay_lemma(zero, LEMMA_GRID)
    assert result.status == CheckStatus.PASS
    assert max(result.lhs) == 0.0


def test_lemma_rejects_bad_inputs():
    with pytest.raises(LabError) as err:
        LEMMA_FUNCTIONS["exp"].with_p(1.0)
    assert err.value.code == ErrorCode.PARAMS_OUT_OF_RANGE
    with pytest.raises(LabError) as err:
        check_sqrt_decay_lemma(LEMMA_FUNCTIONS["quarter_exp"].with_p(5.0), LEMMA_GRID)
    assert err.value.code == ErrorCode.NORM_DIVERGES
    with pytest.raises(ValueError):
        check_sqrt_decay_lemma(LEMMA_FUNCTIONS["exp"], [0.0, 1.0])


# ========== NORMAS L² DE ψ Y tψ′ ==========
def test_l2_derivative_decay_for_resolvent_amplitude():
    t = np.logspace(-3, 4, 2000)
    psi = closed_series(t, 1.0 / (1.0 - 1j * t))
    derivative = closed_series(t, 1j / (1.0 - 1j * t) ** 2)
    result = check_l2_derivative_decay(psi, derivative)
    assert result.status == CheckStatus.PASS
    assert result.payload["C_est"] == pytest.approx(2.0 ** -0.5, rel=1e-4)
    assert result.payload["C_est"] <= result.payload["C_bound"]


def test_l2_derivative_decay_at_the_edge():
    t = np.logspace(-3, 4, 2000)
    psi = closed_series(t, (1.0 - 1j * t) ** -0.5)
    derivative = closed_series(t, 0.5j * (1.0 - 1j * t) ** -1.5)
    assert check_l2_derivative_decay(psi, derivative).status == CheckStatus.PASS


def test_l2_derivative_decay_for_higher_order():
    t = np.logspace(-3, 4, 2000)
    psi = closed_series(t, (1.0 - 1j * t) ** -2)
    derivative = closed_series(t, 2j * (1.0 - 1j * t) ** -3)
    result = check_l2_derivative_decay(psi, derivative, k=3)
    assert result.status == CheckStatus.PASS
    assert result.payload["C_est"] == pytest.approx(3.0 ** 0.75 / 4.0, rel=1e-3)


def test_l2_derivative_decay_closes_the_tail_past_the_grid():
    t = np.logspace(-3, 2, 2000)
    psi = closed_series(t, 1.0 / (1.0 - 1j * t))
    derivative = closed_series(t, 1j / (1.0 - 1j * t) ** 2)
    result = check_l2_derivative_decay(psi, derivative)
    assert result.status == CheckStatus.PASS
    # ∫|ψ|² = π/2 − atan(t_0), ∫|tψ′|² = π/4; más allá de T = 100 quedan ≈ 1/T en cada una
    assert result.payload["norm_phi"] ** 2 == pytest.approx(math.pi / 2 - math.atan(1e-3), rel=2e-3)
    assert result.payload["norm_t_dphi"] ** 2 == pytest.approx(math.pi / 4, rel=2e-3)
    assert result.payload["tails"]["phi"] == pytest.approx(1e-2, rel=0.05)
    assert result.payload["tails"]["t_dphi"] == pytest.approx(1e-2, rel=0.1)


def test_l2_derivative_decay_not_square_integrable():
    t = np.logspace(-1, 4, 200)
    result = check_l2_derivative_decay(closed_series(t, np.ones(200)), closed_series(t, np.zeros(200)))
    assert result.status == CheckStatus.NOT_APPLICABLE


def test_l2_derivative_decay_grid_mismatch():
    t = np.logspace(-1, 4, 200)
    with pytest.raises(ValueError):
        check_l2_derivative_decay(closed_series(t, np.ones(200)), closed_series(2 * t, np.ones(200)))


# ========== INTERFERENCIA ==========
def test_interference_saturates_for_same_state(laplacian3, exponential_state):
    result = check_interference_inequality(laplacian3, exponential_state, exponential_state,
                                           np.logspace(0, 3, 16))
    assert result.status == CheckStatus.PASS
    assert result.rhs[0] == pytest.approx(math.sqrt(math.pi), rel=1e-8)
    assert np.all(np.diff(result.lhs) >= 0)
    assert 0 <= result.payload["gap_at_largest_T"] < 1e-2


def test_interference_between_different_states(laplacian3, exponential_state, gaussian_laplacian_state):
    result = check_interference_inequality(laplacian3, exponential_state, gaussian_laplacian_state,
                                           np.logspace(0, 3, 16))
    assert result.status == CheckStatus.PASS


def test_interference_outside_ce(unit_weight, unit_exponential):
    slow = catalog_state(unit_weight, "power_counterexample", {"theta": 0.3})
    result = check_interference_inequality(unit_weight, slow, unit_exponential, [1.0, 10.0])
    assert result.status == CheckStatus.NOT_APPLICABLE


# ========== CONMUTADOR Y ENERGÍA ==========
def test_commutator_bound(laplacian3, exponential_state, log_grid):
    """|⟨u, 2H e^{itH}u⟩| = 2/(1 + t²) y ‖Au‖ = 1"""
    assert check_commutator_bound(laplacian3, exponential_state, log_grid).status == CheckStatus.PASS
    result = check_commutator_bound(laplacian3, exponential_state, [1.0])
    assert result.lhs[0] == pytest.approx(1.0, rel=1e-8)
    assert result.payload["a_norm"] == pytest.approx(1.0, rel=1e-3)


def test_commutator_bound_with_infinite_a_norm(electric_field):
    rough = catalog_state(electric_field, "bump", {"power": 0.5})
    with pytest.raises(LabError) as err:
        check_commutator_bound(electric_field, rough, [1.0])
    assert err.value.code == ErrorCode.A_NORM_DIVERGES


def test_energy_inequality_gaussian(laplacian3, gaussian_laplacian_state):
    result = check_energy_inequality(laplacian3, gaussian_laplacian_state)
    assert result.status == CheckStatus.PASS
    assert result.lhs[0] == pytest.approx(6.0, rel=1e-2)
    assert result.payload["psi_norm"] == pytest.approx(math.sqrt(2.0), rel=1e-6)


def test_energy_inequality_printed_constant_fails():
    fractional = build_model("fractional", {"s": 1.0, "n": 1})
    state = catalog_state(fractional, "exponential")
    result = check_energy_inequality(fractional, state)
    assert result.status == CheckStatus.PASS
    assert result.lhs[0] == pytest.approx(0.5 * math.pi, rel=1e-2)
    assert result.payload["psi_a_norm"] == pytest.approx(0.3133, rel=1e-2)
    assert result.payload["rhs_printed_constant"] == pytest.approx(1.1107, rel=1e-2)
    assert result.payload["holds_with_printed_constant"] is False


def test_energy_inequality_needs_linear_theta(electric_field, smooth_bump):
    assert check_energy_inequality(electric_field, smooth_bump).status == CheckStatus.NOT_APPLICABLE


def test_energy_inequality_for_zero_state(laplacian3, exponential_state):
    result = check_energy_inequality(laplacian3, replace(exponential_state, norm_sq=0.0))
    assert result.status == CheckStatus.PASS
    assert result.lhs == [0.0]


# ========== COMPLEMENTOS ==========
def test_inverse_commutator_with_constant_theta(electric_field, smooth_bump):
    result = check_inverse_commutator_bound(electric_field, smooth_bump, np.logspace(-1, 2, 40))
    assert result.status == CheckStatus.PASS
    assert result.payload["k_norm"] == pytest.approx(1.0)
    assert result.payload["commutator_norm"] == 0.0


def test_inverse_commutator_needs_invertible_theta(laplacian3, exponential_state):
    result = check_inverse_commutator_bound(laplacian3, exponential_state, [1.0])
    assert result.status == CheckStatus.NOT_APPLICABLE


def test_bounded_function_lemma(laplacian3, exponential_state):
    result = check_bounded_function_lemma(laplacian3, exponential_state)
    assert result.status == CheckStatus.PASS
    assert result.lhs == sorted(result.lhs)
    assert max(result.lhs) <= result.rhs[0]


def test_density_inequalities(laplacian3, exponential_state, gaussian_laplacian_state):
    result = check_density_inequalities(laplacian3, exponential_state, gaussian_laplacian_state)
    assert result.status == CheckStatus.PASS
    assert result.payload["pointwise_max_ratio"] <= 1.0 + 1e-12
    assert result.payload["norm_sum"] <= result.payload["norm_u"] + result.payload["norm_v"]


def test_evanescent_states(unit_weight, unit_exponential):
    slow = catalog_state(unit_weight, "power_counterexample", {"theta": 0.3})
    assert evanescent_states(unit_weight, [unit_exponential, slow]) == [unit_exponential]
