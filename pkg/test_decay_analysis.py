"""
Pruebas del ajuste de exponentes y de la cota de decaimiento
"""
import numpy as np
import pytest

from decaylab.decay_analysis import (
    counterexample_rate,
    expected_exponent,
    fit_decay_exponent,
    upper_envelope,
    verify_decay_bound,
)
from decaylab.errors import ErrorCode, LabError
from decaylab.oscillatory_quad import AmplitudeSeries
from decaylab.schemas import CheckStatus
from decaylab.spectral_model import catalog_state


def make_series(t, values):
    values = np.asarray(values, dtype=complex)
    return AmplitudeSeries(t=t, values=values, errors=np.zeros(len(t)), flags=np.ones(len(t), dtype=bool))


def test_envelope_uses_full_windows():
    t = np.logspace(0, 2, 41)
    env_t, env = upper_envelope(t, 1.0 / t)
    assert env_t[-1] <= 50.0 * (1 + 1e-12)
    assert np.allclose(env, 1.0 / env_t)


def test_exact_power_law_is_recovered():
    t = np.logspace(2, 4, 100)
    fit = fit_decay_exponent(make_series(t, 3.0 * t ** -1.5))
    assert fit.exponent == pytest.approx(1.5, abs=1e-9)
    assert fit.prefactor == pytest.approx(3.0, rel=1e-8)
    assert fit.residual < 1e-9


@pytest.mark.parametrize("c", [0.01, 7.0])
def test_fit_is_scale_equivariant(c):
    """c·ψ: el prefactor se multiplica por c y el exponente no cambia"""
    t = np.logspace(2, 4, 300)
    values = 3.0 * t ** -1.5 * (1.0 + 0.3 * np.cos(t))
    base = fit_decay_exponent(make_series(t, values))
    scaled = fit_decay_exponent(make_series(t, c * values))
    assert scaled.exponent == pytest.approx(base.exponent, abs=1e-10)
    assert scaled.prefactor == pytest.approx(c * base.prefactor, rel=1e-9)


def test_oscillating_series_follows_its_envelope():
    t = np.logspace(2, 4, 400)
    fit = fit_decay_exponent(make_series(t, np.cos(t) / t))
    assert fit.exponent == pytest.approx(1.0, abs=0.02)


def test_too_few_points():
    t = np.logspace(2, 4, 5)
    with pytest.raises(LabError) as err:
        fit_decay_exponent(make_series(t, 1.0 / t))
    assert err.value.code == ErrorCode.TOO_FEW_POINTS


def test_zero_series_cannot_be_fitted():
    t = np.logspace(2, 4, 50)
    with pytest.raises(LabError) as err:
        fit_decay_exponent(make_series(t, np.zeros(50)))
    assert err.value.code == ErrorCode.ZERO_SERIES


def test_decay_bound_holds_and_fails():
    t = np.logspace(-1, 4, 200)
    series = make_series(t, 1.0 / (1.0 - 1j * t))
    holds = verify_decay_bound(series, 1.0)
    assert holds.status == CheckStatus.PASS
    assert holds.sup_stat == pytest.approx(1.0, rel=1e-3)
    too_fast = verify_decay_bound(series, 1.5)
    assert too_fast.status == CheckStatus.FAIL
    assert too_fast.monotone_trend == pytest.approx(0.5, abs=0.05)


def test_decay_bound_needs_two_decades():
    t = np.linspace(1.0, 10.0, 50)
    assert verify_decay_bound(make_series(t, 1.0 / t), 1.0).status == CheckStatus.NOT_APPLICABLE


def test_zero_series_satisfies_any_bound():
    t = np.logspace(0, 4, 50)
    result = verify_decay_bound(make_series(t, np.zeros(50)), 2.0)
    assert result.status == CheckStatus.PASS
    assert result.sup_stat == 0.0


def test_expected_exponents(laplacian3, gaussian_laplacian_state, electric_field):
    assert expected_exponent(laplacian3, gaussian_laplacian_state) == (0.5, "P4.3")
    bump = catalog_state(electric_field, "bump", {"power": 2})
    assert expected_exponent(electric_field, bump) == (1.0, "P4.1")


def test_counterexample_rate(unit_weight, laplacian3, exponential_state):
    state = catalog_state(unit_weight, "power_counterexample", {"theta": 0.25})
    assert counterexample_rate(state) == pytest.approx(0.5)
    # h = λ^{1/2} suaviza el umbral: e ~ λ^0
    weighted = catalog_state(laplacian3, "power_counterexample", {"theta": 0.25})
    assert counterexample_rate(weighted) == pytest.approx(1.0)
    assert counterexample_rate(exponential_state) is None
