"""
Pruebas del laboratorio de operadores: generador en malla, flujo y matrices
"""
import math

import numpy as np
import pytest

from decaylab.errors import ErrorCode, LabError
from decaylab.operator_lab import (
    FlowField,
    build_conjugate_generator,
    commutator_obstruction,
    commutator_residual,
    conjugate_norm,
    conjugation_flow_check,
    duhamel_identity_check,
    flow_group_law_defect,
    flow_map,
    random_hermitian,
    random_square,
    regularized_resolvent_check,
    resolvent_commutator_check,
    symbol_calculus_check,
    uniform_grid,
    wave_commutator_check,
)
from decaylab.schemas import BoundaryScheme, CheckStatus
from decaylab.spectral_model import catalog_state


def one(lam):
    return np.ones_like(np.asarray(lam, dtype=float))


def identity(lam):
    return np.asarray(lam, dtype=float)


# ========== GENERADOR EN MALLA ==========
def test_dirichlet_generator_is_hermitian():
    generator = build_conjugate_generator(lambda lam: 1.0 + 0.5 * np.sin(lam), uniform_grid(-4, 4, 101))
    dense = generator.dense()
    assert generator.hermitian
    assert np.abs(dense - dense.conj().T).max() <= 1e-12


def test_one_sided_generator_is_not_marked_hermitian():
    generator = build_conjugate_generator(identity, uniform_grid(0, 4, 64), BoundaryScheme.ONE_SIDED, one)
    assert not generator.hermitian
    assert generator.spacing == pytest.approx(4.0 / 63.0)


def test_grid_too_coarse():
    with pytest.raises(LabError) as err:
        build_conjugate_generator(one, uniform_grid(-1, 1, 16))
    assert err.value.code == ErrorCode.GRID_TOO_COARSE


@pytest.mark.parametrize("theta", [one, identity, lambda lam: 1.0 + 0.5 * np.sin(lam)])
def test_commutator_residual_is_second_order(theta):
    """[M_λ, iA_θ] ≈ +θ con error O(h²)"""
    report = commutator_residual(theta)
    assert report.status == CheckStatus.PASS
    assert report.ratio == pytest.approx(4.0, abs=0.5)


@pytest.mark.parametrize("k", [1, 2])
def test_symbol_calculus(k):
    report = symbol_calculus_check(identity, np.tanh, k)
    assert report.status == CheckStatus.PASS
    assert report.details["k"] == k


def test_symbol_calculus_order_range():
    with pytest.raises(LabError):
        symbol_calculus_check(identity, np.tanh, 4)


def test_wave_commutators():
    assert wave_commutator_check(1.0, 1.0).status == CheckStatus.PASS
    with pytest.raises(LabError):
        wave_commutator_check(1.0, 1.0, span=(-1.0, 1.0))


# ========== FLUJO ==========
def test_flow_of_constant_and_linear_fields():
    assert flow_map(FlowField(one), 0.7, 0.2) == pytest.approx(0.9, abs=1e-10)
    assert flow_map(FlowField(identity), 1.0, 0.5) == pytest.approx(0.5 * math.e, rel=1e-10)
    assert flow_map(FlowField(identity), 0.0, 0.5) == 0.5


def test_flow_group_law():
    field = FlowField(lambda lam: 1.0 + 0.5 * np.sin(lam))
    for t, s in ((0.25, 0.5), (1.0, -0.5)):
        assert flow_group_law_defect(field, t, s, 0.3) <= 1e-10


def test_flow_escapes_bounded_domain():
    """ξ_t(1) = 1/(1 − t) sale de (−10, 10) en t = 0.9"""
    field = FlowField(lambda lam: np.asarray(lam, dtype=float) ** 2, domain=(-10.0, 10.0))
    assert flow_map(field, 0.5, 1.0) == pytest.approx(2.0, rel=1e-9)
    with pytest.raises(LabError) as err:
        flow_map(field, 1.0, 1.0)
    assert err.value.code == ErrorCode.DOMAIN_ESCAPE


def test_empty_flow_domain():
    with pytest.raises(LabError):
        FlowField(one, domain=(1.0, 1.0))


def test_conjugation_follows_flow():
    report = conjugation_flow_check(one, np.sin, 0.3)
    assert report.status == CheckStatus.PASS
    assert report.details["direction"] in (-1.0, 1.0)


def test_conjugation_contaminated_by_boundary():
    with pytest.raises(LabError) as err:
        conjugation_flow_check(one, np.sin, 3.0)
    assert err.value.code == ErrorCode.BOUNDARY_CONTAMINATION


# ========== IDENTIDADES MATRICIALES ==========
@pytest.mark.parametrize("t", [0.5, 2.5, 10.0])
def test_duhamel_identity(t):
    h, a = random_hermitian(8, seed=1), random_square(8, seed=2)
    result = duhamel_identity_check(h, a, t)
    assert result.status == CheckStatus.PASS
    assert result.error_norm <= 1e-8


def test_duhamel_underresolved():
    h, a = random_hermitian(8, seed=1), random_square(8, seed=2)
    with pytest.raises(LabError) as err:
        duhamel_identity_check(h, a, 10.0, quad_nodes=4)
    assert err.value.code == ErrorCode.QUADRATURE_UNDERRESOLVED


def test_resolvent_identities():
    h, a = random_hermitian(12, seed=3), random_square(12, seed=4)
    norm_h = np.abs(np.linalg.eigvalsh(h)).max()
    assert resolvent_commutator_check(h, a, 2j * max(1.0, norm_h)).status == CheckStatus.PASS
    assert regularized_resolvent_check(h, a, 0.1).status == CheckStatus.PASS


def test_resolvent_at_an_eigenvalue():
    h, a = random_hermitian(6, seed=0), random_square(6, seed=0)
    with pytest.raises(LabError) as err:
        resolvent_commutator_check(h, a, complex(np.linalg.eigvalsh(h)[0]))
    assert err.value.code == ErrorCode.Z_NEAR_SPECTRUM


def test_non_hermitian_h_is_rejected():
    with pytest.raises(LabError) as err:
        regularized_resolvent_check(random_square(6, seed=0), random_square(6, seed=1), 0.1)
    assert err.value.code == ErrorCode.PARAMS_OUT_OF_RANGE


def test_commutator_obstruction_in_finite_dimension():
    result = commutator_obstruction(random_hermitian(6, seed=5), lambda lam: 1.0 + lam ** 2)
    assert result.status == CheckStatus.PASS
    assert result.details["lower_bound"] > 0
    assert result.error_norm >= result.details["lower_bound"] * (1.0 - 1e-10)


# ========== NORMAS DEL GENERADOR ==========
def test_conjugate_norm_of_gaussian(electric_field):
    """A = i d/dλ: ‖g′‖ = 1/√2 para la gaussiana unitaria"""
    state = catalog_state(electric_field, "gaussian")
    norm = conjugate_norm(electric_field, state)
    assert norm.value == pytest.approx(2.0 ** -0.5, rel=1e-4)
    assert 0 < norm.margin < 1e-2


def test_conjugate_norm_of_exponential(laplacian3, exponential_state):
    """A = i(2λ d/dλ + 1) sobre g = e^{−λ/2}: ‖(1 − λ)e^{−λ/2}‖ = 1"""
    assert conjugate_norm(laplacian3, exponential_state).value == pytest.approx(1.0, rel=1e-3)


def test_conjugate_norm_diverges(electric_field):
    rough = catalog_state(electric_field, "bump", {"power": 0.5})
    with pytest.raises(LabError) as err:
        conjugate_norm(electric_field, rough)
    assert err.value.code == ErrorCode.A_NORM_DIVERGES
