"""
Amplitudes físicas sobre el motor oscilatorio: supervivencia, amplitudes cruzadas,
propagadores de ondas/Klein–Gordon y norma de vida media en el lado temporal
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate as sp_integrate
from scipy import special

from .config import DEFAULT_TOL
from .decay_analysis import fit_decay_exponent
from .errors import ErrorCode, LabError
from .oscillatory_quad import (
    AmplitudeSeries,
    SingularityInfo,
    amplitude_series,
    as_time_grid,
    build_plan,
    derivative_series,
    geometric_mean_tail,
    integrate,
)
from .schemas import AmplitudeKind, EvanescentClass
from .spectral_model import (
    ModelSpec,
    SpectralState,
    density_of,
    evanescent_class,
    lifetime_norm_frequency,
)

logger = logging.getLogger(__name__)

__all__ = [
    "AmplitudeSeries",
    "CrossDensity",
    "TimeNorm",
    "WaveLifetime",
    "cross_amplitude",
    "cross_density",
    "cross_series",
    "cumulative_l2",
    "derivative_series",
    "lifetime_norm_time",
    "survival_amplitude",
    "survival_series",
    "time_l2_norm",
    "wave_amplitudes",
    "wave_lifetime_norm",
    "wave_pairing",
]

# Semiancho máximo del tramo central alrededor de λ = 0 en ψ²
THRESHOLD_HALF_WIDTH = 0.5
# Horizonte temporal: duplicación desde START hasta MAX
HORIZON_START = 16.0
HORIZON_MAX = 2048.0
# |ψ|² por debajo de este múltiplo de la masa² ya no aporta a la norma
NEGLIGIBLE_TAIL = 1e-9


def _check_member(model: ModelSpec, *states: SpectralState) -> None:
    for state in states:
        if state.model_label != model.label:
            raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE,
                           f"El estado {state.label} pertenece a {state.model_label}, no a {model.label}")


# ========== SUPERVIVENCIA ==========
def survival_series(model: ModelSpec, state: SpectralState, t_grid, tol: float = DEFAULT_TOL) -> AmplitudeSeries:
    return amplitude_series(density_of(state, model), t_grid, tol)


def survival_amplitude(model: ModelSpec, state: SpectralState, t: float, tol: float = DEFAULT_TOL) -> complex:
    """ψ_u(t) = ⟨u, e^{itH}u⟩"""
    return complex(survival_series(model, state, [t], tol).values[0])


# ========== AMPLITUDES CRUZADAS ==========
@dataclass(frozen=True)
class CrossDensity:
    """q(λ) = conj(v(λ))·u(λ)·h(λ) sobre la intersección de soportes"""
    q: Callable[[np.ndarray], np.ndarray]
    support: tuple[tuple[float, float], ...]
    singularities: tuple[SingularityInfo, ...]

    @property
    def empty(self) -> bool:
        return not self.support


def _endpoint_exponent(point: float, state: SpectralState) -> float:
    """Exponente de e_state en un punto: el declarado si es extremo, 0 si es interior"""
    for (a, b), info in zip(state.support, state.singularities):
        if point == a:
            return info.left
        if point == b:
            return info.right
    return 0.0


def _tail_of(point: float, state: SpectralState, side: str):
    for (a, b), info in zip(state.support, state.singularities):
        if side == "left" and a == point:
            return info.left_tail
        if side == "right" and b == point:
            return info.right_tail
    return None


def cross_density(model: ModelSpec, v_state: SpectralState, u_state: SpectralState) -> CrossDensity:
    _check_member(model, v_state, u_state)
    pieces, infos = [], []
    for va, vb in v_state.support:
        for ua, ub in u_state.support:
            lo, hi = max(va, ua), min(vb, ub)
            if not lo < hi:
                continue
            left = 0.5 * (_endpoint_exponent(lo, v_state) + _endpoint_exponent(lo, u_state)) if math.isfinite(lo) else 0.0
            right = 0.5 * (_endpoint_exponent(hi, v_state) + _endpoint_exponent(hi, u_state)) if math.isfinite(hi) else 0.0
            left_tail = right_tail = None
            if math.isinf(lo):
                left_tail = geometric_mean_tail(_tail_of(lo, v_state, "left"), _tail_of(lo, u_state, "left"))
            if math.isinf(hi):
                right_tail = geometric_mean_tail(_tail_of(hi, v_state, "right"), _tail_of(hi, u_state, "right"))
            breakpoints = tuple(sorted({
                x for state in (v_state, u_state) for info in state.singularities
                for x in info.breakpoints if lo < x < hi
            }))
            pieces.append((lo, hi))
            infos.append(SingularityInfo(left=left, right=right, left_tail=left_tail,
                                         right_tail=right_tail, breakpoints=breakpoints))

    v_profile, u_profile, weight = v_state.profile, u_state.profile, model.weight

    def q(lam):
        lam = np.asarray(lam, dtype=float)
        return np.conj(v_profile(lam)) * u_profile(lam) * weight(lam)

    return CrossDensity(q=q, support=tuple(pieces), singularities=tuple(infos))


def cross_series(model: ModelSpec, v_state: SpectralState, u_state: SpectralState, t_grid,
                 tol: float = DEFAULT_TOL) -> AmplitudeSeries:
    """⟨v, e^{itH}u⟩ = ∫ e^{itλ} conj(v)u h dλ; sin reflexión porque q puede ser complejo"""
    t = as_time_grid(t_grid)
    density = cross_density(model, v_state, u_state)
    if density.empty:
        values, error, converged = np.zeros(t.shape, dtype=complex), 0.0, True
    else:
        plan = build_plan(density.q, density.support, density.singularities, tol)
        values = plan.evaluate(t)
        error, converged = plan.error_estimate + plan.truncation_bound, plan.converged
    return AmplitudeSeries(
        t=t,
        values=values,
        errors=np.full(t.shape, error),
        flags=np.full(t.shape, converged),
        kind=AmplitudeKind.CROSS,
        model_id=model.label,
        state_id=f"{v_state.label}|{u_state.label}",
    )


def cross_amplitude(model: ModelSpec, v_state: SpectralState, u_state: SpectralState, t: float,
                    tol: float = DEFAULT_TOL) -> complex:
    return complex(cross_series(model, v_state, u_state, [t], tol).values[0])


# ========== ONDAS ==========
def _inverse_lambda_tail(tail, side: str):
    """Cola de q/λ: se reubica el origen para que |λ| ≥ 1 en toda la cola"""
    if tail is None:
        return None
    if side == "right":
        return tail.rebased(max(tail.origin, 1.0))
    return tail.rebased(min(tail.origin, -1.0))


def _sine_pairing(density: CrossDensity, t: np.ndarray, tol: float) -> tuple[np.ndarray, float, bool]:
    """∫ sin(tλ)/λ · q(λ) dλ sobre cada intervalo, con el tramo |λ| < δ tratado aparte"""
    total = np.zeros(t.shape, dtype=complex)
    error, converged = 0.0, True
    pieces, infos, centers = [], [], []
    for (a, b), info in zip(density.support, density.singularities):
        if (a == 0.0 and not info.left > 0) or (b == 0.0 and not info.right > 0):
            raise LabError(ErrorCode.DIVISION_NEAR_THRESHOLD,
                           f"q(λ)/λ no es integrable en λ = 0 (intervalo [{a}, {b}])")
        center = None
        breakpoints = set(info.breakpoints)
        if a < 0.0 < b:
            inner = [x for x in info.breakpoints if x != 0.0] + [x for x in (a, b) if math.isfinite(x)]
            delta = min([THRESHOLD_HALF_WIDTH] + [0.5 * abs(x) for x in inner])
            center = delta
            breakpoints.update((-delta, 0.0, delta))
        pieces.append((a, b))
        infos.append(replace(
            info,
            left=info.left - 1.0 if a == 0.0 else info.left,
            right=info.right - 1.0 if b == 0.0 else info.right,
            left_tail=_inverse_lambda_tail(info.left_tail, "left"),
            right_tail=_inverse_lambda_tail(info.right_tail, "right"),
            breakpoints=tuple(sorted(breakpoints)),
        ))
        centers.append(center)

    q = density.q
    for piece, info, delta in zip(pieces, infos, centers):
        if delta is None:
            def integrand(lam):
                lam = np.asarray(lam, dtype=float)
                return q(lam) / lam
            local = 0.0
        else:
            q0 = complex(np.asarray(q(np.array([0.0])))[0])

            def integrand(lam, q0=q0, delta=delta):
                lam = np.asarray(lam, dtype=float)
                near = np.abs(lam) < delta
                return (q(lam) - np.where(near, q0, 0.0)) / lam

            # ∫_{−δ}^{δ} sin(tλ)/λ dλ = 2 Si(tδ)
            si = np.sign(t) * special.sici(np.abs(t) * delta)[0]
            local = 2.0 * q0 * si
        plan = build_plan(integrand, (piece,), (info,), tol / max(1, len(pieces)))
        both = plan.evaluate(np.concatenate([t, -t]))
        n = len(t)
        total += (both[:n] - both[n:]) / 2j + local
        error += 2.0 * (plan.error_estimate + plan.truncation_bound)
        converged = converged and plan.converged
    return total, error, converged


def wave_amplitudes(model: ModelSpec, f_state: SpectralState, g_state: SpectralState, t_grid,
                    tol: float = DEFAULT_TOL) -> tuple[AmplitudeSeries, AmplitudeSeries]:
    """
    ψ¹(t) = ⟨f, cos(tH) f⟩ = Re ψ_f(t)
    ψ²(t) = ⟨f, sin(tH)/H g⟩ = ∫ sin(tλ)/λ · conj(f)g h dλ, con ψ²(0) = 0 exacto
    """
    _check_member(model, f_state, g_state)
    t = as_time_grid(t_grid)
    survival = amplitude_series(density_of(f_state, model), t, tol)
    u1 = replace(survival, values=survival.values.real.astype(complex), kind=AmplitudeKind.WAVE_U1)

    density = cross_density(model, f_state, g_state)
    if density.empty:
        values, error, converged = np.zeros(t.shape, dtype=complex), 0.0, True
    else:
        values, error, converged = _sine_pairing(density, t, tol)
    values[t == 0] = 0.0
    u2 = AmplitudeSeries(
        t=t,
        values=values,
        errors=np.full(t.shape, error),
        flags=np.full(t.shape, converged),
        kind=AmplitudeKind.WAVE_U2,
        model_id=model.label,
        state_id=f"{f_state.label}|{g_state.label}",
    )
    return u1, u2


def wave_pairing(model: ModelSpec, f_state: SpectralState, g_state: SpectralState, t_grid,
                 tol: float = DEFAULT_TOL) -> AmplitudeSeries:
    """ψ_{f,g}(t) = ⟨f, u₁(t)f⟩ + ⟨f, u₂(t)g⟩"""
    u1, u2 = wave_amplitudes(model, f_state, g_state, t_grid, tol)
    return u1.combined(u2, AmplitudeKind.WAVE)


@dataclass(frozen=True)
class WaveLifetime:
    norm_u1: float
    norm_u2: float

    @property
    def bracket(self) -> float:
        """‖ψ¹‖^{1/2} + ‖ψ²‖^{1/2}"""
        return math.sqrt(self.norm_u1) + math.sqrt(self.norm_u2)


def wave_lifetime_norm(model: ModelSpec, f_state: SpectralState, g_state: SpectralState,
                       tol: float = DEFAULT_TOL) -> WaveLifetime:
    """
    Normas L²_t de ψ¹ y ψ² por Plancherel, válido con espectro positivo:
    ‖ψ¹‖² = π∫e_f², ‖ψ²‖² = π∫|q/λ|²
    """
    _check_member(model, f_state, g_state)
    if any(a < 0 for a, _ in model.support):
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, "La norma de ondas requiere espectro en (0, ∞)")
    frequency = lifetime_norm_frequency(density_of(f_state, model), tol)
    norm_u1 = math.sqrt(0.5) * frequency ** 2 if math.isfinite(frequency) else math.inf

    density = cross_density(model, f_state, g_state)
    total = 0.0
    for (a, b), info in zip(density.support, density.singularities):
        left = 2.0 * (info.left - (1.0 if a == 0.0 else 0.0))
        right = 2.0 * (info.right - (1.0 if b == 0.0 else 0.0))
        if left <= -1.0 or right <= -1.0:
            return WaveLifetime(norm_u1=norm_u1, norm_u2=math.inf)
        try:
            squared = SingularityInfo(
                left=left,
                right=right,
                left_tail=_inverse_lambda_tail(info.left_tail, "left").powered(2.0) if info.left_tail else None,
                right_tail=_inverse_lambda_tail(info.right_tail, "right").powered(2.0) if info.right_tail else None,
                breakpoints=info.breakpoints,
            )
        except LabError:
            return WaveLifetime(norm_u1=norm_u1, norm_u2=math.inf)
        q = density.q
        total += integrate(lambda lam: np.abs(q(lam) / lam) ** 2, (a, b), tol, squared).value.real
    return WaveLifetime(norm_u1=norm_u1, norm_u2=math.sqrt(math.pi * max(total, 0.0)))


# ========== NORMA TEMPORAL ==========
def cumulative_l2(evaluate: Callable[[np.ndarray], np.ndarray], edges) -> np.ndarray:
    """∫_{edges[0]}^{edges[j]} |F(t)|² dt acumulado, con quad por tramo"""
    edges = np.asarray(edges, dtype=float)

    def power(s):
        return float(np.abs(evaluate(np.array([s]))[0]) ** 2)

    pieces = [
        sp_integrate.quad(power, lo, hi, limit=200, epsabs=1e-14, epsrel=1e-11)[0]
        for lo, hi in zip(edges[:-1], edges[1:])
    ]
    return np.concatenate([[0.0], np.cumsum(pieces)])


@dataclass(frozen=True)
class TimeNorm:
    value: float
    horizon: float
    integral: float
    tail: float
    exponent: Optional[float] = None
    lower_bound_only: bool = False


def time_l2_norm(evaluate: Callable[[np.ndarray], np.ndarray], mass: float, symmetric: bool = True) -> TimeNorm:
    """
    (∫|F|²dt)^{1/4} sobre [0, T*] (duplicado si |F(−t)| = |F(t)|) más el cierre
    de la cola C²T^{1−2s}/(2s−1) con el exponente ajustado.
    """
    scale = max(abs(mass), 1e-300) ** 2
    horizon = HORIZON_START
    while horizon < HORIZON_MAX:
        probe = np.abs(evaluate(np.linspace(0.5 * horizon, horizon, 64))) ** 2
        if probe.max() < NEGLIGIBLE_TAIL * scale:
            break
        horizon *= 2.0

    edges = np.concatenate([[0.0], 2.0 ** np.arange(0, int(math.log2(horizon)) + 1)])
    integral = float(cumulative_l2(evaluate, edges)[-1])
    factor = 2.0 if symmetric else 1.0

    probe_t = np.logspace(math.log10(horizon / 16.0), math.log10(horizon), 64)
    probe = evaluate(probe_t)
    tail, exponent = 0.0, None
    if (np.abs(probe) ** 2).max() >= NEGLIGIBLE_TAIL * scale:
        series = AmplitudeSeries(t=probe_t, values=probe, errors=np.zeros(64), flags=np.ones(64, dtype=bool))
        fit = fit_decay_exponent(series, (probe_t[0], probe_t[-1]))
        exponent = fit.exponent
        if exponent <= 0.5:
            lower = (factor * integral) ** 0.25
            raise LabError(ErrorCode.TAIL_UNBOUNDED,
                           f"Exponente ajustado {exponent:.3f} ≤ 1/2: solo se obtiene una cota inferior",
                           payload={"lower_bound": lower, "exponent": exponent, "horizon": horizon})
        tail = fit.prefactor ** 2 * horizon ** (1.0 - 2.0 * exponent) / (2.0 * exponent - 1.0)
    value = (factor * (integral + tail)) ** 0.25
    logger.debug("Norma temporal: T*=%g, integral=%.10g, cola=%.3e, s=%s", horizon, integral, tail, exponent)
    return TimeNorm(value=value, horizon=horizon, integral=integral, tail=tail, exponent=exponent)


def lifetime_norm_time(model: ModelSpec, state: SpectralState, tol: float = DEFAULT_TOL) -> float:
    """[u]_H = (∫_ℝ |ψ_u(t)|² dt)^{1/4} calculada en el lado temporal"""
    density = density_of(state, model)
    if evanescent_class(density, tol) == EvanescentClass.NEITHER:
        return math.inf
    if density.total_mass == 0:
        return 0.0
    plan = build_plan(density.e, density.support, density.singularities, tol)
    return time_l2_norm(plan.evaluate, density.total_mass).value
