"""
Análisis de decaimiento: envolvente superior de |ψ|, ajuste de la ley de potencia
y comparación con los exponentes que garantizan los resultados del catálogo
"""
import logging
import math
from typing import Optional

import numpy as np

from .errors import ErrorCode, LabError
from .oscillatory_quad import AmplitudeSeries
from .schemas import CheckStatus, DecayBoundCheck, DecayFit
from .spectral_model import ModelSpec, SpectralState

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = (1e2, 1e4)
MIN_ENVELOPE_POINTS = 8
# Crecimiento tolerado de t^s|ψ| (pendiente log-log)
TREND_TOLERANCE = 0.05
# Factor de las ventanas logarítmicas de la envolvente
ENVELOPE_FACTOR = 2.0


def upper_envelope(t: np.ndarray, y: np.ndarray, factor: float = ENVELOPE_FACTOR) -> tuple[np.ndarray, np.ndarray]:
    """Máximo de y sobre [t, factor·t] para cada t cuya ventana cabe en la malla"""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    usable = factor * t <= t[-1] * (1.0 + 1e-12)
    upper = np.searchsorted(t, factor * t * (1.0 + 1e-12), side="right")
    idx = np.nonzero(usable)[0]
    envelope = np.array([y[i:upper[i]].max() for i in idx])
    return t[idx], envelope


def fit_decay_exponent(series: AmplitudeSeries, window: tuple[float, float] = DEFAULT_WINDOW) -> DecayFit:
    """Ajuste por mínimos cuadrados de log(envolvente) frente a log t: |ψ| ≈ C t^{−s}"""
    t_min, t_max = window
    mask = (series.t >= t_min) & (series.t <= t_max) & (series.t > 0)
    t, y = series.t[mask], series.abs[mask]
    if len(t) < MIN_ENVELOPE_POINTS:
        raise LabError(ErrorCode.TOO_FEW_POINTS, f"Solo {len(t)} puntos en la ventana [{t_min}, {t_max}]")
    env_t, env = upper_envelope(t, y)
    if len(env_t) < MIN_ENVELOPE_POINTS:
        raise LabError(ErrorCode.TOO_FEW_POINTS, f"Solo {len(env_t)} puntos de envolvente en la ventana")
    if np.any(env <= 0):
        raise LabError(ErrorCode.ZERO_SERIES, "La envolvente se anula dentro de la ventana de ajuste")

    log_t, log_env = np.log(env_t), np.log(env)
    slope, intercept = np.polyfit(log_t, log_env, 1)
    residual = float(np.sqrt(np.mean((log_env - (slope * log_t + intercept)) ** 2)))
    fit = DecayFit(
        exponent=float(-slope),
        prefactor=float(math.exp(intercept)),
        t_min=float(t[0]),
        t_max=float(t[-1]),
        residual=residual,
        envelope_points=len(env_t),
    )
    logger.info("Ajuste %s/%s en [%.3g, %.3g]: s=%.4f C=%.4g (residuo %.2e)",
                series.model_id, series.state_id, fit.t_min, fit.t_max, fit.exponent, fit.prefactor, residual)
    return fit


def verify_decay_bound(series: AmplitudeSeries, s: float) -> DecayBoundCheck:
    """
    sup_t t^s|ψ(t)| y la pendiente de su envolvente en la mitad tardía (escala log) de la malla.
    PASS si el supremo es finito y no hay crecimiento sistemático.
    """
    mask = series.t > 0
    t, y = series.t[mask], series.abs[mask]
    if len(t) < 2 or t[-1] / t[0] < 100.0:
        logger.info("verify_decay_bound: la serie no cubre dos décadas")
        return DecayBoundCheck(sup_stat=float("nan"), monotone_trend=float("nan"),
                               status=CheckStatus.NOT_APPLICABLE)
    stat = np.power(t, s) * y
    if not np.any(stat > 0):
        return DecayBoundCheck(sup_stat=0.0, monotone_trend=0.0, status=CheckStatus.PASS)

    sup_stat = float(np.max(stat))
    late = t >= math.sqrt(t[0] * t[-1])
    env_t, env = upper_envelope(t[late], stat[late])
    positive = env > 0
    trend = 0.0
    if np.count_nonzero(positive) >= 2:
        trend = float(np.polyfit(np.log(env_t[positive]), np.log(env[positive]), 1)[0])
    status = CheckStatus.PASS if math.isfinite(sup_stat) and trend <= TREND_TOLERANCE else CheckStatus.FAIL
    logger.info("Cota t^%.3g|ψ|: sup=%.4g tendencia=%.4f → %s", s, sup_stat, trend, status.value)
    return DecayBoundCheck(sup_stat=sup_stat, monotone_trend=trend, status=status)


def expected_exponent(model: ModelSpec, state: SpectralState) -> tuple[Optional[float], Optional[str]]:
    """El mayor exponente garantizado por las reglas del modelo cuyas hipótesis cumple el estado"""
    best, tag = None, None
    for rule in model.exponent_rules:
        s = rule.guaranteed(state)
        if s is not None and (best is None or s > best):
            best, tag = s, rule.tag
    return best, tag


def counterexample_rate(state: SpectralState) -> Optional[float]:
    """Exponente exacto 1 + p de la familia contraejemplo, con e ~ λ^p en el umbral (1 − 2θ si h ≡ 1)"""
    if state.id != "power_counterexample":
        return None
    return 1.0 + float(state.density_exponents[0][0])
