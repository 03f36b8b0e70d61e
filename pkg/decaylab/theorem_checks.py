"""
Comprobaciones numéricas de las desigualdades explícitas:
decaimiento t^{−1/2} con constante exacta, normas L² de ψ y tψ′, desigualdad de
interferencia, cota del conmutador, desigualdad de energía y complementos
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .config import DEFAULT_TOL
from .decay_analysis import verify_decay_bound
from .errors import ErrorCode, LabError
from .operator_lab import conjugate_image, conjugate_norm
from .oscillatory_quad import (
    AmplitudeSeries,
    SingularityInfo,
    TailInfo,
    as_time_grid,
    build_plan,
    integrate,
    moment_singularities,
)
from .propagator import cross_density, cumulative_l2, time_l2_norm
from .schemas import CheckResult, CheckStatus, EvanescentClass
from .spectral_model import ModelSpec, SpectralState, density_of, evanescent_class, lifetime_norm_frequency

logger = logging.getLogger(__name__)

INTERFERENCE_SLACK = 1e-3
ENERGY_SLACK = 1e-2
# Constante de la desigualdad de energía (ver DESIGN.md); la impresa era 2
ENERGY_CONSTANT = 4.0
PRINTED_ENERGY_CONSTANT = 2.0
# Exponente mínimo de la cola para tratar ψ como de cuadrado integrable en la malla
L2_TAIL_EXPONENT = 0.45


# ========== FUNCIONES DEL LEMA ==========
@dataclass(frozen=True)
class LemmaFunction:
    """g en (0, ∞) con δg(x) = x·g′(x), su exponente en 0 y sus colas"""
    name: str
    g: Callable[[np.ndarray], np.ndarray]
    delta_g: Callable[[np.ndarray], np.ndarray]
    p: float = 2.0
    exponent: float = 0.0
    delta_exponent: float = 0.0
    tail: Optional[TailInfo] = None
    delta_tail: Optional[TailInfo] = None
    transform: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if not self.p > 1.0:
            raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, f"p={self.p} debe ser > 1")

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    def with_p(self, p: float) -> "LemmaFunction":
        return replace(self, p=p)


def _exp_tail(power: float = 0.0, prefactor: float = 1.0) -> TailInfo:
    return TailInfo("exponential", rate=1.0, power=power, prefactor=prefactor)


def _alg_tail(power: float, prefactor: float = 1.0) -> TailInfo:
    return TailInfo("algebraic", power=power, prefactor=prefactor)


def _x(x):
    return np.asarray(x, dtype=float)


LEMMA_FUNCTIONS = {
    "exp": LemmaFunction(
        "exp", lambda x: np.exp(-_x(x)), lambda x: -_x(x) * np.exp(-_x(x)),
        exponent=0.0, delta_exponent=1.0, tail=_exp_tail(), delta_tail=_exp_tail(1.0),
        transform=lambda t: 1.0 / (1.0 - 1j * _x(t)),
    ),
    "x_exp": LemmaFunction(
        "x_exp", lambda x: _x(x) * np.exp(-_x(x)), lambda x: (_x(x) - _x(x) ** 2) * np.exp(-_x(x)),
        exponent=1.0, delta_exponent=1.0, tail=_exp_tail(1.0), delta_tail=_exp_tail(2.0),
        transform=lambda t: (1.0 - 1j * _x(t)) ** -2,
    ),
    "gauss": LemmaFunction(
        "gauss", lambda x: np.exp(-_x(x) ** 2), lambda x: -2.0 * _x(x) ** 2 * np.exp(-_x(x) ** 2),
        exponent=0.0, delta_exponent=2.0, tail=TailInfo("gaussian"),
        delta_tail=TailInfo("gaussian", power=2.0, prefactor=2.0),
    ),
    "inv_square": LemmaFunction(
        "inv_square", lambda x: (1.0 + _x(x)) ** -2, lambda x: -2.0 * _x(x) * (1.0 + _x(x)) ** -3,
        exponent=0.0, delta_exponent=1.0, tail=_alg_tail(2.0), delta_tail=_alg_tail(2.0, 2.0),
    ),
    "lorentz": LemmaFunction(
        "lorentz", lambda x: 1.0 / (1.0 + _x(x) ** 2), lambda x: -2.0 * _x(x) ** 2 / (1.0 + _x(x) ** 2) ** 2,
        exponent=0.0, delta_exponent=2.0, tail=_alg_tail(2.0), delta_tail=_alg_tail(2.0, 2.0),
    ),
    "sqrt_exp": LemmaFunction(
        "sqrt_exp", lambda x: np.sqrt(_x(x)) * np.exp(-_x(x)),
        lambda x: (0.5 * np.sqrt(_x(x)) - _x(x) ** 1.5) * np.exp(-_x(x)),
        exponent=0.5, delta_exponent=0.5, tail=_exp_tail(0.5), delta_tail=_exp_tail(1.5),
    ),
    "quarter_exp": LemmaFunction(
        "quarter_exp", lambda x: _x(x) ** -0.25 * np.exp(-_x(x)),
        lambda x: (-0.25 * _x(x) ** -0.25 - _x(x) ** 0.75) * np.exp(-_x(x)),
        exponent=-0.25, delta_exponent=-0.25, tail=_exp_tail(-0.25), delta_tail=_exp_tail(0.75, 1.25),
    ),
    "damped_cos": LemmaFunction(
        "damped_cos", lambda x: np.exp(-_x(x)) * np.cos(_x(x)),
        lambda x: -_x(x) * (np.cos(_x(x)) + np.sin(_x(x))) * np.exp(-_x(x)),
        exponent=0.0, delta_exponent=1.0, tail=_exp_tail(), delta_tail=_exp_tail(1.0, math.sqrt(2.0)),
    ),
    "shifted_gauss": LemmaFunction(
        "shifted_gauss", lambda x: np.exp(-(_x(x) - 2.0) ** 2),
        lambda x: -2.0 * _x(x) * (_x(x) - 2.0) * np.exp(-(_x(x) - 2.0) ** 2),
        exponent=0.0, delta_exponent=1.0, tail=TailInfo("gaussian", origin=2.0),
        delta_tail=TailInfo("gaussian", power=2.0, prefactor=6.0, origin=2.0),
    ),
    "inv_cube": LemmaFunction(
        "inv_cube", lambda x: (1.0 + _x(x)) ** -3, lambda x: -3.0 * _x(x) * (1.0 + _x(x)) ** -4,
        exponent=0.0, delta_exponent=1.0, tail=_alg_tail(3.0), delta_tail=_alg_tail(3.0, 3.0),
    ),
}


def lemma_constant(p: float) -> float:
    """2^{3/2}(p−1)^{−1/(2p)}"""
    return 2.0 ** 1.5 * (p - 1.0) ** (-1.0 / (2.0 * p))


def _power_norm(f, exponent: float, tail: Optional[TailInfo], r: float, tol: float) -> float:
    """(∫_0^∞ |f|^r)^{1/r}"""
    if exponent * r <= -1.0:
        raise LabError(ErrorCode.NORM_DIVERGES, f"|f|^{r:.3g} no es integrable en 0")
    info = SingularityInfo(left=exponent * r, right_tail=tail.powered(r) if tail else TailInfo(prefactor=0.0))
    value = integrate(lambda x: np.abs(f(x)) ** r, (0.0, math.inf), tol, info).value.real
    return max(value, 0.0) ** (1.0 / r)


def check_sqrt_decay_lemma(af: LemmaFunction, t_grid, tol: float = DEFAULT_TOL) -> CheckResult:
    """|g̃(t)| ≤ t^{−1/2}·2^{3/2}(p−1)^{−1/(2p)}·‖g‖_p^{1/2}‖δg‖_q^{1/2}"""
    t = as_time_grid(t_grid)
    if np.any(t <= 0):
        raise ValueError("La malla del lema debe ser positiva")
    norm_g = _power_norm(af.g, af.exponent, af.tail, af.p, tol)
    norm_dg = _power_norm(af.delta_g, af.delta_exponent, af.delta_tail, af.q, tol)
    constant = lemma_constant(af.p)
    info = SingularityInfo(left=af.exponent, right_tail=af.tail or TailInfo(prefactor=0.0))
    plan = build_plan(af.g, ((0.0, math.inf),), (info,), tol)
    lhs = np.abs(plan.evaluate(t))
    rhs = constant * np.sqrt(norm_g * norm_dg) / np.sqrt(t)
    margin = rhs - lhs
    status = CheckStatus.PASS if np.all(lhs <= rhs + 10.0 * tol) else CheckStatus.FAIL
    logger.info("Lema t^{-1/2} %s p=%g: margen mínimo %.3e → %s", af.name, af.p, margin.min(), status.value)
    return CheckResult(
        name="sqrt_decay_lemma",
        status=status,
        abscissa=t.tolist(),
        lhs=lhs.tolist(),
        rhs=rhs.tolist(),
        margin=margin.tolist(),
        payload={"function": af.name, "p": af.p, "q": af.q, "constant": constant,
                 "norm_g": norm_g, "norm_delta_g": norm_dg},
    )


# ========== NORMAS L² DE ψ Y tψ′ ==========
def _tail_fit(t: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """
    (s, C) con |F(t)| ≤ C·t^{−s} en la última década de la malla: s es la pendiente negada
    de log|F| y C el máximo de t^s|F|. s = +∞ si F se anula.
    """
    late = t >= t[-1] / 10.0
    magnitude = np.abs(values[late])
    positive = magnitude > 0
    if np.count_nonzero(positive) < 2:
        return math.inf, 0.0
    t_late = t[late][positive]
    s = float(-np.polyfit(np.log(t_late), np.log(magnitude[positive]), 1)[0])
    return s, float(np.max(magnitude[positive] * t_late ** s))


def _l2_norm_with_tail(t: np.ndarray, values: np.ndarray, s: float, c: float) -> tuple[float, float]:
    """‖F‖ en [t_0, ∞): trapecio en la malla más C²T^{1−2s}/(2s−1) más allá de T"""
    tail = c * c * t[-1] ** (1.0 - 2.0 * s) / (2.0 * s - 1.0) if math.isfinite(s) and s > 0.5 else 0.0
    return math.sqrt(trapezoid(np.abs(values) ** 2, t) + tail), tail


def check_l2_derivative_decay(series: AmplitudeSeries, derivative: AmplitudeSeries, k: int = 1) -> CheckResult:
    """
    Si φ = t^{(k−1)/2}ψ y tφ′ tienen norma L² finita, t^{k/2}|ψ| está acotada:
    t|φ(t)|² ≤ 2‖φ‖‖tφ′‖ en la semirrecta.
    """
    if not np.array_equal(series.t, derivative.t):
        raise ValueError("ψ y tψ′ deben compartir la malla temporal")
    if k < 1:
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, "k debe ser ≥ 1")
    mask = series.t > 0
    t = series.t[mask]
    psi = series.values[mask]
    t_dpsi = t * derivative.values[mask]
    weight = t ** ((k - 1) / 2.0)
    phi = weight * psi
    t_dphi = 0.5 * (k - 1) * phi + weight * t_dpsi

    fits = {"phi": _tail_fit(t, phi), "t_dphi": _tail_fit(t, t_dphi)}
    exponents = {name: s for name, (s, _) in fits.items()}
    if min(exponents.values()) < L2_TAIL_EXPONENT:
        logger.info("Norma L² no finita en la malla (exponentes %s)", exponents)
        return CheckResult(name="l2_derivative_decay", status=CheckStatus.NOT_APPLICABLE,
                           payload={"k": k, "tail_exponents": exponents})

    norm_phi, tail_phi = _l2_norm_with_tail(t, phi, *fits["phi"])
    norm_t_dphi, tail_t_dphi = _l2_norm_with_tail(t, t_dphi, *fits["t_dphi"])
    constant = math.sqrt(2.0 * norm_phi * norm_t_dphi)
    stat = t ** (k / 2.0) * np.abs(psi)
    bound = verify_decay_bound(replace(series, t=t, values=psi, errors=series.errors[mask],
                                       flags=series.flags[mask]), k / 2.0)
    c_est = float(stat.max(initial=0.0))
    status = bound.status
    if status == CheckStatus.PASS and c_est > constant * (1.0 + 1e-3):
        status = CheckStatus.FAIL
    return CheckResult(
        name="l2_derivative_decay",
        status=status,
        abscissa=t.tolist(),
        lhs=stat.tolist(),
        rhs=np.full(t.shape, constant).tolist(),
        margin=(constant - stat).tolist(),
        payload={"k": k, "C_est": c_est, "C_bound": constant, "norm_phi": norm_phi,
                 "norm_t_dphi": norm_t_dphi, "trend": bound.monotone_trend, "tail_exponents": exponents,
                 "tails": {"phi": tail_phi, "t_dphi": tail_t_dphi}},
    )


# ========== INTERFERENCIA ==========
def check_interference_inequality(model: ModelSpec, v_state: SpectralState, u_state: SpectralState,
                                  t_grid, tol: float = DEFAULT_TOL) -> CheckResult:
    """(∫_{−T}^{T} |⟨v, e^{itH}u⟩|² dt)^{1/2} ≤ [v]_H [u]_H para cada T"""
    horizons = as_time_grid(t_grid)
    if np.any(horizons <= 0):
        raise ValueError("Los horizontes T deben ser positivos")
    dv, du = density_of(v_state, model), density_of(u_state, model)
    if not (evanescent_class(dv, tol).in_ce and evanescent_class(du, tol).in_ce):
        return CheckResult(name="interference", status=CheckStatus.NOT_APPLICABLE,
                           payload={"reason": "estados fuera de ce"})
    rhs = lifetime_norm_frequency(dv, tol) * lifetime_norm_frequency(du, tol)

    density = cross_density(model, v_state, u_state)
    if density.empty:
        lhs = np.zeros(horizons.shape)
    else:
        plan = build_plan(density.q, density.support, density.singularities, tol)

        def both_sides(s):
            values = plan.evaluate(np.concatenate([s, -s]))
            n = len(s)
            return np.sqrt(np.abs(values[:n]) ** 2 + np.abs(values[n:]) ** 2)

        lhs = np.sqrt(cumulative_l2(both_sides, np.concatenate([[0.0], horizons]))[1:])
    margin = rhs - lhs
    status = CheckStatus.PASS if np.all(lhs <= rhs * (1.0 + INTERFERENCE_SLACK)) else CheckStatus.FAIL
    gap = float(1.0 - lhs[-1] / rhs) if rhs > 0 else 0.0
    logger.info("Interferencia %s/%s: lhs(T_max)=%.8g rhs=%.8g → %s",
                v_state.label, u_state.label, lhs[-1], rhs, status.value)
    return CheckResult(
        name="interference",
        status=status,
        abscissa=horizons.tolist(),
        lhs=lhs.tolist(),
        rhs=np.full(horizons.shape, rhs).tolist(),
        margin=margin.tolist(),
        payload={"gap_at_largest_T": gap},
    )


# ========== COTA DEL CONMUTADOR ==========
def _theta_slope(model: ModelSpec, support) -> float:
    """K con |θ(λ)| ≤ K·max(1, |λ|) en una ventana muestreada del soporte"""
    worst = 0.0
    for a, b in support:
        lo = a if math.isfinite(a) else -100.0
        hi = b if math.isfinite(b) else 100.0
        lam = np.linspace(lo, hi, 4001)[1:-1]
        ratio = np.abs(np.asarray(model.theta(lam), dtype=float)) / np.maximum(1.0, np.abs(lam))
        worst = max(worst, float(ratio.max()))
    return 1.1 * worst


def theta_weighted_plan(model: ModelSpec, state: SpectralState, tol: float):
    """Plan de Filon para θ(λ)e(λ)"""
    density = density_of(state, model)
    slope = _theta_slope(model, density.support)
    infos = []
    for (a, b), info in zip(density.support, density.singularities):
        grown = []
        for tail in (info.left_tail, info.right_tail):
            if tail is None or model.theta_kind == "constant":
                grown.append(replace(tail, prefactor=tail.prefactor * slope) if tail else None)
                continue
            moved = tail.times_lambda()
            grown.append(replace(moved, prefactor=moved.prefactor * slope))
        infos.append(replace(
            info,
            left=info.left + (model.theta_order_at(a) if math.isfinite(a) else 0.0),
            right=info.right + (model.theta_order_at(b) if math.isfinite(b) else 0.0),
            left_tail=grown[0],
            right_tail=grown[1],
        ))
    theta, e = model.theta, density.e
    return build_plan(lambda lam: theta(lam) * e(lam), density.support, tuple(infos), tol)


def check_commutator_bound(model: ModelSpec, state: SpectralState, t_grid, tol: float = DEFAULT_TOL) -> CheckResult:
    """|⟨u, θ(H)e^{itH}u⟩| ≤ 2|t|^{−1}‖A_θ u‖‖u‖ con el margen de refinamiento de ‖A_θ u‖"""
    t = as_time_grid(t_grid)
    norm_a = conjugate_norm(model, state)
    norm_u = math.sqrt(state.norm_sq)
    plan = theta_weighted_plan(model, state, tol)
    lhs = np.abs(plan.evaluate(t))
    with np.errstate(divide="ignore"):
        rhs = np.where(t != 0, 2.0 * norm_a.value * norm_u / np.abs(t), np.inf)
    ok = lhs <= rhs * (1.0 + norm_a.margin)
    status = CheckStatus.PASS if np.all(ok) else CheckStatus.FAIL
    logger.info("Cota del conmutador %s: ‖Au‖=%.6g (margen %.1e) → %s",
                state.label, norm_a.value, norm_a.margin, status.value)
    return CheckResult(
        name="commutator_bound",
        status=status,
        abscissa=t.tolist(),
        lhs=lhs.tolist(),
        rhs=rhs.tolist(),
        margin=(rhs - lhs).tolist(),
        payload={"a_norm": norm_a.value, "a_norm_margin": norm_a.margin, "u_norm": norm_u},
    )


# ========== DESIGUALDAD DE ENERGÍA ==========
def conjugate_lifetime(model: ModelSpec, state: SpectralState) -> float:
    """‖ψ_{Au}‖_{L²} = (2π∫|A_θ g|⁴)^{1/2} sobre la imagen en malla"""
    _, image, weights = conjugate_image(model, state)
    return math.sqrt(2.0 * math.pi * float(np.sum(np.abs(image) ** 4 * weights)))


def check_energy_inequality(model: ModelSpec, state: SpectralState, tol: float = DEFAULT_TOL) -> CheckResult:
    """c²‖tψ′‖² ≤ 4‖ψ_u‖‖ψ_{Au}‖ (se informa también el valor con la constante 2)"""
    if model.theta_kind != "linear" or not model.homogeneity:
        return CheckResult(name="energy", status=CheckStatus.NOT_APPLICABLE,
                           payload={"reason": "θ no es de la forma cλ"})
    c = float(model.homogeneity)
    if state.norm_sq == 0:
        return CheckResult(name="energy", status=CheckStatus.PASS, lhs=[0.0], rhs=[0.0], margin=[0.0],
                           payload={"c": c})
    density = density_of(state, model)
    if not evanescent_class(density, tol).in_ce:
        return CheckResult(name="energy", status=CheckStatus.NOT_APPLICABLE,
                           payload={"reason": "u fuera de ce"})

    plan = build_plan(lambda lam: 1j * lam * density.e(lam), density.support, moment_singularities(density), tol)
    derivative_norm = time_l2_norm(lambda s: s * plan.evaluate(s), density.total_mass)
    lhs = c * c * derivative_norm.value ** 4
    psi_norm = lifetime_norm_frequency(density, tol) ** 2
    psi_a_norm = conjugate_lifetime(model, state)
    rhs = ENERGY_CONSTANT * psi_norm * psi_a_norm
    printed = PRINTED_ENERGY_CONSTANT * psi_norm * psi_a_norm
    status = CheckStatus.PASS if lhs <= rhs * (1.0 + ENERGY_SLACK) else CheckStatus.FAIL
    logger.info("Energía %s: c²‖tψ′‖²=%.6g ≤ %.6g → %s", state.label, lhs, rhs, status.value)
    return CheckResult(
        name="energy",
        status=status,
        lhs=[lhs],
        rhs=[rhs],
        margin=[rhs - lhs],
        payload={"c": c, "psi_norm": psi_norm, "psi_a_norm": psi_a_norm, "rhs_printed_constant": printed,
                 "holds_with_printed_constant": bool(lhs <= printed)},
    )


# ========== COMPLEMENTOS ==========
def check_inverse_commutator_bound(model: ModelSpec, state: SpectralState, t_grid,
                                   tol: float = DEFAULT_TOL) -> CheckResult:
    """Con K = θ(H)^{−1} acotado: |tψ_u(t)| ≤ ‖[A,K]‖‖u‖² + 2‖K‖‖u‖‖Au‖"""
    t = as_time_grid(t_grid)
    samples = []
    for a, b in state.support:
        lo = a if math.isfinite(a) else -100.0
        hi = b if math.isfinite(b) else 100.0
        samples.append(np.linspace(lo, hi, 4001))
    lam = np.concatenate(samples)
    theta = np.asarray(model.theta(lam), dtype=float) * np.ones_like(lam)
    if np.min(np.abs(theta)) < 1e-8:
        return CheckResult(name="inverse_commutator", status=CheckStatus.NOT_APPLICABLE,
                           payload={"reason": "θ no es invertible en el soporte"})
    k_norm = float(np.max(1.0 / np.abs(theta)))
    prime = np.asarray(model.theta_prime(lam), dtype=float) * np.ones_like(lam)
    commutator_norm = float(np.max(np.abs(prime / theta)))
    norm_a = conjugate_norm(model, state)
    norm_u = math.sqrt(state.norm_sq)
    bound = commutator_norm * norm_u ** 2 + 2.0 * k_norm * norm_u * norm_a.value * (1.0 + norm_a.margin)

    density = density_of(state, model)
    plan = build_plan(density.e, density.support, density.singularities, tol)
    lhs = np.abs(t) * np.abs(plan.evaluate(t))
    status = CheckStatus.PASS if np.all(lhs <= bound) else CheckStatus.FAIL
    return CheckResult(
        name="inverse_commutator",
        status=status,
        abscissa=t.tolist(),
        lhs=lhs.tolist(),
        rhs=np.full(t.shape, bound).tolist(),
        margin=(bound - lhs).tolist(),
        payload={"k_norm": k_norm, "commutator_norm": commutator_norm, "a_norm": norm_a.value},
    )


def check_bounded_function_lemma(model: ModelSpec, state: SpectralState, cutoffs: Sequence[float] = (1.0, 4.0, 16.0, 64.0),
                                 tol: float = DEFAULT_TOL) -> CheckResult:
    """[J_n u]_H ≤ ‖j_n‖_∞ [u]_H con j_n(λ) = 1/(1 + (λ/n)²) y [J_n u]_H → [u]_H"""
    density = density_of(state, model)
    reference = lifetime_norm_frequency(density, tol)
    if not math.isfinite(reference):
        return CheckResult(name="bounded_function", status=CheckStatus.NOT_APPLICABLE,
                           payload={"reason": "u fuera de ce"})
    values = []
    for n in cutoffs:
        e = density.e
        damped = replace(density, e=lambda lam, n=n: e(lam) / (1.0 + (np.asarray(lam, dtype=float) / n) ** 2) ** 2)
        values.append(lifetime_norm_frequency(damped, tol))
    values = np.array(values)
    bounded = bool(np.all(values <= reference * (1.0 + 1e-9)))
    monotone = bool(np.all(np.diff(values) >= -1e-9 * reference))
    gap = float(1.0 - values[-1] / reference) if reference > 0 else 0.0
    status = CheckStatus.PASS if bounded and monotone and gap <= 1e-2 else CheckStatus.FAIL
    return CheckResult(
        name="bounded_function",
        status=status,
        abscissa=[float(n) for n in cutoffs],
        lhs=values.tolist(),
        rhs=[reference] * len(values),
        margin=(reference - values).tolist(),
        payload={"gap_at_largest_cutoff": gap},
    )


def _sum_tail(a: Optional[TailInfo], b: Optional[TailInfo]) -> Optional[TailInfo]:
    """Envolvente de |x + y|² ≤ 2(|x|² + |y|²) a partir de las colas de |x|² y |y|²"""
    if a is None or b is None:
        return a or b
    if a.kind != b.kind:
        if "algebraic" in (a.kind, b.kind):
            a, b = a.as_algebraic(), b.as_algebraic()
        else:
            a, b = a.as_exponential(), b.as_exponential()
    if a.origin != b.origin:
        b = b.rebased(a.origin)
    start = max(a.start, b.start, 1.0)
    prefactor = 4.0 * max(a.prefactor, b.prefactor)
    if a.kind == "algebraic":
        return TailInfo("algebraic", power=min(a.power, b.power), prefactor=prefactor, origin=a.origin, start=start)
    return TailInfo(a.kind, rate=min(a.rate, b.rate), power=max(a.power, b.power), prefactor=prefactor,
                    origin=a.origin, start=start)


def check_density_inequalities(model: ModelSpec, v_state: SpectralState, u_state: SpectralState,
                               tol: float = DEFAULT_TOL, samples: int = 2001) -> CheckResult:
    """|E′_{v,u}|² ≤ E′_v E′_u punto a punto y [u + v]_H ≤ [u]_H + [v]_H"""
    dv, du = density_of(v_state, model), density_of(u_state, model)
    density = cross_density(model, v_state, u_state)
    worst_ratio = 0.0
    for (a, b) in density.support:
        lo = a if math.isfinite(a) else -50.0
        hi = b if math.isfinite(b) else 50.0
        lam = np.linspace(lo, hi, samples)[1:-1]
        product = dv.e(lam) * du.e(lam)
        cross = np.abs(density.q(lam)) ** 2
        positive = product > 0
        if np.any(positive):
            worst_ratio = max(worst_ratio, float(np.max(cross[positive] / product[positive])))
    pointwise = worst_ratio <= 1.0 + 1e-12

    payload = {"pointwise_max_ratio": worst_ratio}
    subadditive = True
    if v_state.support == u_state.support:
        norm_v = lifetime_norm_frequency(dv, tol)
        norm_u = lifetime_norm_frequency(du, tol)
        infos = tuple(
            SingularityInfo(
                left=min(iv.left, iu.left),
                right=min(iv.right, iu.right),
                left_tail=_sum_tail(iv.left_tail, iu.left_tail),
                right_tail=_sum_tail(iv.right_tail, iu.right_tail),
                breakpoints=tuple(sorted(set(iv.breakpoints) | set(iu.breakpoints))),
            )
            for iv, iu in zip(v_state.singularities, u_state.singularities)
        )
        pv, pu, weight = v_state.profile, u_state.profile, model.weight
        summed = replace(du, e=lambda lam: np.abs(pv(lam) + pu(lam)) ** 2 * weight(lam), singularities=infos,
                         total_mass=sum(integrate(lambda lam: np.abs(pv(lam) + pu(lam)) ** 2 * weight(lam),
                                                  piece, tol, info).value.real
                                        for piece, info in zip(du.support, infos)))
        norm_sum = lifetime_norm_frequency(summed, tol)
        subadditive = norm_sum <= (norm_u + norm_v) * (1.0 + 1e-9)
        payload.update({"norm_sum": norm_sum, "norm_u": norm_u, "norm_v": norm_v})
    status = CheckStatus.PASS if pointwise and subadditive else CheckStatus.FAIL
    return CheckResult(name="density_inequalities", status=status, payload=payload)


def evanescent_states(model: ModelSpec, states: Sequence[SpectralState], tol: float = DEFAULT_TOL) -> list[SpectralState]:
    """Filtra los estados con [u]_H finita"""
    return [s for s in states if evanescent_class(density_of(s, model), tol) != EvanescentClass.NEITHER]
