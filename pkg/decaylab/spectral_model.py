"""
Catálogo de hamiltonianos en representación espectral y catálogo de estados
Cada modelo es un operador de multiplicación por λ sobre L²(soporte, h(λ)dλ) con
símbolo de conmutador θ: [H, iA] = θ(H). Los estados se describen por su perfil v(λ)
y su densidad espectral e(λ) = |v(λ)|²h(λ).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Optional, Sequence

import numpy as np
from scipy import special

from .config import DEFAULT_TOL
from .errors import ErrorCode, LabError
from .oscillatory_quad import SingularityInfo, TailInfo, integrate
from .schemas import THEOREM_LABELS, EvanescentClass

logger = logging.getLogger(__name__)

INF = math.inf
# Potencia máxima K declarada en las banderas de regularidad
MAX_POWER = 4
# Exponente declarado en los bordes de una meseta C^∞ (anulación de orden infinito)
SMOOTH_EDGE_EXPONENT = 8.0

MODEL_CATALOG = {
    "laplacian": {"theta": "θ(λ)=2λ", "tag": "P4.3", "description": "−Δ en ℝⁿ, A generador de dilataciones"},
    "ultrahyperbolic": {"theta": "θ(λ)=2λ", "tag": "P4.3", "description": "operador ultrahiperbólico, espectro ℝ"},
    "electric_field": {"theta": "θ(λ)=1", "tag": "P4.1", "description": "campo eléctrico constante, A = p"},
    "homogeneous": {"theta": "θ(λ)=θ₀λ", "tag": "P4.3", "description": "hamiltoniano homogéneo de grado θ₀"},
    "fractional": {"theta": "θ(λ)=sλ", "tag": "P4.3", "description": "laplaciano fraccionario (−Δ)^{s/2}"},
    "weighted_multiplication": {"theta": "θ(λ)=2λ", "tag": "P4.3", "description": "multiplicación con peso h(λ)=λ^N"},
    "dirac": {"theta": "θ(λ)=√(λ²−m²)/λ", "tag": "P7.7", "description": "Dirac libre, componente de energía positiva"},
    "wave": {"theta": "θ(λ)=λ", "tag": "P7.8", "description": "ecuación de ondas, H = √(−Δ)"},
    "klein_gordon": {"theta": "θ(λ)=λ−m²/λ", "tag": "P7.9", "description": "Klein–Gordon, H = √(−Δ+m²)"},
    "saturating": {"theta": "θ(λ)=λ/(1+λ)", "tag": "T4.6", "description": "H′ = H(1+H)^{−1}, umbral en 0"},
    "custom": {"theta": "θ(λ) del usuario", "tag": None, "description": "θ, soporte y peso arbitrarios"},
}

STATE_CATALOG = {
    "exponential": "e(λ)=(λ−a)^p e^{−(λ−a)}/Γ(p+1) desde el extremo inferior a",
    "gaussian_laplacian": "e(λ)=λ^{n/2−1}e^{−λ}/Γ(n/2), gaussiana unitaria bajo −Δ en ℝⁿ",
    "power_counterexample": "|v|²=λ^{−2θ} en (0,1) con corte suave, decaimiento t^{2θ−1} si h ≡ 1",
    "kzero_family": "u=|H|^{(k−1)/4}v con v de una familia base",
    "bump": "meseta de soporte compacto (polinomial o C^∞)",
    "gaussian": "e(λ)=e^{−(λ−μ)²/σ²}/(σ√π) en ℝ",
    "custom": "perfil v(λ) del usuario con exponentes declarados",
}


# ========== REGLAS Y BANDERAS ==========
@dataclass(frozen=True)
class RegularityFlags:
    """u ∈ D(A^k) y A^j u ∈ ce para k, j = 0..K"""
    in_domain: tuple[bool, ...]
    in_ce: tuple[bool, ...]

    @classmethod
    def from_powers(cls, domain: int, ce: int, depth: int = MAX_POWER) -> "RegularityFlags":
        return cls(
            in_domain=tuple(k <= domain for k in range(depth + 1)),
            in_ce=tuple(j <= ce for j in range(depth + 1)),
        )

    @property
    def domain_power(self) -> int:
        power = -1
        for flag in self.in_domain:
            if not flag:
                break
            power += 1
        return power

    @property
    def ce_power(self) -> int:
        power = -1
        for flag in self.in_ce:
            if not flag:
                break
            power += 1
        return power


@dataclass(frozen=True)
class ExponentRule:
    """Hipótesis (banderas) → exponente garantizado, con la etiqueta del resultado"""
    tag: str
    min_domain: int = 1
    min_ce: int = -1
    exponent: Optional[float] = None
    kzero: bool = False

    def __post_init__(self):
        if self.tag not in THEOREM_LABELS:
            raise LabError(ErrorCode.UNKNOWN_ID, f"Etiqueta de resultado desconocida: {self.tag}")

    def guaranteed(self, state: "SpectralState") -> Optional[float]:
        flags = state.flags
        if self.kzero:
            k = state.kzero_order
            if k is None or flags.domain_power < k or flags.ce_power < k:
                return None
            return k / 2.0
        if flags.domain_power < self.min_domain or flags.ce_power < self.min_ce:
            return None
        return float(flags.domain_power) if self.exponent is None else float(self.exponent)


CONSTANT_RULES = (
    ExponentRule("P4.1", min_domain=1, exponent=1.0),
    ExponentRule("P4.2", min_domain=1, exponent=1.0),
    ExponentRule("T6.1", min_domain=1, exponent=None),
)
LINEAR_RULES = (
    ExponentRule("P4.3", min_domain=1, min_ce=1, exponent=0.5),
    ExponentRule("T4.6", min_domain=1, min_ce=1, exponent=0.5),
    ExponentRule("T6.3", kzero=True),
)


# ========== MODELOS ==========
@dataclass(frozen=True)
class ModelSpec:
    id: str
    support: tuple[tuple[float, float], ...]
    weight: Callable[[np.ndarray], np.ndarray]
    theta: Callable[[np.ndarray], np.ndarray]
    theta_prime: Callable[[np.ndarray], np.ndarray]
    thresholds: tuple[float, ...] = ()
    exponent_rules: tuple[ExponentRule, ...] = ()
    params: dict[str, Any] = field(default_factory=dict)
    theta_kind: str = "general"
    homogeneity: Optional[float] = None
    threshold_orders: dict[float, float] = field(default_factory=dict)
    weight_exponents: dict[float, float] = field(default_factory=dict)
    theta_text: str = ""
    description: str = ""

    def __post_init__(self):
        if not self.support:
            raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, "El soporte del modelo está vacío")
        for a, b in self.support:
            if not a < b:
                raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, f"Intervalo de soporte vacío [{a}, {b}]")

    @property
    def label(self) -> str:
        shown = {k: v for k, v in sorted(self.params.items()) if isinstance(v, (int, float, str))}
        if not shown:
            return self.id
        return f"{self.id}({', '.join(f'{k}={v}' for k, v in shown.items())})"

    def theta_order_at(self, point: float) -> float:
        """Orden de anulación de θ en un punto (0 si θ no se anula)"""
        return self.threshold_orders.get(point, 0.0)

    def weight_exponent_at(self, point: float) -> float:
        return self.weight_exponents.get(point, 0.0)

    def contains(self, a: float, b: float) -> bool:
        return any(lo <= a and b <= hi for lo, hi in self.support)


def _constant(c: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda lam: np.full(np.shape(lam), float(c))


def _number(params: dict, name: str, default, lo=None, hi=None, integer=False, open_lo=False, open_hi=False):
    value = params.get(name, default)
    try:
        value = int(value) if integer else float(value)
    except (TypeError, ValueError):
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, f"Parámetro {name}={value!r} no numérico")
    if integer and float(params.get(name, default)) != value:
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, f"Parámetro {name} debe ser entero")
    if lo is not None and (value < lo or (open_lo and value == lo)):
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, f"Parámetro {name}={value} fuera de rango")
    if hi is not None and (value > hi or (open_hi and value == hi)):
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, f"Parámetro {name}={value} fuera de rango")
    return value


def _linear_model(model_id: str, c: float, weight, weight_exponent: float, params: dict,
                  support=((0.0, INF),), rules=LINEAR_RULES, text: str = "") -> ModelSpec:
    return ModelSpec(
        id=model_id,
        support=support,
        weight=weight,
        theta=lambda lam: c * np.asarray(lam, dtype=float),
        theta_prime=_constant(c),
        thresholds=(0.0,),
        exponent_rules=rules,
        params=params,
        theta_kind="linear",
        homogeneity=c,
        threshold_orders={0.0: 1.0},
        weight_exponents={0.0: weight_exponent},
        theta_text=text or MODEL_CATALOG[model_id]["theta"],
        description=MODEL_CATALOG[model_id]["description"],
    )


def _laplacian(params: dict) -> ModelSpec:
    n = _number(params, "n", 3, lo=1, integer=True)
    power = n / 2.0 - 1.0
    return _linear_model("laplacian", 2.0, lambda lam: np.power(lam, power), power, {"n": n})


def _ultrahyperbolic(params: dict) -> ModelSpec:
    return _linear_model("ultrahyperbolic", 2.0, _constant(1.0), 0.0, {}, support=((-INF, INF),))


def _electric_field(params: dict) -> ModelSpec:
    return ModelSpec(
        id="electric_field",
        support=((-INF, INF),),
        weight=_constant(1.0),
        theta=_constant(1.0),
        theta_prime=_constant(0.0),
        exponent_rules=CONSTANT_RULES,
        theta_kind="constant",
        theta_text=MODEL_CATALOG["electric_field"]["theta"],
        description=MODEL_CATALOG["electric_field"]["description"],
    )


def _homogeneous(params: dict) -> ModelSpec:
    theta0 = _number(params, "theta", 1.0, lo=0.0, hi=2.0, open_lo=True, open_hi=True)
    return _linear_model("homogeneous", theta0, _constant(1.0), 0.0, {"theta": theta0})


def _fractional(params: dict) -> ModelSpec:
    s = _number(params, "s", 1.0, lo=0.0, hi=2.0, open_lo=True, open_hi=True)
    n = _number(params, "n", 1, lo=1, integer=True)
    power = n / s - 1.0
    return _linear_model("fractional", s, lambda lam: np.power(lam, power), power, {"s": s, "n": n})


def _weighted_multiplication(params: dict) -> ModelSpec:
    big_n = _number(params, "N", 2, lo=0, integer=True)
    return _linear_model("weighted_multiplication", 2.0, lambda lam: np.power(lam, big_n), float(big_n), {"N": big_n})


def _threshold_mass_model(model_id: str, m: float, theta, theta_prime, order: float, rules, params) -> ModelSpec:
    def weight(lam):
        lam = np.asarray(lam, dtype=float)
        return lam * np.sqrt(np.maximum(lam * lam - m * m, 0.0))

    return ModelSpec(
        id=model_id,
        support=((m, INF),),
        weight=weight,
        theta=theta,
        theta_prime=theta_prime,
        thresholds=(m,),
        exponent_rules=rules,
        params=params,
        theta_kind="threshold",
        threshold_orders={m: order},
        weight_exponents={m: 0.5},
        theta_text=MODEL_CATALOG[model_id]["theta"],
        description=MODEL_CATALOG[model_id]["description"],
    )


def _dirac(params: dict) -> ModelSpec:
    m = _number(params, "m", 1.0, lo=0.0, open_lo=True)

    def theta(lam):
        lam = np.asarray(lam, dtype=float)
        return np.sqrt(np.maximum(lam * lam - m * m, 0.0)) / lam

    def theta_prime(lam):
        lam = np.asarray(lam, dtype=float)
        return m * m / (lam * lam * np.sqrt(np.maximum(lam * lam - m * m, 0.0)))

    return _threshold_mass_model("dirac", m, theta, theta_prime, 0.5,
                                 (ExponentRule("P7.7", min_domain=1, min_ce=1, exponent=0.5),), {"m": m})


def _klein_gordon(params: dict) -> ModelSpec:
    m = _number(params, "m", 1.0, lo=0.0, open_lo=True)

    def theta(lam):
        lam = np.asarray(lam, dtype=float)
        return lam - m * m / lam

    def theta_prime(lam):
        lam = np.asarray(lam, dtype=float)
        return 1.0 + m * m / (lam * lam)

    return _threshold_mass_model("klein_gordon", m, theta, theta_prime, 1.0,
                                 (ExponentRule("P7.9", min_domain=1, min_ce=1, exponent=0.5),), {"m": m})


def _wave(params: dict) -> ModelSpec:
    kind = str(params.get("kind", "sqrt_laplacian"))
    if kind == "klein_gordon":
        base = _klein_gordon(params)
        return replace(base, id="wave", params={"kind": kind, **base.params},
                       theta_text=MODEL_CATALOG["klein_gordon"]["theta"])
    if kind != "sqrt_laplacian":
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, f"Tipo de ecuación de ondas desconocido: {kind}")
    n = _number(params, "n", 3, lo=1, integer=True)
    power = float(n - 1)
    rules = (ExponentRule("P7.8", min_domain=1, min_ce=1, exponent=0.5),) + LINEAR_RULES
    return _linear_model("wave", 1.0, lambda lam: np.power(lam, power), power, {"kind": kind, "n": n}, rules=rules)


def _saturating(params: dict) -> ModelSpec:
    return ModelSpec(
        id="saturating",
        support=((0.0, INF),),
        weight=_constant(1.0),
        theta=lambda lam: np.asarray(lam, dtype=float) / (1.0 + np.asarray(lam, dtype=float)),
        theta_prime=lambda lam: 1.0 / (1.0 + np.asarray(lam, dtype=float)) ** 2,
        thresholds=(0.0,),
        exponent_rules=(
            ExponentRule("T4.6", min_domain=1, min_ce=1, exponent=0.5),
            ExponentRule("T6.3", kzero=True),
        ),
        theta_kind="threshold",
        threshold_orders={0.0: 1.0},
        theta_text=MODEL_CATALOG["saturating"]["theta"],
        description=MODEL_CATALOG["saturating"]["description"],
    )


def _custom(params: dict) -> ModelSpec:
    theta = params.get("theta")
    if not callable(theta):
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, "El modelo custom requiere θ invocable")
    support = tuple(tuple(map(float, piece)) for piece in params.get("support", ((-INF, INF),)))
    weight = params.get("weight") or _constant(1.0)
    theta_prime = params.get("theta_prime")
    if theta_prime is None:
        def theta_prime(lam, step=1e-6):
            lam = np.asarray(lam, dtype=float)
            return (theta(lam + step) - theta(lam - step)) / (2.0 * step)
    rules = tuple(params.get("rules", ()))
    return ModelSpec(
        id="custom",
        support=support,
        weight=weight,
        theta=theta,
        theta_prime=theta_prime,
        thresholds=tuple(float(x) for x in params.get("thresholds", ())),
        exponent_rules=rules,
        params={k: v for k, v in params.items() if isinstance(v, (int, float, str))},
        theta_kind=str(params.get("theta_kind", "general")),
        homogeneity=params.get("homogeneity"),
        threshold_orders={float(k): float(v) for k, v in dict(params.get("threshold_orders", {})).items()},
        weight_exponents={float(k): float(v) for k, v in dict(params.get("weight_exponents", {})).items()},
        theta_text=str(params.get("theta_text", MODEL_CATALOG["custom"]["theta"])),
        description=MODEL_CATALOG["custom"]["description"],
    )


_MODEL_BUILDERS = {
    "laplacian": _laplacian,
    "ultrahyperbolic": _ultrahyperbolic,
    "electric_field": _electric_field,
    "homogeneous": _homogeneous,
    "fractional": _fractional,
    "weighted_multiplication": _weighted_multiplication,
    "dirac": _dirac,
    "wave": _wave,
    "klein_gordon": _klein_gordon,
    "saturating": _saturating,
    "custom": _custom,
}


def _sampling_window(a: float, b: float, reach: float = 50.0) -> tuple[float, float]:
    lo = a if math.isfinite(a) else (b - 2 * reach if math.isfinite(b) else -reach)
    hi = b if math.isfinite(b) else (a + 2 * reach if math.isfinite(a) else reach)
    return lo, hi


def threshold_defects(model: ModelSpec, samples: int = 4001) -> list[float]:
    """Ceros de θ en el interior del soporte que no figuran entre los umbrales"""
    defects = []
    for a, b in model.support:
        lo, hi = _sampling_window(a, b)
        lam = np.linspace(lo, hi, samples)[1:-1]
        spacing = (hi - lo) / (samples - 1)
        values = np.asarray(model.theta(lam), dtype=float)
        zero = np.abs(values) < 1e-12
        crossing = np.sign(values[:-1]) * np.sign(values[1:]) < 0
        candidates = list(lam[zero]) + list(0.5 * (lam[:-1] + lam[1:])[crossing])
        for point in candidates:
            if not any(abs(point - th) <= 2 * spacing for th in model.thresholds):
                defects.append(float(point))
    return defects


def _check_weight(model: ModelSpec, samples: int = 2001) -> None:
    for a, b in model.support:
        lo, hi = _sampling_window(a, b)
        lam = np.linspace(lo, hi, samples)[1:-1]
        weight = np.asarray(model.weight(lam), dtype=float)
        if not np.all(weight > 0):
            raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, f"El peso h no es positivo en el interior de {model.label}")


def build_model(example_id: str, params: Optional[dict] = None) -> ModelSpec:
    """Construye un modelo del catálogo con sus parámetros"""
    builder = _MODEL_BUILDERS.get(example_id)
    if builder is None:
        raise LabError(ErrorCode.UNKNOWN_ID, f"Modelo desconocido: {example_id}")
    model = builder(dict(params or {}))
    _check_weight(model)
    defects = threshold_defects(model)
    if defects:
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE,
                       f"θ se anula fuera de los umbrales declarados cerca de {defects[:3]}")
    logger.debug("Modelo %s construido", model.label)
    return model


# ========== ESTADOS ==========
@dataclass(frozen=True)
class SpectralState:
    id: str
    model_label: str
    profile: Callable[[np.ndarray], np.ndarray]
    amplitude: Callable[[np.ndarray], np.ndarray]
    support: tuple[tuple[float, float], ...]
    endpoint_exponents: tuple[tuple[float, float], ...]
    singularities: tuple[SingularityInfo, ...]
    flags: RegularityFlags
    norm_sq: float
    params: dict[str, Any] = field(default_factory=dict)
    kzero_order: Optional[int] = None
    closed_form: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @property
    def label(self) -> str:
        shown = {k: v for k, v in sorted(self.params.items()) if isinstance(v, (int, float, str))}
        if not shown:
            return self.id
        return f"{self.id}({', '.join(f'{k}={v}' for k, v in shown.items())})"

    @property
    def density_exponents(self) -> tuple[tuple[float, float], ...]:
        return tuple((info.left, info.right) for info in self.singularities)


@dataclass(frozen=True)
class SpectralDensity:
    e: Callable[[np.ndarray], np.ndarray]
    support: tuple[tuple[float, float], ...]
    endpoint_exponents: tuple[tuple[float, float], ...]
    singularities: tuple[SingularityInfo, ...]
    total_mass: float
    model_id: str = ""
    state_id: str = ""

    def scaled(self, c: float) -> "SpectralDensity":
        if c < 0:
            raise ValueError("Una densidad espectral solo admite factores no negativos")
        infos = tuple(
            replace(
                info,
                left_tail=replace(info.left_tail, prefactor=info.left_tail.prefactor * c) if info.left_tail else None,
                right_tail=replace(info.right_tail, prefactor=info.right_tail.prefactor * c) if info.right_tail else None,
            )
            for info in self.singularities
        )
        e = self.e
        return replace(self, e=lambda lam: c * e(lam), singularities=infos, total_mass=c * self.total_mass)


def declared_flags(model: ModelSpec, support, e_exponents, depth: int = MAX_POWER) -> RegularityFlags:
    """
    Banderas a partir de los exponentes: cerca de un extremo finito a, con θ ~ (λ−a)^β
    y e ~ (λ−a)^p, A^j g ~ (λ−a)^{j(β−1)+p/2} para la amplitud plana g = √e.
    D(A^j) exige exponente > −1/2 y A^j u ∈ ce exige > −1/4.
    """
    domain, ce = depth, depth
    for (a, b), (pa, pb) in zip(support, e_exponents):
        for end, p in ((a, pa), (b, pb)):
            if math.isinf(end):
                continue
            beta = model.theta_order_at(end)
            for j in range(depth + 1):
                exponent = j * (beta - 1.0) + 0.5 * p
                if exponent <= -0.5:
                    domain = min(domain, j - 1)
                if exponent <= -0.25:
                    ce = min(ce, j - 1)
    return RegularityFlags.from_powers(domain, ce, depth)


def _single_piece(model: ModelSpec, state_id: str) -> tuple[float, float]:
    if len(model.support) != 1:
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE,
                       f"El estado {state_id} requiere un soporte de un solo intervalo; use custom")
    return model.support[0]


def _state_from_density(model: ModelSpec, state_id: str, params: dict, e_fn, support, e_exponents, tails,
                        breakpoints=(), flags=None, closed_form=None, kzero_order=None,
                        tol=DEFAULT_TOL) -> SpectralState:
    weight = model.weight

    def profile(lam):
        lam = np.asarray(lam, dtype=float)
        return np.sqrt(e_fn(lam) / weight(lam))

    def amplitude(lam):
        return np.sqrt(e_fn(np.asarray(lam, dtype=float)))

    infos = []
    v_exponents = []
    for (a, b), (pa, pb), (lt, rt) in zip(support, e_exponents, tails):
        inner = tuple(x for x in breakpoints if a < x < b)
        infos.append(SingularityInfo(left=pa, right=pb, left_tail=lt, right_tail=rt, breakpoints=inner))
        v_exponents.append((
            pa - (model.weight_exponent_at(a) if math.isfinite(a) else 0.0),
            pb - (model.weight_exponent_at(b) if math.isfinite(b) else 0.0),
        ))
    norm_sq = sum(integrate(e_fn, piece, tol, info).value.real for piece, info in zip(support, infos))
    if flags is None:
        flags = declared_flags(model, support, e_exponents)
    return SpectralState(
        id=state_id,
        model_label=model.label,
        profile=profile,
        amplitude=amplitude,
        support=tuple(support),
        endpoint_exponents=tuple(v_exponents),
        singularities=tuple(infos),
        flags=flags,
        norm_sq=float(norm_sq),
        params=params,
        kzero_order=kzero_order,
        closed_form=closed_form,
    )


def _exponential(model: ModelSpec, params: dict, tol: float) -> SpectralState:
    a, b = _single_piece(model, "exponential")
    if math.isinf(a) or math.isfinite(b):
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE,
                       "El estado exponencial requiere un soporte [a, ∞) con a finito")
    p = _number(params, "power", 0.0, lo=-1.0, open_lo=True)
    norm = special.gamma(p + 1.0)

    def e(lam):
        x = np.maximum(np.asarray(lam, dtype=float) - a, 0.0)
        return np.power(x, p) * np.exp(-x) / norm

    def closed_form(t):
        t = np.asarray(t, dtype=float)
        return np.exp(1j * a * t) * (1.0 - 1j * t) ** (-(p + 1.0))

    tail = TailInfo("exponential", rate=1.0, power=p, prefactor=1.0 / norm, origin=a)
    return _state_from_density(model, "exponential", {"power": p}, e, ((a, b),), ((p, 0.0),), ((None, tail),),
                               closed_form=closed_form, tol=tol)


def _gaussian_laplacian(model: ModelSpec, params: dict, tol: float) -> SpectralState:
    a, b = _single_piece(model, "gaussian_laplacian")
    if a != 0.0 or math.isfinite(b):
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, "gaussian_laplacian requiere soporte (0, ∞)")
    n = _number(params, "n", model.params.get("n", 3), lo=1, integer=True)
    p = n / 2.0 - 1.0
    norm = special.gamma(n / 2.0)

    def e(lam):
        lam = np.asarray(lam, dtype=float)
        return np.power(lam, p) * np.exp(-lam) / norm

    def closed_form(t):
        return (1.0 - 1j * np.asarray(t, dtype=float)) ** (-n / 2.0)

    tail = TailInfo("exponential", rate=1.0, power=p, prefactor=1.0 / norm)
    return _state_from_density(model, "gaussian_laplacian", {"n": n}, e, ((a, b),), ((p, 0.0),), ((None, tail),),
                               closed_form=closed_form, tol=tol)


def _power_counterexample(model: ModelSpec, params: dict, tol: float) -> SpectralState:
    """
    |v|² = λ^{−2θ} en (0, 1) con corte suave, e = |v|²h. Con h ≡ 1 el decaimiento es
    exactamente t^{2θ−1}; con h ~ λ^w la densidad lleva el exponente w − 2θ.
    """
    a, b = _single_piece(model, "power_counterexample")
    if a != 0.0 or math.isfinite(b):
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, "power_counterexample requiere soporte (0, ∞)")
    theta = _number(params, "theta", 0.25, lo=0.0, hi=0.5, open_lo=True, open_hi=True)
    weight = model.weight
    q = model.weight_exponent_at(0.0) - 2.0 * theta

    def e(lam):
        lam = np.asarray(lam, dtype=float)
        return np.power(lam, -2.0 * theta) * weight(lam) * 0.5 * special.erfc(4.0 * (lam - 1.5))

    # ½erfc(4s) ≤ ½e^{−16 s²} y, para λ = 1.5 + s con s ≥ 1, λ^q ≤ (2.5 s)^{max(q, 0)}
    lift = max(q, 0.0)
    tail = TailInfo("gaussian", rate=16.0, power=lift, prefactor=0.5 * 2.5 ** lift, origin=1.5)
    return _state_from_density(model, "power_counterexample", {"theta": theta}, e, ((a, b),),
                               ((q, 0.0),), ((None, tail),), breakpoints=(1.0, 2.0), tol=tol)


def _bump(model: ModelSpec, params: dict, tol: float) -> SpectralState:
    a, b = _single_piece(model, "bump")
    default_center = 0.0 if math.isinf(a) else a + 2.0
    center = _number(params, "center", default_center)
    width = _number(params, "width", 1.0, lo=0.0, open_lo=True)
    raw_power = params.get("power")
    power = None if raw_power in (None, "", "smooth") else _number(params, "power", 2.0, lo=0.0)
    lo, hi = center - width, center + width
    if not model.contains(lo, hi):
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, f"La meseta [{lo}, {hi}] sale del soporte del modelo")

    def e(lam):
        x = (np.asarray(lam, dtype=float) - center) / width
        inside = np.abs(x) < 1.0
        base = np.where(inside, 1.0 - x * x, 0.0)
        if power is None:
            with np.errstate(divide="ignore"):
                return np.where(inside, np.exp(1.0 - 1.0 / np.where(inside, base, 1.0)), 0.0)
        return np.power(base, power)

    exponent = SMOOTH_EDGE_EXPONENT if power is None else power
    shown = {"center": center, "width": width, "power": "smooth" if power is None else power}
    return _state_from_density(model, "bump", shown, e, ((lo, hi),), ((exponent, exponent),), ((None, None),), tol=tol)


def _gaussian(model: ModelSpec, params: dict, tol: float) -> SpectralState:
    a, b = _single_piece(model, "gaussian")
    if math.isfinite(a) or math.isfinite(b):
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, "El estado gaussiano requiere soporte ℝ")
    mu = _number(params, "mu", 0.0)
    sigma = _number(params, "sigma", 1.0, lo=0.0, open_lo=True)
    norm = sigma * math.sqrt(math.pi)

    def e(lam):
        x = (np.asarray(lam, dtype=float) - mu) / sigma
        return np.exp(-x * x) / norm

    def closed_form(t):
        t = np.asarray(t, dtype=float)
        return np.exp(1j * mu * t - 0.25 * sigma * sigma * t * t)

    tail = TailInfo("gaussian", rate=1.0 / sigma ** 2, prefactor=1.0 / norm, origin=mu)
    return _state_from_density(model, "gaussian", {"mu": mu, "sigma": sigma}, e, ((a, b),), ((0.0, 0.0),),
                               ((tail, tail),), closed_form=closed_form, tol=tol)


def _kzero_family(model: ModelSpec, params: dict, tol: float) -> SpectralState:
    k = _number(params, "k", 3, lo=1, integer=True)
    if k % 2 == 0:
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, f"kzero_family requiere k impar (k={k})")
    base_id = str(params.get("base", "exponential"))
    if base_id in ("kzero_family", "custom"):
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, f"Base no admitida para kzero_family: {base_id}")
    base_params = {key[5:]: value for key, value in params.items() if key.startswith("base_")}
    base = catalog_state(model, base_id, base_params, tol)
    m = (k - 1) / 2.0
    base_e = lambda lam: np.abs(base.profile(lam)) ** 2 * model.weight(lam)

    def e(lam):
        lam = np.asarray(lam, dtype=float)
        return np.power(np.abs(lam), m) * base_e(lam)

    exponents, tails, breakpoints = [], [], []
    for (a, b), info in zip(base.support, base.singularities):
        exponents.append((info.left + (m if a == 0.0 else 0.0), info.right + (m if b == 0.0 else 0.0)))
        grown = []
        for tail in (info.left_tail, info.right_tail):
            if tail is None:
                grown.append(None)
                continue
            factor = (1.0 + abs(tail.origin) / tail.start) ** m
            power = tail.power - m if tail.kind == "algebraic" else tail.power + m
            grown.append(replace(tail, power=power, prefactor=tail.prefactor * factor))
        tails.append(tuple(grown))
        if a < 0.0 < b:
            breakpoints.append(0.0)

    closed_form = None
    if base_id == "exponential" and base.support[0][0] == 0.0:
        p = float(base.params.get("power", 0.0))
        scale = special.gamma(p + m + 1.0) / special.gamma(p + 1.0)
        closed_form = lambda t: scale * (1.0 - 1j * np.asarray(t, dtype=float)) ** (-(p + m + 1.0))

    shown = {"k": k, "base": base_id, **{f"base_{key}": value for key, value in base_params.items()}}
    return _state_from_density(model, "kzero_family", shown, e, base.support, tuple(exponents), tuple(tails),
                               breakpoints=tuple(breakpoints), flags=base.flags, closed_form=closed_form,
                               kzero_order=k, tol=tol)


def _custom_state(model: ModelSpec, params: dict, tol: float) -> SpectralState:
    profile = params.get("profile")
    if not callable(profile):
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, "El estado custom requiere un perfil invocable")
    support = tuple(tuple(map(float, piece)) for piece in params.get("support", model.support))
    v_exponents = tuple(tuple(map(float, pair)) for pair in params.get("endpoint_exponents", [(0.0, 0.0)] * len(support)))
    tails = tuple(tuple(pair) for pair in params.get("tails", [(None, None)] * len(support)))
    if not (len(support) == len(v_exponents) == len(tails)):
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, "Soporte, exponentes y colas deben alinearse")
    weight = model.weight
    e_exponents = tuple(
        (pa + (model.weight_exponent_at(a) if math.isfinite(a) else 0.0),
         pb + (model.weight_exponent_at(b) if math.isfinite(b) else 0.0))
        for (a, b), (pa, pb) in zip(support, v_exponents)
    )

    def e(lam):
        lam = np.asarray(lam, dtype=float)
        return np.abs(profile(lam)) ** 2 * weight(lam)

    flags = params.get("flags")
    if isinstance(flags, tuple) and len(flags) == 2 and all(isinstance(x, int) for x in flags):
        flags = RegularityFlags.from_powers(*flags)
    state = _state_from_density(model, "custom", {k: v for k, v in params.items() if isinstance(v, (int, float, str))},
                                e, support, e_exponents, tails, breakpoints=tuple(params.get("breakpoints", ())),
                                flags=flags, closed_form=params.get("closed_form"),
                                kzero_order=params.get("kzero_order"), tol=tol)
    return replace(state, profile=lambda lam: np.asarray(profile(np.asarray(lam, dtype=float)), dtype=complex),
                   amplitude=lambda lam: profile(np.asarray(lam, dtype=float)) * np.sqrt(weight(np.asarray(lam, dtype=float))))


_STATE_BUILDERS = {
    "exponential": _exponential,
    "gaussian_laplacian": _gaussian_laplacian,
    "power_counterexample": _power_counterexample,
    "kzero_family": _kzero_family,
    "bump": _bump,
    "gaussian": _gaussian,
    "custom": _custom_state,
}


def catalog_state(model: ModelSpec, state_id: str, params: Optional[dict] = None,
                  tol: float = DEFAULT_TOL) -> SpectralState:
    """Construye un estado del catálogo sobre el modelo dado"""
    builder = _STATE_BUILDERS.get(state_id)
    if builder is None:
        raise LabError(ErrorCode.UNKNOWN_ID, f"Estado desconocido: {state_id}")
    state = builder(model, dict(params or {}), tol)
    if state_id != "custom" and not state.norm_sq > 0:
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, f"El estado {state.label} tiene norma nula")
    logger.debug("Estado %s sobre %s: ‖u‖² = %.12g", state.label, model.label, state.norm_sq)
    return state


# ========== DENSIDADES Y NORMAS ==========
def density_of(state: SpectralState, model: ModelSpec) -> SpectralDensity:
    """e(λ) = |v(λ)|²h(λ) con la masa total del estado"""
    if state.model_label != model.label:
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE,
                       f"El estado {state.label} pertenece a {state.model_label}, no a {model.label}")
    profile, weight = state.profile, model.weight

    def e(lam):
        lam = np.asarray(lam, dtype=float)
        return np.abs(profile(lam)) ** 2 * weight(lam)

    return SpectralDensity(
        e=e,
        support=state.support,
        endpoint_exponents=state.density_exponents,
        singularities=state.singularities,
        total_mass=state.norm_sq,
        model_id=model.label,
        state_id=state.label,
    )


def squared_singularities(singularities: Sequence[SingularityInfo], support) -> Optional[tuple[SingularityInfo, ...]]:
    """Metadatos de e²; None si e² no es integrable"""
    squared = []
    for (a, b), info in zip(support, singularities):
        if (math.isfinite(a) and info.left <= -0.5) or (math.isfinite(b) and info.right <= -0.5):
            return None
        try:
            squared.append(replace(
                info,
                left=2.0 * info.left,
                right=2.0 * info.right,
                left_tail=info.left_tail.powered(2.0) if info.left_tail else None,
                right_tail=info.right_tail.powered(2.0) if info.right_tail else None,
            ))
        except LabError:
            return None
    return tuple(squared)


def lifetime_norm_frequency(density: SpectralDensity, tol: float = DEFAULT_TOL) -> float:
    """[u]_H = (2π ∫ e(λ)² dλ)^{1/4}; +∞ cuando la integral diverge"""
    squared = squared_singularities(density.singularities, density.support)
    if squared is None:
        return INF
    e = density.e
    total = 0.0
    for piece, info in zip(density.support, squared):
        total += integrate(lambda lam: e(lam) ** 2, piece, tol, info).value.real
    return float((2.0 * math.pi * max(total, 0.0)) ** 0.25)


def evanescent_class(density: SpectralDensity, tol: float = DEFAULT_TOL, samples: int = 2001) -> EvanescentClass:
    """IN_CE_INFINITY si además de [u]_H < ∞ la densidad es acotada"""
    if not math.isfinite(lifetime_norm_frequency(density, tol)):
        return EvanescentClass.NEITHER
    for (a, b), info in zip(density.support, density.singularities):
        if (math.isfinite(a) and info.left < 0) or (math.isfinite(b) and info.right < 0):
            return EvanescentClass.IN_CE
        lo, hi = _sampling_window(a, b)
        values = density.e(np.linspace(lo, hi, samples)[1:-1])
        if not np.all(np.isfinite(values)):
            return EvanescentClass.IN_CE
    return EvanescentClass.IN_CE_INFINITY


def closed_form_amplitude(state: SpectralState) -> Optional[Callable[[np.ndarray], np.ndarray]]:
    return state.closed_form


def endpoint_slope(state: SpectralState, model: ModelSpec, endpoint: float) -> float:
    """Pendiente log-log local de |v|² junto a un extremo finito del soporte"""
    inside = None
    for a, b in state.support:
        if endpoint == a:
            inside = 1.0
        elif endpoint == b:
            inside = -1.0
    if inside is None:
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, f"{endpoint} no es un extremo del soporte")
    offsets = np.logspace(-7, -5, 9)
    values = np.abs(state.profile(endpoint + inside * offsets)) ** 2
    slope, _ = np.polyfit(np.log(offsets), np.log(values), 1)
    return float(slope)


def list_models() -> list[str]:
    rows = []
    for model_id, entry in MODEL_CATALOG.items():
        tag = entry["tag"]
        rows.append(f"{model_id} | {entry['theta']} | {THEOREM_LABELS[tag] if tag else '—'}")
    return rows


def list_states() -> list[str]:
    return [f"{state_id} | {text}" for state_id, text in STATE_CATALOG.items()]
