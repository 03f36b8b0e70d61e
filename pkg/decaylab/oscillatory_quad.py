"""
Motor de cuadratura oscilatoria
Evalúa ∫ e^{itλ} f(λ) dλ con paneles de Filon-Legendre, malla graduada hacia
extremos singulares y truncamiento de colas con cota explícita
"""
from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Protocol, Sequence

import numpy as np
from numpy.polynomial import legendre
from scipy import optimize, special

from .config import DEFAULT_TOL, MAX_PANELS
from .errors import ErrorCode, LabError
from .schemas import AmplitudeKind

logger = logging.getLogger(__name__)

ORDER = 32
# |t|·(longitud del panel) hasta este valor se integra con Gauss-Legendre directo
SMALL_PHASE = 4.0
TOL_MIN, TOL_MAX = 1e-14, 1e-2
TAIL_KINDS = ("exponential", "gaussian", "algebraic")
MAX_GRADING_DEPTH = 1000
EPS = float(np.finfo(float).eps)

# i^k para k mod 4
_I_POWERS = np.array([1.0, 1.0j, -1.0, -1.0j])


def check_tolerance(tol: float) -> float:
    if not TOL_MIN < tol < TOL_MAX:
        raise LabError(ErrorCode.INVALID_TOLERANCE, f"tol={tol} fuera de ({TOL_MIN}, {TOL_MAX})")
    return float(tol)


# ========== METADATOS DE SINGULARIDAD ==========
@dataclass(frozen=True)
class TailInfo:
    """
    Envolvente de |f| lejos del origen, con s = |λ − origin| ≥ start:
    exponential: C·s^p·e^{−r s}; gaussian: C·s^p·e^{−r s²}; algebraic: C·s^{−p}
    """
    kind: str = "exponential"
    rate: float = 1.0
    power: float = 0.0
    prefactor: float = 1.0
    origin: float = 0.0
    start: float = 1.0

    def __post_init__(self):
        if self.kind not in TAIL_KINDS:
            raise LabError(ErrorCode.INVALID_SINGULARITY, f"Clase de cola desconocida: {self.kind}")
        if self.kind == "algebraic":
            if not self.power > 1.0:
                raise LabError(ErrorCode.INVALID_SINGULARITY, f"Cola algebraica no integrable (p={self.power})")
        else:
            if not self.rate > 0:
                raise LabError(ErrorCode.INVALID_SINGULARITY, "La tasa de decaimiento de la cola debe ser positiva")
            if not self.power > -1.0:
                raise LabError(ErrorCode.INVALID_SINGULARITY, f"Potencia de cola no integrable (p={self.power})")
        if self.prefactor < 0 or self.start <= 0:
            raise LabError(ErrorCode.INVALID_SINGULARITY, "Prefactor y comienzo de la cola deben ser positivos")

    def remainder(self, s: float) -> float:
        """Cota de ∫_{s}^{∞} de la envolvente"""
        s = max(float(s), self.start)
        if self.prefactor == 0:
            return 0.0
        if self.kind == "exponential":
            a = self.power + 1.0
            return self.prefactor * special.gamma(a) * special.gammaincc(a, self.rate * s) / self.rate ** a
        if self.kind == "gaussian":
            a = 0.5 * (self.power + 1.0)
            return 0.5 * self.prefactor * special.gamma(a) * special.gammaincc(a, self.rate * s * s) / self.rate ** a
        return self.prefactor * s ** (1.0 - self.power) / (self.power - 1.0)

    def cutoff(self, tol: float) -> float:
        """Menor distancia L ≥ start (salvo bisección) con remainder(L) ≤ tol"""
        s = max(self.start, 1.0)
        if self.remainder(s) <= tol:
            return s
        while self.remainder(2.0 * s) > tol:
            s *= 2.0
            if s > 1e200:
                raise LabError(ErrorCode.NON_CONVERGED, "No se encontró un corte para la cola")
        return optimize.brentq(lambda x: self.remainder(x) - tol, s, 2.0 * s, xtol=1e-9 * s)

    def powered(self, q: float) -> "TailInfo":
        """Envolvente de |f|^q"""
        if self.kind == "algebraic":
            if not self.power * q > 1.0:
                raise LabError(ErrorCode.NORM_DIVERGES, f"|f|^{q} no es integrable en la cola")
            return replace(self, power=self.power * q, prefactor=self.prefactor ** q)
        return replace(self, rate=self.rate * q, power=self.power * q, prefactor=self.prefactor ** q)

    def times_lambda(self) -> "TailInfo":
        """Envolvente de λ·f, usando |λ| ≤ s·(1 + |origin|/start)"""
        factor = 1.0 + abs(self.origin) / self.start
        if self.kind == "algebraic":
            if not self.power - 1.0 > 1.0:
                raise LabError(ErrorCode.MOMENT_DIVERGES, "El primer momento diverge en la cola")
            return replace(self, power=self.power - 1.0, prefactor=self.prefactor * factor)
        return replace(self, power=self.power + 1.0, prefactor=self.prefactor * factor)

    def rebased(self, origin: float) -> "TailInfo":
        """La misma envolvente medida desde otro origen (s ≥ start + |Δ|)"""
        delta = abs(origin - self.origin)
        if delta == 0:
            return self
        start = self.start + delta
        if self.kind == "algebraic":
            # s_viejo ≥ s_nuevo − Δ ≥ s_nuevo·start/(start+Δ)
            factor = (start / self.start) ** self.power
            return replace(self, origin=origin, start=start, prefactor=self.prefactor * factor)
        ratio = start / self.start
        factor = ratio ** abs(self.power)
        if self.kind == "exponential":
            factor *= math.exp(self.rate * delta)
            return replace(self, origin=origin, start=start, prefactor=self.prefactor * factor)
        # e^{−r(s−Δ)²} ≤ e^{−r s²/2}·e^{rΔ²}
        factor *= math.exp(self.rate * delta * delta)
        return replace(self, origin=origin, start=start, rate=0.5 * self.rate, prefactor=self.prefactor * factor)

    def as_exponential(self) -> "TailInfo":
        if self.kind != "gaussian":
            return self
        # e^{−r s²} ≤ e^{−r s} para s ≥ 1
        return replace(self, kind="exponential", start=max(self.start, 1.0))

    def as_algebraic(self, power: float = 2.0) -> "TailInfo":
        if self.kind == "algebraic":
            return self
        tail = self.as_exponential()
        # s^p e^{−rs} ≤ M s^{−P}, M = sup s^{p+P} e^{−rs}
        k = tail.power + power
        peak = max(k / tail.rate, tail.start)
        bound = tail.prefactor * peak ** k * math.exp(-tail.rate * peak)
        return TailInfo("algebraic", power=power, prefactor=bound, origin=tail.origin, start=tail.start)


def geometric_mean_tail(a: TailInfo, b: TailInfo) -> TailInfo:
    """Envolvente de √(f·g) a partir de las de f y g"""
    if a.kind != b.kind:
        if "algebraic" in (a.kind, b.kind):
            a, b = a.as_algebraic(), b.as_algebraic()
        else:
            a, b = a.as_exponential(), b.as_exponential()
    if a.origin != b.origin:
        b = b.rebased(a.origin)
    start = max(a.start, b.start)
    if a.kind == "algebraic":
        return TailInfo("algebraic", power=0.5 * (a.power + b.power),
                        prefactor=math.sqrt(a.prefactor * b.prefactor), origin=a.origin, start=start)
    return TailInfo(a.kind, rate=0.5 * (a.rate + b.rate), power=0.5 * (a.power + b.power),
                    prefactor=math.sqrt(a.prefactor * b.prefactor), origin=a.origin, start=start)


@dataclass(frozen=True)
class SingularityInfo:
    """Exponentes algebraicos α en extremos finitos (f ~ |λ−a|^α) y colas en extremos infinitos"""
    left: float = 0.0
    right: float = 0.0
    left_tail: Optional[TailInfo] = None
    right_tail: Optional[TailInfo] = None
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self):
        for alpha in (self.left, self.right):
            if not alpha > -1.0:
                raise LabError(ErrorCode.INVALID_SINGULARITY, f"Exponente α={alpha} no integrable (α ≤ −1)")

    def check_interval(self, a: float, b: float) -> None:
        if not a < b:
            raise LabError(ErrorCode.INVALID_INTERVAL, f"Intervalo vacío [{a}, {b}]")
        if math.isinf(a) and self.left_tail is None:
            raise LabError(ErrorCode.INVALID_SINGULARITY, "Extremo −∞ sin clase de cola declarada")
        if math.isinf(b) and self.right_tail is None:
            raise LabError(ErrorCode.INVALID_SINGULARITY, "Extremo +∞ sin clase de cola declarada")


def _needs_grading(alpha: float) -> bool:
    return alpha < 0 or abs(alpha - round(alpha)) > 1e-12


# ========== RESULTADOS ==========
@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error_estimate: float
    panels_used: int
    truncation_bound: float = 0.0
    converged: bool = True

    def __post_init__(self):
        if self.error_estimate < 0 or self.truncation_bound < 0:
            raise ValueError("Las cotas de error deben ser no negativas")
        if self.panels_used < 1:
            raise ValueError("Se requiere al menos un panel")


@dataclass(frozen=True)
class AmplitudeSeries:
    """ψ muestreada en una malla temporal, con errores y banderas por punto"""
    t: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    flags: np.ndarray
    kind: AmplitudeKind = AmplitudeKind.SCHRODINGER
    model_id: str = ""
    state_id: str = ""

    def __post_init__(self):
        n = len(self.t)
        if not (len(self.values) == len(self.errors) == len(self.flags) == n):
            raise ValueError("Las columnas de la serie deben tener la misma longitud")

    @property
    def abs(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def converged(self) -> bool:
        return bool(np.all(self.flags))

    def scaled(self, c: float) -> "AmplitudeSeries":
        return replace(self, values=c * self.values, errors=abs(c) * self.errors)

    def restricted(self, t_min: float, t_max: float) -> "AmplitudeSeries":
        mask = (self.t >= t_min) & (self.t <= t_max)
        return replace(self, t=self.t[mask], values=self.values[mask],
                       errors=self.errors[mask], flags=self.flags[mask])

    def combined(self, other: "AmplitudeSeries", kind: AmplitudeKind) -> "AmplitudeSeries":
        if not np.array_equal(self.t, other.t):
            raise ValueError("Las series deben compartir la malla temporal")
        return replace(self, values=self.values + other.values, errors=self.errors + other.errors,
                       flags=self.flags & other.flags, kind=kind)


# ========== PLAN DE FILON ==========
@dataclass
class _Panel:
    lo: float
    hi: float
    center: float
    radius: float
    values: np.ndarray
    coeffs: np.ndarray
    error: float


class FilonPlan:
    """
    Partición de un intervalo independiente de t, con los coeficientes de Legendre de f
    en cada panel. Evalúa ∫ e^{itλ} f(λ) dλ para muchos t sin volver a muestrear f.
    """

    def __init__(
        self,
        f: Callable[[np.ndarray], np.ndarray],
        interval: Sequence[float],
        singularity: Optional[SingularityInfo] = None,
        tol: float = DEFAULT_TOL,
        order: int = ORDER,
        max_panels: int = MAX_PANELS,
    ):
        check_tolerance(tol)
        info = singularity or SingularityInfo()
        a, b = float(interval[0]), float(interval[1])
        info.check_interval(a, b)
        self.f = f
        self.tol = tol
        self.order = order
        self.interval = (a, b)
        self._nodes, self._weights = legendre.leggauss(order)
        k = np.arange(order)
        vander = legendre.legvander(self._nodes, order - 1)
        self._projection = ((2 * k + 1) / 2.0)[:, None] * (vander * self._weights[:, None]).T
        self._k = k

        lo, hi, self.truncation_bound = self._truncate(a, b, info, tol)
        edges, self.stub_bound = self._initial_edges(a, b, lo, hi, info, tol)
        self._refine(edges, max_panels)

    # ---------- construcción ----------
    def _truncate(self, a, b, info, tol):
        lo, hi, bound = a, b, 0.0
        if math.isinf(a):
            dist = info.left_tail.cutoff(tol / 10)
            lo = info.left_tail.origin - dist
            bound += info.left_tail.remainder(dist)
        if math.isinf(b):
            dist = info.right_tail.cutoff(tol / 10)
            hi = info.right_tail.origin + dist
            bound += info.right_tail.remainder(dist)
        if math.isinf(a) and not math.isinf(b):
            lo = min(lo, b - 1.0)
        if math.isinf(b) and not math.isinf(a):
            hi = max(hi, a + 1.0)
        if hi <= lo:
            lo = hi - 1.0
        return lo, hi, bound

    def _initial_edges(self, a, b, lo, hi, info, tol):
        inner = sorted(p for p in info.breakpoints if lo < p < hi)
        points = {lo, hi, *inner}
        stub = 0.0
        for side, end, alpha in (("left", a, info.left), ("right", b, info.right)):
            if math.isinf(end) or not _needs_grading(alpha):
                continue
            other = [hi] if side == "left" else [lo]
            gap = min(abs(p - end) for p in inner + other)
            zone = min(1.0, 0.5 * gap)
            depth, delta, bound = self._grading_depth(end, zone, alpha, side, tol)
            sign = 1.0 if side == "left" else -1.0
            points.discard(end)
            points.update(end + sign * zone * 0.5 ** j for j in range(depth + 1))
            stub += bound
            logger.debug("Graduación %s en %.6g: profundidad %d, cota del tramo %.3e", side, end, depth, bound)
        # puntos geométricos hacia las colas
        for side, end, tail in (("left", a, info.left_tail), ("right", b, info.right_tail)):
            if not math.isinf(end):
                continue
            sign = -1.0 if side == "left" else 1.0
            s = 1.0
            while True:
                p = tail.origin + sign * s
                if not lo < p < hi:
                    break
                points.add(p)
                s *= 2.0
        return np.array(sorted(points)), stub

    def _sample(self, x: np.ndarray) -> np.ndarray:
        values = np.asarray(self.f(x), dtype=complex)
        return np.broadcast_to(values, np.shape(x)).copy()

    def _grading_depth(self, end, zone, alpha, side, tol):
        depth = math.ceil((math.log2(1.0 / tol) + 4.0) / (1.0 + alpha))
        if end != 0.0:
            # el tramo no puede ser menor que la resolución de punto flotante en el extremo
            limit = math.floor(math.log2(zone / (64.0 * EPS * abs(end))))
            cap = max(1, min(MAX_GRADING_DEPTH, limit))
        else:
            cap = MAX_GRADING_DEPTH
        depth = min(max(depth, 1), cap)
        while True:
            delta = zone * 0.5 ** depth
            x = end + delta if side == "left" else end - delta
            fx = abs(self._sample(np.array([x]))[0])
            if not math.isfinite(fx):
                raise LabError(ErrorCode.INVALID_SINGULARITY, f"Integrando no finito cerca de {end}")
            bound = 2.0 * fx * delta / (1.0 + alpha)
            if bound <= tol / 10 or depth >= cap:
                return depth, delta, bound
            depth = min(depth + 8, cap)

    def _panel(self, lo: float, hi: float) -> _Panel:
        c, r = 0.5 * (lo + hi), 0.5 * (hi - lo)
        values = self._sample(c + r * self._nodes)
        if not np.all(np.isfinite(values)):
            raise LabError(ErrorCode.INVALID_SINGULARITY, f"Integrando no finito en [{lo}, {hi}]")
        coeffs = self._projection @ values
        scale = float(np.max(np.abs(values)))
        error = 2.0 * r * (float(np.sum(np.abs(coeffs[-4:]))) + 32.0 * EPS * scale)
        return _Panel(lo, hi, c, r, values, coeffs, error)

    def _refine(self, edges, max_panels):
        alive = {}
        heap = []
        for idx, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
            panel = self._panel(lo, hi)
            alive[idx] = panel
            heap.append((-panel.error, lo, idx))
        heapq.heapify(heap)
        next_id = len(alive)
        budget = max(self.tol - self.stub_bound - self.truncation_bound, 0.5 * self.tol)
        total = sum(p.error for p in alive.values())
        while total > budget and heap and len(alive) < max_panels:
            _, _, idx = heapq.heappop(heap)
            panel = alive[idx]
            mid = 0.5 * (panel.lo + panel.hi)
            if not panel.lo < mid < panel.hi or panel.radius < 1e-13 * max(1.0, abs(mid)):
                continue
            del alive[idx]
            halves = (self._panel(panel.lo, mid), self._panel(mid, panel.hi))
            total += halves[0].error + halves[1].error - panel.error
            for half in halves:
                alive[next_id] = half
                heapq.heappush(heap, (-half.error, half.lo, next_id))
                next_id += 1

        panels = sorted(alive.values(), key=lambda p: p.lo)
        self.centers = np.array([p.center for p in panels])
        self.radii = np.array([p.radius for p in panels])
        self.values = np.array([p.values for p in panels])
        self.coeffs = np.array([p.coeffs for p in panels])
        self.panel_errors = np.array([p.error for p in panels])
        self.error_estimate = float(np.sum(self.panel_errors)) + self.stub_bound
        self.converged = self.error_estimate + self.truncation_bound <= self.tol
        if not self.converged:
            logger.warning("Cuadratura no convergida en %s: error %.3e > tol %.1e con %d paneles",
                           self.interval, self.error_estimate + self.truncation_bound, self.tol, len(panels))
        else:
            logger.debug("Plan en %s: %d paneles, error %.3e", self.interval, len(panels), self.error_estimate)

    @property
    def panels_used(self) -> int:
        return len(self.radii)

    # ---------- evaluación ----------
    def evaluate(self, t, chunk: int = 32) -> np.ndarray:
        """∫ e^{itλ} f(λ) dλ para cada t (mismo error estimado para todos)"""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty(t.shape, dtype=complex)
        ipow = _I_POWERS[self._k % 4]
        for start in range(0, len(t), chunk):
            tc = t[start:start + chunk]
            omega = tc[:, None] * self.radii[None, :]
            bessel = special.spherical_jn(self._k[None, None, :], np.abs(omega)[:, :, None])
            phases = np.where(omega[:, :, None] < 0, np.conj(ipow)[None, None, :], ipow[None, None, :])
            local = np.einsum("tpk,pk->tp", 2.0 * phases * bessel, self.coeffs)
            small = np.abs(omega) <= 0.5 * SMALL_PHASE
            if np.any(small):
                ti, pi = np.nonzero(small)
                osc = np.exp(1j * omega[ti, pi][:, None] * self._nodes[None, :])
                local[ti, pi] = np.sum(self._weights[None, :] * self.values[pi] * osc, axis=1)
            shift = np.exp(1j * tc[:, None] * self.centers[None, :])
            out[start:start + chunk] = np.sum(self.radii[None, :] * shift * local, axis=1)
        return out


class CompositePlan:
    """Suma de planes de Filon sobre los intervalos de un soporte"""

    def __init__(self, plans: Sequence[FilonPlan]):
        self.plans = list(plans)

    def evaluate(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        total = np.zeros(t.shape, dtype=complex)
        for plan in self.plans:
            total += plan.evaluate(t)
        return total

    @property
    def error_estimate(self) -> float:
        return float(sum(p.error_estimate for p in self.plans))

    @property
    def truncation_bound(self) -> float:
        return float(sum(p.truncation_bound for p in self.plans))

    @property
    def converged(self) -> bool:
        return all(p.converged for p in self.plans)

    @property
    def panels_used(self) -> int:
        return max(1, sum(p.panels_used for p in self.plans))


class DensityLike(Protocol):
    e: Callable[[np.ndarray], np.ndarray]
    support: tuple[tuple[float, float], ...]
    singularities: tuple[SingularityInfo, ...]
    total_mass: float
    model_id: str
    state_id: str


def build_plan(f, support, singularities, tol: float = DEFAULT_TOL) -> CompositePlan:
    """Un plan por intervalo; la tolerancia se reparte entre los intervalos"""
    pieces = list(zip(support, singularities))
    share = tol / max(1, len(pieces))
    return CompositePlan([FilonPlan(f, piece, info, share) for piece, info in pieces])


# ========== OPERACIONES ==========
def oscillatory_integral(
    f: Callable[[np.ndarray], np.ndarray],
    interval: Sequence[float],
    t: float,
    tol: float = DEFAULT_TOL,
    singularity: Optional[SingularityInfo] = None,
) -> QuadratureResult:
    """∫_interval e^{itλ} f(λ) dλ con error estimado y cota de truncamiento"""
    plan = FilonPlan(f, interval, singularity, tol)
    value = complex(plan.evaluate([t])[0])
    return QuadratureResult(
        value=value,
        error_estimate=plan.error_estimate,
        panels_used=plan.panels_used,
        truncation_bound=plan.truncation_bound,
        converged=plan.converged,
    )


def integrate(f, interval, tol: float = DEFAULT_TOL, singularity: Optional[SingularityInfo] = None) -> QuadratureResult:
    """Cuadratura adaptativa no oscilatoria (caso t = 0)"""
    return oscillatory_integral(f, interval, 0.0, tol, singularity)


def as_time_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float).ravel()
    if not np.all(np.isfinite(t)):
        raise ValueError("La malla temporal debe ser finita")
    if np.any(np.diff(t) < 0):
        raise ValueError("La malla temporal debe estar ordenada")
    return t


def _reflected(plan: CompositePlan, t: np.ndarray, sign: float) -> np.ndarray:
    """Evalúa en |t| y refleja: F(−t) = sign·conj(F(t))"""
    magnitudes, inverse = np.unique(np.abs(t), return_inverse=True)
    values = plan.evaluate(magnitudes)[inverse]
    negative = t < 0
    values[negative] = sign * np.conj(values[negative])
    return values


def amplitude_series(density: DensityLike, t_grid, tol: float = DEFAULT_TOL) -> AmplitudeSeries:
    """ψ(t) = ∫ e^{itλ} e(λ) dλ en cada punto de la malla"""
    t = as_time_grid(t_grid)
    plan = build_plan(density.e, density.support, density.singularities, tol)
    values = _reflected(plan, t, 1.0)
    error = plan.error_estimate + plan.truncation_bound
    return AmplitudeSeries(
        t=t,
        values=values,
        errors=np.full(t.shape, error),
        flags=np.full(t.shape, plan.converged),
        kind=AmplitudeKind.SCHRODINGER,
        model_id=density.model_id,
        state_id=density.state_id,
    )


def moment_singularities(density: DensityLike) -> tuple[SingularityInfo, ...]:
    """Metadatos de λ·e(λ): el exponente crece en 1 en un extremo situado en 0"""
    infos = []
    for (a, b), info in zip(density.support, density.singularities):
        infos.append(replace(
            info,
            left=info.left + (1.0 if a == 0.0 else 0.0),
            right=info.right + (1.0 if b == 0.0 else 0.0),
            left_tail=info.left_tail.times_lambda() if info.left_tail else None,
            right_tail=info.right_tail.times_lambda() if info.right_tail else None,
        ))
    return tuple(infos)


def derivative_series(density: DensityLike, t_grid, tol: float = DEFAULT_TOL) -> AmplitudeSeries:
    """ψ'(t) = ∫ iλ e^{itλ} e(λ) dλ"""
    t = as_time_grid(t_grid)
    infos = moment_singularities(density)

    def integrand(lam):
        return 1j * lam * density.e(lam)

    plan = build_plan(integrand, density.support, infos, tol)
    values = _reflected(plan, t, -1.0)
    error = plan.error_estimate + plan.truncation_bound
    return AmplitudeSeries(
        t=t,
        values=values,
        errors=np.full(t.shape, error),
        flags=np.full(t.shape, plan.converged),
        kind=AmplitudeKind.DERIVATIVE,
        model_id=density.model_id,
        state_id=density.state_id,
    )
