"""
Laboratorio de operadores
Realizaciones en malla y en matrices del cálculo de conmutadores: generador conjugado A_θ,
residuos de conmutador con refinamiento, cálculo simbólico de orden k, flujo ξ_t,
conjugación por e^{iτA}, fórmula de Duhamel e identidades de resolvente.

Convención de signo: [X, iA] = X·iA − iA·X y A_θ se fija para que [M_λ, iA_θ] ≈ +θ(λ).
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import legendre
from scipy import sparse
from scipy.integrate import solve_ivp

from .errors import ErrorCode, LabError
from .schemas import BoundaryScheme, CheckStatus, IdentityCheck, RefinementReport
from .spectral_model import ModelSpec, SpectralState

logger = logging.getLogger(__name__)

MIN_GRID = 32
MIN_DIMENSION = 8
# Los criterios de malla solo miran puntos a distancia ≥ 5h de los bordes
BOUNDARY_CLEARANCE = 5
RATIO_RANGE = (3.5, 4.5)
# Por debajo de esto ambos residuos se consideran exactos (redondeo)
EXACT_RESIDUAL = 1e-12
FLOW_TOL = 1e-12
DUHAMEL_THRESHOLD = 1e-8
RESOLVENT_THRESHOLD = 1e-10
# z debe distar del espectro al menos esta fracción de ‖H‖
SPECTRUM_CLEARANCE = 0.1
# +i en A_θ: congelado por la comprobación de [M_λ, iA_θ] ≈ +θ
GENERATOR_SIGN = 1.0

Profile = Callable[[np.ndarray], np.ndarray]
Symbol = Callable[[np.ndarray], np.ndarray]


# ========== TIPOS ==========
@dataclass(frozen=True)
class GridOperator:
    matrix: sparse.csr_matrix
    grid: np.ndarray
    spacing: float
    boundary_scheme: BoundaryScheme
    hermitian: bool = False

    def __post_init__(self):
        n = self.matrix.shape[0]
        if self.matrix.shape != (n, n) or len(self.grid) != n:
            raise ValueError("La matriz y la malla deben tener la misma dimensión")
        if n < MIN_DIMENSION:
            raise LabError(ErrorCode.GRID_TOO_COARSE, f"Dimensión {n} < {MIN_DIMENSION}")
        if self.hermitian:
            defect = abs(self.matrix - self.matrix.conj().T).max() if self.matrix.nnz else 0.0
            scale = max(1.0, abs(self.matrix).max() if self.matrix.nnz else 0.0)
            if defect > 1e-12 * scale:
                raise ValueError(f"Operador marcado hermítico con defecto {defect:.3e}")

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(values, dtype=complex)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass(frozen=True)
class FlowField:
    """Campo dξ/dt = θ(ξ) con tolerancias del integrador y dominio"""
    theta: Symbol
    domain: tuple[float, float] = (-math.inf, math.inf)
    rtol: float = FLOW_TOL
    atol: float = FLOW_TOL

    def __post_init__(self):
        lo, hi = self.domain
        if not lo < hi:
            raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, "Dominio de flujo vacío")
        a = lo if math.isfinite(lo) else -50.0
        b = hi if math.isfinite(hi) else 50.0
        lam = np.linspace(a, b, 2001)[1:-1]
        values = np.asarray(self.theta(lam), dtype=float) * np.ones_like(lam)
        quotients = np.diff(values) / np.diff(lam)
        if not np.all(np.isfinite(values)) or not np.all(np.isfinite(quotients)):
            raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, "θ no es localmente Lipschitz en el dominio")


# ========== GENERADORES ==========
def uniform_grid(a: float, b: float, n: int) -> np.ndarray:
    return np.linspace(a, b, n)


def cell_grid(a: float, b: float, n: int) -> np.ndarray:
    h = (b - a) / n
    return a + (np.arange(n) + 0.5) * h


def _spacing(grid: np.ndarray) -> float:
    steps = np.diff(grid)
    h = float(steps.mean())
    if not np.allclose(steps, h, rtol=1e-9, atol=0.0):
        raise ValueError("La malla debe ser uniforme")
    return h


def difference_matrix(n: int, h: float, scheme: BoundaryScheme) -> sparse.csr_matrix:
    """Diferencia centrada; Dirichlet (antisimétrica) o cierres unilaterales de orden dos"""
    d = (sparse.diags([-np.ones(n - 1), np.ones(n - 1)], [-1, 1]) / (2.0 * h)).tolil()
    if scheme == BoundaryScheme.ONE_SIDED:
        d[0, :3] = np.array([-3.0, 4.0, -1.0]) / (2.0 * h)
        d[n - 1, n - 3:] = np.array([1.0, -4.0, 3.0]) / (2.0 * h)
    return d.tocsr()


def build_conjugate_generator(
    theta: Symbol,
    grid: np.ndarray,
    scheme: BoundaryScheme = BoundaryScheme.DIRICHLET,
    theta_prime: Optional[Symbol] = None,
) -> GridOperator:
    """
    DIRICHLET: A_θ = i·½(ΘD + DΘ), hermítico.
    ONE_SIDED: A_θ = i(ΘD + ½Θ′) con filas de borde unilaterales (para normas ‖A_θ g‖).
    """
    grid = np.asarray(grid, dtype=float)
    n = len(grid)
    if n < MIN_GRID:
        raise LabError(ErrorCode.GRID_TOO_COARSE, f"Se requieren al menos {MIN_GRID} puntos (N={n})")
    h = _spacing(grid)
    values = np.asarray(theta(grid), dtype=float) * np.ones(n)
    big_theta = sparse.diags(values)
    d = difference_matrix(n, h, scheme)
    if scheme == BoundaryScheme.DIRICHLET:
        matrix = GENERATOR_SIGN * 0.5j * (big_theta @ d + d @ big_theta)
    else:
        if theta_prime is None:
            prime = np.gradient(values, h, edge_order=2)
        else:
            prime = np.asarray(theta_prime(grid), dtype=float) * np.ones(n)
        matrix = GENERATOR_SIGN * 1j * (big_theta @ d + 0.5 * sparse.diags(prime))
    return GridOperator(
        matrix=sparse.csr_matrix(matrix, dtype=complex),
        grid=grid,
        spacing=h,
        boundary_scheme=scheme,
        hermitian=scheme == BoundaryScheme.DIRICHLET,
    )


def _commutator(x: sparse.spmatrix, y: sparse.spmatrix) -> sparse.csr_matrix:
    return sparse.csr_matrix(x @ y - y @ x)


def _interior(grid: np.ndarray, clearance: float) -> np.ndarray:
    return (grid >= grid[0] + clearance) & (grid <= grid[-1] - clearance)


def default_profiles(a: float, b: float) -> list[Profile]:
    """Gaussianas estrechas centradas en el interior de [a, b]"""
    span = b - a
    width = span / 24.0
    centers = (a + 0.4 * span, a + 0.5 * span, a + 0.6 * span)
    return [lambda lam, c=c: np.exp(-((lam - c) / width) ** 2) for c in centers]


def _refinement(residual: Callable[[int], float], n: int, label: str, details: Optional[dict] = None) -> RefinementReport:
    """Residuo en la malla de N puntos y en la de 2N−1 (paso h/2); PASS si el cociente es ≈ 4"""
    coarse = residual(n)
    fine = residual(2 * n - 1)
    details = dict(details or {})
    details.update({"n_coarse": n, "n_fine": 2 * n - 1})
    if coarse <= EXACT_RESIDUAL and fine <= EXACT_RESIDUAL:
        status, ratio = CheckStatus.PASS, None
        details["exact"] = True
    else:
        ratio = coarse / fine if fine > 0 else math.inf
        status = CheckStatus.PASS if RATIO_RANGE[0] <= ratio <= RATIO_RANGE[1] else CheckStatus.FAIL
    logger.info("%s: r(h)=%.3e r(h/2)=%.3e cociente=%s → %s", label, coarse, fine,
                "exacto" if ratio is None else f"{ratio:.3f}", status.value)
    return RefinementReport(residual_coarse=coarse, residual_fine=fine, ratio=ratio, status=status, details=details)


# ========== RESIDUOS DE CONMUTADOR ==========
def commutator_residual(
    theta: Symbol,
    span: tuple[float, float] = (-4.0, 4.0),
    test_profiles: Optional[Sequence[Profile]] = None,
    n: int = 401,
    scheme: BoundaryScheme = BoundaryScheme.DIRICHLET,
) -> RefinementReport:
    """max_f ‖([M_λ, iA_θ] − M_θ) f‖_∞ en puntos interiores, en h y h/2"""
    a, b = span
    profiles = list(test_profiles) if test_profiles is not None else default_profiles(a, b)
    clearance = BOUNDARY_CLEARANCE * (b - a) / (n - 1)

    def residual(points: int) -> float:
        grid = uniform_grid(a, b, points)
        generator = build_conjugate_generator(theta, grid, scheme)
        commutator = _commutator(sparse.diags(grid), 1j * generator.matrix)
        target = np.asarray(theta(grid), dtype=float) * np.ones(points)
        inside = _interior(grid, clearance)
        worst = 0.0
        for f in profiles:
            values = np.asarray(f(grid), dtype=complex) * np.ones(points)
            defect = commutator @ values - target * values
            worst = max(worst, float(np.max(np.abs(defect[inside]), initial=0.0)))
        return worst

    return _refinement(residual, n, "commutator_residual")


def nested_symbol(theta: Symbol, phi: Symbol, k: int, grid: np.ndarray, refine: int = 16) -> np.ndarray:
    """δ_θ^k φ = (θ d/dλ)^k φ por derivación numérica anidada en una malla auxiliar h/refine"""
    a, b = float(grid[0]), float(grid[-1])
    fine = np.linspace(a, b, refine * (len(grid) - 1) + 1)
    h = fine[1] - fine[0]
    values = np.asarray(phi(fine), dtype=float) * np.ones(len(fine))
    theta_values = np.asarray(theta(fine), dtype=float) * np.ones(len(fine))
    for _ in range(k):
        values = theta_values * np.gradient(values, h, edge_order=2)
    return values[::refine]


def symbol_calculus_check(
    theta: Symbol,
    phi: Symbol,
    k: int,
    span: tuple[float, float] = (-4.0, 4.0),
    test_profiles: Optional[Sequence[Profile]] = None,
    n: int = 401,
) -> RefinementReport:
    """ad_{iA_θ}^k(M_φ) frente a M_{δ_θ^k φ} sobre perfiles interiores"""
    if k not in (0, 1, 2, 3):
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, f"k={k} fuera de {{0, 1, 2, 3}}")
    a, b = span
    profiles = list(test_profiles) if test_profiles is not None else default_profiles(a, b)
    clearance = BOUNDARY_CLEARANCE * (b - a) / (n - 1)

    def residual(points: int) -> float:
        grid = uniform_grid(a, b, points)
        generator = build_conjugate_generator(theta, grid)
        i_a = 1j * generator.matrix
        nested = sparse.csr_matrix(sparse.diags(np.asarray(phi(grid), dtype=float) * np.ones(points)), dtype=complex)
        for _ in range(k):
            nested = _commutator(nested, i_a)
        reference = nested_symbol(theta, phi, k, grid) if k else np.asarray(phi(grid), dtype=float) * np.ones(points)
        inside = _interior(grid, clearance)
        worst = 0.0
        for f in profiles:
            values = np.asarray(f(grid), dtype=complex) * np.ones(points)
            defect = nested @ values - reference * values
            worst = max(worst, float(np.max(np.abs(defect[inside]), initial=0.0)))
        return worst

    return _refinement(residual, n, f"symbol_calculus_check(k={k})", {"k": k})


def wave_commutator_check(
    c: float,
    t: float,
    span: tuple[float, float] = (0.5, 4.5),
    test_profiles: Optional[Sequence[Profile]] = None,
    n: int = 401,
) -> RefinementReport:
    """
    Con θ = cλ: [cos(tH), iA] = −ctH sin(tH) y [sin(tH)/H, iA] = ct cos(tH) − c sin(tH)/H
    """
    a, b = span
    if a <= 0:
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, "La malla debe quedar en λ > 0")
    profiles = list(test_profiles) if test_profiles is not None else default_profiles(a, b)
    clearance = BOUNDARY_CLEARANCE * (b - a) / (n - 1)
    theta = lambda lam: c * np.asarray(lam, dtype=float)
    pairs = (
        (lambda lam: np.cos(t * lam), lambda lam: -c * t * lam * np.sin(t * lam)),
        (lambda lam: np.sin(t * lam) / lam, lambda lam: c * t * np.cos(t * lam) - c * np.sin(t * lam) / lam),
    )

    def residual(points: int) -> float:
        grid = uniform_grid(a, b, points)
        i_a = 1j * build_conjugate_generator(theta, grid).matrix
        inside = _interior(grid, clearance)
        worst = 0.0
        for phi, exact in pairs:
            commutator = _commutator(sparse.diags(phi(grid).astype(complex)), i_a)
            for f in profiles:
                values = np.asarray(f(grid), dtype=complex)
                defect = commutator @ values - exact(grid) * values
                worst = max(worst, float(np.max(np.abs(defect[inside]), initial=0.0)))
        return worst

    return _refinement(residual, n, "wave_commutator_check", {"c": c, "t": t})


# ========== FLUJO ==========
def _escape_events(domain: tuple[float, float]):
    """Eventos terminales: positivos dentro del dominio, cambian de signo al salir"""
    lo, hi = domain
    events = []
    if math.isfinite(lo):
        def below(s, y):
            return float(np.min(y - lo))
        below.terminal = True
        events.append(below)
    if math.isfinite(hi):
        def above(s, y):
            return float(np.min(hi - y))
        above.terminal = True
        events.append(above)
    return events


def flow_points(field: FlowField, t: float, points) -> np.ndarray:
    """ξ_t en varios puntos a la vez (sistema desacoplado)"""
    points = np.atleast_1d(np.asarray(points, dtype=float))
    lo, hi = field.domain
    if np.any(points <= lo) or np.any(points >= hi):
        raise LabError(ErrorCode.DOMAIN_ESCAPE, "Punto inicial fuera del dominio del flujo")
    if t == 0:
        return points.copy()
    solution = solve_ivp(
        lambda s, y: np.asarray(field.theta(y), dtype=float) * np.ones_like(y),
        (0.0, t),
        points,
        method="DOP853",
        rtol=field.rtol,
        atol=field.atol,
        events=_escape_events(field.domain) or None,
    )
    if solution.status != 0:
        raise LabError(ErrorCode.DOMAIN_ESCAPE, f"El flujo abandona el dominio antes de t={t}: {solution.message}")
    end = solution.y[:, -1]
    if np.any(end <= lo) or np.any(end >= hi) or not np.all(np.isfinite(end)):
        raise LabError(ErrorCode.DOMAIN_ESCAPE, f"El flujo abandona el dominio antes de t={t}")
    return end


def flow_map(field: FlowField, t: float, lam0: float) -> float:
    """ξ_t(λ0) con dξ/dt = θ(ξ)"""
    return float(flow_points(field, t, [lam0])[0])


def flow_group_law_defect(field: FlowField, t: float, s: float, lam0: float) -> float:
    """|ξ_t(ξ_s(λ0)) − ξ_{t+s}(λ0)| relativo a max(1, |ξ_{t+s}(λ0)|)"""
    composed = flow_map(field, t, flow_map(field, s, lam0))
    direct = flow_map(field, t + s, lam0)
    return abs(composed - direct) / max(1.0, abs(direct))


# ========== CONJUGACIÓN ==========
def hermitian_exponential(matrix: np.ndarray, tau: float) -> np.ndarray:
    """e^{iτA} para A hermítica por descomposición espectral"""
    eigenvalues, vectors = np.linalg.eigh(matrix)
    return (vectors * np.exp(1j * tau * eigenvalues)) @ vectors.conj().T


def conjugation_flow_check(
    theta: Symbol,
    phi: Symbol,
    tau: float,
    span: tuple[float, float] = (-4.0, 4.0),
    test_profiles: Optional[Sequence[Profile]] = None,
    n: int = 401,
) -> RefinementReport:
    """
    e^{−iτA}M_φ e^{iτA} frente a M_{φ∘ξ_{στ}}, con σ = ±1 elegido por la expansión de primer
    orden; además los momentos ⟨f, ·f⟩ de ambos lados.
    """
    a, b = span
    profiles = list(test_profiles) if test_profiles is not None else default_profiles(a, b)
    clearance = BOUNDARY_CLEARANCE * (b - a) / (n - 1)
    field = FlowField(theta)
    probe = uniform_grid(a, b, 4001)
    for f in profiles:
        weight = np.abs(f(probe))
        support = probe[weight > 1e-13 * weight.max()] if weight.max() > 0 else probe[:0]
        if len(support) == 0:
            continue
        moved = np.concatenate([flow_points(field, sign * tau, support[[0, -1]]) for sign in (-1.0, 1.0)])
        if moved.min() < a + clearance or moved.max() > b - clearance:
            raise LabError(ErrorCode.BOUNDARY_CONTAMINATION,
                           f"El soporte transportado [{moved.min():.3g}, {moved.max():.3g}] alcanza el borde")

    def conjugated(points: int, step: float):
        grid = uniform_grid(a, b, points)
        generator = build_conjugate_generator(theta, grid).dense()
        u = hermitian_exponential(generator, step)
        return grid, u.conj().T @ np.diag(np.asarray(phi(grid), dtype=float) * np.ones(points)) @ u

    # dirección: (U_{−ε}M_φU_ε − M_φ)/ε ≈ σ·M_{θφ'}
    epsilon = 1e-4
    grid, first = conjugated(n, epsilon)
    slope = nested_symbol(theta, phi, 1, grid)
    f0 = np.asarray(profiles[0](grid), dtype=complex)
    change = (first @ f0 - np.asarray(phi(grid), dtype=float) * f0) / epsilon
    inside = _interior(grid, clearance)
    sign = 1.0 if np.abs(change - slope * f0)[inside].max() <= np.abs(change + slope * f0)[inside].max() else -1.0

    moments = {}

    def residual(points: int) -> float:
        grid, conj = conjugated(points, tau)
        h = grid[1] - grid[0]
        transported = np.asarray(phi(flow_points(field, sign * tau, grid)), dtype=float)
        inside = _interior(grid, clearance)
        worst, moment = 0.0, 0.0
        for f in profiles:
            values = np.asarray(f(grid), dtype=complex)
            image = conj @ values
            worst = max(worst, float(np.max(np.abs(image - transported * values)[inside], initial=0.0)))
            conjugated_moment = h * np.vdot(values, image)
            pushed_moment = h * np.sum(transported * np.abs(values) ** 2)
            moment = max(moment, abs(conjugated_moment - pushed_moment))
        moments[points] = moment
        return worst

    report = _refinement(residual, n, "conjugation_flow_check", {"direction": sign, "tau": tau})
    coarse_moment, fine_moment = moments[n], moments[2 * n - 1]
    moment_ok = fine_moment <= max(0.5 * coarse_moment, EXACT_RESIDUAL)
    report.details.update({"moment_coarse": coarse_moment, "moment_fine": fine_moment})
    if not moment_ok:
        report.status = CheckStatus.FAIL
    return report


# ========== IDENTIDADES MATRICIALES ==========
def random_hermitian(n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (x + x.conj().T) / (2.0 * math.sqrt(n))


def random_square(n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(n)


def _require_hermitian(h: np.ndarray) -> None:
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("H debe ser cuadrada")
    if np.abs(h - h.conj().T).max(initial=0.0) > 1e-12 * max(1.0, np.abs(h).max(initial=0.0)):
        raise LabError(ErrorCode.PARAMS_OUT_OF_RANGE, "H no es hermítica")


def commutator_symbol(h: np.ndarray, a: np.ndarray) -> np.ndarray:
    """H′ = [H, iA] = i(HA − AH)"""
    return 1j * (h @ a - a @ h)


def duhamel_nodes(h: np.ndarray, t: float) -> int:
    eigenvalues = np.linalg.eigvalsh(h)
    span = float(eigenvalues[-1] - eigenvalues[0]) if len(eigenvalues) else 0.0
    return math.ceil(span * abs(t) / 2.0) + 32


def duhamel_identity_check(h: np.ndarray, a: np.ndarray, t: float, quad_nodes: Optional[int] = None) -> IdentityCheck:
    """[e^{itH}, A] = ∫_0^t e^{i(t−s)H} H′ e^{isH} ds, lado derecho por Gauss–Legendre en s"""
    h = np.asarray(h, dtype=complex)
    a = np.asarray(a, dtype=complex)
    _require_hermitian(h)
    if a.shape != h.shape:
        raise ValueError("A y H deben tener la misma dimensión")
    needed = duhamel_nodes(h, t)
    nodes_count = needed if quad_nodes is None else int(quad_nodes)
    if nodes_count < needed:
        raise LabError(ErrorCode.QUADRATURE_UNDERRESOLVED,
                       f"{nodes_count} nodos no resuelven la fase ‖H‖t (se requieren {needed})")

    eigenvalues, vectors = np.linalg.eigh(h)
    propagator = (vectors * np.exp(1j * t * eigenvalues)) @ vectors.conj().T
    lhs = propagator @ a - a @ propagator

    derivative = vectors.conj().T @ commutator_symbol(h, a) @ vectors
    x, w = legendre.leggauss(nodes_count)
    s = 0.5 * t * (x + 1.0)
    weights = 0.5 * t * w
    # en la base propia: e^{i(t−s)λ_j} H′_{jk} e^{isλ_k}
    left = np.exp(1j * (t - s)[:, None] * eigenvalues[None, :])
    right = np.exp(1j * s[:, None] * eigenvalues[None, :])
    rhs_eigen = np.einsum("q,qj,jk,qk->jk", weights, left, derivative, right)
    rhs = vectors @ rhs_eigen @ vectors.conj().T

    error = float(np.linalg.norm(lhs - rhs, 2))
    status = CheckStatus.PASS if error <= DUHAMEL_THRESHOLD else CheckStatus.FAIL
    logger.info("Duhamel N=%d t=%g nodos=%d: error %.3e → %s", h.shape[0], t, nodes_count, error, status.value)
    return IdentityCheck(error_norm=error, threshold=DUHAMEL_THRESHOLD, status=status,
                         details={"nodes": nodes_count, "t": t, "dimension": h.shape[0]})


def resolvent_commutator_check(h: np.ndarray, a: np.ndarray, z: complex) -> IdentityCheck:
    """[A, R(z)] = −R(z)[A, H]R(z) con R(z) = (H − z)^{−1}"""
    h = np.asarray(h, dtype=complex)
    a = np.asarray(a, dtype=complex)
    _require_hermitian(h)
    eigenvalues = np.linalg.eigvalsh(h)
    norm_h = float(np.max(np.abs(eigenvalues), initial=0.0))
    distance = float(np.min(np.abs(eigenvalues - z)))
    if distance < SPECTRUM_CLEARANCE * norm_h or distance == 0.0:
        raise LabError(ErrorCode.Z_NEAR_SPECTRUM, f"z={z} dista {distance:.3g} del espectro (‖H‖={norm_h:.3g})")
    n = h.shape[0]
    resolvent = np.linalg.solve(h - z * np.eye(n), np.eye(n))
    lhs = a @ resolvent - resolvent @ a
    rhs = -resolvent @ (a @ h - h @ a) @ resolvent
    error = float(np.linalg.norm(lhs - rhs, 2))
    status = CheckStatus.PASS if error <= RESOLVENT_THRESHOLD else CheckStatus.FAIL
    return IdentityCheck(error_norm=error, threshold=RESOLVENT_THRESHOLD, status=status,
                         details={"distance": distance, "norm_h": norm_h})


def regularized_resolvent_check(h: np.ndarray, a: np.ndarray, eps: float) -> IdentityCheck:
    """[A, R_ε] = ε R_ε H′ R_ε con R_ε = (1 + iεH)^{−1}"""
    h = np.asarray(h, dtype=complex)
    a = np.asarray(a, dtype=complex)
    _require_hermitian(h)
    n = h.shape[0]
    regularized = np.linalg.solve(np.eye(n) + 1j * eps * h, np.eye(n))
    lhs = a @ regularized - regularized @ a
    rhs = eps * regularized @ commutator_symbol(h, a) @ regularized
    error = float(np.linalg.norm(lhs - rhs, 2))
    status = CheckStatus.PASS if error <= RESOLVENT_THRESHOLD else CheckStatus.FAIL
    return IdentityCheck(error_norm=error, threshold=RESOLVENT_THRESHOLD, status=status, details={"eps": eps})


def commutator_obstruction(h: np.ndarray, theta: Symbol) -> IdentityCheck:
    """
    Mejor A por mínimos cuadrados para i(HA − AH) = θ(H) a N fijo. Como la traza de un
    conmutador es nula, el residuo de Frobenius no baja de |tr θ(H)|/√N.
    """
    h = np.asarray(h, dtype=complex)
    _require_hermitian(h)
    n = h.shape[0]
    eigenvalues, vectors = np.linalg.eigh(h)
    target = (vectors * np.asarray(theta(eigenvalues), dtype=float)) @ vectors.conj().T
    identity = np.eye(n)
    # vec(HA − AH) = (I⊗H − Hᵀ⊗I) vec(A) en orden por columnas
    operator = 1j * (np.kron(identity, h) - np.kron(h.T, identity))
    solution, *_ = np.linalg.lstsq(operator, target.flatten(order="F"), rcond=None)
    best = solution.reshape((n, n), order="F")
    residual = float(np.linalg.norm(commutator_symbol(h, best) - target, "fro"))
    lower = abs(np.trace(target)) / math.sqrt(n)
    status = CheckStatus.PASS if lower > 0 and residual >= lower * (1.0 - 1e-10) else CheckStatus.FAIL
    return IdentityCheck(error_norm=residual, threshold=max(lower, 1e-300), status=status,
                         details={"lower_bound": lower, "dimension": n})


# ========== NORMAS DEL GENERADOR SOBRE ESTADOS ==========
@dataclass(frozen=True)
class ConjugateNorm:
    value: float
    value_coarse: float
    margin: float


def _check_a_norm(model: ModelSpec, state: SpectralState) -> None:
    """g ~ (λ−a)^{p/2} y θ ~ (λ−a)^β dan A_θ g ~ (λ−a)^{β−1+p/2}"""
    for (a, b), info in zip(state.support, state.singularities):
        for end, p in ((a, info.left), (b, info.right)):
            if not math.isfinite(end):
                continue
            exponent = model.theta_order_at(end) - 1.0 + 0.5 * p
            if exponent <= -0.5:
                raise LabError(ErrorCode.A_NORM_DIVERGES,
                               f"‖A_θ u‖ diverge en λ={end} (exponente {exponent:.3g})")


def _window(piece: tuple[float, float], info, depth: float = 1e-14) -> tuple[float, float]:
    a, b = piece
    lo = a if math.isfinite(a) else info.left_tail.origin - info.left_tail.cutoff(depth)
    hi = b if math.isfinite(b) else info.right_tail.origin + info.right_tail.cutoff(depth)
    return lo, hi


def conjugate_image(model: ModelSpec, state: SpectralState, n: int = 4096) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Muestras de A_θ g (g = v√h) en mallas centradas en celdas: (λ, A_θ g, pesos)"""
    _check_a_norm(model, state)
    lams, images, weights = [], [], []
    for piece, info in zip(state.support, state.singularities):
        lo, hi = _window(piece, info)
        grid = cell_grid(lo, hi, n)
        generator = build_conjugate_generator(model.theta, grid, BoundaryScheme.ONE_SIDED, model.theta_prime)
        amplitude = np.asarray(state.amplitude(grid), dtype=complex)
        lams.append(grid)
        images.append(generator.apply(amplitude))
        weights.append(np.full(n, generator.spacing))
    return np.concatenate(lams), np.concatenate(images), np.concatenate(weights)


def conjugate_norm(model: ModelSpec, state: SpectralState, n: int = 4096) -> ConjugateNorm:
    """‖A_θ g‖ en n y 2n celdas; margen = max(3|Δ|/valor, 1e−6)"""
    _, coarse_image, coarse_w = conjugate_image(model, state, n)
    _, fine_image, fine_w = conjugate_image(model, state, 2 * n)
    coarse = float(math.sqrt(np.sum(np.abs(coarse_image) ** 2 * coarse_w)))
    fine = float(math.sqrt(np.sum(np.abs(fine_image) ** 2 * fine_w)))
    margin = max(3.0 * abs(fine - coarse) / fine, 1e-6) if fine > 0 else 1e-6
    logger.debug("‖A_θ u‖ para %s: %.10g (margen %.2e)", state.label, fine, margin)
    return ConjugateNorm(value=fine, value_coarse=coarse, margin=margin)
