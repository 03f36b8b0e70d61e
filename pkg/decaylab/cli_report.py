"""
Configuración de escenarios, ejecución y emisión de reportes (CSV/JSON),
catálogo y matriz de aceptación
"""
import filecmp
import hashlib
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np
import pandas as pd
from dotenv import dotenv_values
from pydantic import ValidationError

from . import MODEL_CATALOG_VERSION, STATE_CATALOG_VERSION, __version__
from .config import DEFAULT_JOBS, DEFAULT_TOL, get_output_dir
from .decay_analysis import counterexample_rate, expected_exponent, fit_decay_exponent, verify_decay_bound
from .errors import ErrorCode, LabError
from .operator_lab import (
    FLOW_TOL,
    FlowField,
    commutator_obstruction,
    commutator_residual,
    conjugation_flow_check,
    duhamel_identity_check,
    flow_group_law_defect,
    flow_map,
    random_hermitian,
    random_square,
    regularized_resolvent_check,
    resolvent_commutator_check,
    symbol_calculus_check,
    wave_commutator_check,
)
from .oscillatory_quad import AmplitudeSeries, derivative_series
from .propagator import lifetime_norm_time, survival_series, wave_pairing
from .schemas import (
    THEOREM_GUARANTEES,
    THEOREM_LABELS,
    CheckName,
    CheckResult,
    CheckStatus,
    Provenance,
    RunReport,
    ScenarioConfig,
    ScenarioKind,
    combine_status,
)
from .spectral_model import (
    ModelSpec,
    SpectralState,
    build_model,
    catalog_state,
    density_of,
    lifetime_norm_frequency,
    list_models,
    list_states,
)
from .theorem_checks import (
    LEMMA_FUNCTIONS,
    check_bounded_function_lemma,
    check_commutator_bound,
    check_density_inequalities,
    check_energy_inequality,
    check_interference_inequality,
    check_inverse_commutator_bound,
    check_l2_derivative_decay,
    check_sqrt_decay_lemma,
)

logger = logging.getLogger(__name__)

# Secciones admitidas en los archivos de escenario
SECTIONS = ("model", "state", "partner", "grid", "run", "fit")
GRID_KEYS = {"start": "t_start", "stop": "t_stop", "points": "t_points"}
RUN_KEYS = {"tol": "tol", "checks": "checks", "seed": "seed", "kind": "kind", "name": "name", "oracle_tol": "oracle_tol"}
FIT_KEYS = {"start": "fit_start", "stop": "fit_stop"}

RATE_TOLERANCE = 0.05
INTERFERENCE_HORIZONS = np.logspace(0.0, 3.0, 16)
LEMMA_GRID = np.logspace(-1.0, 2.0, 50)
LEMMA_POWERS = (1.5, 2.0, 3.0)
MATRIX_SEEDS = 5
MATRIX_SIZES = (6, 12)
MATRIX_TIMES = (0.5, 2.5, 10.0)
FLOW_ORACLE_TOL = 1e-10
PLANCHEREL_TOL = 1e-3
# Errores que indican una hipótesis no satisfecha y no una violación
NOT_APPLICABLE_ERRORS = {
    ErrorCode.A_NORM_DIVERGES,
    ErrorCode.NORM_DIVERGES,
    ErrorCode.TAIL_UNBOUNDED,
    ErrorCode.DIVISION_NEAR_THRESHOLD,
}
REPORT_FILES = ("amplitudes.csv", "fit.json", "checks.json", "report.json")
# Segunda pasada de la matriz de aceptación
RERUN_DIR = "repeticion"
# Presupuesto de tiempo del oráculo de 1000 puntos
ORACLE_SECONDS = 5.0

CHECK_DESCRIPTIONS = {
    CheckName.SIMULATE: "amplitud en la malla temporal y oráculo de forma cerrada",
    CheckName.FIT: "exponente de decaimiento frente al garantizado",
    CheckName.BOUNDS: "t^s|ψ(t)| acotado con s garantizado",
    CheckName.INEQ: "interferencia, conmutador, energía y normas L²",
    CheckName.APPENDIX: "lema t^{−1/2} con constante exacta",
    CheckName.OPERATOR_LAB: "cálculo de conmutadores en malla e identidades matriciales",
}


# ========== CONFIGURACIÓN ==========
def _coerce(value: str):
    text = value.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def canonical_config_text(values: dict[str, Optional[str]]) -> str:
    """Líneas key=value ordenadas, sin espacios sobrantes"""
    lines = sorted(f"{key.strip()}={(value or '').strip()}" for key, value in values.items())
    return "\n".join(lines) + "\n"


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def parse_config_text(text: str) -> ScenarioConfig:
    """Archivo key=value con secciones por prefijo (model.id, state.theta, grid.points, ...)"""
    raw = dotenv_values(stream=io.StringIO(text))
    fields: dict[str, Any] = {"model_params": {}, "state_params": {}, "partner_params": {}}
    for key, value in raw.items():
        section, _, name = key.strip().partition(".")
        if section not in SECTIONS or not name:
            raise LabError(ErrorCode.CONFIG_INVALID, f"Clave desconocida: {key}")
        value = (value or "").strip()
        if section in ("model", "state", "partner"):
            if name == "id":
                fields[section] = value
            else:
                fields[f"{section}_params"][name] = _coerce(value)
            continue
        table = {"grid": GRID_KEYS, "run": RUN_KEYS, "fit": FIT_KEYS}[section]
        if name not in table:
            raise LabError(ErrorCode.CONFIG_INVALID, f"Clave desconocida: {key}")
        if name == "checks":
            fields["checks"] = [c.strip() for c in value.split(",") if c.strip()]
        else:
            fields[table[name]] = value
    if "model" not in fields:
        raise LabError(ErrorCode.CONFIG_INVALID, "Falta model.id")
    fields["config_text"] = canonical_config_text(raw)
    try:
        return ScenarioConfig(**fields)
    except ValidationError as e:
        raise LabError(ErrorCode.CONFIG_INVALID, str(e))


def load_config(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise LabError(ErrorCode.IO_ERROR, f"No se pudo leer {path}: {e}")
    return parse_config_text(text)


def config_to_text(config: ScenarioConfig) -> str:
    """Texto canónico equivalente a un ScenarioConfig construido en código"""
    if config.config_text:
        return config.config_text
    values = {
        "model.id": config.model,
        "state.id": config.state,
        "grid.start": repr(config.t_start),
        "grid.stop": repr(config.t_stop),
        "grid.points": str(config.t_points),
        "fit.start": repr(config.fit_start),
        "fit.stop": repr(config.fit_stop),
        "run.tol": repr(config.tol),
        "run.oracle_tol": repr(config.oracle_tol),
        "run.checks": ",".join(c.value for c in config.checks),
        "run.seed": str(config.seed),
        "run.kind": config.kind.value,
        "run.name": config.name,
    }
    for section, params in (("model", config.model_params), ("state", config.state_params),
                            ("partner", config.partner_params)):
        values.update({f"{section}.{k}": str(v) for k, v in params.items()})
    if config.partner:
        values["partner.id"] = config.partner
    return canonical_config_text(values)


# ========== ARCHIVOS ==========
def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    return value


def _canonical_json(data) -> str:
    return json.dumps(_jsonable(data), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_json(path: Path, data) -> None:
    try:
        path.write_text(_canonical_json(data), encoding="utf-8")
    except OSError as e:
        raise LabError(ErrorCode.IO_ERROR, f"No se pudo escribir {path}: {e}")


def write_amplitudes(path: Path, series: AmplitudeSeries) -> None:
    frame = pd.DataFrame({
        "t": series.t,
        "re": series.values.real,
        "im": series.values.imag,
        "abs": series.abs,
        "err_est": series.errors,
        "flag": series.flags.astype(bool),
    })
    try:
        frame.to_csv(path, index=False, float_format="%.17g")
    except OSError as e:
        raise LabError(ErrorCode.IO_ERROR, f"No se pudo escribir {path}: {e}")


def _scenario_dir(out_dir, name: str) -> Path:
    target = Path(out_dir) / name
    try:
        target.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise LabError(ErrorCode.IO_ERROR, f"No se pudo crear {target}: {e}")
    return target


# ========== ESCENARIOS ==========
class _Scenario:
    """Modelo, estados y series compartidos por las comprobaciones de un escenario"""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.model: ModelSpec = build_model(config.model, config.model_params)
        self.state: SpectralState = catalog_state(self.model, config.state, config.state_params, config.tol)
        self.partner: Optional[SpectralState] = None
        if config.partner:
            self.partner = catalog_state(self.model, config.partner, config.partner_params, config.tol)
        if config.kind == ScenarioKind.WAVE and self.partner is None:
            self.partner = self.state
        self._series: Optional[AmplitudeSeries] = None

    @property
    def series(self) -> AmplitudeSeries:
        if self._series is None:
            grid = self.config.t_grid
            if self.config.kind == ScenarioKind.WAVE:
                self._series = wave_pairing(self.model, self.state, self.partner, grid, self.config.tol)
            else:
                self._series = survival_series(self.model, self.state, grid, self.config.tol)
        return self._series

    def target_exponent(self) -> tuple[Optional[float], Optional[str]]:
        rate = counterexample_rate(self.state)
        if rate is not None:
            return rate, None
        return expected_exponent(self.model, self.state)


def _simulate(scenario: _Scenario) -> tuple[CheckStatus, dict, list[CheckResult]]:
    series = scenario.series
    payload = {"points": len(series.t), "converged": series.converged,
               "max_error_estimate": float(series.errors.max(initial=0.0))}
    ok = series.converged
    closed = scenario.state.closed_form
    if closed is not None and scenario.config.kind == ScenarioKind.SCHRODINGER:
        oracle_error = float(np.max(np.abs(series.values - closed(series.t)), initial=0.0))
        payload["oracle_error"] = oracle_error
        ok = ok and oracle_error <= scenario.config.oracle_tol
    return (CheckStatus.PASS if ok else CheckStatus.FAIL), payload, []


def _fit(scenario: _Scenario) -> tuple[CheckStatus, dict, list[CheckResult]]:
    config = scenario.config
    fit = fit_decay_exponent(scenario.series, (config.fit_start, config.fit_stop))
    payload = fit.model_dump(mode="json")
    rate = counterexample_rate(scenario.state)
    expected, tag = expected_exponent(scenario.model, scenario.state)
    if rate is not None:
        payload.update({"expected_exponent": rate, "theorem_tag": None, "exact_rate": True})
        status = CheckStatus.PASS if abs(fit.exponent - rate) <= RATE_TOLERANCE else CheckStatus.FAIL
    elif expected is not None:
        payload.update({"expected_exponent": expected, "theorem_tag": tag, "theorem": THEOREM_LABELS[tag]})
        status = CheckStatus.PASS if fit.exponent >= expected - RATE_TOLERANCE else CheckStatus.FAIL
    else:
        payload.update({"expected_exponent": None, "theorem_tag": None})
        status = CheckStatus.NOT_APPLICABLE
    return status, payload, []


def _bounds(scenario: _Scenario) -> tuple[CheckStatus, dict, list[CheckResult]]:
    s, tag = scenario.target_exponent()
    if s is None:
        return CheckStatus.NOT_APPLICABLE, {"reason": "sin exponente garantizado"}, []
    bound = verify_decay_bound(scenario.series, s)
    payload = bound.model_dump(mode="json")
    payload.update({"exponent": s, "theorem_tag": tag})
    return bound.status, payload, []


def _guarded(name: str, check: Callable[[], CheckResult]) -> CheckResult:
    """Un LabError de hipótesis se informa como NOT_APPLICABLE; el resto como FAIL"""
    try:
        return check()
    except LabError as e:
        status = CheckStatus.NOT_APPLICABLE if e.code in NOT_APPLICABLE_ERRORS else CheckStatus.FAIL
        logger.info("Comprobación %s: %s", name, e)
        return CheckResult(name=name, status=status, payload={"error": e.code.value, "detail": e.detail, **e.payload})


def _ineq(scenario: _Scenario) -> tuple[CheckStatus, dict, list[CheckResult]]:
    config, model, state = scenario.config, scenario.model, scenario.state
    v_state = scenario.partner or state
    positive = config.t_grid[config.t_grid > 0]

    def l2_decay():
        density = density_of(state, model)
        psi = survival_series(model, state, positive, config.tol)
        return check_l2_derivative_decay(psi, derivative_series(density, positive, config.tol))

    results = [
        _guarded("commutator_bound", lambda: check_commutator_bound(model, state, positive, config.tol)),
        _guarded("energy", lambda: check_energy_inequality(model, state, config.tol)),
        _guarded("interference", lambda: check_interference_inequality(model, v_state, state, INTERFERENCE_HORIZONS,
                                                                       config.tol)),
        _guarded("l2_derivative_decay", l2_decay),
        _guarded("inverse_commutator", lambda: check_inverse_commutator_bound(model, state, positive, config.tol)),
        _guarded("bounded_function", lambda: check_bounded_function_lemma(model, state, tol=config.tol)),
    ]
    if scenario.partner is not None:
        results.append(_guarded("density_inequalities",
                                lambda: check_density_inequalities(model, scenario.partner, state, config.tol)))
    statuses = {r.name: r.status.value for r in results}
    return combine_status(r.status for r in results), {"checks": statuses}, results


def run_lemma_suite(tol: float = DEFAULT_TOL) -> list[CheckResult]:
    """Las funciones del catálogo del lema × p ∈ {1.5, 2, 3}"""
    results = []
    for name, function in LEMMA_FUNCTIONS.items():
        for p in LEMMA_POWERS:
            result = _guarded("sqrt_decay_lemma", lambda: check_sqrt_decay_lemma(function.with_p(p), LEMMA_GRID, tol))
            result.name = f"sqrt_decay_lemma[{name},p={p:g}]"
            results.append(result)
    return results


def _appendix(scenario: _Scenario) -> tuple[CheckStatus, dict, list[CheckResult]]:
    results = run_lemma_suite(scenario.config.tol)
    failures = [r.name for r in results if r.status == CheckStatus.FAIL]
    return combine_status(r.status for r in results), {"cases": len(results), "failures": failures}, results


# ========== LABORATORIO DE OPERADORES ==========
def _tanh(lam):
    return np.tanh(lam)


LAB_PAIRS = {
    "constant_sin": (lambda lam: np.ones_like(np.asarray(lam, dtype=float)), np.sin),
    "linear_gauss": (lambda lam: np.asarray(lam, dtype=float), lambda lam: np.exp(-0.25 * np.asarray(lam) ** 2)),
    "modulated_tanh": (lambda lam: 1.0 + 0.5 * np.sin(lam), _tanh),
}
LAB_ORDERS = (1, 2, 3)
LAB_TAU = 0.3


def run_lab_suite() -> dict[str, dict]:
    """Comprobaciones en malla: conmutador, cálculo simbólico, flujo conjugado y ondas"""
    reports: dict[str, dict] = {}

    def record(name: str, call):
        try:
            report = call()
            reports[name] = report.model_dump(mode="json")
        except LabError as e:
            reports[name] = {"status": CheckStatus.FAIL.value, "error": e.code.value, "detail": e.detail}

    for pair, (theta, phi) in LAB_PAIRS.items():
        record(f"commutator_residual[{pair}]", lambda: commutator_residual(theta))
        for k in LAB_ORDERS:
            record(f"symbol_calculus[{pair},k={k}]", lambda: symbol_calculus_check(theta, phi, k))
        record(f"conjugation_flow[{pair}]", lambda: conjugation_flow_check(theta, phi, LAB_TAU))
    record("wave_commutator[c=1,t=1]", lambda: wave_commutator_check(1.0, 1.0))
    reports.update(flow_oracle_suite())
    return reports


def flow_oracle_suite(c: float = 0.5, times: Sequence[float] = (0.25, 0.5, 1.0),
                      starts: Sequence[float] = (0.2, 0.5, 0.9)) -> dict[str, dict]:
    """ξ_t(λ) = λe^{ct} para θ = cλ y ley de grupo del flujo"""
    field = FlowField(lambda lam: c * np.asarray(lam, dtype=float))
    worst, defect = 0.0, 0.0
    for t in times:
        for lam0 in starts:
            exact = lam0 * math.exp(c * t)
            worst = max(worst, abs(flow_map(field, t, lam0) - exact) / abs(exact))
            defect = max(defect, flow_group_law_defect(field, t, 0.5 * t, lam0))
    status = CheckStatus.PASS if worst <= FLOW_ORACLE_TOL and defect <= 10.0 * FLOW_TOL else CheckStatus.FAIL
    return {"flow_oracle": {"status": status.value, "relative_error": worst, "group_law_defect": defect, "c": c}}


def run_matrix_suite(seed: int = 0) -> dict[str, dict]:
    """Duhamel, resolvente, resolvente regularizada y obstrucción de traza"""
    reports: dict[str, dict] = {}
    for offset in range(MATRIX_SEEDS):
        s = seed + offset
        for n in MATRIX_SIZES:
            h = random_hermitian(n, s)
            a = random_square(n, s + 1000)
            norm_h = float(np.max(np.abs(np.linalg.eigvalsh(h))))
            for t in MATRIX_TIMES:
                reports[f"duhamel[seed={s},N={n},t={t:g}]"] = duhamel_identity_check(h, a, t).model_dump(mode="json")
            z = 1j * max(1.0, 2.0 * norm_h)
            reports[f"resolvent[seed={s},N={n}]"] = resolvent_commutator_check(h, a, z).model_dump(mode="json")
            reports[f"regularized_resolvent[seed={s},N={n}]"] = regularized_resolvent_check(h, a, 0.1).model_dump(
                mode="json")
    h = random_hermitian(MATRIX_SIZES[-1], seed)
    reports["commutator_obstruction"] = commutator_obstruction(h, lambda lam: 1.0 + lam * lam).model_dump(mode="json")
    return reports


def _suite_status(reports: dict[str, dict]) -> CheckStatus:
    return combine_status(CheckStatus(r["status"]) for r in reports.values())


def _operator_lab(scenario: _Scenario) -> tuple[CheckStatus, dict, list[CheckResult]]:
    reports = {**run_lab_suite(), **run_matrix_suite(scenario.config.seed)}
    failures = sorted(name for name, r in reports.items() if r["status"] == CheckStatus.FAIL.value)
    return _suite_status(reports), {"cases": len(reports), "failures": failures, "reports": reports}, []


CHECK_RUNNERS = {
    CheckName.SIMULATE: _simulate,
    CheckName.FIT: _fit,
    CheckName.BOUNDS: _bounds,
    CheckName.INEQ: _ineq,
    CheckName.APPENDIX: _appendix,
    CheckName.OPERATOR_LAB: _operator_lab,
}


def run_scenario(config: ScenarioConfig, out_dir=None) -> RunReport:
    """
    Ejecuta las comprobaciones pedidas y escribe amplitudes.csv (si hubo serie), fit.json
    (si se pidió fit), checks.json, report.json y timing.json en out_dir/<nombre>.
    """
    started = time.perf_counter()
    target = _scenario_dir(get_output_dir(out_dir), config.name)
    provenance = Provenance(
        config_hash=config_hash(config_to_text(config)),
        model_catalog=MODEL_CATALOG_VERSION,
        state_catalog=STATE_CATALOG_VERSION,
        version=__version__,
    )
    scenario = _Scenario(config) if config.checks else None
    statuses: dict[str, CheckStatus] = {}
    payloads: dict[str, dict] = {}
    details: dict[str, Any] = {}
    timing: dict[str, float] = {}
    for check in config.checks:
        tick = time.perf_counter()
        try:
            status, payload, results = CHECK_RUNNERS[check](scenario)
        except LabError as e:
            if e.code in (ErrorCode.IO_ERROR, ErrorCode.CONFIG_INVALID):
                raise
            status = CheckStatus.NOT_APPLICABLE if e.code in NOT_APPLICABLE_ERRORS else CheckStatus.FAIL
            payload, results = {"error": e.code.value, "detail": e.detail}, []
        statuses[check.value] = status
        payloads[check.value] = payload
        if results:
            details[check.value] = {r.name: r.model_dump(mode="json") for r in results}
        timing[check.value] = time.perf_counter() - tick
        logger.info("Escenario %s: %s → %s", config.name, check.value, status.value)

    if scenario is not None and scenario._series is not None:
        write_amplitudes(target / "amplitudes.csv", scenario.series)
    if CheckName.FIT.value in payloads:
        write_json(target / "fit.json", payloads[CheckName.FIT.value])
    write_json(target / "checks.json", details)
    failed = any(s == CheckStatus.FAIL for s in statuses.values())
    report = RunReport(name=config.name, checks=statuses, payloads=payloads, provenance=provenance,
                       exit_code=1 if failed else 0)
    write_json(target / "report.json", report.model_dump(mode="json"))
    timing["total"] = time.perf_counter() - started
    write_json(target / "timing.json", timing)
    return report


def _run_one(args) -> RunReport:
    config, out_dir = args
    return run_scenario(config, out_dir)


def run_batch(configs: Sequence[ScenarioConfig], out_dir=None, jobs: int = DEFAULT_JOBS) -> list[RunReport]:
    """Escenarios en paralelo; cada uno escribe solo en su propio subdirectorio"""
    names = [c.name for c in configs]
    if len(set(names)) != len(names):
        raise LabError(ErrorCode.CONFIG_INVALID, "Los escenarios de un lote deben tener nombres distintos")
    tasks = [(config, out_dir) for config in configs]
    if jobs <= 1 or len(tasks) <= 1:
        return [_run_one(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, tasks))


# ========== CATÁLOGO ==========
def list_catalog() -> str:
    """Tabla determinista de modelos, estados, comprobaciones y resultados garantizados"""
    lines = ["# MODELOS"]
    lines.extend(list_models())
    lines.append("")
    lines.append("# ESTADOS")
    lines.extend(list_states())
    lines.append("")
    lines.append("# COMPROBACIONES")
    lines.extend(f"{check.value} | {CHECK_DESCRIPTIONS[check]}" for check in CheckName)
    lines.append("")
    lines.append("# RESULTADOS")
    lines.extend(f"{tag} | {text}" for tag, text in THEOREM_GUARANTEES.items())
    return "\n".join(lines) + "\n"


# ========== ACEPTACIÓN ==========
def _scenario(name: str, model: str, state: str, checks, model_params=None, state_params=None, **extra) -> ScenarioConfig:
    return ScenarioConfig(name=name, model=model, state=state, checks=checks, model_params=model_params or {},
                          state_params=state_params or {}, **extra)


def acceptance_scenarios() -> dict[str, list[ScenarioConfig]]:
    """Escenarios integrados por criterio"""
    oracle = dict(t_points=1000, t_start=-1.0, t_stop=4.0, oracle_tol=1e-8)
    sweep_checks = [CheckName.FIT, CheckName.BOUNDS, CheckName.INEQ]
    return {
        "1": [_scenario("oraculo_exponencial", "laplacian", "exponential", [CheckName.SIMULATE],
                        {"n": 3}, **oracle)],
        "2": [_scenario("oraculo_gaussiana", "laplacian", "gaussian_laplacian", [CheckName.SIMULATE],
                        {"n": 3}, {"n": 3}, **oracle)],
        "4": [
            _scenario(f"contraejemplo_{theta:g}", "homogeneous", "power_counterexample", [CheckName.FIT],
                      {"theta": 1.0}, {"theta": theta})
            for theta in (0.1, 0.25, 0.4)
        ],
        "5": [
            _scenario("tasa_laplaciano", "laplacian", "gaussian_laplacian", sweep_checks, {"n": 3}, {"n": 3}),
            _scenario("tasa_fraccionario", "fractional", "exponential", sweep_checks, {"s": 1.0}),
            _scenario("tasa_homogeneo", "homogeneous", "exponential", sweep_checks, {"theta": 0.5}),
            _scenario("tasa_campo_electrico", "electric_field", "bump", sweep_checks, {}, {"power": 2}, tol=1e-13),
            _scenario("tasa_dirac", "dirac", "exponential", sweep_checks, {"m": 1.0}, {"power": 1}),
            _scenario("tasa_klein_gordon", "wave", "exponential", sweep_checks, {"kind": "klein_gordon", "m": 1.0},
                      {"power": 1}, kind=ScenarioKind.WAVE),
            _scenario("tasa_saturante", "saturating", "exponential", sweep_checks),
            _scenario("tasa_kzero", "saturating", "kzero_family", sweep_checks, {}, {"k": 3, "base": "exponential"}),
        ],
    }


def plancherel_cases(tol: float = DEFAULT_TOL) -> list[dict]:
    """Norma de vida media por ambos lados para estados de ce"""
    cases = [
        ("laplacian", {"n": 3}, "exponential", {}),
        ("laplacian", {"n": 3}, "gaussian_laplacian", {"n": 3}),
        ("electric_field", {}, "gaussian", {"mu": 0.0, "sigma": 1.0}),
    ]
    rows = []
    for model_id, model_params, state_id, state_params in cases:
        model = build_model(model_id, model_params)
        state = catalog_state(model, state_id, state_params, tol)
        frequency = lifetime_norm_frequency(density_of(state, model), tol)
        temporal = lifetime_norm_time(model, state, tol)
        relative = abs(temporal - frequency) / frequency
        rows.append({"model": model.label, "state": state.label, "frequency": frequency, "time": temporal,
                     "relative": relative, "status": (CheckStatus.PASS if relative <= PLANCHEREL_TOL
                                                      else CheckStatus.FAIL).value})
    return rows


def _status_of(reports: Sequence[RunReport], check: CheckName) -> CheckStatus:
    return combine_status(r.checks.get(check.value, CheckStatus.NOT_APPLICABLE) for r in reports)


def _same_files(first: Path, second: Path) -> bool:
    for name in REPORT_FILES:
        a, b = first / name, second / name
        if a.exists() != b.exists():
            return False
        if a.exists() and not filecmp.cmp(a, b, shallow=False):
            return False
    return True


def _oracle_seconds(root: Path, name: str) -> float:
    timing = json.loads((root / name / "timing.json").read_text(encoding="utf-8"))
    return float(timing.get(CheckName.SIMULATE.value, math.inf))


def _acceptance_pass(root: Path, jobs: int, tol: float) -> dict[str, dict]:
    """Criterios 1–10 sobre los escenarios integrados escritos en root"""
    scenarios = acceptance_scenarios()
    ordered = [config for key in sorted(scenarios) for config in scenarios[key]]
    reports = dict(zip((c.name for c in ordered), run_batch(ordered, root, jobs)))

    def group(key: str) -> list[RunReport]:
        return [reports[c.name] for c in scenarios[key]]

    criteria: dict[str, dict] = {}
    oracle_name = scenarios["1"][0].name
    in_time = _oracle_seconds(root, oracle_name) < ORACLE_SECONDS
    status = _status_of(group("1"), CheckName.SIMULATE)
    criteria["1"] = {"status": (status if in_time else CheckStatus.FAIL).value, "within_time": in_time}
    criteria["2"] = {"status": _status_of(group("2"), CheckName.SIMULATE).value}
    plancherel = plancherel_cases(tol)
    criteria["3"] = {"status": combine_status(CheckStatus(r["status"]) for r in plancherel).value, "cases": plancherel}
    criteria["4"] = {"status": _status_of(group("4"), CheckName.FIT).value,
                     "exponents": {r.name: r.payloads["fit"].get("exponent") for r in group("4")}}
    criteria["5"] = {"status": _status_of(group("5"), CheckName.FIT).value,
                     "scenarios": {r.name: r.checks.get("fit", CheckStatus.NOT_APPLICABLE).value for r in group("5")}}
    criteria["6"] = {"status": _status_of(group("5"), CheckName.INEQ).value}

    lemma = run_lemma_suite(tol)
    criteria["7"] = {"status": combine_status(r.status for r in lemma).value, "cases": len(lemma),
                     "failures": [r.name for r in lemma if r.status == CheckStatus.FAIL]}
    matrix = run_matrix_suite(0)
    criteria["8"] = {"status": _suite_status(matrix).value, "cases": len(matrix)}
    lab = run_lab_suite()
    flow = {"flow_oracle": lab.pop("flow_oracle")}
    criteria["9"] = {"status": _suite_status(lab).value,
                     "ratios": {name: r.get("ratio") for name, r in sorted(lab.items())}}
    criteria["10"] = {"status": _suite_status(flow).value, **flow["flow_oracle"]}
    return criteria


def run_acceptance(out_dir=None, jobs: int = DEFAULT_JOBS, tol: float = DEFAULT_TOL) -> dict[str, dict]:
    """Matriz de aceptación completa; escribe acceptance.json y devuelve el veredicto por criterio"""
    root = get_output_dir(out_dir)
    criteria = _acceptance_pass(root, jobs, tol)

    # determinismo: la matriz entera se repite en otro directorio
    rerun_root = root / RERUN_DIR
    repeated = _acceptance_pass(rerun_root, jobs, tol)
    names = [c.name for configs in acceptance_scenarios().values() for c in configs]
    mismatched = [name for name in names if not _same_files(root / name, rerun_root / name)]
    same_verdicts = _canonical_json(criteria) == _canonical_json(repeated)
    identical = not mismatched and same_verdicts
    criteria["11"] = {"status": (CheckStatus.PASS if identical else CheckStatus.FAIL).value,
                      "scenarios": len(names), "mismatched": mismatched, "same_verdicts": same_verdicts}

    write_json(root / "acceptance.json", criteria)
    logger.info("Aceptación: %s", {k: v["status"] for k, v in criteria.items()})
    return criteria
