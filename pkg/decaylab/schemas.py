"""
Schemas Pydantic para validación de configuraciones y reportes
"""
from enum import Enum
from typing import Any, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from .config import DEFAULT_TOL

# Etiquetas legibles de los resultados garantizados (constantes locales para evitar imports circulares)
THEOREM_LABELS = {
    "P4.1": "Prop 4.1",
    "P4.2": "Prop 4.2",
    "P4.3": "Prop 4.3",
    "T4.6": "Thm 4.6",
    "T6.1": "Thm 6.1",
    "T6.3": "Thm 6.3",
    "P7.7": "Prop 7.7",
    "P7.8": "Prop 7.8",
    "P7.9": "Prop 7.9",
}

THEOREM_GUARANTEES = {
    "P4.1": "guaranteed t^{−1}",
    "P4.2": "guaranteed t^{−1}",
    "P4.3": "guaranteed t^{−1/2}",
    "T4.6": "guaranteed t^{−1/2}",
    "T6.1": "guaranteed t^{−k}",
    "T6.3": "guaranteed t^{−k/2}",
    "P7.7": "guaranteed t^{−1/2}",
    "P7.8": "guaranteed t^{−1/2}",
    "P7.9": "guaranteed t^{−1/2}",
}


# ========== ENUMS ==========
class CheckStatus(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    NOT_APPLICABLE = "NOT_APPLICABLE"


class EvanescentClass(str, Enum):
    IN_CE = "IN_CE"
    IN_CE_INFINITY = "IN_CE_INFINITY"
    NEITHER = "NEITHER"

    @property
    def in_ce(self) -> bool:
        return self is not EvanescentClass.NEITHER


class AmplitudeKind(str, Enum):
    SCHRODINGER = "schrodinger"
    WAVE_U1 = "wave_u1"
    WAVE_U2 = "wave_u2"
    WAVE = "wave"
    DERIVATIVE = "derivative"
    CROSS = "cross"


class ScenarioKind(str, Enum):
    SCHRODINGER = "schrodinger"
    WAVE = "wave"


class CheckName(str, Enum):
    SIMULATE = "simulate"
    FIT = "fit"
    BOUNDS = "bounds"
    INEQ = "ineq"
    APPENDIX = "appendix"
    OPERATOR_LAB = "operator_lab"


class BoundaryScheme(str, Enum):
    DIRICHLET = "dirichlet"
    ONE_SIDED = "one_sided"


def combine_status(statuses) -> CheckStatus:
    """FAIL si alguno falla; PASS si alguno pasa; si no, NOT_APPLICABLE"""
    statuses = list(statuses)
    if any(s == CheckStatus.FAIL for s in statuses):
        return CheckStatus.FAIL
    if any(s == CheckStatus.PASS for s in statuses):
        return CheckStatus.PASS
    return CheckStatus.NOT_APPLICABLE


# ========== RESULTADOS NUMÉRICOS ==========
class DecayFit(BaseModel):
    exponent: float
    prefactor: float = Field(..., gt=0)
    t_min: float
    t_max: float
    residual: float = Field(..., ge=0)
    envelope_points: int = Field(..., ge=8)

    @model_validator(mode="after")
    def window_order(self):
        if not self.t_min < self.t_max:
            raise ValueError("La ventana de ajuste requiere t_min < t_max")
        return self


class DecayBoundCheck(BaseModel):
    sup_stat: float
    monotone_trend: float
    status: CheckStatus


class RefinementReport(BaseModel):
    """Residuos en h y h/2 con su cociente (orden dos ⇒ ≈ 4)"""
    residual_coarse: float
    residual_fine: float
    ratio: Optional[float] = None
    status: CheckStatus
    details: dict[str, Any] = Field(default_factory=dict)


class IdentityCheck(BaseModel):
    """Identidad matricial exacta: norma espectral del error frente al umbral"""
    error_norm: float = Field(..., ge=0)
    threshold: float = Field(..., gt=0)
    status: CheckStatus
    details: dict[str, Any] = Field(default_factory=dict)


class CheckResult(BaseModel):
    name: str
    status: CheckStatus
    abscissa: list[float] = Field(default_factory=list)
    lhs: list[float] = Field(default_factory=list)
    rhs: list[float] = Field(default_factory=list)
    margin: list[float] = Field(default_factory=list)
    payload: dict[str, Any] = Field(default_factory=dict)


# ========== ESCENARIOS ==========
ParamValue = Union[int, float, str]


class ScenarioConfig(BaseModel):
    name: str = Field("escenario", min_length=1, max_length=100)
    model: str
    model_params: dict[str, ParamValue] = Field(default_factory=dict)
    state: str = "exponential"
    state_params: dict[str, ParamValue] = Field(default_factory=dict)
    partner: Optional[str] = None
    partner_params: dict[str, ParamValue] = Field(default_factory=dict)
    kind: ScenarioKind = ScenarioKind.SCHRODINGER
    t_start: float = -1.0
    t_stop: float = 4.0
    t_points: int = Field(200, ge=16)
    fit_start: float = Field(1e2, gt=0)
    fit_stop: float = Field(1e4, gt=0)
    tol: float = Field(DEFAULT_TOL, gt=1e-14, lt=1e-2)
    oracle_tol: float = Field(1e-8, gt=0)
    checks: list[CheckName] = Field(default_factory=list)
    seed: int = 0
    config_text: str = ""

    @field_validator("checks")
    def unique_checks(cls, v):
        seen = []
        for check in v:
            if check not in seen:
                seen.append(check)
        return seen

    @model_validator(mode="after")
    def grid_order(self):
        if not self.t_start < self.t_stop:
            raise ValueError("La malla temporal requiere start < stop")
        if not self.fit_start < self.fit_stop:
            raise ValueError("La ventana de ajuste requiere start < stop")
        return self

    @property
    def t_grid(self) -> np.ndarray:
        """Malla logarítmica 10^start .. 10^stop"""
        return np.logspace(self.t_start, self.t_stop, self.t_points)


class Provenance(BaseModel):
    config_hash: str
    model_catalog: str
    state_catalog: str
    version: str


class RunReport(BaseModel):
    name: str
    checks: dict[str, CheckStatus] = Field(default_factory=dict)
    payloads: dict[str, dict[str, Any]] = Field(default_factory=dict)
    provenance: Provenance
    exit_code: int = 0
