"""
Errores del laboratorio
Un solo tipo de excepción con código, al estilo de HTTPException(status_code, detail)
"""
from enum import Enum
from typing import Any, Optional


class ErrorCode(str, Enum):
    # Cuadratura
    NON_CONVERGED = "NON_CONVERGED"
    INVALID_SINGULARITY = "INVALID_SINGULARITY"
    INVALID_INTERVAL = "INVALID_INTERVAL"
    INVALID_TOLERANCE = "INVALID_TOLERANCE"
    MOMENT_DIVERGES = "MOMENT_DIVERGES"
    # Propagadores
    DIVISION_NEAR_THRESHOLD = "DIVISION_NEAR_THRESHOLD"
    TAIL_UNBOUNDED = "TAIL_UNBOUNDED"
    # Ajustes de decaimiento
    TOO_FEW_POINTS = "TOO_FEW_POINTS"
    ZERO_SERIES = "ZERO_SERIES"
    # Desigualdades
    NORM_DIVERGES = "NORM_DIVERGES"
    A_NORM_DIVERGES = "A_NORM_DIVERGES"
    # Laboratorio de operadores
    GRID_TOO_COARSE = "GRID_TOO_COARSE"
    QUADRATURE_UNDERRESOLVED = "QUADRATURE_UNDERRESOLVED"
    Z_NEAR_SPECTRUM = "Z_NEAR_SPECTRUM"
    DOMAIN_ESCAPE = "DOMAIN_ESCAPE"
    BOUNDARY_CONTAMINATION = "BOUNDARY_CONTAMINATION"
    # Catálogos
    UNKNOWN_ID = "UNKNOWN_ID"
    PARAMS_OUT_OF_RANGE = "PARAMS_OUT_OF_RANGE"
    # CLI
    CONFIG_INVALID = "CONFIG_INVALID"
    IO_ERROR = "IO_ERROR"
    CHECK_FAILED = "CHECK_FAILED"


# Códigos de salida del CLI
EXIT_CODES = {
    ErrorCode.CHECK_FAILED: 1,
    ErrorCode.CONFIG_INVALID: 2,
    ErrorCode.IO_ERROR: 3,
}


class LabError(Exception):
    """Error de dominio con código estable y detalle legible"""

    def __init__(self, code: ErrorCode, detail: str, payload: Optional[dict[str, Any]] = None):
        self.code = ErrorCode(code)
        self.detail = detail
        self.payload = payload or {}
        super().__init__(f"{self.code.value}: {detail}")

    @property
    def exit_code(self) -> int:
        return EXIT_CODES.get(self.code, 1)
