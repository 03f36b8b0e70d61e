"""
Configuración del laboratorio
Lee variables de entorno (archivo .env opcional) y prepara el logging
"""
import logging
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

# Cargar variables de entorno
load_dotenv()

# Directorio de resultados (se puede sobreescribir con --out)
OUTPUT_DIR = os.getenv("DECAYLAB_OUT_DIR", "./resultados")

# Tolerancia por defecto de la cuadratura oscilatoria
DEFAULT_TOL = float(os.getenv("DECAYLAB_TOL", "1e-10"))

# Presupuesto de paneles del motor de cuadratura
MAX_PANELS = int(os.getenv("DECAYLAB_MAX_PANELS", "4000"))

# Procesos para lotes de escenarios
DEFAULT_JOBS = int(os.getenv("DECAYLAB_JOBS", "1"))

LOG_LEVEL = os.getenv("DECAYLAB_LOG_LEVEL", "WARNING")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def get_output_dir(override: Optional[str] = None) -> Path:
    """Directorio de salida: argumento explícito, luego DECAYLAB_OUT_DIR"""
    return Path(override if override else os.getenv("DECAYLAB_OUT_DIR", OUTPUT_DIR))


def configure_logging(level: Optional[str] = None) -> None:
    """Configura el logging raíz una sola vez (CLI y scripts)"""
    name = (level or LOG_LEVEL).upper()
    logging.basicConfig(level=getattr(logging, name, logging.WARNING), format=LOG_FORMAT)
    logging.getLogger("decaylab").setLevel(getattr(logging, name, logging.WARNING))
