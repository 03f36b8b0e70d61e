# Paquete del laboratorio de decaimiento espectral
__version__ = "1.0.0"

# Versiones de los catálogos (se registran en la procedencia de cada reporte)
MODEL_CATALOG_VERSION = "2026.1"
STATE_CATALOG_VERSION = "2026.1"
