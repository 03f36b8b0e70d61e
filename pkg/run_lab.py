"""
Script para lanzar el laboratorio de decaimiento desde la raíz del repositorio
Uso: python run_lab.py <verbo> [opciones]   (por defecto: catalog)
"""
import sys

from decaylab.config import get_output_dir
from decaylab.main import main

if __name__ == "__main__":
    argv = sys.argv[1:] or ["catalog"]
    print("🚀 Iniciando laboratorio de decaimiento espectral...")
    print(f"📁 Resultados en: {get_output_dir()}")
    print("---")
    sys.exit(main(argv))
