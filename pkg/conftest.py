"""
Fixtures compartidas: modelos y estados del catálogo y directorio de resultados temporal
"""
import numpy as np
import pytest

from decaylab.spectral_model import build_model, catalog_state


@pytest.fixture
def laplacian3():
    return build_model("laplacian", {"n": 3})


@pytest.fixture
def exponential_state(laplacian3):
    return catalog_state(laplacian3, "exponential")


@pytest.fixture
def gaussian_laplacian_state(laplacian3):
    return catalog_state(laplacian3, "gaussian_laplacian", {"n": 3})


@pytest.fixture
def electric_field():
    return build_model("electric_field")


@pytest.fixture
def unit_weight():
    """H = λ sobre L²((0, ∞), dλ): h ≡ 1 y θ(λ) = λ"""
    return build_model("homogeneous", {"theta": 1.0})


@pytest.fixture
def unit_exponential(unit_weight):
    return catalog_state(unit_weight, "exponential")


@pytest.fixture
def smooth_bump(electric_field):
    return catalog_state(electric_field, "bump", {"power": "smooth"})


@pytest.fixture
def log_grid():
    """Malla logarítmica 10^{−1} .. 10^{4}"""
    return np.logspace(-1.0, 4.0, 200)


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("DECAYLAB_OUT_DIR", str(tmp_path))
    return tmp_path
