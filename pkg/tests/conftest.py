import numpy as np
import pytest

from src.engine.model import EngineParams
from src.extract.generator import generate


@pytest.fixture
def reference_params():
    """Motor de referencia: T_c=1, T_h=3.5, T_l=2, sem coerencia."""
    return EngineParams()


@pytest.fixture
def coherent_params():
    return EngineParams(t_c=1.2, t_h=3.8, t_l=3.0, p_c=0.6, p_h=0.8)


@pytest.fixture(scope="session")
def small_dataset():
    """60 amostras fisicas com a particao 70:30."""
    return generate(60, seed=11, progress=False)


@pytest.fixture
def synthetic_points():
    """30 pontos 2D com 4 classes, para o KNN."""
    rng = np.random.default_rng(5)
    features = rng.uniform(0.0, 1.0, size=(30, 2))
    labels = rng.integers(0, 4, size=30)
    return features, labels


@pytest.fixture
def clustered_points():
    """Quatro nuvens separadas, uma por classe."""
    rng = np.random.default_rng(9)
    centers = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 3.0], [3.0, 3.0]])
    labels = np.repeat(np.arange(4), 25)
    features = centers[labels] + rng.normal(scale=0.3, size=(100, 2))
    return features, labels
