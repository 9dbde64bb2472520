from __future__ import annotations

from typing import Callable

import numpy as np
import pytest

from model_io import read_model
from settings import MODELS_DIR
from ss import Realization


def load_bundled(name: str) -> Realization:
    return read_model(MODELS_DIR / f"{name}.json").realization


@pytest.fixture(scope="session")
def toy() -> Realization:
    return load_bundled("toy")


@pytest.fixture(scope="session")
def lowpass() -> Realization:
    return load_bundled("lowpass")


@pytest.fixture(scope="session")
def ttp() -> Realization:
    return load_bundled("ttp")


@pytest.fixture(scope="session")
def dumi1() -> Realization:
    return load_bundled("dumi1")


@pytest.fixture(scope="session")
def trafe1() -> Realization:
    return load_bundled("trafe1")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def make_stable() -> Callable[..., Realization]:
    """Random Hurwitz realization with poles at least `margin` left of the axis."""

    def build(rng: np.random.Generator, n: int, p: int, margin: float = 0.5,
              d_scale: float = 1.0) -> Realization:
        A = rng.standard_normal((n, n))
        shift = np.max(np.linalg.eigvals(A).real) + margin + rng.uniform(0.0, 1.0)
        A = A - shift * np.eye(n)
        B = rng.standard_normal((n, p))
        C = rng.standard_normal((p, n))
        D = d_scale * rng.standard_normal((p, p))
        return Realization(A, B, C, D)

    return build


@pytest.fixture
def log_grid() -> np.ndarray:
    return np.geomspace(1e-2, 1e2, 50)
