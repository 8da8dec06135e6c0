"""Shared fixtures."""
import os

# keep test runs out of logs/app.log
os.environ.setdefault("EQUINET_LOG_TO_FILE", "false")

import numpy as np
import pytest

from app.core.config import settings
from app.schemas.grid import AnalyticField, PolyTerm
from app.services.grid.signal_ops import make_signal


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def random_signal(rng):
    """Factory for random real or complex signals."""

    def build(spacing: float = 0.5, half_width: int = 4, channels: int = 1, complex_values: bool = False):
        side = 2 * half_width + 1
        values = rng.uniform(-1.0, 1.0, size=(side, side, channels))
        if complex_values:
            values = values + 1j * rng.uniform(-1.0, 1.0, size=(side, side, channels))
        return make_signal(values, spacing, "complex" if complex_values else "real")

    return build


@pytest.fixture
def gaussian_field() -> AnalyticField:
    """Real gaussian_poly field off the origin."""
    return AnalyticField(
        kind="gaussian_poly",
        terms=[PolyTerm(j=0, k=0, re=1.0), PolyTerm(j=1, k=1, re=0.5),
               PolyTerm(j=2, k=0, re=0.25, im=0.1), PolyTerm(j=0, k=2, re=0.25, im=-0.1)],
        center=(0.3, -0.2),
        width=1.0,
    )


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    """Fresh output directory with EQUINET_OUT unset."""
    monkeypatch.setattr(settings, "OUT_DIR", None)
    return tmp_path / "out"
