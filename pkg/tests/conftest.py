"""Shared fixtures: small hand-built models whose paths are known exactly."""

import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from nsdde.model import CoefficientSet, make_example_B  # noqa: E402
from nsdde.noise import MarkMeasure  # noqa: E402


def _zero_neutral(y):
    return np.zeros_like(y)


@pytest.fixture
def example_b():
    return make_example_B()


@pytest.fixture
def frozen_model():
    """D = 0, b = 0, σ = 0: every path stays at ξ(0)."""
    return CoefficientSet(
        state_dim=1,
        noise_dim=1,
        neutral=_zero_neutral,
        drift=lambda x, y: np.zeros_like(x),
        diffusion=lambda x, y: np.zeros(x.shape + (1,)),
        kappa=0.5,
        bound=lambda r: 1.0 + r,
        name="frozen",
    )


@pytest.fixture
def additive_model():
    """D = 0, b = 0, σ = 1: Y(T) = ξ(0) + W(T)."""
    return CoefficientSet(
        state_dim=1,
        noise_dim=1,
        neutral=_zero_neutral,
        drift=lambda x, y: np.zeros_like(x),
        diffusion=lambda x, y: np.ones(x.shape + (1,)),
        kappa=0.5,
        bound=lambda r: 1.0 + r,
        name="additive",
    )


@pytest.fixture
def identity_jump_model():
    """D = 0, b = 0, h(x, y, u) = u; compensator by quadrature."""
    return CoefficientSet(
        state_dim=1,
        noise_dim=1,
        neutral=_zero_neutral,
        drift=lambda x, y: np.zeros_like(x),
        jump=lambda x, y, u: np.broadcast_to(u, x.shape).astype(float),
        kappa=0.5,
        bound=lambda r: 1.0 + r,
        name="identity-jump",
    )


@pytest.fixture
def gauss_measure():
    return MarkMeasure.parse(2.0, "gauss:1")


