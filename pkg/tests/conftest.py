from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fppslab.weights import WeightModel


@pytest.fixture
def exp_model() -> WeightModel:
    return WeightModel(family="exp", a=1.0, seed=424242)


@pytest.fixture
def uniform_model() -> WeightModel:
    return WeightModel(family="uniform", a=1.0, seed=424242)
