import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import make_design  # noqa: E402


@pytest.fixture
def fixed4():
    """Four-point d = 1 design used throughout: t = {0.1, 0.9 | 0.4, 1.2}."""
    return make_design([0.1, 0.9], [0.4, 1.2])


@pytest.fixture
def sym4():
    """Identical symmetric samples; every penalized maximizer is (0, 0)."""
    return make_design([-1.0, 1.0], [-1.0, 1.0])


@pytest.fixture
def theta_half():
    from pendrm import Theta

    return Theta(0.5, np.array([1.0]))
