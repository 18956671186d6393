import sys
from pathlib import Path

import numpy as np
import pytest

TESTS_DIR = Path(__file__).resolve().parent
sys.path.insert(0, str(TESTS_DIR))

GOLDEN = TESTS_DIR / "golden"


def load_golden_points(name):
    return np.loadtxt(GOLDEN / f"{name}.txt", dtype=np.int64, ndmin=2)


@pytest.fixture
def rng():
    return np.random.default_rng(20241019)
