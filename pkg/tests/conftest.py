import sys
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

SYNTHETIC = REPO / "data" / "synthetic"


@pytest.fixture(scope="session")
def synthetic_dir() -> Path:
    assert SYNTHETIC.exists(), "run scripts/make_synthetic_corpus.py first"
    return SYNTHETIC
