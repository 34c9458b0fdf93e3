import json
import sys
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
sys.path.insert(0, str(FIXTURES))

import corpus  # noqa: E402

from ade_miner.taxonomy import load_taxonomy  # noqa: E402


@pytest.fixture(scope="session")
def taxonomy():
    return load_taxonomy((FIXTURES / "taxonomy.txt").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def dataset():
    return corpus.build_model_dataset()


@pytest.fixture(scope="session")
def manifest():
    return json.loads((FIXTURES / "manifest.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES
