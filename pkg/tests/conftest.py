import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from synth import build_planted_corpus, build_random_corpus  # noqa: E402


@pytest.fixture(scope="session")
def planted():
    """Small planted corpus shared by unit tests (acceptance builds its own)."""
    return build_planted_corpus(n_languages=5, n_verses=400, n_concepts=4, n_colex=2, seed=33)


@pytest.fixture(scope="session")
def planted_indexes(planted):
    return planted.indexes()


@pytest.fixture(scope="session")
def random_corpus():
    return build_random_corpus(n_languages=3, n_verses=200, seed=7)
