import json
from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent / "data"
CORPUS_DIR = DATA_DIR / "corpus"
GOLDEN_DIR = DATA_DIR / "golden"
FIXTURE_DIR = DATA_DIR / "fixtures"


def corpus_paths(kind: str) -> list[Path]:
    return sorted((CORPUS_DIR / kind).glob("*.st"))


def pytest_generate_tests(metafunc):
    # Parametrize any test taking `valid_path` / `broken_path` over the corpus.
    if "valid_path" in metafunc.fixturenames:
        paths = corpus_paths("valid")
        metafunc.parametrize("valid_path", paths, ids=[p.stem for p in paths])
    if "broken_path" in metafunc.fixturenames:
        paths = corpus_paths("broken")
        metafunc.parametrize("broken_path", paths, ids=[p.stem for p in paths])


@pytest.fixture(scope="session")
def mutation_log() -> dict:
    return json.loads((CORPUS_DIR / "mutations.json").read_text())
