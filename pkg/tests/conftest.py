import json
from pathlib import Path

import pytest

from litexplore.analysis import DEFAULT_ANALYZER, analyze
from litexplore.config import ServiceConfig
from litexplore.corpus import load_corpus
from litexplore.lexical import build_lexical_index
from litexplore.pipeline import Explorer, generation_id
from litexplore.vectors import EmbedderBinding, build_vector_index

FIXTURE_DIR = Path(__file__).parent / "fixtures" / "corpus"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def fixture_manifest() -> dict:
    return json.loads((FIXTURE_DIR / "manifest.json").read_text())


@pytest.fixture(scope="session")
def snapshot():
    return load_corpus(
        FIXTURE_DIR / "papers.jsonl",
        FIXTURE_DIR / "authors.jsonl",
        FIXTURE_DIR / "authorship.jsonl",
        FIXTURE_DIR / "citations.jsonl",
        FIXTURE_DIR / "embeddings.jsonl",
    )


@pytest.fixture(scope="session")
def lexical_index(snapshot):
    return build_lexical_index(snapshot, DEFAULT_ANALYZER)


@pytest.fixture(scope="session")
def vector_index(snapshot):
    return build_vector_index(snapshot)


@pytest.fixture(scope="session")
def projection_binding(fixture_manifest):
    return EmbedderBinding(
        mode="deterministic-projection",
        dimension=fixture_manifest["embedding_dim"],
        seed=fixture_manifest["embedding_seed"],
    )


@pytest.fixture(scope="session")
def analyzed_fields(snapshot):
    """paper_id -> analyzed title/abstract token lists, for oracles."""
    return {
        pid: {
            "title": analyze(p.title, DEFAULT_ANALYZER),
            "abstract": analyze(p.abstract, DEFAULT_ANALYZER),
        }
        for pid, p in snapshot.papers.items()
    }


@pytest.fixture
def make_explorer(snapshot, lexical_index, vector_index, tmp_path):
    """Explorer wired to the session snapshot with tmp exploration storage."""

    def factory(**config_overrides) -> Explorer:
        overrides = {
            "explorations_dir": str(tmp_path / "explorations"),
            "index_dir": str(tmp_path / "index"),
            "corpus_dir": str(tmp_path / "corpus"),
            "default_limit": 100,
        }
        overrides.update(config_overrides)
        config = ServiceConfig(**overrides)
        gen = generation_id(snapshot, config, DEFAULT_ANALYZER)
        return Explorer(snapshot, lexical_index, vector_index, config, gen)

    return factory
