"""Dense-vector store with exact cosine k-nearest-neighbor search.

Vectors are unit-normalized at build time so similarity is a single dot
product. Queries are embedded through a pluggable binding: either an
external HTTP service (same wire contract as the corpus embedder) or a
deterministic seeded-hash projection that keeps the whole pipeline and its
tests runnable with no network access.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import requests

from .analysis import AnalyzerConfig, DEFAULT_ANALYZER, analyze
from .corpus import CorpusSnapshot
from .errors import (
    ConsistencyError,
    DegenerateVectorError,
    DimensionMismatchError,
    EmbedderUnavailableError,
)
from .ranking import RankedList

ZERO_NORM_EPS = 1e-12


def cosine_similarity(a, b) -> float:
    """(a . b) / (|a| |b|), clamped to [-1, 1] against rounding."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na <= ZERO_NORM_EPS or nb <= ZERO_NORM_EPS:
        raise DegenerateVectorError("cosine similarity of a zero-norm vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


class VectorIndex:
    """Unit-normalized vectors for the subset of papers with embeddings."""

    def __init__(self, matrix, ordinals, paper_ids, dimension, excluded, model_id, corpus_hash):
        self.matrix = matrix  # (rows x d), unit rows
        self.ordinals = ordinals  # row -> corpus doc ordinal
        self.paper_ids = paper_ids  # row -> paper_id
        self.dimension = dimension
        self.excluded = excluded  # paper ids dropped for zero norm
        self.model_id = model_id
        self.corpus_hash = corpus_hash

    def __len__(self) -> int:
        return self.matrix.shape[0]


def build_vector_index(snapshot: CorpusSnapshot) -> VectorIndex:
    """Normalize all embeddings; zero-norm vectors are excluded and reported."""
    ordinal_of = {pid: i for i, pid in enumerate(snapshot.paper_ids)}
    rows, ordinals, pids, excluded = [], [], [], []
    for pid, vec in snapshot.embeddings.items():
        norm = float(np.linalg.norm(vec))
        if norm <= ZERO_NORM_EPS:
            excluded.append(pid)
            continue
        rows.append(vec / norm)
        ordinals.append(ordinal_of[pid])
        pids.append(pid)
    dim = snapshot.embedding_dim
    matrix = np.stack(rows) if rows else np.zeros((0, dim), dtype=np.float64)
    return VectorIndex(
        matrix=matrix,
        ordinals=np.asarray(ordinals, dtype=np.int64),
        paper_ids=pids,
        dimension=dim,
        excluded=excluded,
        model_id=snapshot.embedding_model,
        corpus_hash=snapshot.content_hash,
    )


def knn_search(index: VectorIndex, query_vec, k: int, filter_set=None) -> RankedList:
    """Exact exhaustive top-k by cosine similarity, ties by paper_id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    q = np.asarray(query_vec, dtype=np.float64)
    if q.shape != (index.dimension,):
        raise DimensionMismatchError(f"query dim {q.shape} != index dim {index.dimension}")
    norm = float(np.linalg.norm(q))
    if norm <= ZERO_NORM_EPS:
        raise DegenerateVectorError("degenerate query vector")
    if len(index) == 0:
        return RankedList.empty("semantic")
    scores = index.matrix @ (q / norm)
    scored = []
    for row, score in enumerate(scores):
        if filter_set is not None and int(index.ordinals[row]) not in filter_set:
            continue
        scored.append((float(np.clip(score, -1.0, 1.0)), index.paper_ids[row]))
    scored.sort(key=lambda t: (-t[0], t[1]))
    return RankedList.from_scored(scored[:k], source="semantic")


# --- query embedding ---------------------------------------------------------


@dataclass(frozen=True)
class EmbedderBinding:
    """How query text becomes a vector: a service, or a seeded projection."""

    mode: str  # "external-service" | "deterministic-projection"
    dimension: int
    endpoint: Optional[str] = None
    seed: Optional[int] = None
    model: Optional[str] = None  # expected model id for external mode
    timeout: float = 5.0

    def __post_init__(self):
        if self.mode == "external-service":
            if not self.endpoint:
                raise ValueError("external-service mode requires an endpoint")
        elif self.mode == "deterministic-projection":
            if self.seed is None:
                raise ValueError("deterministic-projection mode requires a seed")
        else:
            raise ValueError(f"unknown embedder mode {self.mode!r}")

    @property
    def model_id(self) -> str:
        if self.mode == "deterministic-projection":
            return f"projection-d{self.dimension}-seed{self.seed}"
        return self.model or "unknown"


def _token_direction(seed: int, token: str, dimension: int) -> np.ndarray:
    digest = hashlib.sha256(f"{seed}:{token}".encode("utf-8")).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
    return rng.standard_normal(dimension)


def project_tokens(tokens, seed: int, dimension: int) -> np.ndarray:
    """Sum of per-token pseudo-random directions, unit-normalized."""
    if not tokens:
        raise DegenerateVectorError("no tokens to project")
    vec = np.zeros(dimension, dtype=np.float64)
    for tok in tokens:
        vec += _token_direction(seed, tok, dimension)
    norm = float(np.linalg.norm(vec))
    if norm <= ZERO_NORM_EPS:
        raise DegenerateVectorError("token projection collapsed to zero")
    return vec / norm


def embed_query(
    binding: EmbedderBinding, text: str, analyzer: AnalyzerConfig = DEFAULT_ANALYZER
) -> np.ndarray:
    """Embed one query string through the bound embedder."""
    if binding.mode == "deterministic-projection":
        return project_tokens(analyze(text, analyzer), binding.seed, binding.dimension)
    try:
        resp = requests.post(
            binding.endpoint, json={"texts": [text]}, timeout=binding.timeout
        )
        resp.raise_for_status()
        payload = resp.json()
        vectors = payload["vectors"]
        model = payload.get("model", "unknown")
    except DegenerateVectorError:
        raise
    except Exception as exc:
        raise EmbedderUnavailableError(f"embedding service failed: {exc}") from exc
    if binding.model and model != binding.model:
        raise ConsistencyError(
            f"embedding service model {model!r} differs from expected {binding.model!r}"
        )
    vec = np.asarray(vectors[0], dtype=np.float64)
    if vec.shape != (binding.dimension,):
        raise DimensionMismatchError(
            f"service returned dim {vec.shape[0]}, expected {binding.dimension}"
        )
    return vec


# --- persistence ------------------------------------------------------------


def persist_vector_index(index: VectorIndex, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    np.save(out / "vectors.npy", index.matrix)
    manifest = {
        "dimension": index.dimension,
        "ordinals": [int(o) for o in index.ordinals],
        "paper_ids": index.paper_ids,
        "excluded": index.excluded,
        "model_id": index.model_id,
        "corpus_hash": index.corpus_hash,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return out


def load_vector_index(in_dir) -> VectorIndex:
    d = Path(in_dir)
    manifest = json.loads((d / "manifest.json").read_text(encoding="utf-8"))
    return VectorIndex(
        matrix=np.load(d / "vectors.npy"),
        ordinals=np.asarray(manifest["ordinals"], dtype=np.int64),
        paper_ids=manifest["paper_ids"],
        dimension=manifest["dimension"],
        excluded=manifest["excluded"],
        model_id=manifest["model_id"],
        corpus_hash=manifest["corpus_hash"],
    )
