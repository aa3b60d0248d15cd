"""Hybrid retrieval: query preprocessing, structured filters, rank fusion.

The lexical and semantic paths run concurrently over the same filtered
document set and their rankings are combined with reciprocal rank fusion:
fused(D) = sum over input lists of 1/(k + rank(D)), a document absent from
a list contributing nothing. When the embedder is unavailable the result
degrades to lexical-only and is flagged, never failed.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .analysis import AnalyzerConfig, DEFAULT_ANALYZER, analyze
from .corpus import CorpusSnapshot
from .errors import ConsistencyError, DegenerateVectorError, EmbedderUnavailableError
from .lexical import FieldWeights, InvertedIndex, lexical_search
from .ranking import RankedList
from .vectors import EmbedderBinding, VectorIndex, embed_query, knn_search

_PUNCT_RE = re.compile(r"[^\w\s]|_", re.UNICODE)


def preprocess_query(text: str) -> str:
    """Lowercase, punctuation to spaces, whitespace collapsed."""
    return " ".join(_PUNCT_RE.sub(" ", text.lower()).split())


@dataclass(frozen=True)
class FilterSpec:
    year_range: Optional[tuple] = None  # (min, max) inclusive
    authors: Optional[frozenset] = None  # author name strings
    institutions: Optional[frozenset] = None  # institution ids
    countries: Optional[frozenset] = None  # ISO alpha-2 codes

    def __post_init__(self):
        if self.year_range is not None:
            lo, hi = self.year_range
            if lo > hi:
                raise ValueError("year_range min must be <= max")

    def is_empty(self) -> bool:
        return (
            self.year_range is None
            and self.authors is None
            and self.institutions is None
            and self.countries is None
        )

    def canonical(self) -> dict:
        """Stable dict for hashing and serialization."""
        return {
            "year_range": list(self.year_range) if self.year_range else None,
            "authors": sorted(self.authors) if self.authors is not None else None,
            "institutions": sorted(self.institutions) if self.institutions is not None else None,
            "countries": sorted(self.countries) if self.countries is not None else None,
        }


@dataclass(frozen=True)
class QueryRequest:
    text: str
    filters: FilterSpec = field(default_factory=FilterSpec)
    limit: int = 5000
    rrf_k: int = 60
    per_path_depth: Optional[int] = None  # defaults to 2 * limit
    fuzzy: bool = True

    def __post_init__(self):
        if self.limit < 1:
            raise ValueError("limit must be >= 1")
        if self.rrf_k < 1:
            raise ValueError("rrf_k must be >= 1")
        if self.per_path_depth is not None and self.per_path_depth < self.limit:
            raise ValueError("per_path_depth must be >= limit")

    @property
    def depth(self) -> int:
        return self.per_path_depth if self.per_path_depth is not None else 2 * self.limit


def resolve_filter_set(
    snapshot: CorpusSnapshot,
    filters: FilterSpec,
    analyzer: AnalyzerConfig = DEFAULT_ANALYZER,
) -> Optional[set]:
    """Doc-ordinal set satisfying all active filters; None means all docs.

    Filter kinds intersect; values within one kind are alternatives.
    Author names match on analyzed-token equality.
    """
    if filters.is_empty():
        return None
    wanted_names = None
    if filters.authors is not None:
        wanted_names = {tuple(analyze(name, analyzer)) for name in filters.authors}
    out = set()
    for ordinal, pid in enumerate(snapshot.paper_ids):
        paper = snapshot.papers[pid]
        if filters.year_range is not None:
            lo, hi = filters.year_range
            if not lo <= paper.publication_year <= hi:
                continue
        if filters.countries is not None:
            if not filters.countries.intersection(snapshot.paper_countries[pid]):
                continue
        if filters.institutions is not None:
            if not filters.institutions.intersection(snapshot.paper_institutions[pid]):
                continue
        if wanted_names is not None:
            names = {
                tuple(analyze(snapshot.authors[aid].name, analyzer))
                for aid in snapshot.paper_authors[pid]
            }
            if not names.intersection(wanted_names):
                continue
        out.add(ordinal)
    return out


def rrf_fuse(lists, k: int = 60) -> RankedList:
    """Reciprocal rank fusion over any number of ranked lists.

    Ties break by better best-rank across the inputs, then paper_id.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    scores: dict[str, float] = {}
    best_rank: dict[str, int] = {}
    for ranked in lists:
        for entry in ranked.entries:
            scores[entry.paper_id] = scores.get(entry.paper_id, 0.0) + 1.0 / (k + entry.rank)
            prev = best_rank.get(entry.paper_id)
            if prev is None or entry.rank < prev:
                best_rank[entry.paper_id] = entry.rank
    order = sorted(scores, key=lambda pid: (-scores[pid], best_rank[pid], pid))
    return RankedList.from_scored([(scores[pid], pid) for pid in order], source="fused")


@dataclass(frozen=True)
class RetrievalResult:
    ranked: RankedList  # fused, truncated to the request limit
    normalized_query: str
    query_tokens: tuple
    semantic_degraded: bool = False
    degradation_reason: Optional[str] = None
    lexical: Optional[RankedList] = None
    semantic: Optional[RankedList] = None


def retrieve(
    snapshot: CorpusSnapshot,
    lexical_index: InvertedIndex,
    vector_index: Optional[VectorIndex],
    binding: Optional[EmbedderBinding],
    request: QueryRequest,
    analyzer: AnalyzerConfig = DEFAULT_ANALYZER,
    field_weights: FieldWeights = FieldWeights(),
) -> RetrievalResult:
    """Run both retrieval paths over the filtered corpus and fuse them."""
    if lexical_index.corpus_hash != snapshot.content_hash:
        raise ConsistencyError("lexical index was built from a different corpus")
    if vector_index is not None and vector_index.corpus_hash != snapshot.content_hash:
        raise ConsistencyError("vector index was built from a different corpus")

    normalized = preprocess_query(request.text)
    tokens = analyze(normalized, analyzer)
    filter_set = resolve_filter_set(snapshot, request.filters, analyzer)
    depth = request.depth

    def lexical_path() -> RankedList:
        return lexical_search(
            lexical_index,
            tokens,
            field_weights=field_weights,
            top_k=depth,
            filter_set=filter_set,
            fuzzy=request.fuzzy,
        )

    def semantic_path() -> RankedList:
        qvec = embed_query(binding, normalized, analyzer)
        return knn_search(vector_index, qvec, k=depth, filter_set=filter_set)

    degraded = False
    reason = None
    semantic: Optional[RankedList] = None
    if not tokens:
        lexical = RankedList.empty("lexical")
    elif vector_index is None or binding is None:
        lexical = lexical_path()
        degraded, reason = True, "no vector index or embedder configured"
    else:
        with ThreadPoolExecutor(max_workers=2) as pool:
            lex_future = pool.submit(lexical_path)
            sem_future = pool.submit(semantic_path)
            lexical = lex_future.result()
            try:
                semantic = sem_future.result()
            except (EmbedderUnavailableError, DegenerateVectorError) as exc:
                degraded, reason = True, str(exc)

    lists = [lexical] if semantic is None else [lexical, semantic]
    fused = rrf_fuse(lists, k=request.rrf_k).truncated(request.limit)
    return RetrievalResult(
        ranked=fused,
        normalized_query=normalized,
        query_tokens=tuple(tokens),
        semantic_degraded=degraded,
        degradation_reason=reason,
        lexical=lexical,
        semantic=semantic,
    )
