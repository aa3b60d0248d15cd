"""End-to-end orchestration: index generations, exploration, artifacts.

An index generation is an immutable build of the lexical and vector
indexes from one corpus snapshot; its id hashes the corpus content and
every setting that changes index output, so rebuilding without changes is
a no-op and any change makes stale cached explorations unreachable.

One exploration = retrieve -> topic stage -> graph -> analytics, persisted
under explorations/<query_id>/ as plain JSON artifacts. Payload floats are
rounded to 9 decimals so identical runs serialize to identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import threading
from collections import OrderedDict
from pathlib import Path
from typing import Optional

from .analysis import AnalyzerConfig, DEFAULT_ANALYZER, analyze
from .config import ServiceConfig
from .corpus import CorpusSnapshot, get_paper, load_snapshot
from .errors import ConsistencyError, NotFoundError
from .graph import (
    NodeRef,
    build_graph,
    compute_analytics,
    export_graph,
    paper_impact,
)
from .lexical import (
    Bm25Params,
    FieldWeights,
    build_lexical_index,
    load_lexical_index,
    persist_lexical_index,
)
from .retrieval import FilterSpec, QueryRequest, RetrievalResult, retrieve
from .topics import TopicConfig, run_topic_stage
from .vectors import build_vector_index, load_vector_index, persist_vector_index

ARTIFACT_FLOAT_DIGITS = 9


def round_floats(obj, digits: int = ARTIFACT_FLOAT_DIGITS):
    """Canonicalize floats recursively for byte-stable artifacts."""
    if isinstance(obj, float):
        return round(obj, digits)
    if isinstance(obj, dict):
        return {k: round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    return obj


def dump_artifact(obj) -> str:
    return json.dumps(round_floats(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def generation_id(snapshot: CorpusSnapshot, config: ServiceConfig, analyzer: AnalyzerConfig) -> str:
    h = hashlib.sha256()
    parts = (
        snapshot.content_hash,
        analyzer.content_hash(),
        repr((config.k1, config.b)),
        str(snapshot.embedding_dim),
        config.embedder_binding().model_id,
    )
    h.update("|".join(parts).encode("utf-8"))
    return h.hexdigest()[:12]


def build_indexes(
    snapshot: CorpusSnapshot,
    config: ServiceConfig,
    analyzer: AnalyzerConfig = DEFAULT_ANALYZER,
    force: bool = False,
) -> tuple:
    """Build (or reuse) the index generation for this snapshot/config.

    Returns (generation, built) where built is False when an up-to-date
    generation already existed. New generations are written to their own
    directory and the CURRENT pointer is swapped last.
    """
    gen = generation_id(snapshot, config, analyzer)
    root = Path(config.index_dir)
    gen_dir = root / gen
    current = root / "CURRENT"
    if not force and (gen_dir / "lexical" / "manifest.json").exists():
        if not current.exists() or current.read_text().strip() != gen:
            current.write_text(gen + "\n")
        return gen, False
    lexical = build_lexical_index(snapshot, analyzer, Bm25Params(k1=config.k1, b=config.b))
    vector = build_vector_index(snapshot)
    persist_lexical_index(lexical, gen_dir / "lexical")
    persist_vector_index(vector, gen_dir / "vector")
    root.mkdir(parents=True, exist_ok=True)
    current.write_text(gen + "\n")
    return gen, True


def load_indexes(config: ServiceConfig):
    root = Path(config.index_dir)
    current = root / "CURRENT"
    if not current.exists():
        raise ConsistencyError(
            f"no index generation under {root}; run `litexplore index` first"
        )
    gen = current.read_text().strip()
    lexical = load_lexical_index(root / gen / "lexical")
    vector = load_vector_index(root / gen / "vector")
    return gen, lexical, vector


class Explorer:
    """Serves queries against one immutable snapshot + index generation.

    Concurrent explorations of distinct queries run freely; duplicate
    concurrent requests for the same query id coalesce onto one execution.
    """

    def __init__(
        self,
        snapshot: CorpusSnapshot,
        lexical,
        vector,
        config: ServiceConfig,
        generation: str,
        analyzer: AnalyzerConfig = DEFAULT_ANALYZER,
    ):
        if lexical.corpus_hash != snapshot.content_hash:
            raise ConsistencyError("lexical index does not match the corpus snapshot")
        if vector is not None and vector.corpus_hash != snapshot.content_hash:
            raise ConsistencyError("vector index does not match the corpus snapshot")
        self.snapshot = snapshot
        self.lexical = lexical
        self.vector = vector
        self.config = config
        self.generation = generation
        self.analyzer = analyzer
        self.binding = config.embedder_binding()
        self.field_weights = FieldWeights(
            title_weight=config.title_weight,
            abstract_weight=config.abstract_weight,
            phrase_bonus_factor=config.phrase_bonus_factor,
        )
        self._cache: OrderedDict = OrderedDict()
        self._cache_lock = threading.Lock()
        self._query_locks: dict = {}

    @classmethod
    def from_config(cls, config: ServiceConfig) -> "Explorer":
        snapshot = load_snapshot(config.corpus_dir)
        gen, lexical, vector = load_indexes(config)
        if lexical.corpus_hash != snapshot.content_hash:
            raise ConsistencyError(
                "index generation is stale for this corpus; re-run `litexplore index`"
            )
        return cls(snapshot, lexical, vector, config, gen)

    # -- request plumbing ------------------------------------------------

    def make_request(
        self,
        query: str,
        filters: Optional[FilterSpec] = None,
        limit: Optional[int] = None,
        topic_mode: Optional[str] = None,
    ) -> QueryRequest:
        return QueryRequest(
            text=query,
            filters=filters or FilterSpec(),
            limit=limit or self.config.default_limit,
            rrf_k=self.config.rrf_k,
            fuzzy=self.config.fuzzy,
        )

    def query_id(self, request: QueryRequest, topic_mode: str) -> str:
        from .retrieval import preprocess_query

        key = {
            "query": preprocess_query(request.text),
            "filters": request.filters.canonical(),
            "limit": request.limit,
            "rrf_k": request.rrf_k,
            "depth": request.depth,
            "topic_mode": topic_mode,
            "generation": self.generation,
        }
        digest = hashlib.sha256(json.dumps(key, sort_keys=True).encode("utf-8"))
        return digest.hexdigest()[:16]

    def _retrieve(self, request: QueryRequest) -> RetrievalResult:
        return retrieve(
            self.snapshot,
            self.lexical,
            self.vector,
            self.binding,
            request,
            analyzer=self.analyzer,
            field_weights=self.field_weights,
        )

    # -- public operations -------------------------------------------------

    def search(self, request: QueryRequest) -> dict:
        """Fused ranking only; nothing persisted."""
        outcome = self._retrieve(request)
        return {
            "query": request.text,
            "normalized_query": outcome.normalized_query,
            "semantic_degraded": outcome.semantic_degraded,
            "result_count": len(outcome.ranked),
            "results": self._result_rows(outcome),
        }

    def explore(self, request: QueryRequest, topic_mode: Optional[str] = None) -> dict:
        """Full pipeline with caching and persisted artifacts."""
        mode = topic_mode or self.config.topic_mode
        qid = self.query_id(request, mode)
        cached = self._cache_get(qid)
        if cached is not None:
            return cached
        with self._lock_for(qid):
            cached = self._cache_get(qid)
            if cached is not None:
                return cached
            payload = self._load_persisted(qid)
            if payload is None:
                payload = self._run_exploration(request, mode, qid)
            self._cache_put(qid, payload)
            return payload

    def _run_exploration(self, request: QueryRequest, mode: str, qid: str) -> dict:
        outcome = self._retrieve(request)
        ranked = outcome.ranked
        pids = ranked.paper_ids()

        if pids:
            docs = []
            embeddings = []
            for pid in pids:
                paper = self.snapshot.papers[pid]
                docs.append(analyze(paper.title + " " + paper.abstract, self.analyzer))
                embeddings.append(self.snapshot.embeddings.get(pid))
            stage = run_topic_stage(
                pids,
                docs,
                embeddings,
                TopicConfig(mode=mode, seed=self.config.topic_seed),
            )
            summaries, assignments = stage.summaries, stage.assignments
            coherence, path = stage.coherence, stage.path
        else:
            summaries, assignments, coherence, path = (), (), None, "none"

        provenance = {
            "query_id": qid,
            "snapshot_hash": self.snapshot.content_hash,
            "generation": self.generation,
        }
        graph = build_graph(ranked, assignments, summaries, self.snapshot, provenance)
        analytics = compute_analytics(graph)

        payload = {
            "query_id": qid,
            "query": request.text,
            "normalized_query": outcome.normalized_query,
            "filters": request.filters.canonical(),
            "limit": request.limit,
            "topic_mode": mode,
            "topic_path": path,
            "generation": self.generation,
            "semantic_degraded": outcome.semantic_degraded,
            "degradation_reason": outcome.degradation_reason,
            "result_count": len(ranked),
            "results": self._result_rows(outcome),
            "topics": [
                {
                    "topic_id": s.topic_id,
                    "keywords": [[t, w] for t, w in s.keywords],
                    "document_count": s.document_count,
                }
                for s in summaries
            ],
            "assignments": [
                {"paper_id": a.paper_id, "topic_id": a.topic_id, "probability": a.probability}
                for a in assignments
            ],
            "coherence": (
                {
                    "k": coherence.k,
                    "mean_npmi": coherence.mean_npmi,
                    "per_topic": {str(t): v for t, v in coherence.per_topic.items()},
                }
                if coherence
                else None
            ),
            "graph": {
                "node_count": graph.node_count,
                "edge_count": graph.edge_count,
                "ref": f"explorations/{qid}/graph.json",
            },
            "analytics": analytics.to_dict(),
        }
        # round before returning so cached, returned and persisted payloads agree
        payload = round_floats(payload)
        self._persist(qid, payload, graph, analytics)
        return payload

    def _result_rows(self, outcome: RetrievalResult) -> list:
        rows = []
        for e in outcome.ranked.entries:
            paper = self.snapshot.papers[e.paper_id]
            rows.append(
                {
                    "paper_id": e.paper_id,
                    "score": e.score,
                    "rank": e.rank,
                    "title": paper.title,
                    "publication_year": paper.publication_year,
                    "subject": paper.subject,
                }
            )
        return rows

    # -- artifacts and caching ----------------------------------------------

    def exploration_dir(self, qid: str) -> Path:
        return Path(self.config.explorations_dir) / qid

    def _persist(self, qid: str, payload: dict, graph, analytics):
        out = self.exploration_dir(qid)
        out.mkdir(parents=True, exist_ok=True)
        (out / "result.json").write_text(dump_artifact(payload), encoding="utf-8")
        (out / "topics.json").write_text(
            dump_artifact(
                {
                    "summaries": payload["topics"],
                    "assignments": payload["assignments"],
                    "coherence": payload["coherence"],
                }
            ),
            encoding="utf-8",
        )
        (out / "graph.json").write_text(dump_artifact(export_graph(graph)), encoding="utf-8")
        (out / "analytics.json").write_text(
            dump_artifact(analytics.to_dict()), encoding="utf-8"
        )

    def _load_persisted(self, qid: str) -> Optional[dict]:
        path = self.exploration_dir(qid) / "result.json"
        if path.exists():
            return json.loads(path.read_text(encoding="utf-8"))
        return None

    def load_artifact(self, qid: str, name: str) -> dict:
        path = self.exploration_dir(qid) / name
        if not path.exists():
            raise NotFoundError(f"no persisted {name} for query id {qid!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    def paper_detail(self, paper_id: str, qid: Optional[str] = None) -> dict:
        paper = get_paper(self.snapshot, paper_id)
        detail = {
            "paper_id": paper.paper_id,
            "title": paper.title,
            "abstract": paper.abstract,
            "publication_year": paper.publication_year,
            "arxiv_id": paper.arxiv_id,
            "doi": paper.doi,
            "subject": paper.subject,
            "authors": [
                {"author_id": aid, "name": self.snapshot.authors[aid].name}
                for aid in self.snapshot.paper_authors[paper_id]
            ],
        }
        if qid is not None:
            doc = self.load_artifact(qid, "graph.json")
            from .graph import import_graph

            graph = import_graph(doc)
            ref = NodeRef("Paper", paper_id)
            if ref in graph.nodes:
                detail["graph_local_impact"] = paper_impact(graph, ref)
        return detail

    def _cache_get(self, qid: str) -> Optional[dict]:
        with self._cache_lock:
            payload = self._cache.get(qid)
            if payload is not None:
                self._cache.move_to_end(qid)
            return payload

    def _cache_put(self, qid: str, payload: dict):
        with self._cache_lock:
            self._cache[qid] = payload
            self._cache.move_to_end(qid)
            while len(self._cache) > self.config.cache_size:
                self._cache.popitem(last=False)

    def _lock_for(self, qid: str) -> threading.Lock:
        with self._cache_lock:
            lock = self._query_locks.get(qid)
            if lock is None:
                lock = threading.Lock()
                self._query_locks[qid] = lock
            return lock

    def health(self) -> dict:
        return {"status": "ok", "papers": self.snapshot.stats.paper_count}
