"""Topic modeling over a retrieved document set.

Two paths with structurally identical outputs:

* TF-IDF + non-negative matrix factorization, with the topic count chosen
  by a coherence sweep (mean pairwise NPMI over each topic's top words).
* Embedding clustering: deterministic principal-axis reduction followed by
  density-reachability clustering, labeled with class-based TF-IDF. These
  two stages are documented stand-ins for heavier manifold/cluster methods
  and keep the same interfaces, so faithful replacements can drop in.

The NMF uses multiplicative updates on the Frobenius objective, which keep
the factors non-negative and never increase the objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .analysis import Vocabulary, build_vocabulary
from .errors import (
    EmptyMatrixError,
    EmptyRetrievalError,
    InvalidDimensionError,
    InvalidRankError,
    InvalidTopicError,
)

OUTLIER_TOPIC = -1
MIN_DOC_TOKENS = 20  # shorter documents are excluded from topic modeling
FALLBACK_MIN_DOCS = 10  # below this, everything lands in one topic
DEFAULT_K_RANGE = (5, 10, 15, 20, 25)
TOP_WORDS = 10
EPS = 1e-12


@dataclass(frozen=True)
class TfidfMatrix:
    values: np.ndarray  # m docs x n terms, non-negative
    doc_ids: tuple
    terms: tuple


@dataclass(frozen=True)
class NmfModel:
    W: np.ndarray  # m x k document-topic weights
    H: np.ndarray  # k x n topic-term weights
    k: int
    final_objective: float
    iterations_run: int
    objective_history: tuple


@dataclass(frozen=True)
class TopicSummary:
    topic_id: int
    keywords: tuple  # ((term, weight), ...) sorted by weight desc
    document_count: int


@dataclass(frozen=True)
class TopicAssignment:
    paper_id: str
    topic_id: int
    probability: float


@dataclass(frozen=True)
class CoherenceReport:
    # metric is mean pairwise NPMI, deliberately not labeled c_v
    k: int
    per_topic: dict  # topic_id -> mean pairwise NPMI
    mean_npmi: float


@dataclass(frozen=True)
class ClusterModel:
    reduced: np.ndarray  # m x p
    labels: np.ndarray  # m, cluster id or -1
    cluster_count: int


@dataclass(frozen=True)
class TopicStageResult:
    summaries: tuple
    assignments: tuple
    coherence: CoherenceReport
    path: str  # "nmf" | "cluster" | "fallback"


def build_tfidf(docs: Sequence[list], vocabulary: Vocabulary) -> TfidfMatrix:
    """tf(t,d) * ln(N / df(t)); a term present in every doc weighs zero."""
    if len(vocabulary) == 0:
        raise EmptyMatrixError("vocabulary is empty")
    n_docs = len(docs)
    idf = np.zeros(len(vocabulary))
    for term, idx in vocabulary.index.items():
        idf[idx] = math.log(n_docs / vocabulary.doc_freq[term])
    values = np.zeros((n_docs, len(vocabulary)))
    for row, tokens in enumerate(docs):
        for tok in tokens:
            idx = vocabulary.index.get(tok)
            if idx is not None:
                values[row, idx] += 1.0
    values *= idf[None, :]
    return TfidfMatrix(
        values=values,
        doc_ids=tuple(range(n_docs)),
        terms=tuple(vocabulary.terms),
    )


def nmf_factorize(
    X: np.ndarray,
    k: int,
    seed: int,
    max_iter: int = 400,
    tol: float = 1e-5,
) -> NmfModel:
    """Multiplicative-update NMF on ||X - WH||_F^2.

    Deterministic given the seed; stops on max_iter or when the relative
    objective improvement falls below tol.
    """
    X = np.asarray(X, dtype=np.float64)
    m, n = X.shape
    if not 1 <= k <= min(m, n):
        raise InvalidRankError(f"k={k} out of range for a {m}x{n} matrix")
    rng = np.random.default_rng(seed)
    scale = math.sqrt(X.mean() / k) if X.size else 0.0
    # uniform in (0, 1] so no factor entry starts exactly at zero
    W = (1.0 - rng.random((m, k))) * scale
    H = (1.0 - rng.random((k, n))) * scale

    def objective() -> float:
        diff = X - W @ H
        return float(np.sum(diff * diff))

    history = [objective()]
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        H *= (W.T @ X) / (W.T @ W @ H + EPS)
        W *= (X @ H.T) / (W @ H @ H.T + EPS)
        history.append(objective())
        prev, cur = history[-2], history[-1]
        if prev > 0 and (prev - cur) / prev < tol:
            break
    return NmfModel(
        W=W,
        H=H,
        k=k,
        final_objective=history[-1],
        iterations_run=iterations,
        objective_history=tuple(history),
    )


def compute_npmi(
    topic_words: Sequence[str],
    doc_token_sets: Sequence[set],
    epsilon: float = EPS,
):
    """Pairwise normalized PMI of topic words over document co-occurrence.

    Probabilities are document-frequency fractions; a pair that never
    co-occurs scores exactly -1, perfect association scores 1.
    Returns ({(w_i, w_j): npmi}, mean).
    """
    words = list(topic_words)
    if len(words) < 2:
        raise InvalidTopicError("need at least two topic words")
    n_docs = len(doc_token_sets)
    if n_docs == 0:
        raise EmptyRetrievalError("no documents to estimate probabilities from")
    presence = {w: np.array([w in s for s in doc_token_sets], dtype=bool) for w in set(words)}
    pairs = {}
    total = 0.0
    count = 0
    for i in range(len(words)):
        for j in range(i + 1, len(words)):
            wi, wj = words[i], words[j]
            co = int(np.sum(presence[wi] & presence[wj]))
            if co == 0:
                value = -1.0
            else:
                p_i = int(presence[wi].sum()) / n_docs
                p_j = int(presence[wj].sum()) / n_docs
                p_ij = co / n_docs
                num = math.log((p_ij + epsilon) / (p_i * p_j + epsilon))
                den = -math.log(p_ij + epsilon)
                value = num / den if den > 0 else 1.0
            value = max(-1.0, min(1.0, value))
            pairs[(wi, wj)] = value
            total += value
            count += 1
    return pairs, (total / count if count else 0.0)


def top_topic_terms(H: np.ndarray, terms: Sequence[str], top_n: int = TOP_WORDS):
    """Per-topic (term, weight) lists, weight desc then term asc.

    Weights below 1e-6 of the row maximum are factorization noise, not
    keywords, and are dropped.
    """
    out = []
    for row in H:
        floor = float(row.max()) * 1e-6
        order = sorted(range(len(terms)), key=lambda i: (-row[i], terms[i]))
        out.append(
            [(terms[i], float(row[i])) for i in order[:top_n] if row[i] > floor]
        )
    return out


def select_k(
    X: TfidfMatrix,
    doc_token_sets: Sequence[set],
    k_range: Sequence[int] = DEFAULT_K_RANGE,
    seed: int = 0,
    max_iter: int = 400,
):
    """Coherence sweep over candidate topic counts; argmax, ties to smaller k.

    Candidates exceeding min(m, n) are skipped; if none fit, min(m, n) is
    used directly.
    """
    m, n = X.values.shape
    candidates = sorted({k for k in k_range if 1 <= k <= min(m, n)})
    if not candidates:
        candidates = [min(m, n)]
    best_k = None
    best_mean = -math.inf
    reports = {}
    for k in candidates:
        model = nmf_factorize(X.values, k, seed=seed, max_iter=max_iter)
        per_topic = {}
        for topic_id, kw in enumerate(top_topic_terms(model.H, X.terms)):
            words = [t for t, _ in kw]
            if len(words) >= 2:
                _, mean = compute_npmi(words, doc_token_sets)
            else:
                mean = 0.0
            per_topic[topic_id] = mean
        mean_all = sum(per_topic.values()) / len(per_topic) if per_topic else 0.0
        reports[k] = CoherenceReport(k=k, per_topic=per_topic, mean_npmi=mean_all)
        if mean_all > best_mean:  # strict: ties keep the smaller k
            best_mean = mean_all
            best_k = k
    return best_k, reports


def assign_topics_nmf(model: NmfModel, paper_ids: Sequence[str]):
    """Normalize W rows into per-document topic distributions.

    Returns (assignments, distributions); an all-zero row gets a uniform
    distribution and the outlier topic.
    """
    W = model.W
    assignments = []
    distributions = np.zeros_like(W)
    for row, pid in enumerate(paper_ids):
        total = float(W[row].sum())
        if total <= 0:
            distributions[row] = 1.0 / model.k
            assignments.append(TopicAssignment(pid, OUTLIER_TOPIC, 1.0 / model.k))
            continue
        dist = W[row] / total
        distributions[row] = dist
        topic = int(np.argmax(dist))  # argmax ties resolve to the lowest index
        assignments.append(TopicAssignment(pid, topic, float(dist[topic])))
    return assignments, distributions


def reduce_dimensions(embeddings: np.ndarray, p: int = 5, seed: int = 0) -> np.ndarray:
    """Project onto the top-p principal axes of the centered covariance.

    Axes come from deterministic power iteration with deflation, so column
    variances are non-increasing and the result is seed-stable.
    """
    E = np.asarray(embeddings, dtype=np.float64)
    m, d = E.shape
    if p > m or p > d or p < 1:
        raise InvalidDimensionError(f"p={p} invalid for {m}x{d} data")
    centered = E - E.mean(axis=0, keepdims=True)
    cov = centered.T @ centered / max(m - 1, 1)
    rng = np.random.default_rng(seed)
    axes = np.zeros((p, d))
    for j in range(p):
        v = rng.standard_normal(d)
        for prev in axes[:j]:
            v -= (v @ prev) * prev
        v /= np.linalg.norm(v)
        for _ in range(1000):
            w = cov @ v
            for prev in axes[:j]:  # keep the iterate orthogonal to found axes
                w -= (w @ prev) * prev
            norm = np.linalg.norm(w)
            if norm <= 1e-300:
                w = v  # zero eigenvalue: any orthogonal direction works
                break
            w /= norm
            if np.linalg.norm(w - v) < 1e-13:
                v = w
                break
            v = w
        # deterministic sign: largest-magnitude component is positive
        pivot = int(np.argmax(np.abs(v)))
        if v[pivot] < 0:
            v = -v
        axes[j] = v
        lam = float(v @ cov @ v)
        cov = cov - lam * np.outer(v, v)
    return centered @ axes.T


AUTO_RADIUS_SCALE = 2.0


def density_cluster(
    points: np.ndarray,
    min_cluster_size: int = 10,
    radius: Optional[float] = None,
) -> ClusterModel:
    """Density-reachability clustering with an auto-scaled radius.

    A point is core when at least min_cluster_size points (itself included)
    lie within the radius; clusters are the connected components of core
    points plus reachable border points. The default radius is the median
    distance of each point to its min_cluster_size-th neighbor, scaled by
    AUTO_RADIUS_SCALE: the bare median adapts to bulk density and strands
    the sparse shell of a blob as outliers. Components smaller than
    min_cluster_size dissolve into outliers.
    """
    pts = np.asarray(points, dtype=np.float64)
    m = pts.shape[0]
    if m == 0:
        return ClusterModel(reduced=pts, labels=np.zeros(0, dtype=np.int64), cluster_count=0)
    labels = np.full(m, OUTLIER_TOPIC, dtype=np.int64)
    if m < min_cluster_size:
        return ClusterModel(reduced=pts, labels=labels, cluster_count=0)

    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    if radius is None:
        k = min(min_cluster_size, m - 1)
        kth = np.sort(dist, axis=1)[:, k]  # column 0 is the point itself
        radius = float(np.median(kth)) * AUTO_RADIUS_SCALE

    within = dist <= radius
    core = within.sum(axis=1) >= min_cluster_size

    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(m):
        if not core[i]:
            continue
        for j in range(i + 1, m):
            if core[j] and within[i, j]:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    component = {i: find(i) for i in range(m) if core[i]}
    for i in range(m):  # border points join their nearest core's component
        if core[i]:
            continue
        best = None
        for j in range(m):
            if core[j] and within[i, j]:
                key = (dist[i, j], j)
                if best is None or key < best[0]:
                    best = (key, find(j))
        if best is not None:
            component[i] = best[1]

    members: dict[int, list] = {}
    for i, root in sorted(component.items()):
        members.setdefault(root, []).append(i)
    cluster_id = 0
    for root in sorted(members, key=lambda r: min(members[r])):
        group = members[root]
        if len(group) < min_cluster_size:
            continue
        for i in group:
            labels[i] = cluster_id
        cluster_id += 1
    return ClusterModel(reduced=pts, labels=labels, cluster_count=cluster_id)


def ctfidf_keywords(
    labels: Sequence[int],
    docs: Sequence[list],
    total_docs: int,
    top_n: int = TOP_WORDS,
):
    """Class-based TF-IDF: (tf(t,c) / |c|) * ln(N / df(t)).

    tf counts the term in the concatenation of the cluster's documents and
    |c| is the cluster's total token count; df and N are document-level.
    Returns one TopicSummary per non-outlier cluster (empty if none).
    """
    doc_freq: dict[str, int] = {}
    for tokens in docs:
        for term in set(tokens):
            doc_freq[term] = doc_freq.get(term, 0) + 1

    clusters: dict[int, list] = {}
    for label, tokens in zip(labels, docs):
        if label == OUTLIER_TOPIC:
            continue
        clusters.setdefault(int(label), []).append(tokens)

    summaries = []
    for cid in sorted(clusters):
        counts: dict[str, int] = {}
        size = 0
        for tokens in clusters[cid]:
            size += len(tokens)
            for tok in tokens:
                counts[tok] = counts.get(tok, 0) + 1
        scores = {
            term: (tf / size) * math.log(total_docs / doc_freq[term])
            for term, tf in counts.items()
            if size > 0 and doc_freq.get(term)
        }
        top = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[:top_n]
        summaries.append(
            TopicSummary(
                topic_id=cid,
                keywords=tuple((t, float(s)) for t, s in top if s > 0),
                document_count=len(clusters[cid]),
            )
        )
    return summaries


@dataclass(frozen=True)
class TopicConfig:
    mode: str = "auto"  # auto | nmf | cluster
    seed: int = 13
    k_range: tuple = DEFAULT_K_RANGE
    min_doc_tokens: int = MIN_DOC_TOKENS
    min_cluster_size: int = 10
    reduced_dims: int = 5
    vocab_min_df: int = 2
    vocab_max_df_ratio: float = 0.5
    cluster_coverage: float = 0.95  # embedding coverage needed for auto-cluster
    cluster_min_docs: int = 50


def run_topic_stage(
    paper_ids: Sequence[str],
    docs: Sequence[list],
    embeddings: Sequence[Optional[np.ndarray]],
    config: TopicConfig = TopicConfig(),
) -> TopicStageResult:
    """Route the retrieved set through one topic path.

    ``docs`` are analyzed token lists (title + abstract), aligned with
    ``paper_ids``; ``embeddings`` holds a vector or None per document.
    Auto mode picks the cluster path when embeddings cover at least 95% of
    the set and the set is large enough, otherwise NMF. Fewer than ten
    long-enough documents collapse into a single fallback topic.
    """
    m = len(paper_ids)
    if m == 0:
        raise EmptyRetrievalError("cannot model topics over an empty retrieval")
    if config.mode not in ("auto", "nmf", "cluster"):
        raise ValueError(f"unknown topic mode {config.mode!r}")

    doc_sets = [set(t) for t in docs]
    eligible = [i for i, t in enumerate(docs) if len(t) >= config.min_doc_tokens]

    if len(eligible) < FALLBACK_MIN_DOCS:
        return _fallback_stage(paper_ids, docs, doc_sets)

    mode = config.mode
    if mode == "auto":
        covered = sum(1 for e in embeddings if e is not None)
        if covered / m >= config.cluster_coverage and m >= config.cluster_min_docs:
            mode = "cluster"
        else:
            mode = "nmf"

    if mode == "cluster":
        usable = [i for i in eligible if embeddings[i] is not None]
        if len(usable) < FALLBACK_MIN_DOCS:
            return _fallback_stage(paper_ids, docs, doc_sets)
        return _cluster_stage(paper_ids, docs, doc_sets, embeddings, usable, config)
    return _nmf_stage(paper_ids, docs, doc_sets, eligible, config)


def _fallback_stage(paper_ids, docs, doc_sets) -> TopicStageResult:
    summaries = ctfidf_keywords([0] * len(docs), docs, total_docs=len(docs))
    if not summaries:
        summaries = [TopicSummary(topic_id=0, keywords=(), document_count=len(docs))]
    else:
        summaries = [
            TopicSummary(0, summaries[0].keywords, document_count=len(docs))
        ]
    assignments = tuple(TopicAssignment(pid, 0, 1.0) for pid in paper_ids)
    words = [t for t, _ in summaries[0].keywords]
    if len(words) >= 2:
        _, mean = compute_npmi(words, doc_sets)
    else:
        mean = 0.0
    coherence = CoherenceReport(k=1, per_topic={0: mean}, mean_npmi=mean)
    return TopicStageResult(
        summaries=tuple(summaries),
        assignments=assignments,
        coherence=coherence,
        path="fallback",
    )


def _outlier_summary(count: int) -> TopicSummary:
    return TopicSummary(topic_id=OUTLIER_TOPIC, keywords=(), document_count=count)


def _nmf_stage(paper_ids, docs, doc_sets, eligible, config: TopicConfig) -> TopicStageResult:
    kept_docs = [docs[i] for i in eligible]
    kept_ids = [paper_ids[i] for i in eligible]
    vocab = build_vocabulary(kept_docs, config.vocab_min_df, config.vocab_max_df_ratio)
    if len(vocab) == 0:
        vocab = build_vocabulary(kept_docs, 1, 1.0)
    if len(vocab) == 0:
        return _fallback_stage(paper_ids, docs, doc_sets)
    X = build_tfidf(kept_docs, vocab)
    best_k, reports = select_k(X, doc_sets, k_range=config.k_range, seed=config.seed)
    model = nmf_factorize(X.values, best_k, seed=config.seed)
    assignments, _ = assign_topics_nmf(model, kept_ids)

    counts = {t: 0 for t in range(best_k)}
    for a in assignments:
        counts[a.topic_id] = counts.get(a.topic_id, 0) + 1
    keyword_lists = top_topic_terms(model.H, X.terms)
    summaries = [
        TopicSummary(t, tuple(keyword_lists[t]), document_count=counts.get(t, 0))
        for t in range(best_k)
    ]

    by_id = {a.paper_id: a for a in assignments}
    full_assignments = []
    outliers = 0
    for pid in paper_ids:
        a = by_id.get(pid)
        if a is None:
            a = TopicAssignment(pid, OUTLIER_TOPIC, 1.0)
        if a.topic_id == OUTLIER_TOPIC:
            outliers += 1
        full_assignments.append(a)
    if outliers:
        summaries.append(_outlier_summary(outliers))
    return TopicStageResult(
        summaries=tuple(summaries),
        assignments=tuple(full_assignments),
        coherence=reports[best_k],
        path="nmf",
    )


def _cluster_stage(
    paper_ids, docs, doc_sets, embeddings, usable, config: TopicConfig
) -> TopicStageResult:
    matrix = np.stack([np.asarray(embeddings[i], dtype=np.float64) for i in usable])
    p = min(config.reduced_dims, matrix.shape[0], matrix.shape[1])
    reduced = reduce_dimensions(matrix, p=p, seed=config.seed)
    model = density_cluster(reduced, min_cluster_size=config.min_cluster_size)

    labels_by_doc = {}
    for row, doc_idx in enumerate(usable):
        labels_by_doc[doc_idx] = int(model.labels[row])

    cluster_docs = [docs[i] for i in usable]
    cluster_labels = [labels_by_doc[i] for i in usable]
    summaries = ctfidf_keywords(cluster_labels, cluster_docs, total_docs=len(usable))
    if not summaries:  # every point an outlier: degenerate, collapse
        return _fallback_stage(paper_ids, docs, doc_sets)

    assignments = []
    outliers = 0
    for i, pid in enumerate(paper_ids):
        topic = labels_by_doc.get(i, OUTLIER_TOPIC)
        if topic == OUTLIER_TOPIC:
            outliers += 1
        assignments.append(TopicAssignment(pid, topic, 1.0))
    if outliers:
        summaries = list(summaries) + [_outlier_summary(outliers)]

    per_topic = {}
    for s in summaries:
        if s.topic_id == OUTLIER_TOPIC:
            continue
        words = [t for t, _ in s.keywords]
        per_topic[s.topic_id] = (
            compute_npmi(words, [doc_sets[i] for i in usable])[1] if len(words) >= 2 else 0.0
        )
    mean = sum(per_topic.values()) / len(per_topic) if per_topic else 0.0
    coherence = CoherenceReport(k=model.cluster_count, per_topic=per_topic, mean_npmi=mean)
    return TopicStageResult(
        summaries=tuple(summaries),
        assignments=tuple(assignments),
        coherence=coherence,
        path="cluster",
    )
