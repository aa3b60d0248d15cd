"""Persistent inverted index with field-aware BM25 scoring.

Titles and abstracts are indexed separately; a document's score is the
field-weighted sum of its per-field BM25 scores, with a multiplicative
bonus on the title contribution when the whole query occurs as a
contiguous token phrase in the title. Query terms missing from the corpus
can optionally be expanded to indexed terms within Damerau-Levenshtein
distance 1, scored at half idf.

Scoring uses the smoothed non-negative idf ln(1 + (N - df + 0.5)/(df + 0.5)),
which stays >= 0 for every 0 <= df <= N.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .analysis import AnalyzerConfig, analyze
from .corpus import CorpusSnapshot
from .errors import InvalidIndexError
from .ranking import RankedList

FIELDS = ("title", "abstract")

# fuzzy expansion caps; only query terms this long with zero postings expand
FUZZY_MIN_TERM_LEN = 5
FUZZY_MAX_EXPANSIONS = 10
FUZZY_IDF_DISCOUNT = 0.5


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if self.k1 < 0:
            raise ValueError("k1 must be >= 0")
        if not 0 <= self.b <= 1:
            raise ValueError("b must be in [0, 1]")


@dataclass(frozen=True)
class FieldWeights:
    title_weight: float = 2.0
    abstract_weight: float = 1.0
    phrase_bonus_factor: float = 1.5

    def __post_init__(self):
        if min(self.title_weight, self.abstract_weight, self.phrase_bonus_factor) <= 0:
            raise ValueError("all weights must be > 0")


class InvertedIndex:
    """Immutable after build; safe for concurrent searches."""

    def __init__(
        self,
        postings: dict,
        doc_lengths: dict,
        doc_count: int,
        paper_ids: list,
        title_tokens: list,
        params: Bm25Params,
        analyzer_hash: str,
        corpus_hash: str,
    ):
        self.postings = postings  # field -> term -> [(ordinal, tf)], ordinal asc
        self.doc_lengths = doc_lengths  # field -> list[int]
        self.doc_count = doc_count
        self.paper_ids = paper_ids  # ordinal -> paper_id
        self.title_tokens = title_tokens  # ordinal -> analyzed title, for phrases
        self.params = params
        self.analyzer_hash = analyzer_hash
        self.corpus_hash = corpus_hash
        self.avgdl = {
            f: (sum(doc_lengths[f]) / doc_count) if doc_count else 0.0 for f in FIELDS
        }
        self._vocab = sorted(set(postings["title"]) | set(postings["abstract"]))

    def df(self, field: str, term: str) -> int:
        return len(self.postings[field].get(term, ()))

    def idf(self, field: str, term: str) -> float:
        n, df = self.doc_count, self.df(field, term)
        return math.log(1.0 + (n - df + 0.5) / (df + 0.5))

    @property
    def vocabulary(self) -> list:
        return self._vocab


def build_lexical_index(
    snapshot: CorpusSnapshot,
    analyzer: AnalyzerConfig,
    params: Bm25Params = Bm25Params(),
) -> InvertedIndex:
    """Index title and abstract fields of every paper, in ordinal order."""
    paper_ids = snapshot.paper_ids
    postings = {f: {} for f in FIELDS}
    doc_lengths = {f: [] for f in FIELDS}
    title_tokens = []
    for ordinal, pid in enumerate(paper_ids):
        paper = snapshot.papers[pid]
        for fname, text in (("title", paper.title), ("abstract", paper.abstract)):
            tokens = analyze(text, analyzer)
            if fname == "title":
                title_tokens.append(tokens)
            doc_lengths[fname].append(len(tokens))
            counts: dict[str, int] = {}
            for tok in tokens:
                counts[tok] = counts.get(tok, 0) + 1
            for term in sorted(counts):
                postings[fname].setdefault(term, []).append((ordinal, counts[term]))
    return InvertedIndex(
        postings=postings,
        doc_lengths=doc_lengths,
        doc_count=len(paper_ids),
        paper_ids=paper_ids,
        title_tokens=title_tokens,
        params=params,
        analyzer_hash=analyzer.content_hash(),
        corpus_hash=snapshot.content_hash,
    )


def bm25_term_score(
    tf: int, doc_len: int, avgdl: float, idf: float, params: Bm25Params
) -> float:
    """Term-frequency saturation with document-length normalization."""
    if avgdl <= 0:
        raise InvalidIndexError("avgdl must be > 0")
    if tf == 0:
        return 0.0
    k1, b = params.k1, params.b
    return idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * doc_len / avgdl))


def damerau_levenshtein_within_1(a: str, b: str) -> bool:
    """True when edit distance (with adjacent transposition) is <= 1."""
    if a == b:
        return True
    la, lb = len(a), len(b)
    if abs(la - lb) > 1:
        return False
    if la == lb:
        diffs = [i for i in range(la) if a[i] != b[i]]
        if len(diffs) == 1:
            return True
        return (
            len(diffs) == 2
            and diffs[1] == diffs[0] + 1
            and a[diffs[0]] == b[diffs[1]]
            and a[diffs[1]] == b[diffs[0]]
        )
    if la > lb:
        a, b, la, lb = b, a, lb, la
    i = 0
    while i < la and a[i] == b[i]:
        i += 1
    return a[i:] == b[i + 1 :]


def expand_fuzzy(index: InvertedIndex, term: str, max_expansions: int = FUZZY_MAX_EXPANSIONS):
    """Indexed terms within distance 1, lexicographic, capped."""
    out = []
    for cand in index.vocabulary:
        if cand != term and damerau_levenshtein_within_1(term, cand):
            out.append(cand)
            if len(out) >= max_expansions:
                break
    return out


def _contains_phrase(haystack: list, needle: list) -> bool:
    n = len(needle)
    return any(haystack[i : i + n] == needle for i in range(len(haystack) - n + 1))


def lexical_search(
    index: InvertedIndex,
    query_tokens: list,
    field_weights: FieldWeights = FieldWeights(),
    top_k: int = 10,
    filter_set=None,
    fuzzy: bool = False,
) -> RankedList:
    """Field-weighted BM25 ranking with optional fuzzy term expansion.

    Ties are broken by paper_id ascending. The phrase bonus applies when
    the query has at least two tokens and occurs contiguously in a title.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    if not query_tokens:
        return RankedList.empty("lexical")

    # (term, idf multiplier) pairs in a canonical order
    scored_terms = []
    for tok in query_tokens:
        if any(index.df(f, tok) > 0 for f in FIELDS):
            scored_terms.append((tok, 1.0))
        elif fuzzy and len(tok) >= FUZZY_MIN_TERM_LEN:
            scored_terms.extend((cand, FUZZY_IDF_DISCOUNT) for cand in expand_fuzzy(index, tok))

    field_sums = {f: {} for f in FIELDS}
    params = index.params
    for term, discount in scored_terms:
        for fname in FIELDS:
            plist = index.postings[fname].get(term)
            if not plist:
                continue
            idf = index.idf(fname, term) * discount
            avgdl = index.avgdl[fname]
            lengths = index.doc_lengths[fname]
            sums = field_sums[fname]
            for ordinal, tf in plist:
                if filter_set is not None and ordinal not in filter_set:
                    continue
                sums[ordinal] = sums.get(ordinal, 0.0) + bm25_term_score(
                    tf, lengths[ordinal], avgdl, idf, params
                )

    check_phrase = len(query_tokens) >= 2
    scored = []
    for ordinal in sorted(set(field_sums["title"]) | set(field_sums["abstract"])):
        title_part = field_weights.title_weight * field_sums["title"].get(ordinal, 0.0)
        if (
            check_phrase
            and title_part
            and _contains_phrase(index.title_tokens[ordinal], query_tokens)
        ):
            title_part *= field_weights.phrase_bonus_factor
        score = title_part + field_weights.abstract_weight * field_sums["abstract"].get(
            ordinal, 0.0
        )
        scored.append((score, index.paper_ids[ordinal]))
    scored.sort(key=lambda t: (-t[0], t[1]))
    return RankedList.from_scored(scored[:top_k], source="lexical")


# --- persistence ------------------------------------------------------------


def persist_lexical_index(index: InvertedIndex, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    terms = {f: sorted(index.postings[f]) for f in FIELDS}
    (out / "terms.json").write_text(json.dumps(terms, sort_keys=True), encoding="utf-8")
    (out / "postings.json").write_text(
        json.dumps(index.postings, sort_keys=True), encoding="utf-8"
    )
    (out / "doclens.json").write_text(
        json.dumps(
            {
                "doc_lengths": index.doc_lengths,
                "title_tokens": index.title_tokens,
            },
            sort_keys=True,
        ),
        encoding="utf-8",
    )
    manifest = {
        "doc_count": index.doc_count,
        "paper_ids": index.paper_ids,
        "k1": index.params.k1,
        "b": index.params.b,
        "analyzer_hash": index.analyzer_hash,
        "corpus_hash": index.corpus_hash,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return out


def load_lexical_index(in_dir) -> InvertedIndex:
    d = Path(in_dir)
    manifest = json.loads((d / "manifest.json").read_text(encoding="utf-8"))
    raw = json.loads((d / "postings.json").read_text(encoding="utf-8"))
    postings = {
        f: {t: [tuple(e) for e in entries] for t, entries in raw[f].items()} for f in FIELDS
    }
    lens = json.loads((d / "doclens.json").read_text(encoding="utf-8"))
    return InvertedIndex(
        postings=postings,
        doc_lengths=lens["doc_lengths"],
        doc_count=manifest["doc_count"],
        paper_ids=manifest["paper_ids"],
        title_tokens=lens["title_tokens"],
        params=Bm25Params(k1=manifest["k1"], b=manifest["b"]),
        analyzer_hash=manifest["analyzer_hash"],
        corpus_hash=manifest["corpus_hash"],
    )
