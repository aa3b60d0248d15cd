"""Deterministic text analysis: tokenization, stop-word removal, stemming.

The same analyzer feeds the inverted index, the TF-IDF topic path, query
preprocessing and author-name matching, so its behavior must be identical
across runs and platforms. Tokens are split on any non-alphanumeric
character (digits kept, underscores dropped), length- and stop-word
filtered, then stemmed. Filters are re-applied to stemmed output so that
analyzing an analyzer's output is a no-op.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

from .stemming import stem

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def _bundled_stopwords() -> frozenset[str]:
    text = resources.files("litexplore.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


def load_stopwords(path) -> frozenset[str]:
    """Read a one-word-per-line stop list, overriding the bundled one."""
    with open(path, encoding="utf-8") as fh:
        return frozenset(w.strip().lower() for w in fh if w.strip())


@dataclass(frozen=True)
class AnalyzerConfig:
    lowercase: bool = True
    stopwords: frozenset[str] = field(default_factory=_bundled_stopwords)
    stem: bool = True
    min_token_len: int = 2
    max_token_len: int = 40

    def __post_init__(self):
        if self.min_token_len < 1:
            raise ValueError("min_token_len must be >= 1")
        if self.max_token_len < self.min_token_len:
            raise ValueError("max_token_len must be >= min_token_len")

    def content_hash(self) -> str:
        """Stable digest of everything that changes analyzer output."""
        h = hashlib.sha256()
        h.update(repr((self.lowercase, self.stem, self.min_token_len, self.max_token_len)).encode())
        for word in sorted(self.stopwords):
            h.update(word.encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()[:16]


DEFAULT_ANALYZER = AnalyzerConfig()


def analyze(text: str, config: AnalyzerConfig = DEFAULT_ANALYZER) -> list[str]:
    """Turn text into the ordered token list used for indexing and topics."""
    if config.lowercase:
        text = text.lower()
    out = []
    for tok in _TOKEN_RE.findall(text):
        if not config.min_token_len <= len(tok) <= config.max_token_len:
            continue
        if tok in config.stopwords:
            continue
        if config.stem:
            tok = stem(tok)
            # stemming can shrink a token below bounds or onto a stop word
            if not config.min_token_len <= len(tok) <= config.max_token_len:
                continue
            if tok in config.stopwords:
                continue
        out.append(tok)
    return out


@dataclass(frozen=True)
class Vocabulary:
    """Dense term index with document frequencies over a document set."""

    index: dict  # term -> position in 0..len-1, lexicographic order
    doc_freq: dict  # term -> number of documents containing it
    total_docs: int

    def __len__(self) -> int:
        return len(self.index)

    @property
    def terms(self) -> list[str]:
        return sorted(self.index, key=self.index.get)


def build_vocabulary(
    docs: Sequence[Iterable[str]],
    min_df: int = 1,
    max_df_ratio: float = 1.0,
) -> Vocabulary:
    """Count document frequencies and assign dense lexicographic indices.

    Terms with df < min_df or df/N > max_df_ratio are excluded.
    """
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    if not 0 < max_df_ratio <= 1:
        raise ValueError("max_df_ratio must be in (0, 1]")
    total = len(docs)
    df: dict[str, int] = {}
    for tokens in docs:
        for term in set(tokens):
            df[term] = df.get(term, 0) + 1
    kept = sorted(
        t for t, n in df.items() if n >= min_df and (total == 0 or n / total <= max_df_ratio)
    )
    return Vocabulary(
        index={t: i for i, t in enumerate(kept)},
        doc_freq={t: df[t] for t in kept},
        total_docs=total,
    )
