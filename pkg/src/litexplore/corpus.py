"""Load, validate, persist and serve the scholarly corpus.

The corpus arrives as line-delimited JSON dumps (papers, authors,
authorship, citations, embeddings). Loading produces an immutable
CorpusSnapshot: collections are canonicalized (sorted by primary key) so
the persisted form is byte-identical for identical inputs, and author
affiliations are denormalized onto papers so filters and graph
construction read one structure.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field, asdict
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import CorpusError, NotFoundError, DimensionMismatchError

_COUNTRY_RE = re.compile(r"^[A-Z]{2}$")
YEAR_MIN, YEAR_MAX = 1900, 2100
UNKNOWN_YEAR = 0


class ValidationPolicy(str, Enum):
    STRICT = "strict"  # any malformed or dangling record aborts the load
    DROP = "drop"  # malformed/dangling records are dropped and counted


@dataclass(frozen=True)
class PaperRecord:
    paper_id: str
    title: str
    abstract: str
    publication_year: int
    arxiv_id: Optional[str] = None
    submitted_date: Optional[str] = None
    doi: Optional[str] = None
    subject: Optional[str] = None


@dataclass(frozen=True)
class AuthorRecord:
    author_id: str
    name: str
    institution_ids: tuple = ()
    country_codes: tuple = ()


@dataclass(frozen=True)
class CitationRecord:
    citing_paper_id: str
    cited_paper_id: str


@dataclass(frozen=True)
class CorpusStats:
    paper_count: int = 0
    author_count: int = 0
    institution_count: int = 0
    country_count: int = 0
    citation_count: int = 0
    avg_citations_per_paper: float = 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        # serialized form reports the average to 2 decimals
        d["avg_citations_per_paper"] = round(self.avg_citations_per_paper, 2)
        return d


@dataclass
class IngestReport:
    """Counts of records rejected or patched during a load."""

    malformed: dict = field(default_factory=dict)  # per input file
    duplicate_ids: int = 0
    dangling_authorship: int = 0
    dangling_citations: int = 0
    duplicate_citations: int = 0
    self_citations: int = 0
    invalid_country_codes: int = 0
    sentinel_years: int = 0
    missing_embeddings: int = 0
    dangling_embeddings: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def total_malformed(self) -> int:
        return sum(self.malformed.values())


@dataclass(frozen=True)
class CorpusSnapshot:
    """Immutable, validated corpus; safe for unlimited concurrent readers."""

    papers: dict  # paper_id -> PaperRecord, insertion-ordered by id
    authors: dict  # author_id -> AuthorRecord
    authorship: tuple  # (author_id, paper_id), sorted
    citations: tuple  # CitationRecord, sorted
    embeddings: dict  # paper_id -> np.ndarray, ordered by id
    embedding_dim: int
    embedding_model: str
    stats: CorpusStats
    report: IngestReport
    content_hash: str
    # denormalized views (derived, deterministic)
    paper_authors: dict  # paper_id -> tuple of author_ids
    paper_institutions: dict  # paper_id -> tuple of institution ids
    paper_countries: dict  # paper_id -> tuple of country codes

    @property
    def paper_ids(self) -> list:
        """Paper ids in ordinal order (sorted); shared by every index."""
        return list(self.papers)


def get_paper(snapshot: CorpusSnapshot, paper_id: str) -> PaperRecord:
    """Exact-id lookup; ids are case-sensitive."""
    try:
        return snapshot.papers[paper_id]
    except KeyError:
        raise NotFoundError(f"unknown paper id: {paper_id!r}") from None


def compute_stats(
    papers: dict, authors: dict, citations: tuple
) -> CorpusStats:
    institutions: set = set()
    countries: set = set()
    for a in authors.values():
        institutions.update(a.institution_ids)
        countries.update(a.country_codes)
    n_papers = len(papers)
    n_cites = len(citations)
    return CorpusStats(
        paper_count=n_papers,
        author_count=len(authors),
        institution_count=len(institutions),
        country_count=len(countries),
        citation_count=n_cites,
        avg_citations_per_paper=(n_cites / n_papers) if n_papers else 0.0,
    )


# --- loading ---------------------------------------------------------------


def _iter_jsonl(path, malformed: dict, policy: ValidationPolicy):
    name = os.path.basename(str(path))
    malformed.setdefault(name, 0)
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("not an object")
            except ValueError as exc:
                if policy is ValidationPolicy.STRICT:
                    raise CorpusError(f"{name}:{lineno}: malformed line ({exc})")
                malformed[name] += 1
                continue
            yield lineno, obj


def _year_of(date_str) -> Optional[int]:
    if not date_str or not isinstance(date_str, str):
        return None
    m = re.match(r"^(\d{4})", date_str)
    return int(m.group(1)) if m else None


def _extract_year(obj: dict) -> Optional[int]:
    """publication_year, else publication_date year, else submitted_date year."""
    year = obj.get("publication_year")
    if isinstance(year, int):
        return year
    for key in ("publication_date", "submitted_date"):
        y = _year_of(obj.get(key))
        if y is not None:
            return y
    return None


def _reject(policy, malformed, fname, msg):
    if policy is ValidationPolicy.STRICT:
        raise CorpusError(msg)
    malformed[fname] += 1


def load_corpus(
    papers_path,
    authors_path,
    authorship_path,
    citations_path,
    embeddings_path=None,
    policy: ValidationPolicy = ValidationPolicy.DROP,
    embedding_model: str = "unknown",
) -> CorpusSnapshot:
    """Ingest the dump files into a validated, immutable snapshot."""
    report = IngestReport()
    mf = report.malformed

    papers: dict[str, PaperRecord] = {}
    pname = os.path.basename(str(papers_path))
    for lineno, obj in _iter_jsonl(papers_path, mf, policy):
        pid = obj.get("paper_id")
        title = (obj.get("title") or "").strip()
        if not isinstance(pid, str) or not pid:
            _reject(policy, mf, pname, f"{pname}:{lineno}: missing paper_id")
            continue
        if not title:
            _reject(policy, mf, pname, f"{pname}:{lineno}: empty title")
            continue
        if pid in papers:
            if policy is ValidationPolicy.STRICT:
                raise CorpusError(f"{pname}:{lineno}: duplicate paper_id {pid!r}")
            report.duplicate_ids += 1
            continue
        year = _extract_year(obj)
        if year is None or not YEAR_MIN <= year <= YEAR_MAX:
            if policy is ValidationPolicy.STRICT:
                raise CorpusError(f"{pname}:{lineno}: no usable year for {pid!r}")
            year = UNKNOWN_YEAR
            report.sentinel_years += 1
        papers[pid] = PaperRecord(
            paper_id=pid,
            title=title,
            abstract=str(obj.get("abstract") or ""),
            publication_year=year,
            arxiv_id=obj.get("arxiv_id"),
            submitted_date=obj.get("submitted_date"),
            doi=obj.get("doi"),
            subject=obj.get("subject"),
        )
    papers = {pid: papers[pid] for pid in sorted(papers)}

    authors: dict[str, AuthorRecord] = {}
    aname = os.path.basename(str(authors_path))
    for lineno, obj in _iter_jsonl(authors_path, mf, policy):
        aid = obj.get("author_id")
        if not isinstance(aid, str) or not aid:
            _reject(policy, mf, aname, f"{aname}:{lineno}: missing author_id")
            continue
        if aid in authors:
            if policy is ValidationPolicy.STRICT:
                raise CorpusError(f"{aname}:{lineno}: duplicate author_id {aid!r}")
            report.duplicate_ids += 1
            continue
        codes = []
        for code in obj.get("country_codes") or []:
            code = str(code).upper()
            if _COUNTRY_RE.match(code):
                codes.append(code)
            else:
                if policy is ValidationPolicy.STRICT:
                    raise CorpusError(f"{aname}:{lineno}: bad country code {code!r}")
                report.invalid_country_codes += 1
        authors[aid] = AuthorRecord(
            author_id=aid,
            name=str(obj.get("name") or ""),
            institution_ids=tuple(str(i) for i in obj.get("institution_ids") or []),
            country_codes=tuple(codes),
        )
    authors = {aid: authors[aid] for aid in sorted(authors)}

    authorship = set()
    lname = os.path.basename(str(authorship_path))
    for lineno, obj in _iter_jsonl(authorship_path, mf, policy):
        aid, pid = obj.get("author_id"), obj.get("paper_id")
        if aid in authors and pid in papers:
            authorship.add((aid, pid))
        else:
            if policy is ValidationPolicy.STRICT:
                raise CorpusError(f"{lname}:{lineno}: dangling authorship ({aid}, {pid})")
            report.dangling_authorship += 1
    authorship_t = tuple(sorted(authorship))

    citations = set()
    cname = os.path.basename(str(citations_path))
    for lineno, obj in _iter_jsonl(citations_path, mf, policy):
        src, dst = obj.get("citing_paper_id"), obj.get("cited_paper_id")
        if not isinstance(src, str) or not isinstance(dst, str):
            _reject(policy, mf, cname, f"{cname}:{lineno}: bad citation line")
            continue
        if src == dst:
            report.self_citations += 1
            continue
        if src not in papers or dst not in papers:
            if policy is ValidationPolicy.STRICT:
                raise CorpusError(f"{cname}:{lineno}: dangling citation ({src}, {dst})")
            report.dangling_citations += 1
            continue
        if (src, dst) in citations:
            report.duplicate_citations += 1
            continue
        citations.add((src, dst))
    citations_t = tuple(CitationRecord(s, d) for s, d in sorted(citations))

    embeddings: dict[str, np.ndarray] = {}
    dim = None
    if embeddings_path is not None:
        ename = os.path.basename(str(embeddings_path))
        for lineno, obj in _iter_jsonl(embeddings_path, mf, policy):
            pid = obj.get("paper_id")
            vec = obj.get("vector")
            if not isinstance(pid, str) or not isinstance(vec, list) or not vec:
                _reject(policy, mf, ename, f"{ename}:{lineno}: bad embedding line")
                continue
            if pid not in papers:
                report.dangling_embeddings += 1
                continue
            arr = np.asarray(vec, dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                _reject(policy, mf, ename, f"{ename}:{lineno}: non-finite embedding")
                continue
            if dim is None:
                dim = arr.shape[0]
            elif arr.shape[0] != dim:
                raise DimensionMismatchError(
                    f"{ename}:{lineno}: embedding dimension {arr.shape[0]} != {dim}"
                )
            if pid in embeddings:
                if policy is ValidationPolicy.STRICT:
                    raise CorpusError(f"{ename}:{lineno}: duplicate embedding {pid!r}")
                report.duplicate_ids += 1
                continue
            embeddings[pid] = arr
    embeddings = {pid: embeddings[pid] for pid in sorted(embeddings)}
    report.missing_embeddings = len(papers) - len(embeddings)

    paper_authors: dict[str, list] = {pid: [] for pid in papers}
    for aid, pid in authorship_t:
        paper_authors[pid].append(aid)
    paper_institutions = {}
    paper_countries = {}
    for pid in papers:
        insts: set = set()
        codes: set = set()
        for aid in paper_authors[pid]:
            insts.update(authors[aid].institution_ids)
            codes.update(authors[aid].country_codes)
        paper_institutions[pid] = tuple(sorted(insts))
        paper_countries[pid] = tuple(sorted(codes))

    snapshot = CorpusSnapshot(
        papers=papers,
        authors=authors,
        authorship=authorship_t,
        citations=citations_t,
        embeddings=embeddings,
        embedding_dim=int(dim or 0),
        embedding_model=embedding_model,
        stats=compute_stats(papers, authors, citations_t),
        report=report,
        content_hash="",
        paper_authors={pid: tuple(v) for pid, v in paper_authors.items()},
        paper_institutions=paper_institutions,
        paper_countries=paper_countries,
    )
    object.__setattr__(snapshot, "content_hash", _content_hash(snapshot))
    return snapshot


# --- persistence ------------------------------------------------------------

_FILES = ("papers.jsonl", "authors.jsonl", "authorship.jsonl", "citations.jsonl")


def _canonical_lines(snapshot: CorpusSnapshot):
    papers = "".join(
        json.dumps(asdict(p), sort_keys=True, ensure_ascii=False) + "\n"
        for p in snapshot.papers.values()
    )
    authors = "".join(
        json.dumps(
            {
                "author_id": a.author_id,
                "name": a.name,
                "institution_ids": list(a.institution_ids),
                "country_codes": list(a.country_codes),
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        + "\n"
        for a in snapshot.authors.values()
    )
    links = "".join(
        json.dumps({"author_id": a, "paper_id": p}, sort_keys=True) + "\n"
        for a, p in snapshot.authorship
    )
    cites = "".join(
        json.dumps(
            {"citing_paper_id": c.citing_paper_id, "cited_paper_id": c.cited_paper_id},
            sort_keys=True,
        )
        + "\n"
        for c in snapshot.citations
    )
    return papers, authors, links, cites


def _embedding_bytes(snapshot: CorpusSnapshot) -> bytes:
    if not snapshot.embeddings:
        return b""
    mat = np.stack(list(snapshot.embeddings.values()))
    return mat.astype(np.float64).tobytes(order="C")


def _content_hash(snapshot: CorpusSnapshot) -> str:
    h = hashlib.sha256()
    for part in _canonical_lines(snapshot):
        h.update(part.encode("utf-8"))
    h.update("\n".join(snapshot.embeddings).encode("utf-8"))
    h.update(_embedding_bytes(snapshot))
    h.update(str(snapshot.embedding_dim).encode())
    return h.hexdigest()


def persist_snapshot(snapshot: CorpusSnapshot, corpus_dir) -> Path:
    """Write the canonical snapshot directory (byte-stable for equal inputs)."""
    out = Path(corpus_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in zip(_FILES, _canonical_lines(snapshot)):
        (out / name).write_text(text, encoding="utf-8")
    ids = list(snapshot.embeddings)
    (out / "embedding_ids.json").write_text(json.dumps(ids), encoding="utf-8")
    if ids:
        mat = np.stack([snapshot.embeddings[i] for i in ids]).astype(np.float64)
    else:
        mat = np.zeros((0, snapshot.embedding_dim), dtype=np.float64)
    np.save(out / "embeddings.npy", mat)
    manifest = {
        "content_hash": snapshot.content_hash,
        "embedding_dim": snapshot.embedding_dim,
        "embedding_model": snapshot.embedding_model,
        "stats": snapshot.stats.to_dict(),
        "ingest_report": snapshot.report.to_dict(),
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return out


def load_snapshot(corpus_dir) -> CorpusSnapshot:
    """Re-load a persisted snapshot directory."""
    d = Path(corpus_dir)
    manifest_path = d / "manifest.json"
    if not manifest_path.exists():
        raise CorpusError(f"no corpus manifest in {d}; run ingest first")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))

    papers = {}
    for line in (d / "papers.jsonl").read_text(encoding="utf-8").splitlines():
        obj = json.loads(line)
        papers[obj["paper_id"]] = PaperRecord(**obj)
    authors = {}
    for line in (d / "authors.jsonl").read_text(encoding="utf-8").splitlines():
        obj = json.loads(line)
        authors[obj["author_id"]] = AuthorRecord(
            author_id=obj["author_id"],
            name=obj["name"],
            institution_ids=tuple(obj["institution_ids"]),
            country_codes=tuple(obj["country_codes"]),
        )
    authorship = tuple(
        (o["author_id"], o["paper_id"])
        for o in map(json.loads, (d / "authorship.jsonl").read_text(encoding="utf-8").splitlines())
    )
    citations = tuple(
        CitationRecord(o["citing_paper_id"], o["cited_paper_id"])
        for o in map(json.loads, (d / "citations.jsonl").read_text(encoding="utf-8").splitlines())
    )
    ids = json.loads((d / "embedding_ids.json").read_text(encoding="utf-8"))
    mat = np.load(d / "embeddings.npy")
    embeddings = {pid: mat[i] for i, pid in enumerate(ids)}

    paper_authors: dict[str, list] = {pid: [] for pid in papers}
    for aid, pid in authorship:
        paper_authors[pid].append(aid)
    paper_institutions = {}
    paper_countries = {}
    for pid in papers:
        insts: set = set()
        codes: set = set()
        for aid in paper_authors[pid]:
            insts.update(authors[aid].institution_ids)
            codes.update(authors[aid].country_codes)
        paper_institutions[pid] = tuple(sorted(insts))
        paper_countries[pid] = tuple(sorted(codes))

    report = IngestReport(**manifest.get("ingest_report", {}))
    snapshot = CorpusSnapshot(
        papers=papers,
        authors=authors,
        authorship=authorship,
        citations=citations,
        embeddings=embeddings,
        embedding_dim=int(manifest["embedding_dim"]),
        embedding_model=manifest.get("embedding_model", "unknown"),
        stats=compute_stats(papers, authors, citations),
        report=report,
        content_hash="",
        paper_authors={pid: tuple(v) for pid, v in paper_authors.items()},
        paper_institutions=paper_institutions,
        paper_countries=paper_countries,
    )
    object.__setattr__(snapshot, "content_hash", _content_hash(snapshot))
    if snapshot.content_hash != manifest["content_hash"]:
        raise CorpusError(f"corpus content hash mismatch in {d}")
    return snapshot
