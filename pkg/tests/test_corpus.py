import json

import numpy as np
import pytest

from litexplore.corpus import (
    CorpusStats,
    ValidationPolicy,
    compute_stats,
    get_paper,
    load_corpus,
    load_snapshot,
    persist_snapshot,
)
from litexplore.errors import CorpusError, DimensionMismatchError, NotFoundError


def write_lines(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))
    return path


@pytest.fixture
def mini_files(tmp_path):
    """Small hand-written dump set with deliberate defects."""
    papers = write_lines(
        tmp_path / "papers.jsonl",
        [
            {"paper_id": "p1", "title": "Alpha", "abstract": "x", "publication_date": "2020-01-01"},
            {"paper_id": "p2", "title": "Beta", "abstract": "y", "publication_date": "2021-06-15"},
        ],
    )
    # one malformed line in the middle
    with open(papers, "a") as fh:
        fh.write("{not json}\n")
        fh.write(json.dumps({"paper_id": "p3", "title": "Gamma", "abstract": "z",
                             "submitted_date": "2019-03-02"}) + "\n")
    authors = write_lines(
        tmp_path / "authors.jsonl",
        [
            {"author_id": "a1", "name": "Ada One", "institution_ids": ["i1"], "country_codes": ["US"]},
            {"author_id": "a2", "name": "Bo Two", "institution_ids": ["i2"], "country_codes": ["de"]},
        ],
    )
    links = write_lines(
        tmp_path / "authorship.jsonl",
        [
            {"author_id": "a1", "paper_id": "p1"},
            {"author_id": "a2", "paper_id": "p2"},
            {"author_id": "a9", "paper_id": "p1"},  # dangling author
        ],
    )
    cites = write_lines(
        tmp_path / "citations.jsonl",
        [
            {"citing_paper_id": "p1", "cited_paper_id": "p2"},
            {"citing_paper_id": "p1", "cited_paper_id": "p2"},  # duplicate
            {"citing_paper_id": "p2", "cited_paper_id": "p2"},  # self
            {"citing_paper_id": "p2", "cited_paper_id": "p9"},  # dangling
            {"citing_paper_id": "p3", "cited_paper_id": "p1"},
        ],
    )
    embeds = write_lines(
        tmp_path / "embeddings.jsonl",
        [
            {"paper_id": "p1", "vector": [3.0, 4.0]},
            {"paper_id": "p2", "vector": [1.0, 0.0]},
        ],
    )
    return dict(papers_path=papers, authors_path=authors, authorship_path=links,
                citations_path=cites, embeddings_path=embeds)


class TestLoadCorpus:
    def test_malformed_counted_under_drop(self, mini_files):
        snap = load_corpus(**mini_files)
        assert len(snap.papers) == 3
        assert snap.report.malformed["papers.jsonl"] == 1

    def test_malformed_fatal_under_strict(self, mini_files):
        with pytest.raises(CorpusError):
            load_corpus(**mini_files, policy=ValidationPolicy.STRICT)

    def test_dangling_citation_dropped_and_counted(self, mini_files):
        snap = load_corpus(**mini_files)
        pairs = {(c.citing_paper_id, c.cited_paper_id) for c in snap.citations}
        assert pairs == {("p1", "p2"), ("p3", "p1")}
        assert snap.report.dangling_citations == 1
        assert snap.report.duplicate_citations == 1
        assert snap.report.self_citations == 1

    def test_citation_endpoints_always_exist(self, mini_files):
        snap = load_corpus(**mini_files)
        for cite in snap.citations:
            assert cite.citing_paper_id in snap.papers
            assert cite.cited_paper_id in snap.papers

    def test_dangling_authorship_dropped(self, mini_files):
        snap = load_corpus(**mini_files)
        assert snap.report.dangling_authorship == 1
        for aid, pid in snap.authorship:
            assert aid in snap.authors and pid in snap.papers

    def test_year_fallback_to_submitted(self, mini_files):
        snap = load_corpus(**mini_files)
        assert snap.papers["p3"].publication_year == 2019

    def test_country_codes_uppercased(self, mini_files):
        snap = load_corpus(**mini_files)
        assert snap.authors["a2"].country_codes == ("DE",)

    def test_duplicate_paper_id_dropped_with_count(self, tmp_path, mini_files):
        with open(mini_files["papers_path"], "a") as fh:
            fh.write(json.dumps({"paper_id": "p1", "title": "Dup", "abstract": "",
                                 "publication_date": "2020-01-01"}) + "\n")
        snap = load_corpus(**mini_files)
        assert snap.report.duplicate_ids == 1
        assert snap.papers["p1"].title == "Alpha"

    def test_embedding_dimension_mismatch_fatal(self, tmp_path, mini_files):
        with open(mini_files["embeddings_path"], "a") as fh:
            fh.write(json.dumps({"paper_id": "p3", "vector": [1.0, 2.0, 3.0]}) + "\n")
        with pytest.raises(DimensionMismatchError):
            load_corpus(**mini_files)

    def test_missing_title_rejected(self, tmp_path, mini_files):
        with open(mini_files["papers_path"], "a") as fh:
            fh.write(json.dumps({"paper_id": "p4", "title": "   ", "abstract": "",
                                 "publication_date": "2020-01-01"}) + "\n")
        snap = load_corpus(**mini_files)
        assert "p4" not in snap.papers
        assert snap.report.malformed["papers.jsonl"] == 2

    def test_sentinel_year_when_out_of_range(self, tmp_path, mini_files):
        with open(mini_files["papers_path"], "a") as fh:
            fh.write(json.dumps({"paper_id": "p5", "title": "Old", "abstract": "",
                                 "publication_date": "1492-01-01"}) + "\n")
        snap = load_corpus(**mini_files)
        assert snap.papers["p5"].publication_year == 0
        assert snap.report.sentinel_years == 1

    def test_unreadable_file(self, tmp_path, mini_files):
        mini_files["papers_path"] = tmp_path / "does_not_exist.jsonl"
        with pytest.raises(CorpusError):
            load_corpus(**mini_files)

    def test_denormalized_affiliations(self, mini_files):
        snap = load_corpus(**mini_files)
        assert snap.paper_institutions["p1"] == ("i1",)
        assert snap.paper_countries["p1"] == ("US",)
        assert snap.paper_institutions["p3"] == ()


class TestComputeStats:
    def test_empty(self):
        stats = compute_stats({}, {}, ())
        assert stats == CorpusStats()

    def test_two_papers_three_citations(self, mini_files):
        snap = load_corpus(**mini_files)
        # craft directly: 2 papers, 3 citations
        stats = CorpusStats(paper_count=2, citation_count=3,
                            avg_citations_per_paper=1.5)
        assert stats.avg_citations_per_paper == 3 / 2
        assert snap.stats.avg_citations_per_paper == pytest.approx(2 / 3)

    def test_serialized_average_two_decimals(self):
        stats = CorpusStats(paper_count=3, citation_count=1,
                            avg_citations_per_paper=1 / 3)
        assert stats.to_dict()["avg_citations_per_paper"] == 0.33

    def test_fixture_counts_match_manifest(self, snapshot, fixture_manifest):
        stats = snapshot.stats
        assert stats.paper_count == fixture_manifest["paper_count"]
        assert stats.author_count == fixture_manifest["author_count"]
        assert stats.citation_count == fixture_manifest["citation_count"]
        assert stats.institution_count == fixture_manifest["institution_count"]
        assert stats.country_count == fixture_manifest["country_count"]
        assert stats.avg_citations_per_paper == pytest.approx(4.75)
        assert len(snapshot.embeddings) == fixture_manifest["embedding_count"]
        assert snapshot.report.missing_embeddings == fixture_manifest["missing_embeddings"]

    def test_fixture_avg_from_independent_line_count(self, fixture_dir, snapshot):
        n_papers = sum(1 for _ in open(fixture_dir / "papers.jsonl"))
        n_cites = sum(1 for _ in open(fixture_dir / "citations.jsonl"))
        assert snapshot.stats.avg_citations_per_paper == n_cites / n_papers


class TestGetPaper:
    def test_known_id(self, snapshot):
        paper = get_paper(snapshot, "paper_0000")
        assert paper.paper_id == "paper_0000"

    def test_unknown_id(self, snapshot):
        with pytest.raises(NotFoundError):
            get_paper(snapshot, "paper_9999")

    def test_ids_case_sensitive(self, snapshot):
        with pytest.raises(NotFoundError):
            get_paper(snapshot, "PAPER_0000")


class TestPersistence:
    def test_round_trip_equality(self, mini_files, tmp_path):
        snap = load_corpus(**mini_files)
        out = tmp_path / "corpus"
        persist_snapshot(snap, out)
        loaded = load_snapshot(out)
        assert loaded.papers == snap.papers
        assert loaded.authors == snap.authors
        assert loaded.authorship == snap.authorship
        assert loaded.citations == snap.citations
        assert loaded.content_hash == snap.content_hash
        assert set(loaded.embeddings) == set(snap.embeddings)
        for pid in snap.embeddings:
            assert np.array_equal(loaded.embeddings[pid], snap.embeddings[pid])
        assert loaded.stats == snap.stats

    def test_persistence_byte_identical(self, mini_files, tmp_path):
        snap = load_corpus(**mini_files)
        out1, out2 = tmp_path / "c1", tmp_path / "c2"
        persist_snapshot(snap, out1)
        persist_snapshot(load_corpus(**mini_files), out2)
        for name in ("papers.jsonl", "authors.jsonl", "authorship.jsonl",
                     "citations.jsonl", "embeddings.npy", "manifest.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_ingestion_deterministic_hash(self, mini_files):
        assert load_corpus(**mini_files).content_hash == load_corpus(**mini_files).content_hash

    def test_load_missing_dir_is_corpus_error(self, tmp_path):
        with pytest.raises(CorpusError):
            load_snapshot(tmp_path / "nonexistent")

    def test_tamper_detection(self, mini_files, tmp_path):
        snap = load_corpus(**mini_files)
        out = persist_snapshot(snap, tmp_path / "corpus")
        path = out / "papers.jsonl"
        path.write_text(path.read_text().replace("Alpha", "Tampered"))
        with pytest.raises(CorpusError):
            load_snapshot(out)
