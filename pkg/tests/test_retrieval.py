import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from litexplore.analysis import DEFAULT_ANALYZER, analyze
from litexplore.errors import ConsistencyError
from litexplore.ranking import RankedList
from litexplore.retrieval import (
    FilterSpec,
    QueryRequest,
    preprocess_query,
    resolve_filter_set,
    retrieve,
    rrf_fuse,
)
from litexplore.vectors import EmbedderBinding

from oracles import bm25_oracle_search, knn_oracle, rrf_oracle


class TestPreprocessQuery:
    def test_whitespace_collapse(self):
        assert preprocess_query("  Machine   Translation! ") == "machine translation"

    def test_punctuation_to_space(self):
        assert preprocess_query("BM25/RRF") == "bm25 rrf"

    def test_empty(self):
        assert preprocess_query("") == ""

    def test_digits_kept(self):
        assert preprocess_query("GPT-4 scaling") == "gpt 4 scaling"


class TestResolveFilterSet:
    def test_no_filters_means_all(self, snapshot):
        assert resolve_filter_set(snapshot, FilterSpec()) is None

    def test_year_range_matches_independent_scan(self, snapshot):
        got = resolve_filter_set(snapshot, FilterSpec(year_range=(2020, 2021)))
        expected = {
            i for i, pid in enumerate(snapshot.paper_ids)
            if 2020 <= snapshot.papers[pid].publication_year <= 2021
        }
        assert got == expected
        assert expected  # fixture has papers in that window

    def test_unsatisfiable_combination_empty(self, snapshot):
        got = resolve_filter_set(
            snapshot,
            FilterSpec(year_range=(1900, 1900), countries=frozenset({"DE"})),
        )
        assert got == set()

    def test_country_filter(self, snapshot):
        got = resolve_filter_set(snapshot, FilterSpec(countries=frozenset({"FR"})))
        expected = {
            i for i, pid in enumerate(snapshot.paper_ids)
            if "FR" in snapshot.paper_countries[pid]
        }
        assert got == expected and got

    def test_author_name_analyzed_equality(self, snapshot):
        some_author = next(iter(snapshot.authors.values()))
        # different case and punctuation, same analyzed tokens
        noisy = some_author.name.upper().replace(" ", "  ")
        got = resolve_filter_set(snapshot, FilterSpec(authors=frozenset({noisy})))
        key = tuple(analyze(some_author.name, DEFAULT_ANALYZER))
        expected = set()
        for i, pid in enumerate(snapshot.paper_ids):
            names = {
                tuple(analyze(snapshot.authors[a].name, DEFAULT_ANALYZER))
                for a in snapshot.paper_authors[pid]
            }
            if key in names:
                expected.add(i)
        assert got == expected

    def test_intersection_across_kinds(self, snapshot):
        years = resolve_filter_set(snapshot, FilterSpec(year_range=(2010, 2025)))
        countries = resolve_filter_set(snapshot, FilterSpec(countries=frozenset({"US"})))
        both = resolve_filter_set(
            snapshot,
            FilterSpec(year_range=(2010, 2025), countries=frozenset({"US"})),
        )
        assert both == years & countries

    def test_year_range_validation(self):
        with pytest.raises(ValueError):
            FilterSpec(year_range=(2020, 2019))


def ranked(ids, source="lexical"):
    return RankedList.from_scored(
        [(1.0 / (i + 1), pid) for i, pid in enumerate(ids)], source
    )


class TestRrfFuse:
    def test_rank_one_in_both(self):
        fused = rrf_fuse([ranked(["d1", "d2"]), ranked(["d1", "d3"], "semantic")], k=60)
        assert fused.entries[0].paper_id == "d1"
        assert fused.entries[0].score == pytest.approx(2 / 61, abs=1e-9)

    def test_rank_one_and_three(self):
        fused = rrf_fuse(
            [ranked(["d1", "d2"]), ranked(["d3", "d4", "d1"], "semantic")], k=60
        )
        score = dict((e.paper_id, e.score) for e in fused.entries)["d1"]
        assert score == pytest.approx(1 / 61 + 1 / 63, abs=1e-9)
        assert score == pytest.approx(0.032266, abs=1e-6)

    def test_empty_inputs(self):
        assert len(rrf_fuse([], k=60)) == 0
        assert len(rrf_fuse([ranked([])], k=60)) == 0

    def test_random_lists_match_exhaustive_oracle(self):
        rng = np.random.default_rng(17)
        universe = [f"doc{i:02d}" for i in range(40)]
        for _ in range(25):
            a = list(rng.permutation(universe)[: rng.integers(1, 21)])
            b = list(rng.permutation(universe)[: rng.integers(1, 21)])
            fused = rrf_fuse([ranked(a), ranked(b, "semantic")], k=60)
            expected = rrf_oracle([a, b], k=60)
            assert fused.paper_ids() == [pid for pid, _ in expected]
            for entry, (_, score) in zip(fused.entries, expected):
                assert entry.score == pytest.approx(score, abs=1e-9)

    def test_tie_breaks_by_best_rank_then_id(self):
        # zz at rank 1/3, aa at rank 3/1: equal scores; best ranks equal too,
        # so the id decides
        fused = rrf_fuse(
            [ranked(["zz", "mm", "aa"]), ranked(["aa", "mm", "zz"], "semantic")], k=60
        )
        assert fused.paper_ids() == ["aa", "zz", "mm"]

    @given(st.integers(1, 200))
    @settings(max_examples=50, deadline=None)
    def test_score_scale_independence(self, scale):
        # RRF consumes ranks only: rescaling input scores changes nothing
        ids = ["a", "b", "c", "d"]
        base = RankedList.from_scored(
            [(4.0, "a"), (3.0, "b"), (2.0, "c"), (1.0, "d")], "lexical"
        )
        scaled = RankedList.from_scored(
            [(4.0 * scale, "a"), (3.0 * scale, "b"), (2.0 * scale, "c"), (1.0 * scale, "d")],
            "lexical",
        )
        other = ranked(["c", "a"], "semantic")
        assert (
            rrf_fuse([base, other], k=60).paper_ids()
            == rrf_fuse([scaled, other], k=60).paper_ids()
        )

    def test_fusion_dominance(self):
        rng = np.random.default_rng(23)
        universe = [f"d{i}" for i in range(30)]
        for _ in range(20):
            a = list(rng.permutation(universe)[:15])
            b = list(rng.permutation(universe)[:15])
            fused = rrf_fuse([ranked(a), ranked(b, "semantic")], k=60)
            position = {pid: i for i, pid in enumerate(fused.paper_ids())}
            for x in universe:
                for y in universe:
                    if x == y or x not in position or y not in position:
                        continue
                    # x at least as good in both lists -> not below y after fusion
                    def rank_in(lst, pid):
                        return lst.index(pid) + 1 if pid in lst else float("inf")
                    if (rank_in(a, x) <= rank_in(a, y)
                            and rank_in(b, x) <= rank_in(b, y)):
                        assert position[x] <= position[y]


class TestRetrieve:
    def test_doc_top_in_both_paths_is_fused_first(
        self, snapshot, lexical_index, vector_index, projection_binding
    ):
        # query built from one paper's own title: that paper should lead both
        pid = "paper_0000"
        title = snapshot.papers[pid].title
        request = QueryRequest(text=title, limit=10, fuzzy=False)
        result = retrieve(
            snapshot, lexical_index, vector_index, projection_binding, request
        )
        if (result.lexical.paper_ids()[0] == pid
                and result.semantic.paper_ids()[0] == pid):
            assert result.ranked.paper_ids()[0] == pid

    def test_degraded_on_unreachable_embedder(self, snapshot, lexical_index, vector_index):
        binding = EmbedderBinding(
            mode="external-service", dimension=384,
            endpoint="http://127.0.0.1:9/embed", timeout=0.2,
        )
        request = QueryRequest(text="machine translation", limit=10)
        result = retrieve(snapshot, lexical_index, vector_index, binding, request)
        assert result.semantic_degraded is True
        assert result.ranked.paper_ids() == [
            e.paper_id for e in result.lexical.entries[:10]
        ]

    def test_composed_oracle_pipeline(
        self, snapshot, lexical_index, vector_index, projection_binding, analyzed_fields
    ):
        request = QueryRequest(text="machine translation", limit=30, fuzzy=False)
        result = retrieve(
            snapshot, lexical_index, vector_index, projection_binding, request
        )
        tokens = list(result.query_tokens)
        lex = bm25_oracle_search(analyzed_fields, tokens)[: request.depth]
        from litexplore.vectors import project_tokens

        qvec = project_tokens(tokens, seed=42, dimension=384)
        sem = knn_oracle(
            {pid: v for pid, v in snapshot.embeddings.items()}, qvec
        )[: request.depth]
        fused = rrf_oracle([[p for p, _ in lex], [p for p, _ in sem]], k=60)
        assert result.ranked.paper_ids() == [p for p, _ in fused][:30]

    def test_filter_soundness_sample(
        self, snapshot, lexical_index, vector_index, projection_binding
    ):
        filters = FilterSpec(year_range=(2015, 2020), countries=frozenset({"US", "DE"}))
        request = QueryRequest(text="quantum photon", limit=50, filters=filters)
        result = retrieve(
            snapshot, lexical_index, vector_index, projection_binding, request
        )
        assert len(result.ranked) > 0
        for pid in result.ranked.paper_ids():
            paper = snapshot.papers[pid]
            assert 2015 <= paper.publication_year <= 2020
            assert {"US", "DE"} & set(snapshot.paper_countries[pid])

    def test_truncation_prefix_with_fixed_depth(
        self, snapshot, lexical_index, vector_index, projection_binding
    ):
        small = QueryRequest(text="graph learning", limit=10, per_path_depth=80)
        large = QueryRequest(text="graph learning", limit=40, per_path_depth=80)
        a = retrieve(snapshot, lexical_index, vector_index, projection_binding, small)
        b = retrieve(snapshot, lexical_index, vector_index, projection_binding, large)
        assert b.ranked.paper_ids()[:10] == a.ranked.paper_ids()

    def test_mismatched_corpus_is_consistency_error(
        self, snapshot, lexical_index, vector_index, projection_binding
    ):
        import copy

        stale = copy.copy(lexical_index)
        stale.corpus_hash = "deadbeef"
        with pytest.raises(ConsistencyError):
            retrieve(snapshot, stale, vector_index, projection_binding,
                     QueryRequest(text="x", limit=5))

    def test_empty_query_empty_result(
        self, snapshot, lexical_index, vector_index, projection_binding
    ):
        request = QueryRequest(text="!!!", limit=5)
        result = retrieve(
            snapshot, lexical_index, vector_index, projection_binding, request
        )
        assert len(result.ranked) == 0
        assert result.semantic_degraded is False

    def test_request_validation(self):
        with pytest.raises(ValueError):
            QueryRequest(text="x", limit=0)
        with pytest.raises(ValueError):
            QueryRequest(text="x", limit=10, rrf_k=0)
        with pytest.raises(ValueError):
            QueryRequest(text="x", limit=10, per_path_depth=5)
