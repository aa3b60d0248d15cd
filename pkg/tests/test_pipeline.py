import json
from pathlib import Path

import pytest

from litexplore.analysis import DEFAULT_ANALYZER
from litexplore.config import ServiceConfig, load_config
from litexplore.corpus import load_snapshot, persist_snapshot
from litexplore.errors import ConfigError, NotFoundError
from litexplore.pipeline import Explorer, build_indexes, generation_id, round_floats
from litexplore.retrieval import FilterSpec


class TestConfig:
    def test_defaults(self):
        config = ServiceConfig()
        assert config.rrf_k == 60
        assert config.default_limit == 5000
        assert config.topic_mode == "auto"

    def test_file_and_env_overrides(self, tmp_path):
        cfg = tmp_path / "svc.conf"
        cfg.write_text("rrf_k = 30\ntopic_mode = nmf\n# comment\nfuzzy = off\n")
        config = load_config(cfg, env={})
        assert config.rrf_k == 30
        assert config.topic_mode == "nmf"
        assert config.fuzzy is False
        config = load_config(cfg, env={"ISLE_RRF_K": "45"})
        assert config.rrf_k == 45

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "svc.conf"
        cfg.write_text("no_such_setting = 1\n")
        with pytest.raises(ConfigError):
            load_config(cfg, env={})

    def test_non_positive_rejected(self):
        with pytest.raises(ConfigError):
            ServiceConfig(default_limit=0)
        with pytest.raises(ConfigError):
            ServiceConfig(topic_mode="wrong")

    def test_embedder_binding_modes(self):
        proj = ServiceConfig().embedder_binding()
        assert proj.mode == "deterministic-projection"
        ext = ServiceConfig(
            embedder_mode="external-service", embedder_endpoint="http://x/embed"
        ).embedder_binding()
        assert ext.mode == "external-service"


class TestRoundFloats:
    def test_nested(self):
        obj = {"a": [0.1234567891239, {"b": (1.0000000000004,)}], "c": "s"}
        out = round_floats(obj)
        assert out["a"][0] == 0.123456789
        assert out["a"][1]["b"][0] == 1.0
        assert out["c"] == "s"


class TestIndexGenerations:
    def test_build_then_skip(self, snapshot, tmp_path):
        config = ServiceConfig(index_dir=str(tmp_path / "index"))
        gen1, built1 = build_indexes(snapshot, config)
        gen2, built2 = build_indexes(snapshot, config)
        assert built1 is True and built2 is False
        assert gen1 == gen2
        assert (tmp_path / "index" / "CURRENT").read_text().strip() == gen1

    def test_generation_tracks_params(self, snapshot, tmp_path):
        a = generation_id(snapshot, ServiceConfig(), DEFAULT_ANALYZER)
        b = generation_id(snapshot, ServiceConfig(k1=1.6), DEFAULT_ANALYZER)
        assert a != b

    def test_round_trip_through_disk(self, snapshot, tmp_path):
        from litexplore.pipeline import load_indexes

        config = ServiceConfig(
            index_dir=str(tmp_path / "index"), corpus_dir=str(tmp_path / "corpus")
        )
        persist_snapshot(snapshot, config.corpus_dir)
        build_indexes(snapshot, config)
        gen, lexical, vector = load_indexes(config)
        assert lexical.corpus_hash == snapshot.content_hash
        assert vector.corpus_hash == snapshot.content_hash
        explorer = Explorer.from_config(config)
        assert explorer.health()["papers"] == snapshot.stats.paper_count


class TestExplorer:
    def test_query_id_stable_and_generation_bound(self, make_explorer):
        explorer = make_explorer()
        request = explorer.make_request("machine translation", limit=50)
        qid1 = explorer.query_id(request, "auto")
        qid2 = explorer.query_id(request, "auto")
        assert qid1 == qid2
        other_gen = make_explorer(rrf_k=60)
        other_gen.generation = "different"
        assert other_gen.query_id(request, "auto") != qid1

    def test_repeated_explore_returns_identical_payload(self, make_explorer):
        explorer = make_explorer()
        request = explorer.make_request("machine translation", limit=40)
        first = explorer.explore(request)
        second = explorer.explore(request)
        assert first == second
        assert second is first  # serviced from the in-memory cache

    def test_persisted_artifacts_exist(self, make_explorer):
        explorer = make_explorer()
        payload = explorer.explore(explorer.make_request("quantum optics", limit=30))
        out = explorer.exploration_dir(payload["query_id"])
        for name in ("result.json", "topics.json", "graph.json", "analytics.json"):
            assert (out / name).exists()
        graph_doc = json.loads((out / "graph.json").read_text())
        assert graph_doc["node_count"] == payload["graph"]["node_count"]
        assert graph_doc["edge_count"] == payload["graph"]["edge_count"]

    def test_disk_cache_survives_new_explorer(self, snapshot, lexical_index,
                                              vector_index, tmp_path, make_explorer):
        explorer = make_explorer()
        request = explorer.make_request("graph learning", limit=30)
        payload = explorer.explore(request)
        fresh = make_explorer()  # same dirs via the same tmp_path
        again = fresh.explore(fresh.make_request("graph learning", limit=30))
        assert again == payload

    def test_no_match_query_empty_result(self, make_explorer):
        explorer = make_explorer()
        # no analyzable tokens: both paths come back empty
        payload = explorer.explore(explorer.make_request("!!!", limit=10))
        assert payload["result_count"] == 0
        assert payload["results"] == []
        assert payload["topics"] == []
        assert payload["graph"]["node_count"] == 0
        # unsatisfiable filters likewise yield a structured empty result
        filtered = explorer.explore(explorer.make_request(
            "machine translation",
            filters=FilterSpec(year_range=(1900, 1901)),
            limit=10,
        ))
        assert filtered["result_count"] == 0
        assert filtered["graph"]["edge_count"] == 0

    def test_assignments_cover_results(self, make_explorer):
        explorer = make_explorer()
        payload = explorer.explore(explorer.make_request("machine translation", limit=60))
        assigned = {a["paper_id"] for a in payload["assignments"]}
        assert assigned == {r["paper_id"] for r in payload["results"]}

    def test_filters_serialized_canonically(self, make_explorer):
        explorer = make_explorer()
        request = explorer.make_request(
            "neural", filters=FilterSpec(countries=frozenset({"US", "DE"})), limit=20
        )
        payload = explorer.explore(request)
        assert payload["filters"]["countries"] == ["DE", "US"]

    def test_search_returns_results_only(self, make_explorer):
        explorer = make_explorer()
        payload = explorer.search(explorer.make_request("machine translation", limit=10))
        assert "topics" not in payload
        assert len(payload["results"]) <= 10

    def test_paper_detail_with_graph_impact(self, make_explorer):
        explorer = make_explorer()
        result = explorer.explore(explorer.make_request("machine translation", limit=30))
        pid = result["results"][0]["paper_id"]
        detail = explorer.paper_detail(pid, qid=result["query_id"])
        assert detail["paper_id"] == pid
        assert "graph_local_impact" in detail
        with pytest.raises(NotFoundError):
            explorer.paper_detail("missing_paper")

    def test_load_artifact_unknown_query(self, make_explorer):
        explorer = make_explorer()
        with pytest.raises(NotFoundError):
            explorer.load_artifact("0" * 16, "graph.json")

    def test_cache_eviction_respects_size(self, make_explorer):
        explorer = make_explorer(cache_size=2)
        for query in ("alpha neural", "beta quantum", "gamma stellar"):
            explorer.explore(explorer.make_request(query, limit=5))
        assert len(explorer._cache) == 2

    def test_concurrent_identical_requests_coalesce(self, make_explorer):
        import threading

        explorer = make_explorer()
        runs = []
        original = explorer._run_exploration

        def counting(*args, **kwargs):
            runs.append(1)
            return original(*args, **kwargs)

        explorer._run_exploration = counting
        results = []

        def worker():
            request = explorer.make_request("machine translation", limit=30)
            results.append(explorer.explore(request))

        threads = [threading.Thread(target=worker) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(runs) == 1  # one execution served all four requests
        assert all(r == results[0] for r in results)

    def test_degraded_flag_in_payload(self, snapshot, lexical_index, vector_index,
                                      tmp_path):
        config = ServiceConfig(
            explorations_dir=str(tmp_path / "exp"),
            embedder_mode="external-service",
            embedder_endpoint="http://127.0.0.1:9/embed",
            embedder_timeout=0.2,
        )
        gen = generation_id(snapshot, config, DEFAULT_ANALYZER)
        explorer = Explorer(snapshot, lexical_index, vector_index, config, gen)
        payload = explorer.explore(explorer.make_request("machine translation", limit=20))
        assert payload["semantic_degraded"] is True
        assert payload["result_count"] > 0
