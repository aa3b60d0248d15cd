"""Query-conditioned knowledge graph and its analytics.

The graph is a typed, directed, attributed multigraph over the retrieved
papers and the entities reachable from them: authors, institutions,
countries, topics and years. Citation edges exist only when both endpoints
were retrieved, so paper impact (citation indegree) and entity impact (sum
of a paper set's indegrees) stay purely graph-topological.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .corpus import CorpusSnapshot, UNKNOWN_YEAR
from .errors import ConsistencyError, GraphTypeError, NotFoundError
from .ranking import RankedList
from .topics import TopicAssignment, TopicSummary

# (from kind, to kind) signature per edge label
EDGE_SIGNATURES = {
    "Authorship": ("Author", "Paper"),
    "AffiliatedWith": ("Paper", "Institution"),
    "LocatedIn": ("Paper", "Country"),
    "PublishedIn": ("Paper", "Year"),
    "HasTopic": ("Paper", "Topic"),
    "Cites": ("Paper", "Paper"),
}

NODE_KINDS = ("Paper", "Author", "Institution", "Country", "Topic", "Year")


@dataclass(frozen=True, order=True)
class NodeRef:
    kind: str
    key: str


@dataclass(frozen=True)
class GraphEdge:
    source: NodeRef
    target: NodeRef
    label: str
    weight: Optional[float] = None

    def sort_key(self):
        return (self.label, self.source, self.target)


@dataclass
class KnowledgeGraph:
    nodes: dict = field(default_factory=dict)  # NodeRef -> attr dict
    edges: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def edges_by_label(self, label: str):
        return [e for e in self.edges if e.label == label]


def _year_key(year: int) -> str:
    return "unknown" if year == UNKNOWN_YEAR else str(year)


def build_graph(
    retrieved: RankedList,
    assignments: Sequence[TopicAssignment],
    summaries: Sequence[TopicSummary],
    snapshot: CorpusSnapshot,
    provenance: Optional[dict] = None,
) -> KnowledgeGraph:
    """Materialize the graph for one retrieval.

    Nodes and edges are emitted in a canonical sorted order so that equal
    inputs serialize to identical bytes.
    """
    retrieved_ids = retrieved.paper_ids()
    retrieved_set = set(retrieved_ids)
    assign_by_id = {}
    for a in assignments:
        if a.paper_id not in retrieved_set:
            raise ConsistencyError(
                f"assignment references {a.paper_id!r}, not in the retrieved set"
            )
        assign_by_id[a.paper_id] = a

    graph = KnowledgeGraph(provenance=dict(provenance or {}))
    nodes = graph.nodes
    edge_set = set()

    def add_edge(src: NodeRef, dst: NodeRef, label: str, weight=None):
        sig = EDGE_SIGNATURES[label]
        if (src.kind, dst.kind) != sig:
            raise GraphTypeError(f"{label} edge cannot connect {src.kind} -> {dst.kind}")
        edge_set.add(GraphEdge(src, dst, label, weight))

    for s in summaries:
        nodes[NodeRef("Topic", str(s.topic_id))] = {
            "topic_id": s.topic_id,
            "keywords": [[t, w] for t, w in s.keywords],
            "document_count": s.document_count,
        }

    for pid in sorted(retrieved_set):
        paper = snapshot.papers[pid]
        p_ref = NodeRef("Paper", pid)
        assignment = assign_by_id.get(pid)
        nodes[p_ref] = {
            "title": paper.title,
            "publication_year": paper.publication_year,
            "citation_count": 0,  # indegree, filled in below
            "topic_id": assignment.topic_id if assignment else None,
            "topic_probability": assignment.probability if assignment else None,
        }
        y_ref = NodeRef("Year", _year_key(paper.publication_year))
        nodes.setdefault(y_ref, {"year": _year_key(paper.publication_year)})
        add_edge(p_ref, y_ref, "PublishedIn")
        for aid in snapshot.paper_authors[pid]:
            a_ref = NodeRef("Author", aid)
            nodes.setdefault(a_ref, {"name": snapshot.authors[aid].name})
            add_edge(a_ref, p_ref, "Authorship")
        for inst in snapshot.paper_institutions[pid]:
            i_ref = NodeRef("Institution", inst)
            nodes.setdefault(i_ref, {"institution_id": inst})
            add_edge(p_ref, i_ref, "AffiliatedWith")
        for code in snapshot.paper_countries[pid]:
            c_ref = NodeRef("Country", code)
            nodes.setdefault(c_ref, {"country_code": code})
            add_edge(p_ref, c_ref, "LocatedIn")
        if assignment is not None:
            t_ref = NodeRef("Topic", str(assignment.topic_id))
            if t_ref not in nodes:
                nodes[t_ref] = {
                    "topic_id": assignment.topic_id,
                    "keywords": [],
                    "document_count": 0,
                }
            add_edge(p_ref, t_ref, "HasTopic", weight=assignment.probability)

    # citation closure: only edges with both endpoints retrieved
    indegree = {pid: 0 for pid in retrieved_set}
    for cite in snapshot.citations:
        if cite.citing_paper_id in retrieved_set and cite.cited_paper_id in retrieved_set:
            add_edge(
                NodeRef("Paper", cite.citing_paper_id),
                NodeRef("Paper", cite.cited_paper_id),
                "Cites",
            )
            indegree[cite.cited_paper_id] += 1
    for pid, deg in indegree.items():
        nodes[NodeRef("Paper", pid)]["citation_count"] = deg

    graph.nodes = {ref: nodes[ref] for ref in sorted(nodes)}
    graph.edges = sorted(edge_set, key=GraphEdge.sort_key)
    return graph


def paper_impact(graph: KnowledgeGraph, node: NodeRef) -> int:
    """Citation indegree of a paper within this graph."""
    if node.kind != "Paper":
        raise GraphTypeError(f"paper_impact needs a Paper node, got {node.kind}")
    if node not in graph.nodes:
        raise NotFoundError(f"no node {node}")
    return sum(1 for e in graph.edges if e.label == "Cites" and e.target == node)


_ENTITY_PAPER_EDGES = {
    "Author": "Authorship",
    "Institution": "AffiliatedWith",
    "Country": "LocatedIn",
}


def connected_papers(graph: KnowledgeGraph, node: NodeRef) -> set:
    """Papers linked to an author/institution/country, as a set."""
    label = _ENTITY_PAPER_EDGES.get(node.kind)
    if label is None:
        raise GraphTypeError(f"entity impact not defined for {node.kind} nodes")
    papers = set()
    for e in graph.edges:
        if e.label != label:
            continue
        if node.kind == "Author" and e.source == node:
            papers.add(e.target)
        elif node.kind != "Author" and e.target == node:
            papers.add(e.source)
    return papers


def entity_impact(graph: KnowledgeGraph, node: NodeRef) -> int:
    """Cumulative citation indegree over the entity's papers (each once)."""
    if node not in graph.nodes:
        raise NotFoundError(f"no node {node}")
    return sum(paper_impact(graph, p) for p in connected_papers(graph, node))


@dataclass(frozen=True)
class AnalyticsBundle:
    topic_distribution: dict  # topic_id -> paper count
    yearly_topic_counts: list  # [(year key, topic_id, count)], sorted
    country_impact: dict
    institution_impact: dict
    author_impact: dict
    top_papers: list  # [(paper_id, impact)], impact desc then id

    def to_dict(self) -> dict:
        return {
            "topic_distribution": {str(t): c for t, c in self.topic_distribution.items()},
            "yearly_topic_counts": [
                {"year": y, "topic": t, "count": c} for y, t, c in self.yearly_topic_counts
            ],
            "country_impact": dict(self.country_impact),
            "institution_impact": dict(self.institution_impact),
            "author_impact": dict(self.author_impact),
            "top_papers": [{"paper_id": p, "impact": i} for p, i in self.top_papers],
        }


def compute_analytics(graph: KnowledgeGraph, top_k: int = 20) -> AnalyticsBundle:
    """Dashboard tables derived purely from graph edges and attributes.

    Single pass over the edges; equivalent to calling paper_impact and
    entity_impact node by node.
    """
    indegree: dict = {ref: 0 for ref in graph.nodes if ref.kind == "Paper"}
    entity_papers: dict = {
        ref: set() for ref in graph.nodes if ref.kind in _ENTITY_PAPER_EDGES
    }
    for e in graph.edges:
        if e.label == "Cites":
            indegree[e.target] += 1
        elif e.label == "Authorship":
            entity_papers[e.source].add(e.target)
        elif e.label in ("AffiliatedWith", "LocatedIn"):
            entity_papers[e.target].add(e.source)

    topic_distribution: dict[int, int] = {}
    yearly: dict[tuple, int] = {}
    for ref, attrs in graph.nodes.items():
        if ref.kind != "Paper":
            continue
        topic = attrs.get("topic_id")
        if topic is not None:
            topic_distribution[topic] = topic_distribution.get(topic, 0) + 1
            year = _year_key(attrs["publication_year"])
            yearly[(year, topic)] = yearly.get((year, topic), 0) + 1

    def impacts(kind: str) -> dict:
        return {
            ref.key: sum(indegree[p] for p in papers)
            for ref, papers in sorted(entity_papers.items())
            if ref.kind == kind
        }

    top_papers = sorted(
        ((ref.key, deg) for ref, deg in indegree.items()),
        key=lambda t: (-t[1], t[0]),
    )[:top_k]

    return AnalyticsBundle(
        topic_distribution=dict(sorted(topic_distribution.items())),
        yearly_topic_counts=sorted((y, t, c) for (y, t), c in yearly.items()),
        country_impact=impacts("Country"),
        institution_impact=impacts("Institution"),
        author_impact=impacts("Author"),
        top_papers=top_papers,
    )


# --- node-link serialization --------------------------------------------------


def export_graph(graph: KnowledgeGraph) -> dict:
    """Deterministic node-link document; round-trips through import_graph."""
    return {
        "nodes": [
            {"kind": ref.kind, "key": ref.key, "attrs": attrs}
            for ref, attrs in graph.nodes.items()
        ],
        "edges": [
            {
                "from": {"kind": e.source.kind, "key": e.source.key},
                "to": {"kind": e.target.kind, "key": e.target.key},
                "label": e.label,
                **({"weight": e.weight} if e.weight is not None else {}),
            }
            for e in graph.edges
        ],
        "provenance": graph.provenance,
        "node_count": graph.node_count,
        "edge_count": graph.edge_count,
    }


def graph_to_json(graph: KnowledgeGraph) -> str:
    return json.dumps(export_graph(graph), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def import_graph(doc: dict) -> KnowledgeGraph:
    graph = KnowledgeGraph(provenance=dict(doc.get("provenance", {})))
    for n in doc["nodes"]:
        graph.nodes[NodeRef(n["kind"], n["key"])] = n["attrs"]
    for e in doc["edges"]:
        graph.edges.append(
            GraphEdge(
                NodeRef(e["from"]["kind"], e["from"]["key"]),
                NodeRef(e["to"]["kind"], e["to"]["key"]),
                e["label"],
                e.get("weight"),
            )
        )
    graph.nodes = {ref: graph.nodes[ref] for ref in sorted(graph.nodes)}
    graph.edges = sorted(graph.edges, key=GraphEdge.sort_key)
    return graph
