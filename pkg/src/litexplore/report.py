"""Render an exploration into CSV tables and matplotlib figures.

Figures and delimited tables are written side by side in the output
directory; they live outside the exploration artifact directory, which
stays JSON-only and byte-reproducible.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

FIGURE_DPI = 120


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _topic_label(topic) -> str:
    return "outliers" if str(topic) == "-1" else f"topic {topic}"


def topic_distribution_figure(analytics: dict):
    dist = analytics.get("topic_distribution", {})
    topics = sorted(dist, key=lambda t: int(t))
    counts = [dist[t] for t in topics]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.bar(range(len(topics)), counts, color="#33658a")
    ax.set_xticks(range(len(topics)))
    ax.set_xticklabels([_topic_label(t) for t in topics], rotation=45, ha="right")
    ax.set_ylabel("papers")
    ax.set_title("Papers per topic")
    fig.tight_layout()
    return fig


def yearly_trends_figure(analytics: dict):
    rows = analytics.get("yearly_topic_counts", [])
    years = sorted({r["year"] for r in rows if r["year"] != "unknown"})
    by_topic: dict = {}
    for r in rows:
        if r["year"] == "unknown":
            continue
        by_topic.setdefault(r["topic"], {})[r["year"]] = r["count"]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for topic in sorted(by_topic, key=int):
        series = [by_topic[topic].get(y, 0) for y in years]
        ax.plot(years, series, marker="o", markersize=3, label=_topic_label(topic))
    ax.set_xlabel("year")
    ax.set_ylabel("papers")
    ax.set_title("Topic activity over time")
    if by_topic:
        ax.legend(fontsize=7, ncol=2)
    if years:
        ticks = years[:: max(1, len(years) // 12)]
        ax.set_xticks(ticks)
        ax.set_xticklabels(ticks, rotation=45, ha="right")
    fig.tight_layout()
    return fig


def country_impact_figure(analytics: dict, top_n: int = 15):
    impact = analytics.get("country_impact", {})
    pairs = sorted(impact.items(), key=lambda kv: (-kv[1], kv[0]))[:top_n]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    labels = [c for c, _ in pairs][::-1]
    values = [v for _, v in pairs][::-1]
    ax.barh(range(len(pairs)), values, color="#86bbd8")
    ax.set_yticks(range(len(pairs)))
    ax.set_yticklabels(labels)
    ax.set_xlabel("cumulative citation indegree")
    ax.set_title("Country impact")
    fig.tight_layout()
    return fig


def write_report(result: dict, out_dir) -> list:
    """Write all tables and figures for one exploration; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    analytics = result.get("analytics", {})
    written = []

    _write_csv(
        out / "results.csv",
        ["rank", "paper_id", "score", "title", "publication_year", "subject"],
        [
            [r["rank"], r["paper_id"], r["score"], r["title"], r["publication_year"], r.get("subject") or ""]
            for r in result.get("results", [])
        ],
    )
    written.append(out / "results.csv")

    _write_csv(
        out / "topics.csv",
        ["topic_id", "document_count", "keywords"],
        [
            [t["topic_id"], t["document_count"], " ".join(k for k, _ in t["keywords"])]
            for t in result.get("topics", [])
        ],
    )
    written.append(out / "topics.csv")

    _write_csv(
        out / "topic_distribution.csv",
        ["topic_id", "paper_count"],
        sorted(
            ([int(t), c] for t, c in analytics.get("topic_distribution", {}).items()),
            key=lambda r: r[0],
        ),
    )
    written.append(out / "topic_distribution.csv")

    _write_csv(
        out / "yearly_topic_counts.csv",
        ["year", "topic_id", "count"],
        [[r["year"], r["topic"], r["count"]] for r in analytics.get("yearly_topic_counts", [])],
    )
    written.append(out / "yearly_topic_counts.csv")

    for name in ("country_impact", "institution_impact", "author_impact"):
        _write_csv(
            out / f"{name}.csv",
            ["key", "impact"],
            sorted(analytics.get(name, {}).items(), key=lambda kv: (-kv[1], kv[0])),
        )
        written.append(out / f"{name}.csv")

    _write_csv(
        out / "top_papers.csv",
        ["paper_id", "impact"],
        [[r["paper_id"], r["impact"]] for r in analytics.get("top_papers", [])],
    )
    written.append(out / "top_papers.csv")

    for name, fig in (
        ("topic_distribution.png", topic_distribution_figure(analytics)),
        ("yearly_topic_trends.png", yearly_trends_figure(analytics)),
        ("country_impact.png", country_impact_figure(analytics)),
    ):
        fig.savefig(out / name, dpi=FIGURE_DPI)
        plt.close(fig)
        written.append(out / name)
    return written
