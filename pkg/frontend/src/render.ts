// Pure view functions: payload in, markup string out. Deterministic, no
// state, and render-only — every number that appears in the output is a
// field of the exploration payload, the graph document, or the analytics
// tables, never something computed here.

import type {
  Analytics,
  ExplorationResult,
  GraphDocument,
  GraphNode,
  ResultRow,
  TopicSummary,
} from "./types.js";
import { edgesOf, type Layout } from "./layout.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const KIND_COLORS: Record<string, string> = {
  Paper: "#33658a",
  Author: "#f6ae2d",
  Institution: "#86bbd8",
  Country: "#2f4858",
  Topic: "#f26419",
  Year: "#9e8fb2",
};

export function topicLabel(topicId: number): string {
  return topicId === -1 ? "outliers" : `topic ${topicId}`;
}

// --- banners -----------------------------------------------------------------

export function degradationBadge(result: ExplorationResult): string {
  if (!result.semantic_degraded) return "";
  return `<span class="badge badge-warn" data-role="degraded">lexical-only</span>`;
}

export function errorBanner(message: string | null): string {
  if (!message) return "";
  return (
    `<div class="banner banner-error" data-role="error">` +
    `${escapeHtml(message)}<button data-action="dismiss-error">×</button></div>`
  );
}

// --- results -----------------------------------------------------------------

export function resultCountBadge(result: ExplorationResult): string {
  return `<span class="badge" data-role="result-count">${result.result_count}</span>`;
}

export function renderResults(rows: ResultRow[]): string {
  const items = rows
    .map(
      (row) =>
        `<li class="result" data-paper="${escapeHtml(row.paper_id)}">` +
        `<span class="rank">${row.rank}</span>` +
        `<a data-action="inspect-paper" data-key="Paper:${escapeHtml(row.paper_id)}">` +
        `${escapeHtml(row.title)}</a>` +
        `<span class="year">${row.publication_year}</span>` +
        `<span class="score">${row.score}</span>` +
        (row.subject ? `<span class="subject">${escapeHtml(row.subject)}</span>` : "") +
        `</li>`,
    )
    .join("");
  return `<ol class="results" data-role="results">${items}</ol>`;
}

// --- topic views ---------------------------------------------------------------

export function renderTopicChart(result: ExplorationResult): string {
  const dist = result.analytics.topic_distribution;
  const topics = Object.keys(dist).sort((a, b) => Number(a) - Number(b));
  if (topics.length === 0) return `<svg class="chart" data-role="topic-chart"></svg>`;
  const max = Math.max(...topics.map((t) => dist[t]));
  const barWidth = 40;
  const gap = 12;
  const chartHeight = 160;
  const bars = topics
    .map((topic, i) => {
      const count = dist[topic];
      const h = max > 0 ? Math.round((count / max) * (chartHeight - 30)) : 0;
      const x = i * (barWidth + gap) + 10;
      const y = chartHeight - h - 18;
      return (
        `<g class="bar" data-action="select-topic" data-topic="${topic}">` +
        `<rect x="${x}" y="${y}" width="${barWidth}" height="${h}"></rect>` +
        `<text class="count" x="${x + barWidth / 2}" y="${y - 4}">${count}</text>` +
        `<text class="label" x="${x + barWidth / 2}" y="${chartHeight - 4}">` +
        `${escapeHtml(topicLabel(Number(topic)))}</text></g>`
      );
    })
    .join("");
  const width = topics.length * (barWidth + gap) + 20;
  return (
    `<svg class="chart" data-role="topic-chart" viewBox="0 0 ${width} ${chartHeight}" ` +
    `width="${width}" height="${chartHeight}">${bars}</svg>`
  );
}

export function renderWordCloud(topic: TopicSummary): string {
  // font size scales between 11 and 30 px by keyword weight
  const weights = topic.keywords.map(([, w]) => w);
  const max = Math.max(...weights, 1e-12);
  const min = Math.min(...weights, max);
  const words = topic.keywords
    .map(([term, weight]) => {
      const scale = max > min ? (weight - min) / (max - min) : 1;
      const size = Math.round(11 + scale * 19);
      return (
        `<span class="cloud-word" style="font-size:${size}px" ` +
        `title="${weight}">${escapeHtml(term)}</span>`
      );
    })
    .join(" ");
  return (
    `<div class="cloud" data-role="cloud" data-topic="${topic.topic_id}">` +
    `<h4>${escapeHtml(topicLabel(topic.topic_id))}` +
    `<span class="doc-count">${topic.document_count}</span></h4>` +
    `<div class="cloud-words">${words}</div></div>`
  );
}

export function renderTrends(analytics: Analytics): string {
  const rows = analytics.yearly_topic_counts.filter((r) => r.year !== "unknown");
  if (rows.length === 0) return `<svg class="chart" data-role="trends"></svg>`;
  const years = [...new Set(rows.map((r) => r.year))].sort();
  const topics = [...new Set(rows.map((r) => r.topic))].sort((a, b) => a - b);
  const maxCount = Math.max(...rows.map((r) => r.count));
  const width = 560;
  const height = 180;
  const xOf = (year: string) =>
    years.length > 1 ? (years.indexOf(year) / (years.length - 1)) * (width - 80) + 40 : width / 2;
  const yOf = (count: number) => height - 24 - (count / Math.max(maxCount, 1)) * (height - 50);
  const series = topics
    .map((topic) => {
      const byYear = new Map(
        rows.filter((r) => r.topic === topic).map((r) => [r.year, r.count]),
      );
      const points = years
        .map((year) => `${xOf(year).toFixed(1)},${yOf(byYear.get(year) ?? 0).toFixed(1)}`)
        .join(" ");
      return (
        `<polyline class="trend" data-topic="${topic}" fill="none" points="${points}">` +
        `</polyline>`
      );
    })
    .join("");
  const axis = years
    .map(
      (year) =>
        `<text class="tick" x="${xOf(year).toFixed(1)}" y="${height - 6}">` +
        `${escapeHtml(year)}</text>`,
    )
    .join("");
  return (
    `<svg class="chart" data-role="trends" viewBox="0 0 ${width} ${height}" ` +
    `width="${width}" height="${height}">${series}${axis}</svg>`
  );
}

// --- impact tables -------------------------------------------------------------

export function renderImpactTable(
  title: string,
  impact: Record<string, number>,
  action: string,
  limit = 15,
): string {
  const rows = Object.entries(impact)
    .sort(([ka, va], [kb, vb]) => (vb - va !== 0 ? vb - va : ka < kb ? -1 : 1))
    .slice(0, limit)
    .map(
      ([key, value]) =>
        `<tr data-action="${action}" data-key="${escapeHtml(key)}">` +
        `<td>${escapeHtml(key)}</td><td class="impact">${value}</td></tr>`,
    )
    .join("");
  return (
    `<table class="impact-table" data-role="${action}-table">` +
    `<caption>${escapeHtml(title)}</caption>` +
    `<thead><tr><th>${escapeHtml(title)}</th><th>impact</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

// --- graph ---------------------------------------------------------------------

export function renderGraphSvg(layout: Layout, selectedKey: string | null): string {
  const positions = new Map(layout.placed.map((p) => [`${p.node.kind}:${p.node.key}`, p]));
  const lines = layout.edges
    .map((edge) => {
      const a = positions.get(edge.from);
      const b = positions.get(edge.to);
      if (!a || !b) return "";
      return (
        `<line class="edge edge-${edge.label}" x1="${a.x.toFixed(1)}" y1="${a.y.toFixed(1)}" ` +
        `x2="${b.x.toFixed(1)}" y2="${b.y.toFixed(1)}"></line>`
      );
    })
    .join("");
  const circles = layout.placed
    .map((p) => {
      const key = `${p.node.kind}:${p.node.key}`;
      const selected = key === selectedKey ? " selected" : "";
      const radius = p.node.kind === "Paper" ? 5 : 7;
      return (
        `<circle class="node node-${p.node.kind}${selected}" data-action="inspect-node" ` +
        `data-key="${escapeHtml(key)}" cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" ` +
        `r="${radius}" fill="${KIND_COLORS[p.node.kind] ?? "#999"}">` +
        `<title>${escapeHtml(key)}</title></circle>`
      );
    })
    .join("");
  const note = layout.truncated
    ? `<text class="truncated" x="10" y="16">showing highest-degree nodes only</text>`
    : "";
  return (
    `<svg class="graph" data-role="graph" viewBox="0 0 900 600">` +
    `${lines}${circles}${note}</svg>`
  );
}

// --- node inspection -------------------------------------------------------------

function findNode(graph: GraphDocument, key: string): GraphNode | undefined {
  return graph.nodes.find((n) => `${n.kind}:${n.key}` === key);
}

export function renderNodePanel(
  graph: GraphDocument,
  analytics: Analytics,
  nodeKey: string | null,
): string {
  if (!nodeKey) return `<div class="panel" data-role="node-panel"></div>`;
  const node = findNode(graph, nodeKey);
  if (!node) return `<div class="panel" data-role="node-panel"></div>`;

  const rows: string[] = [`<h3>${escapeHtml(node.kind)} ${escapeHtml(node.key)}</h3>`];
  if (node.kind === "Paper") {
    const attrs = node.attrs as {
      title: string;
      publication_year: number;
      citation_count: number;
      topic_id: number | null;
      topic_probability: number | null;
    };
    rows.push(`<p class="title">${escapeHtml(attrs.title)}</p>`);
    rows.push(`<dl>`);
    rows.push(`<dt>year</dt><dd data-field="year">${attrs.publication_year}</dd>`);
    if (attrs.topic_id !== null) {
      rows.push(`<dt>topic</dt><dd data-field="topic">${attrs.topic_id}</dd>`);
    }
    rows.push(
      `<dt>citations in graph</dt><dd data-field="citations">${attrs.citation_count}</dd>`,
    );
    rows.push(`</dl>`);
    const neighbors = edgesOf(graph, nodeKey)
      .map((edge) => {
        const other =
          `${edge.from.kind}:${edge.from.key}` === nodeKey ? edge.to : edge.from;
        return (
          `<li>${escapeHtml(edge.label)} → <a data-action="inspect-node" ` +
          `data-key="${escapeHtml(`${other.kind}:${other.key}`)}">` +
          `${escapeHtml(`${other.kind}:${other.key}`)}</a></li>`
        );
      })
      .join("");
    rows.push(`<ul class="neighbors" data-role="neighbors">${neighbors}</ul>`);
  } else if (node.kind === "Topic") {
    const attrs = node.attrs as { keywords: [string, number][]; document_count: number };
    rows.push(`<dl><dt>documents</dt><dd data-field="documents">${attrs.document_count}</dd></dl>`);
    const words = attrs.keywords
      .map(([term, weight]) => `<li>${escapeHtml(term)} <span class="weight">${weight}</span></li>`)
      .join("");
    rows.push(`<ol class="keywords" data-role="keywords">${words}</ol>`);
  } else {
    const table =
      node.kind === "Author"
        ? analytics.author_impact
        : node.kind === "Institution"
          ? analytics.institution_impact
          : node.kind === "Country"
            ? analytics.country_impact
            : null;
    if (table && node.key in table) {
      rows.push(`<dl><dt>impact</dt><dd data-field="impact">${table[node.key]}</dd></dl>`);
    }
    const papers = edgesOf(graph, nodeKey)
      .filter((e) => e.label !== "Cites")
      .map((edge) => {
        const paper = edge.from.kind === "Paper" ? edge.from : edge.to;
        return (
          `<li><a data-action="inspect-node" data-key="Paper:${escapeHtml(paper.key)}">` +
          `${escapeHtml(paper.key)}</a></li>`
        );
      })
      .join("");
    rows.push(`<ul class="linked-papers" data-role="linked-papers">${papers}</ul>`);
  }
  return `<div class="panel" data-role="node-panel">${rows.join("")}</div>`;
}
