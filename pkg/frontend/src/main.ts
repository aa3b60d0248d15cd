// DOM wiring: reads the form, drives the API client, and re-renders the
// pure views into their mounts whenever state changes.

import { ApiClient, ApiError } from "./api.js";
import { computeLayout } from "./layout.js";
import {
  degradationBadge,
  errorBanner,
  renderGraphSvg,
  renderImpactTable,
  renderNodePanel,
  renderResults,
  renderTopicChart,
  renderTrends,
  renderWordCloud,
  resultCountBadge,
} from "./render.js";
import {
  applyError,
  applyExploration,
  clearSelections,
  dismissError,
  initialState,
  selectNode,
  selectTopic,
  visibleResults,
  type ViewState,
} from "./state.js";
import type { SearchFilters } from "./types.js";

const api = new ApiClient("");
let state: ViewState = initialState();

function mount(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing mount #${id}`);
  return el;
}

function readFilters(): SearchFilters {
  const value = (id: string) => (mount(id) as HTMLInputElement).value.trim();
  const filters: SearchFilters = {};
  if (value("f-year-from")) filters.year_from = Number(value("f-year-from"));
  if (value("f-year-to")) filters.year_to = Number(value("f-year-to"));
  if (value("f-country")) filters.countries = value("f-country").split(",").map((s) => s.trim());
  if (value("f-author")) filters.authors = [value("f-author")];
  if (value("f-institution")) filters.institutions = [value("f-institution")];
  return filters;
}

function render() {
  mount("banner").innerHTML = errorBanner(state.error);
  const exploration = state.exploration;
  if (!exploration || !state.graph) {
    mount("status").innerHTML = state.loading ? "exploring…" : "";
    return;
  }
  mount("status").innerHTML =
    (state.loading ? "exploring… " : "") +
    resultCountBadge(exploration) +
    degradationBadge(exploration);
  mount("results").innerHTML = renderResults(visibleResults(state));
  mount("topic-chart").innerHTML = renderTopicChart(exploration);
  mount("clouds").innerHTML = exploration.topics
    .filter((t) => t.keywords.length > 0)
    .map((t) => renderWordCloud(t))
    .join("");
  mount("trends").innerHTML = renderTrends(exploration.analytics);
  mount("impact").innerHTML =
    renderImpactTable("country", exploration.analytics.country_impact, "pivot-country") +
    renderImpactTable("institution", exploration.analytics.institution_impact, "pivot-institution") +
    renderImpactTable("author", exploration.analytics.author_impact, "pivot-author");
  const layout = computeLayout(state.graph);
  mount("graph").innerHTML = renderGraphSvg(layout, state.selectedNodeKey);
  mount("node-panel").innerHTML = renderNodePanel(
    state.graph,
    exploration.analytics,
    state.selectedNodeKey,
  );
  mount("selection").innerHTML =
    state.selectedTopic !== null
      ? `<span class="badge">filtered to topic ${state.selectedTopic}</span>` +
        `<button data-action="clear-filters">clear</button>`
      : "";
}

async function submit() {
  const query = (mount("query") as HTMLInputElement).value;
  if (!query.trim()) return;
  state = { ...state, loading: true, queryText: query, filters: readFilters() };
  render();
  try {
    const exploration = await api.explore(query, state.filters, state.limit);
    const graph = await api.graph(exploration.query_id);
    state = applyExploration(state, exploration, graph);
  } catch (err) {
    if (err instanceof DOMException && err.name === "AbortError") return;
    const message = err instanceof ApiError ? `request failed: ${err.message}` : String(err);
    state = applyError(state, message);
  }
  render();
}

function onClick(event: Event) {
  const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
  if (!target) return;
  const action = target.dataset.action;
  if (action === "select-topic") {
    state = selectTopic(state, Number(target.dataset.topic));
  } else if (action === "clear-filters") {
    state = clearSelections(state);
  } else if (action === "dismiss-error") {
    state = dismissError(state);
  } else if (action === "inspect-node" || action === "inspect-paper") {
    state = selectNode(state, target.dataset.key ?? null);
  } else if (action === "pivot-country") {
    (mount("f-country") as HTMLInputElement).value = target.dataset.key ?? "";
    void submit();
    return;
  } else {
    return;
  }
  render();
}

export function boot() {
  mount("submit").addEventListener("click", () => void submit());
  (mount("query") as HTMLInputElement).addEventListener("keydown", (e) => {
    if ((e as KeyboardEvent).key === "Enter") void submit();
  });
  document.body.addEventListener("click", onClick);
  void api.health().then(
    (h) => (mount("status").textContent = `${h.papers} papers indexed`),
    () => (mount("status").textContent = "service unreachable"),
  );
}

if (typeof document !== "undefined") {
  boot();
}
