// Exploration view state and its pure transitions. The DOM layer calls
// these and re-renders; nothing here computes analytics, it only selects
// slices of the loaded payload.

import type { ExplorationResult, GraphDocument, ResultRow, SearchFilters } from "./types.js";

export interface ViewState {
  queryText: string;
  filters: SearchFilters;
  limit: number;
  exploration: ExplorationResult | null;
  graph: GraphDocument | null;
  selectedTopic: number | null;
  selectedNodeKey: string | null; // "Kind:key"
  error: string | null;
  loading: boolean;
}

export function initialState(): ViewState {
  return {
    queryText: "",
    filters: {},
    limit: 100,
    exploration: null,
    graph: null,
    selectedTopic: null,
    selectedNodeKey: null,
    error: null,
    loading: false,
  };
}

export function applyExploration(
  state: ViewState,
  exploration: ExplorationResult,
  graph: GraphDocument,
): ViewState {
  return {
    ...state,
    exploration,
    graph,
    selectedTopic: null,
    selectedNodeKey: null,
    error: null,
    loading: false,
  };
}

export function applyError(state: ViewState, message: string): ViewState {
  // the prior exploration stays on screen; only a banner is added
  return { ...state, error: message, loading: false };
}

export function dismissError(state: ViewState): ViewState {
  return { ...state, error: null };
}

export function selectTopic(state: ViewState, topicId: number | null): ViewState {
  return { ...state, selectedTopic: topicId };
}

export function clearSelections(state: ViewState): ViewState {
  // restores the full exploration without a new request
  return { ...state, selectedTopic: null, selectedNodeKey: null };
}

export function selectNode(state: ViewState, nodeKey: string | null): ViewState {
  if (nodeKey === null) return { ...state, selectedNodeKey: null };
  const exists = state.graph?.nodes.some((n) => `${n.kind}:${n.key}` === nodeKey);
  // a stale key after a new query clears the panel instead of lingering
  return { ...state, selectedNodeKey: exists ? nodeKey : null };
}

/** Result rows restricted to the selected topic (all rows when none). */
export function visibleResults(state: ViewState): ResultRow[] {
  const exploration = state.exploration;
  if (!exploration) return [];
  if (state.selectedTopic === null) return exploration.results;
  const inTopic = new Set(
    exploration.assignments
      .filter((a) => a.topic_id === state.selectedTopic)
      .map((a) => a.paper_id),
  );
  return exploration.results.filter((r) => inTopic.has(r.paper_id));
}

/** Filters for a refine-query request: current filters plus a year pivot. */
export function refineWithYear(filters: SearchFilters, year: number): SearchFilters {
  return { ...filters, year_from: year, year_to: year };
}

export function refineWithCountry(filters: SearchFilters, code: string): SearchFilters {
  const countries = new Set(filters.countries ?? []);
  countries.add(code);
  return { ...filters, countries: [...countries].sort() };
}
