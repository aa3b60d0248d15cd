// Payload shapes returned by the exploration API. The UI renders these
// verbatim: every number shown on screen traces back to one of these fields.

export interface ResultRow {
  paper_id: string;
  score: number;
  rank: number;
  title: string;
  publication_year: number;
  subject: string | null;
}

export interface TopicSummary {
  topic_id: number;
  keywords: [string, number][];
  document_count: number;
}

export interface TopicAssignment {
  paper_id: string;
  topic_id: number;
  probability: number;
}

export interface CoherenceReport {
  k: number;
  mean_npmi: number;
  per_topic: Record<string, number>;
}

export interface YearlyTopicCount {
  year: string;
  topic: number;
  count: number;
}

export interface Analytics {
  topic_distribution: Record<string, number>;
  yearly_topic_counts: YearlyTopicCount[];
  country_impact: Record<string, number>;
  institution_impact: Record<string, number>;
  author_impact: Record<string, number>;
  top_papers: { paper_id: string; impact: number }[];
}

export interface ExplorationResult {
  query_id: string;
  query: string;
  normalized_query: string;
  filters: {
    year_range: [number, number] | null;
    authors: string[] | null;
    institutions: string[] | null;
    countries: string[] | null;
  };
  limit: number;
  topic_mode: string;
  topic_path: string;
  generation: string;
  semantic_degraded: boolean;
  degradation_reason: string | null;
  result_count: number;
  results: ResultRow[];
  topics: TopicSummary[];
  assignments: TopicAssignment[];
  coherence: CoherenceReport | null;
  graph: { node_count: number; edge_count: number; ref: string };
  analytics: Analytics;
}

export interface GraphNode {
  kind: "Paper" | "Author" | "Institution" | "Country" | "Topic" | "Year";
  key: string;
  attrs: Record<string, unknown>;
}

export interface GraphEdge {
  from: { kind: string; key: string };
  to: { kind: string; key: string };
  label: string;
  weight?: number;
}

export interface GraphDocument {
  nodes: GraphNode[];
  edges: GraphEdge[];
  provenance: Record<string, string>;
  node_count: number;
  edge_count: number;
}

export interface SearchFilters {
  year_from?: number;
  year_to?: number;
  authors?: string[];
  institutions?: string[];
  countries?: string[];
}
