// Wire shapes of the evaluation service API (see docs/api/ in the repo root).

export interface Position {
  index: number; // 1-based
  total: number;
}

export interface RunSummary {
  run_id: string;
  domain: string;
  parameter_set_digest: string;
  created_at: string;
  has_human_eval: boolean;
  position: Position;
}

export interface SourceNode {
  chunk_id: string;
  chunk_text: string;
  first_pass_score: number;
  rerank_score: number | null;
}

export interface Violation {
  path: string;
  message: string;
}

export interface HumanEvaluation {
  run_id?: string;
  evaluator: string;
  overall_quality: number;
  content_accuracy: number;
  schema_conformance: boolean;
  hallucination_flags: { json_pointer: string; note: string }[];
  retrieval_relevance: { chunk_id: string; score: number }[];
  notes: string;
  saved_at?: string;
}

export interface MetricEntry {
  metric: string;
  score: number | null;
  numerator: number;
  denominator: number;
  items: { text: string; verdict: string }[];
}

export interface RunDetail {
  run_id: string;
  domain: string;
  generated_json: unknown;
  curated_json: unknown | null;
  source_nodes: SourceNode[];
  parameter_set: Record<string, unknown>;
  metrics: MetricEntry[] | null;
  human_evaluation: HumanEvaluation | null;
  validation: Violation[];
  raw_response: string;
  attempts: number;
  created_at: string;
  position: Position;
}
