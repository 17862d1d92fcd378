// Wire shapes of the scene alignment service. Field names mirror the JSON
// exactly; nothing here is invented by the UI.

export interface ObjectDoc {
  id: number;
  label: string;
  centroid: [number, number, number];
  half_extents: [number, number, number];
  attributes: Record<string, string[]>;
}

export interface EdgeDoc {
  subject: number;
  predicate: string;
  object: number;
}

export interface GraphDoc {
  scene_id: string;
  objects: ObjectDoc[];
  edges: EdgeDoc[];
}

export interface GraphResponse {
  graph: GraphDoc;
  revision: number;
}

export interface SessionInfo {
  session_id: string;
  scene_id: string;
}

export interface MarkResponse {
  object_id: number;
  summary: string;
}

export interface StepDoc {
  index: number;
  plan: string | null;
  thought: string;
  action: string;
  action_input: Record<string, unknown>;
  observation: string;
  graph_changed: boolean;
}

export interface Highlight {
  id: number;
  label: string;
  centroid: [number, number, number];
}

export interface MessageResponse {
  interaction_id: string;
  final_response: string;
  status: string;
  steps: StepDoc[];
  highlights: Highlight[];
  graph_revision: number;
  query_ratio: number | null;
}

export interface MetricsResponse {
  sr_llm: number | null;
  rr_interaction: number | null;
  interactions_per_task: number;
  actions_per_interaction: number;
  query_ratio: number | null;
}

export interface ToolInfo {
  name: string;
  params: { name: string; kind: string }[];
  description: string;
}
