/** Wire types for the elicitation HTTP API. The UI renders these payloads
 * verbatim; it never recomputes rewards, features, or beliefs. */

export interface GridEnv {
  type: "grid";
  size: number;
  terrain: number[][];
  start: [number, number];
  goal: [number, number];
  gamma: number;
  horizon: number;
}

export interface GraphEdge {
  src: number | string;
  dst: number | string;
  distance: number;
  time: number;
  elev: number;
}

export interface GraphEnv {
  type: "graph";
  nodes: Array<number | string>;
  edges: GraphEdge[];
  start: number | string;
  goal: number | string;
  directed: boolean;
  gamma: number;
  horizon: number;
}

export type Environment = GridEnv | GraphEnv;

/** Grid states arrive as [row, col] pairs, graph states as node ids. */
export type State = [number, number] | number | string;

export interface Trajectory {
  env_id: string;
  steps: Array<[State, number]>;
  states: State[];
  features: number[];
}

export interface QueryPayload {
  query_id: string;
  iteration: number;
  total: number;
  env: Environment;
  traj_a: Trajectory;
  traj_b: Trajectory;
  info_gain: number;
  generator: string;
}

export interface BeliefSummary {
  mean_weight: number[];
  entropy: number;
  sample_count: number;
  answered: number;
  total: number;
  complete: boolean;
}

export interface SessionCreated {
  session_id: string;
  total: number;
}

export interface CompletePayload {
  status: "complete";
  belief_summary: BeliefSummary;
}

export type QueryResponse = QueryPayload | CompletePayload;

export type AnswerResponse =
  | CompletePayload
  | { next_query: QueryPayload; belief_summary: BeliefSummary };

export type Label = "+1" | "-1";

export function isComplete(r: QueryResponse | AnswerResponse): r is CompletePayload {
  return "status" in r && r.status === "complete";
}
