/** Hand-built payloads mirroring the service's JSON shapes. */

import type {
  BeliefSummary,
  GraphEnv,
  GridEnv,
  QueryPayload,
  State,
  Trajectory,
} from "../src/types.js";

export function gridEnv(): GridEnv {
  return {
    type: "grid",
    size: 3,
    terrain: [
      [0, 1, 2],
      [3, 0, 1],
      [2, 3, 0],
    ],
    start: [0, 0],
    goal: [2, 2],
    gamma: 0.95,
    horizon: 12,
  };
}

export function graphEnv(): GraphEnv {
  return {
    type: "graph",
    nodes: [0, 1, 2, 3],
    edges: [
      { src: 0, dst: 1, distance: 1.5, time: 2.25, elev: 0.3 },
      { src: 1, dst: 3, distance: 2.0, time: 3.0, elev: -0.4 },
      { src: 0, dst: 2, distance: 1.0, time: 2.5, elev: 0.1 },
      { src: 2, dst: 3, distance: 2.5, time: 4.0, elev: 0.2 },
    ],
    start: 0,
    goal: 3,
    directed: false,
    gamma: 0.95,
    horizon: 12,
  };
}

function traj(states: State[], features: number[]): Trajectory {
  const steps = states.slice(0, -1).map((s, i): [State, number] => [s, i % 4]);
  return { env_id: "fixture-env", steps, states, features };
}

export function gridQuery(overrides: Partial<QueryPayload> = {}): QueryPayload {
  return {
    query_id: "q0001",
    iteration: 1,
    total: 10,
    env: gridEnv(),
    // Features intentionally do NOT tally the visited cells: the UI must
    // print the payload numbers, not recompute them from the route.
    traj_a: traj([[0, 0], [0, 1], [1, 1], [2, 1], [2, 2]], [7, 0, 0, 2]),
    traj_b: traj([[0, 0], [1, 0], [2, 0], [2, 1], [2, 2]], [0, 3, 1, 0.5]),
    info_gain: 0.42,
    generator: "CR",
    ...overrides,
  };
}

export function graphQuery(overrides: Partial<QueryPayload> = {}): QueryPayload {
  return {
    query_id: "q0001",
    iteration: 1,
    total: 10,
    env: graphEnv(),
    traj_a: traj([0, 1, 3], [3.5, 5.25, -0.1]),
    traj_b: traj([0, 2, 3], [3.5, 6.5, 0.3]),
    info_gain: 0.3,
    generator: "CRED",
    ...overrides,
  };
}

export function belief(overrides: Partial<BeliefSummary> = {}): BeliefSummary {
  return {
    mean_weight: [-0.41, -0.02, 0.137, 0.25],
    entropy: -1.23456,
    sample_count: 200,
    answered: 10,
    total: 10,
    complete: true,
    ...overrides,
  };
}
