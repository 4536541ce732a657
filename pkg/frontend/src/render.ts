/** Pure view builders: payload in, DOM out.
 *
 * Every number shown comes straight from the payload — trajectory overlays
 * follow the `states` lists and the feature table prints the `features`
 * vectors as-is, so what the user judges is exactly what the belief update
 * will see.
 */

import type {
  BeliefSummary,
  Environment,
  GraphEnv,
  GridEnv,
  QueryPayload,
  State,
  Trajectory,
} from "./types.js";

/** Fixed terrain palette: brick, gravel, sand, grass. */
export const TERRAIN_COLORS = ["red", "gray", "moccasin", "green"] as const;
export const TERRAIN_LABELS = ["brick", "gravel", "sand", "grass"] as const;
export const GRAPH_LABELS = ["distance", "time", "elevation"] as const;
export const TRAJ_COLORS = { A: "#2563eb", B: "#9333ea" } as const;

const SVG_NS = "http://www.w3.org/2000/svg";
const CELL = 40;

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) el.setAttribute(key, String(value));
  return el;
}

/** Feature labels come from the environment kind, values from the payload. */
export function featureLabels(env: Environment): readonly string[] {
  return env.type === "grid" ? TERRAIN_LABELS : GRAPH_LABELS;
}

function gridPoint(state: State): { x: number; y: number } {
  const [row, col] = state as [number, number];
  return { x: (col + 0.5) * CELL, y: (row + 0.5) * CELL };
}

function pathPoints(states: State[], locate: (s: State) => { x: number; y: number }): string {
  return states.map((s) => { const p = locate(s); return `${p.x},${p.y}`; }).join(" ");
}

function overlay(
  states: State[],
  locate: (s: State) => { x: number; y: number },
  color: string,
  cls: string,
): SVGGElement {
  const group = svgElement("g", { class: cls });
  const line = svgElement("polyline", {
    points: pathPoints(states, locate),
    fill: "none",
    stroke: color,
    "stroke-width": 4,
    "stroke-linecap": "round",
    "stroke-linejoin": "round",
    opacity: 0.85,
  });
  group.appendChild(line);
  const end = locate(states[states.length - 1]);
  group.appendChild(svgElement("circle", { cx: end.x, cy: end.y, r: 5, fill: color }));
  return group;
}

export function renderGrid(env: GridEnv, trajA: Trajectory, trajB: Trajectory): SVGSVGElement {
  const size = env.size * CELL;
  const svg = svgElement("svg", {
    viewBox: `0 0 ${size} ${size}`,
    width: Math.min(size, 480),
    class: "board grid-board",
    role: "img",
  });
  for (let row = 0; row < env.size; row++) {
    for (let col = 0; col < env.size; col++) {
      svg.appendChild(
        svgElement("rect", {
          x: col * CELL,
          y: row * CELL,
          width: CELL,
          height: CELL,
          fill: TERRAIN_COLORS[env.terrain[row][col]],
          stroke: "#ffffff",
          "stroke-width": 1,
          class: "cell",
          "data-terrain": env.terrain[row][col],
        }),
      );
    }
  }
  svg.appendChild(overlay(trajA.states, gridPoint, TRAJ_COLORS.A, "traj traj-a"));
  svg.appendChild(overlay(trajB.states, gridPoint, TRAJ_COLORS.B, "traj traj-b"));
  for (const [state, label] of [
    [env.start, "S"],
    [env.goal, "G"],
  ] as Array<[State, string]>) {
    const p = gridPoint(state);
    const marker = svgElement("text", {
      x: p.x,
      y: p.y + 5,
      "text-anchor": "middle",
      "font-size": 16,
      "font-weight": "bold",
      fill: "#111",
      class: `marker marker-${label.toLowerCase()}`,
    });
    marker.textContent = label;
    svg.appendChild(marker);
  }
  return svg;
}

export function renderGraph(env: GraphEnv, trajA: Trajectory, trajB: Trajectory): SVGSVGElement {
  const radius = 170;
  const size = 2 * (radius + 45);
  const center = size / 2;
  const position = new Map<State, { x: number; y: number }>();
  env.nodes.forEach((node, i) => {
    const angle = (2 * Math.PI * i) / env.nodes.length - Math.PI / 2;
    position.set(node, {
      x: center + radius * Math.cos(angle),
      y: center + radius * Math.sin(angle),
    });
  });
  const locate = (s: State) => position.get(s as number | string)!;

  const svg = svgElement("svg", {
    viewBox: `0 0 ${size} ${size}`,
    width: Math.min(size, 480),
    class: "board graph-board",
    role: "img",
  });
  for (const edge of env.edges) {
    const a = locate(edge.src);
    const b = locate(edge.dst);
    svg.appendChild(
      svgElement("line", {
        x1: a.x, y1: a.y, x2: b.x, y2: b.y,
        stroke: "#bbb", "stroke-width": 2, class: "edge",
      }),
    );
    const label = svgElement("text", {
      x: (a.x + b.x) / 2,
      y: (a.y + b.y) / 2 - 4,
      "text-anchor": "middle",
      "font-size": 10,
      fill: "#666",
      class: "edge-label",
    });
    label.textContent = `${edge.distance.toFixed(1)}, ${edge.time.toFixed(1)}, ${edge.elev.toFixed(1)}`;
    svg.appendChild(label);
  }
  svg.appendChild(overlay(trajA.states, locate, TRAJ_COLORS.A, "traj traj-a"));
  svg.appendChild(overlay(trajB.states, locate, TRAJ_COLORS.B, "traj traj-b"));
  for (const node of env.nodes) {
    const p = locate(node);
    const special = node === env.start ? "start" : node === env.goal ? "goal" : "";
    svg.appendChild(
      svgElement("circle", {
        cx: p.x, cy: p.y, r: special ? 14 : 10,
        fill: "#fff", stroke: special ? "#111" : "#888",
        "stroke-width": special ? 3 : 1.5,
        class: `node ${special ? `node-${special}` : ""}`.trim(),
      }),
    );
    const text = svgElement("text", {
      x: p.x, y: p.y + 4, "text-anchor": "middle", "font-size": 11, fill: "#111",
    });
    text.textContent =
      node === env.start ? `S${node}` : node === env.goal ? `G${node}` : String(node);
    svg.appendChild(text);
  }
  return svg;
}

export function renderBoard(query: QueryPayload): SVGSVGElement {
  return query.env.type === "grid"
    ? renderGrid(query.env, query.traj_a, query.traj_b)
    : renderGraph(query.env, query.traj_a, query.traj_b);
}

/** Per-trajectory feature summary; cells print the payload vectors verbatim. */
export function renderFeatureTable(query: QueryPayload): HTMLTableElement {
  const labels = featureLabels(query.env);
  const table = document.createElement("table");
  table.className = "feature-table";
  const head = table.insertRow();
  head.insertCell().textContent = "feature";
  for (const name of ["A", "B"] as const) {
    const cell = head.insertCell();
    cell.textContent = `route ${name}`;
    cell.style.color = TRAJ_COLORS[name];
  }
  const format = (v: number) => (Number.isInteger(v) ? String(v) : v.toFixed(2));
  labels.forEach((label, i) => {
    const row = table.insertRow();
    row.insertCell().textContent = label;
    row.insertCell().textContent = format(query.traj_a.features[i]);
    row.insertCell().textContent = format(query.traj_b.features[i]);
  });
  return table;
}

/** Completion screen: mean-weight bar chart plus the posterior entropy. */
export function renderBeliefSummary(summary: BeliefSummary, env?: Environment): HTMLElement {
  const box = document.createElement("div");
  box.className = "summary";
  const heading = document.createElement("h2");
  heading.textContent = "Session complete — thanks!";
  box.appendChild(heading);

  const stats = document.createElement("p");
  stats.className = "summary-stats";
  stats.innerHTML =
    `answers: <b class="answered">${summary.answered}</b> of ${summary.total} · ` +
    `posterior entropy: <b class="entropy">${summary.entropy.toFixed(3)}</b> nats · ` +
    `${summary.sample_count} posterior samples`;
  box.appendChild(stats);

  const chart = document.createElement("div");
  chart.className = "weight-chart";
  const labels = env ? featureLabels(env) : summary.mean_weight.map((_, i) => `w${i}`);
  const top = Math.max(...summary.mean_weight.map(Math.abs), 1e-9);
  summary.mean_weight.forEach((w, i) => {
    const row = document.createElement("div");
    row.className = "weight-row";
    const name = document.createElement("span");
    name.className = "weight-label";
    name.textContent = labels[i] ?? `w${i}`;
    const track = document.createElement("div");
    track.className = "weight-track";
    const bar = document.createElement("div");
    bar.className = `weight-bar ${w < 0 ? "negative" : "positive"}`;
    bar.style.width = `${Math.round((Math.abs(w) / top) * 50)}%`;
    bar.dataset.value = w.toFixed(3);
    const value = document.createElement("span");
    value.className = "weight-value";
    value.textContent = w.toFixed(3);
    track.appendChild(bar);
    row.append(name, track, value);
    chart.appendChild(row);
  });
  box.appendChild(chart);
  return box;
}
