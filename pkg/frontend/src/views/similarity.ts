/** Similarity view: node-link panel with a mode switch (database vs
 * abstract similarity), a z-score threshold slider, node coloring, and a
 * ranked-neighbor modal per node. Nodes sit on a deterministic circle; only
 * edge membership carries meaning, and that comes from the API. */

import { GraphNode, SimilarityPayload } from "../api.js";
import { ExplorationState } from "../state.js";
import { colorFor, criterionSelect, labelLegend } from "./palette.js";

export interface SimilarityContext {
  state: ExplorationState;
  colorableCriteria: string[];
  setMode: (mode: "db" | "abstract") => void;
  setThreshold: (threshold: number) => void;
  setColorBy: (criterion: string) => void;
  setSortBy: (criterion: string) => void;
  openNode: (studyId: string) => void;
  abstractUnavailable: boolean;
}

const SIZE = 640;
const RADIUS = SIZE / 2 - 70;

export function nodePositions(nodes: GraphNode[]): Map<string, { x: number; y: number }> {
  const positions = new Map<string, { x: number; y: number }>();
  nodes.forEach((node, index) => {
    const angle = (2 * Math.PI * index) / Math.max(nodes.length, 1) - Math.PI / 2;
    positions.set(node.study_id, {
      x: SIZE / 2 + RADIUS * Math.cos(angle),
      y: SIZE / 2 + RADIUS * Math.sin(angle),
    });
  });
  return positions;
}

export function renderSimilarity(
  root: HTMLElement,
  ctx: SimilarityContext,
  payload: SimilarityPayload | null,
): void {
  root.innerHTML = "";

  const controls = document.createElement("div");
  controls.className = "sim-controls";

  for (const mode of ["db", "abstract"] as const) {
    const button = document.createElement("button");
    button.dataset.mode = mode;
    button.textContent = mode === "db" ? "Database Similarity" : "Abstract Similarity";
    button.classList.toggle("active", ctx.state.similarityMode === mode);
    if (mode === "abstract" && ctx.abstractUnavailable) {
      button.disabled = true;
      button.title = "Abstract similarity is not built for this snapshot";
    }
    button.addEventListener("click", () => ctx.setMode(mode));
    controls.append(button);
  }

  const sliderLabel = document.createElement("label");
  sliderLabel.className = "threshold";
  const slider = document.createElement("input");
  slider.type = "range";
  slider.id = "sim-threshold";
  slider.min = "-3";
  slider.max = "6";
  slider.step = "0.25";
  slider.value = String(ctx.state.similarityThreshold);
  const readout = document.createElement("span");
  readout.id = "threshold-readout";
  readout.textContent = `z ≥ ${ctx.state.similarityThreshold}`;
  slider.addEventListener("change", () => ctx.setThreshold(Number(slider.value)));
  sliderLabel.append(document.createTextNode("threshold "), slider, readout);
  controls.append(sliderLabel);

  controls.append(
    criterionSelect("color-by", "Color Nodes By…", ctx.colorableCriteria,
      ctx.state.colorBy, ctx.setColorBy),
    criterionSelect("sim-sort-by", "Sort Nodes By…", ctx.colorableCriteria,
      ctx.state.sortBy, ctx.setSortBy),
  );
  root.append(controls);

  if (!payload) {
    const message = document.createElement("p");
    message.className = "empty-state";
    message.textContent = "This similarity matrix is not available for the current snapshot.";
    root.append(message);
    return;
  }

  const stats = document.createElement("p");
  stats.className = "sim-stats";
  stats.id = "sim-stats";
  stats.textContent = `${payload.nodes.length} studies, ${payload.edges.length} connections at z ≥ ${payload.threshold}`;
  root.append(stats);

  const svgNs = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(svgNs, "svg");
  svg.id = "sim-graph";
  svg.setAttribute("viewBox", `0 0 ${SIZE} ${SIZE}`);
  const positions = nodePositions(payload.nodes);

  for (const edge of payload.edges) {
    const a = positions.get(edge.a);
    const b = positions.get(edge.b);
    if (!a || !b) continue;
    const line = document.createElementNS(svgNs, "line");
    line.classList.add("sim-edge");
    line.dataset.a = edge.a;
    line.dataset.b = edge.b;
    line.setAttribute("x1", String(a.x));
    line.setAttribute("y1", String(a.y));
    line.setAttribute("x2", String(b.x));
    line.setAttribute("y2", String(b.y));
    line.setAttribute("stroke-width", String(1 + Math.max(0, edge.z)));
    svg.append(line);
  }

  for (const node of payload.nodes) {
    const position = positions.get(node.study_id)!;
    const group = document.createElementNS(svgNs, "g");
    group.classList.add("sim-node");
    group.dataset.studyId = node.study_id;
    const circle = document.createElementNS(svgNs, "circle");
    circle.setAttribute("cx", String(position.x));
    circle.setAttribute("cy", String(position.y));
    circle.setAttribute("r", "9");
    circle.setAttribute("fill", colorFor(ctx.state.colorBy ? node.labels?.[0] : undefined));
    const label = document.createElementNS(svgNs, "text");
    label.setAttribute("x", String(position.x));
    label.setAttribute("y", String(position.y - 13));
    label.setAttribute("text-anchor", "middle");
    label.textContent = `${node.study_id} (${node.main_author})`;
    group.append(circle, label);
    group.addEventListener("click", () => ctx.openNode(node.study_id));
    svg.append(group);
  }
  root.append(svg);

  if (ctx.state.colorBy) {
    root.append(labelLegend(payload.nodes));
  }
}
