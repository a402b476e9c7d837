/** Timeline view: studies positioned on a horizontal year axis, shared
 * authorship as dashed lines, citations as solid directed lines, with
 * independent edge toggles and per-criterion node coloring. */

import { TimelinePayload } from "../api.js";
import { ExplorationState } from "../state.js";
import { colorFor, criterionSelect, labelLegend } from "./palette.js";

export interface TimelineContext {
  state: ExplorationState;
  colorableCriteria: string[];
  setEdgeToggles: (authors: boolean, citations: boolean) => void;
  setColorBy: (criterion: string) => void;
  setSortBy: (criterion: string) => void;
  openNode: (studyId: string) => void;
}

const WIDTH = 900;
const HEIGHT = 460;
const MARGIN = 60;

export function timelinePositions(payload: TimelinePayload): Map<string, { x: number; y: number }> {
  const years = payload.nodes.map((n) => n.year);
  const min = Math.min(...years, 9999);
  const max = Math.max(...years, 0);
  const span = Math.max(max - min, 1);
  const positions = new Map<string, { x: number; y: number }>();
  const perYear = new Map<number, number>();
  for (const node of payload.nodes) {
    const stack = perYear.get(node.year) ?? 0;
    perYear.set(node.year, stack + 1);
    positions.set(node.study_id, {
      x: MARGIN + ((node.year - min) / span) * (WIDTH - 2 * MARGIN),
      // Same-year studies stack vertically, alternating around the midline.
      y: HEIGHT / 2 + (stack % 2 === 0 ? 1 : -1) * Math.ceil(stack / 2) * 46,
    });
  }
  return positions;
}

export function renderTimeline(
  root: HTMLElement,
  ctx: TimelineContext,
  payload: TimelinePayload,
): void {
  root.innerHTML = "";

  const controls = document.createElement("div");
  controls.className = "timeline-controls";
  const authorToggle = document.createElement("label");
  const authorBox = document.createElement("input");
  authorBox.type = "checkbox";
  authorBox.id = "toggle-authors";
  authorBox.checked = ctx.state.edgeAuthors;
  authorBox.addEventListener("change", () =>
    ctx.setEdgeToggles(authorBox.checked, ctx.state.edgeCitations));
  authorToggle.append(authorBox, document.createTextNode(" shared authors (dashed)"));

  const citationToggle = document.createElement("label");
  const citationBox = document.createElement("input");
  citationBox.type = "checkbox";
  citationBox.id = "toggle-citations";
  citationBox.checked = ctx.state.edgeCitations;
  citationBox.addEventListener("change", () =>
    ctx.setEdgeToggles(ctx.state.edgeAuthors, citationBox.checked));
  citationToggle.append(citationBox, document.createTextNode(" citations (solid, directed)"));
  controls.append(authorToggle, citationToggle);

  controls.append(
    criterionSelect("timeline-color-by", "Color Nodes By…", ctx.colorableCriteria,
      ctx.state.colorBy, ctx.setColorBy),
    criterionSelect("timeline-sort-by", "Sort Nodes By…", ctx.colorableCriteria,
      ctx.state.sortBy, ctx.setSortBy),
  );
  root.append(controls);

  const svgNs = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(svgNs, "svg");
  svg.id = "timeline-graph";
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);

  const defs = document.createElementNS(svgNs, "defs");
  const marker = document.createElementNS(svgNs, "marker");
  marker.setAttribute("id", "arrow");
  marker.setAttribute("viewBox", "0 0 8 8");
  marker.setAttribute("refX", "7");
  marker.setAttribute("refY", "4");
  marker.setAttribute("markerWidth", "7");
  marker.setAttribute("markerHeight", "7");
  marker.setAttribute("orient", "auto-start-reverse");
  const tip = document.createElementNS(svgNs, "path");
  tip.setAttribute("d", "M 0 0 L 8 4 L 0 8 z");
  marker.append(tip);
  defs.append(marker);
  svg.append(defs);

  const positions = timelinePositions(payload);

  const axis = document.createElementNS(svgNs, "line");
  axis.setAttribute("x1", String(MARGIN));
  axis.setAttribute("x2", String(WIDTH - MARGIN));
  axis.setAttribute("y1", String(HEIGHT - 24));
  axis.setAttribute("y2", String(HEIGHT - 24));
  axis.classList.add("axis");
  svg.append(axis);
  for (const year of [...new Set(payload.nodes.map((n) => n.year))].sort()) {
    const position = positions.get(payload.nodes.find((n) => n.year === year)!.study_id)!;
    const tick = document.createElementNS(svgNs, "text");
    tick.setAttribute("x", String(position.x));
    tick.setAttribute("y", String(HEIGHT - 8));
    tick.setAttribute("text-anchor", "middle");
    tick.classList.add("axis-label");
    tick.textContent = String(year);
    svg.append(tick);
  }

  for (const edge of payload.edges) {
    const a = positions.get(edge.a);
    const b = positions.get(edge.b);
    if (!a || !b) continue;
    const line = document.createElementNS(svgNs, "line");
    line.classList.add("timeline-edge", edge.kind);
    line.dataset.a = edge.a;
    line.dataset.b = edge.b;
    line.dataset.kind = edge.kind;
    line.setAttribute("x1", String(a.x));
    line.setAttribute("y1", String(a.y));
    line.setAttribute("x2", String(b.x));
    line.setAttribute("y2", String(b.y));
    if (edge.kind === "authors") {
      line.setAttribute("stroke-dasharray", "5 4");
    } else if (edge.directed) {
      line.setAttribute("marker-end", "url(#arrow)");
    }
    svg.append(line);
  }

  for (const node of payload.nodes) {
    const position = positions.get(node.study_id)!;
    const group = document.createElementNS(svgNs, "g");
    group.classList.add("timeline-node");
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
