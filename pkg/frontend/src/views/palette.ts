/** Deterministic categorical colors shared by the graph views. */

import { GraphNode } from "../api.js";

const PALETTE = [
  "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
  "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];

const NEUTRAL = "#5b7fa6";

export function colorFor(label: string | undefined): string {
  if (label === undefined) return NEUTRAL;
  let hash = 0;
  for (let i = 0; i < label.length; i++) {
    hash = (hash * 31 + label.charCodeAt(i)) >>> 0;
  }
  return PALETTE[hash % PALETTE.length];
}

export function criterionSelect(
  id: string,
  placeholder: string,
  criteria: string[],
  current: string,
  onChange: (criterion: string) => void,
): HTMLSelectElement {
  const select = document.createElement("select");
  select.id = id;
  const none = document.createElement("option");
  none.value = "";
  none.textContent = placeholder;
  select.append(none);
  for (const criterion of criteria) {
    const option = document.createElement("option");
    option.value = criterion;
    option.textContent = criterion;
    select.append(option);
  }
  select.value = current;
  select.addEventListener("change", () => onChange(select.value));
  return select;
}

export function labelLegend(nodes: GraphNode[]): HTMLElement {
  const labels = new Set<string>();
  for (const node of nodes) {
    for (const label of node.labels ?? []) {
      labels.add(label);
    }
  }
  const legend = document.createElement("div");
  legend.className = "legend";
  for (const label of [...labels].sort()) {
    const entry = document.createElement("span");
    entry.className = "legend-entry";
    const swatch = document.createElement("span");
    swatch.className = "legend-swatch";
    swatch.style.background = colorFor(label);
    entry.append(swatch, document.createTextNode(" " + label));
    legend.append(entry);
  }
  return legend;
}
