/** Shared exploration state: one filter spec across all four views, plus
 * per-view display settings. Serializes to the page query string so any
 * view is shareable and reload-stable. */

import { FilterSpec, CriterionConstraint, isEmptyConstraint } from "./api.js";

export type ViewName = "tabular" | "graphical" | "similarity" | "timeline";

export const VIEWS: ViewName[] = ["tabular", "graphical", "similarity", "timeline"];

export type ModalTarget =
  | { kind: "study"; studyId: string }
  | { kind: "bar"; criterion: string; label: string }
  | { kind: "node"; studyId: string }
  | null;

export interface ExplorationState {
  view: ViewName;
  filter: FilterSpec;
  /** Extra table columns / chart criteria beyond the defaults. */
  columns: string[];
  charts: string[];
  maxBars: number;
  similarityMode: "db" | "abstract";
  similarityThreshold: number;
  colorBy: string;
  sortBy: string;
  edgeAuthors: boolean;
  edgeCitations: boolean;
  modal: ModalTarget;
}

export function initialState(): ExplorationState {
  return {
    view: "tabular",
    filter: {},
    columns: [],
    charts: [],
    maxBars: 0,
    similarityMode: "db",
    similarityThreshold: 1.0,
    colorBy: "",
    sortBy: "",
    edgeAuthors: true,
    edgeCitations: true,
    modal: null,
  };
}

function cleanFilter(filter: FilterSpec): FilterSpec {
  const kept: FilterSpec = {};
  for (const name of Object.keys(filter).sort()) {
    if (!isEmptyConstraint(filter[name])) {
      kept[name] = filter[name];
    }
  }
  return kept;
}

export function encodeState(state: ExplorationState): string {
  const params = new URLSearchParams();
  if (state.view !== "tabular") params.set("v", state.view);
  const filter = cleanFilter(state.filter);
  if (Object.keys(filter).length) params.set("f", JSON.stringify(filter));
  if (state.columns.length) params.set("cols", state.columns.join("|"));
  if (state.charts.length) params.set("charts", state.charts.join("|"));
  if (state.maxBars > 0) params.set("bars", String(state.maxBars));
  if (state.similarityMode !== "db") params.set("sm", state.similarityMode);
  if (state.similarityThreshold !== 1.0) params.set("st", String(state.similarityThreshold));
  if (state.colorBy) params.set("cb", state.colorBy);
  if (state.sortBy) params.set("sb", state.sortBy);
  if (!state.edgeAuthors) params.set("ea", "0");
  if (!state.edgeCitations) params.set("ec", "0");
  if (state.modal) {
    if (state.modal.kind === "bar") {
      params.set("modal", `bar:${state.modal.criterion}:${state.modal.label}`);
    } else {
      params.set("modal", `${state.modal.kind}:${state.modal.studyId}`);
    }
  }
  return params.toString();
}

export function decodeState(query: string): ExplorationState {
  const params = new URLSearchParams(query);
  const state = initialState();
  const view = params.get("v");
  if (view && (VIEWS as string[]).includes(view)) {
    state.view = view as ViewName;
  }
  const rawFilter = params.get("f");
  if (rawFilter) {
    try {
      const parsed = JSON.parse(rawFilter) as FilterSpec;
      if (parsed && typeof parsed === "object" && !Array.isArray(parsed)) {
        state.filter = cleanFilter(parsed);
      }
    } catch {
      // Malformed shared links degrade to the unfiltered view.
    }
  }
  const cols = params.get("cols");
  if (cols) state.columns = cols.split("|").filter(Boolean);
  const charts = params.get("charts");
  if (charts) state.charts = charts.split("|").filter(Boolean);
  const bars = Number(params.get("bars") ?? "0");
  if (Number.isFinite(bars) && bars > 0) state.maxBars = Math.floor(bars);
  if (params.get("sm") === "abstract") state.similarityMode = "abstract";
  const threshold = Number(params.get("st") ?? "");
  if (params.has("st") && Number.isFinite(threshold)) state.similarityThreshold = threshold;
  state.colorBy = params.get("cb") ?? "";
  state.sortBy = params.get("sb") ?? "";
  if (params.get("ea") === "0") state.edgeAuthors = false;
  if (params.get("ec") === "0") state.edgeCitations = false;
  const modal = params.get("modal");
  if (modal) {
    const [kind, ...rest] = modal.split(":");
    if (kind === "bar" && rest.length >= 2) {
      state.modal = { kind: "bar", criterion: rest[0], label: rest.slice(1).join(":") };
    } else if ((kind === "study" || kind === "node") && rest.length) {
      state.modal = { kind, studyId: rest.join(":") };
    }
  }
  return state;
}

export function statesEqual(a: ExplorationState, b: ExplorationState): boolean {
  return encodeState(a) === encodeState(b);
}

/** Toggle one label inside a constraint set ("include" or "exclude"). */
export function toggleLabel(
  filter: FilterSpec,
  criterion: string,
  field: "include" | "exclude",
  label: string,
): FilterSpec {
  const next: FilterSpec = { ...filter };
  const constraint: CriterionConstraint = { ...(next[criterion] ?? {}) };
  const current = new Set(constraint[field] ?? []);
  if (current.has(label)) {
    current.delete(label);
  } else {
    current.add(label);
    // include and exclude stay disjoint per criterion.
    const other: "include" | "exclude" = field === "include" ? "exclude" : "include";
    const otherSet = new Set(constraint[other] ?? []);
    if (otherSet.has(label)) {
      otherSet.delete(label);
      if (otherSet.size || other === "exclude") {
        constraint[other] = [...otherSet].sort();
      }
      if (!otherSet.size) delete constraint[other];
    }
  }
  if (current.size || field === "exclude") {
    constraint[field] = [...current].sort();
  }
  if (!current.size) delete constraint[field];
  if (isEmptyConstraint(constraint)) {
    delete next[criterion];
  } else {
    next[criterion] = constraint;
  }
  return next;
}
