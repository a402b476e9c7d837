/** Typed client for the studyatlas HTTP API. */

export interface CriterionInfo {
  name: string;
  kind: string;
  multi: boolean;
  options?: string[];
}

export interface SchemaInfo {
  snapshot_id: string;
  criteria: CriterionInfo[];
  display_defaults: string[];
}

export type CellValue = string | number | string[];

export interface StudiesPayload {
  snapshot_id: string;
  columns: string[];
  schema: CriterionInfo[];
  rows: Record<string, CellValue>[];
  total: number;
}

export interface StudyDetail {
  snapshot_id: string;
  study_id: string;
  values: Record<string, CellValue>;
  authors: string[];
  abstract: string;
  link: string;
  neighbors: Record<string, NeighborHit[]>;
}

export interface NeighborHit {
  study_id: string;
  z: number;
  raw: number;
}

export interface Bar {
  label: string;
  count: number;
}

export interface DistributionPayload {
  snapshot_id: string;
  criterion: string;
  bars: Bar[];
  truncated: boolean;
  total_records: number;
}

export interface GraphNode {
  study_id: string;
  year: number;
  main_author: string;
  labels?: string[];
}

export interface SimilarityEdge {
  a: string;
  b: string;
  z: number;
  raw: number;
}

export interface SimilarityPayload {
  snapshot_id: string;
  mode: string;
  threshold: number;
  nodes: GraphNode[];
  edges: SimilarityEdge[];
  degenerate: boolean;
  focus?: { study_id: string; neighbors: NeighborHit[] };
}

export interface TimelineEdge {
  a: string;
  b: string;
  kind: "authors" | "citations";
  directed: boolean;
  shared?: string[];
  confidence?: number;
}

export interface TimelinePayload {
  snapshot_id: string;
  nodes: GraphNode[];
  edges: TimelineEdge[];
}

/** Per-criterion constraint, mirroring the server's canonical filter JSON. */
export interface CriterionConstraint {
  include?: string[];
  exclude?: string[];
  range?: [number, number];
  levels?: string[];
  include_na?: boolean;
}

export type FilterSpec = Record<string, CriterionConstraint>;

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export function filterToJson(filter: FilterSpec): string {
  const names = Object.keys(filter).filter((name) => !isEmptyConstraint(filter[name]));
  names.sort();
  const canonical: FilterSpec = {};
  for (const name of names) {
    canonical[name] = filter[name];
  }
  return JSON.stringify(canonical);
}

export function isEmptyConstraint(c: CriterionConstraint): boolean {
  return (
    c.include === undefined &&
    (c.exclude === undefined || c.exclude.length === 0) &&
    c.range === undefined &&
    c.levels === undefined &&
    (c.include_na === undefined || c.include_na === true)
  );
}

export class ApiClient {
  constructor(
    readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async getJson<T>(path: string, params: Record<string, string>): Promise<T> {
    const query = new URLSearchParams(params).toString();
    const url = `${this.baseUrl}${path}${query ? "?" + query : ""}`;
    const response = await this.fetchFn(url);
    if (!response.ok) {
      const body = await response.text();
      throw new ApiError(response.status, `${path} -> ${response.status}: ${body}`);
    }
    return (await response.json()) as T;
  }

  private withFilter(params: Record<string, string>, filter: FilterSpec): Record<string, string> {
    const encoded = filterToJson(filter);
    if (encoded !== "{}") {
      params.filter = encoded;
    }
    return params;
  }

  schema(): Promise<SchemaInfo> {
    return this.getJson("/schema", {});
  }

  studies(filter: FilterSpec, columns?: string[]): Promise<StudiesPayload> {
    const params = this.withFilter({}, filter);
    if (columns && columns.length) {
      params.columns = columns.join(",");
    }
    return this.getJson("/studies", params);
  }

  study(studyId: string): Promise<StudyDetail> {
    return this.getJson(`/studies/${encodeURIComponent(studyId)}`, {});
  }

  distribution(criterion: string, filter: FilterSpec, maxBars: number): Promise<DistributionPayload> {
    const params = this.withFilter({ criterion }, filter);
    if (maxBars > 0) {
      params.max_bars = String(maxBars);
    }
    return this.getJson("/distribution", params);
  }

  similarity(
    mode: string,
    threshold: number,
    filter: FilterSpec,
    focus?: string,
  ): Promise<SimilarityPayload> {
    const params = this.withFilter({ mode, threshold: String(threshold) }, filter);
    if (focus) {
      params.focus = focus;
    }
    return this.getJson("/similarity", params);
  }

  timeline(
    edges: "authors" | "citations" | "both",
    filter: FilterSpec,
    colorBy?: string,
  ): Promise<TimelinePayload> {
    const params = this.withFilter({ edges }, filter);
    if (colorBy) {
      params.color_by = colorBy;
    }
    return this.getJson("/timeline", params);
  }

  exportUrl(filter: FilterSpec, columns?: string[]): string {
    const params = this.withFilter({}, filter);
    if (columns && columns.length) {
      params.columns = columns.join(",");
    }
    const query = new URLSearchParams(params).toString();
    return `${this.baseUrl}/export.csv${query ? "?" + query : ""}`;
  }

  async submit(contact: string, row: Record<string, string>, note: string): Promise<{ submission_id: string }> {
    const payload: Record<string, unknown> = { contact, note };
    if (Object.keys(row).length) {
      payload.row = row;
    }
    const response = await this.fetchFn(`${this.baseUrl}/submissions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as { submission_id: string };
  }
}
