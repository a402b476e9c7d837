/** Application shell: one shared ExplorationState drives four views.
 * Every count rendered anywhere is read from an API payload; the client
 * only arranges what the server computed. Stale responses are discarded by
 * sequence number, so rapid filter changes never interleave. */

import {
  ApiClient,
  ApiError,
  CriterionInfo,
  FilterSpec,
  SchemaInfo,
  SimilarityPayload,
  StudiesPayload,
  TimelinePayload,
} from "./api.js";
import { renderFilterPanel } from "./filters.js";
import { closeModal, openFullRecord, renderStudyListModal } from "./modal.js";
import {
  ExplorationState,
  ModalTarget,
  ViewName,
  VIEWS,
  decodeState,
  encodeState,
  initialState,
} from "./state.js";
import { renderSubmissionForm } from "./submit.js";
import { renderCharts, selectedCharts } from "./views/charts.js";
import { renderSimilarity } from "./views/similarity.js";
import { renderTable, visibleColumns } from "./views/table.js";
import { renderTimeline } from "./views/timeline.js";

export interface AppElements {
  viewMenu: HTMLElement;
  sidebar: HTMLElement;
  viewRoot: HTMLElement;
  modalRoot: HTMLElement;
  errorBanner: HTMLElement;
  snapshotInfo: HTMLElement;
}

export class App {
  state: ExplorationState = initialState();
  schema: SchemaInfo | null = null;
  private seq = 0;
  private abstractUnavailable = false;
  /** Ids currently shown, from the last /studies response for this filter. */
  private currentIds: string[] = [];

  constructor(
    readonly api: ApiClient,
    readonly elements: AppElements,
    private readonly onUrlChange: (query: string) => void = () => {},
  ) {}

  criteria(): CriterionInfo[] {
    return this.schema ? this.schema.criteria.filter((c) => c.kind !== "identity") : [];
  }

  categoricalCriteria(): string[] {
    return this.criteria()
      .filter((c) => c.kind === "categorical" || c.kind === "ordinal" || c.kind === "binary")
      .map((c) => c.name);
  }

  async boot(query: string): Promise<void> {
    this.schema = await this.api.schema();
    this.state = decodeState(query);
    this.renderViewMenu();
    await this.renderSidebar();
    await this.refresh();
  }

  /** Apply a state change, sync the address, and re-render. */
  async update(partial: Partial<ExplorationState>): Promise<void> {
    this.state = { ...this.state, ...partial };
    this.onUrlChange(encodeState(this.state));
    this.renderViewMenu();
    await this.refresh();
  }

  async setFilter(filter: FilterSpec): Promise<void> {
    await this.update({ filter });
  }

  async applyQuery(query: string): Promise<void> {
    this.state = decodeState(query);
    this.renderViewMenu();
    await this.renderSidebar();
    await this.refresh();
  }

  private renderViewMenu(): void {
    const menu = this.elements.viewMenu;
    menu.innerHTML = "";
    for (const view of VIEWS) {
      const button = document.createElement("button");
      button.dataset.view = view;
      button.textContent = view[0].toUpperCase() + view.slice(1);
      button.classList.toggle("active", this.state.view === view);
      button.addEventListener("click", () => void this.update({ view }));
      menu.append(button);
    }
    const contribute = document.createElement("button");
    contribute.id = "contribute";
    contribute.textContent = "Contribute";
    contribute.addEventListener("click", () => {
      if (this.schema) {
        renderSubmissionForm(this.elements.modalRoot, this.api, this.schema, () => {});
      }
    });
    menu.append(contribute);
  }

  private async renderSidebar(): Promise<void> {
    await renderFilterPanel(this.elements.sidebar, {
      api: this.api,
      criteria: this.criteria(),
      getFilter: () => this.state.filter,
      setFilter: (filter) => void this.setFilter(filter),
    });
  }

  private showError(message: string): void {
    this.elements.errorBanner.textContent = message;
    this.elements.errorBanner.classList.add("visible");
  }

  private clearError(): void {
    this.elements.errorBanner.textContent = "";
    this.elements.errorBanner.classList.remove("visible");
  }

  /** Re-render the active view; stale responses are dropped. */
  async refresh(): Promise<void> {
    const mySeq = ++this.seq;
    try {
      switch (this.state.view) {
        case "tabular":
          await this.renderTabular(mySeq);
          break;
        case "graphical":
          await this.renderGraphical(mySeq);
          break;
        case "similarity":
          await this.renderSimilarityView(mySeq);
          break;
        case "timeline":
          await this.renderTimelineView(mySeq);
          break;
      }
      if (mySeq === this.seq) {
        this.clearError();
        await this.renderModal();
      }
    } catch (error) {
      if (mySeq === this.seq) {
        // Keep the last rendered data; surface the problem without blocking.
        this.showError(error instanceof Error ? error.message : String(error));
      }
    }
  }

  private defaultColumns(): string[] {
    return this.schema ? [...this.schema.display_defaults] : [];
  }

  private allColumnNames(): string[] {
    return this.criteria().map((c) => c.name);
  }

  private async fetchStudies(columns?: string[]): Promise<StudiesPayload> {
    const payload = await this.api.studies(this.state.filter, columns);
    this.currentIds = payload.rows.map((row) => String(row["study_id"]));
    return payload;
  }

  private async renderTabular(mySeq: number): Promise<void> {
    const ctx = {
      api: this.api,
      state: this.state,
      defaultColumns: this.defaultColumns(),
      allColumns: this.allColumnNames(),
      setColumns: (columns: string[]) => void this.update({ columns }),
      openStudy: (studyId: string) => void this.openModal({ kind: "study", studyId }),
    };
    const payload = await this.fetchStudies(["study_id", ...visibleColumns(ctx)]);
    if (mySeq !== this.seq) return;
    renderTable(this.elements.viewRoot, ctx, payload);
  }

  private async renderGraphical(mySeq: number): Promise<void> {
    const ctx = {
      state: this.state,
      defaultCharts: this.defaultColumns().filter((name) => name !== "Main Author"),
      allCharts: this.allColumnNames(),
      setCharts: (charts: string[]) => void this.update({ charts }),
      setMaxBars: (maxBars: number) => void this.update({ maxBars }),
      openBar: (criterion: string, label: string) =>
        void this.openModal({ kind: "bar", criterion, label }),
    };
    const charts = selectedCharts(ctx);
    const distributions = await Promise.all(
      charts.map((name) => this.api.distribution(name, this.state.filter, this.state.maxBars)),
    );
    await this.fetchStudies(["study_id"]);
    if (mySeq !== this.seq) return;
    renderCharts(this.elements.viewRoot, ctx, distributions);
  }

  /** Per-study labels of one criterion, read from the studies endpoint. */
  private async labelMap(criterion: string): Promise<Map<string, string[]>> {
    const payload = await this.api.studies(this.state.filter, ["study_id", criterion]);
    const map = new Map<string, string[]>();
    for (const row of payload.rows) {
      const value = row[criterion];
      map.set(String(row["study_id"]), Array.isArray(value) ? value : [String(value ?? "")]);
    }
    return map;
  }

  private sortNodes<T extends { study_id: string }>(nodes: T[], order: Map<string, string[]> | null): T[] {
    if (!order) return nodes;
    return [...nodes].sort((a, b) => {
      const la = order.get(a.study_id)?.[0] ?? "￿";
      const lb = order.get(b.study_id)?.[0] ?? "￿";
      return la === lb ? a.study_id.localeCompare(b.study_id) : la.localeCompare(lb);
    });
  }

  private async renderSimilarityView(mySeq: number): Promise<void> {
    let payload: SimilarityPayload | null = null;
    try {
      payload = await this.api.similarity(
        this.state.similarityMode,
        this.state.similarityThreshold,
        this.state.filter,
      );
      if (this.state.similarityMode === "abstract") {
        this.abstractUnavailable = false;
      }
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.abstractUnavailable = true;
      } else {
        throw error;
      }
    }
    if (payload) {
      this.currentIds = payload.nodes.map((n) => n.study_id);
      const colors = this.state.colorBy ? await this.labelMap(this.state.colorBy) : null;
      const order = this.state.sortBy ? await this.labelMap(this.state.sortBy) : null;
      let nodes = payload.nodes.map((node) => ({
        ...node,
        labels: colors?.get(node.study_id) ?? node.labels,
      }));
      nodes = this.sortNodes(nodes, order);
      payload = { ...payload, nodes };
    }
    if (mySeq !== this.seq) return;
    renderSimilarity(this.elements.viewRoot, {
      state: this.state,
      colorableCriteria: this.categoricalCriteria(),
      setMode: (mode) => void this.update({ similarityMode: mode }),
      setThreshold: (threshold) => void this.update({ similarityThreshold: threshold }),
      setColorBy: (colorBy) => void this.update({ colorBy }),
      setSortBy: (sortBy) => void this.update({ sortBy }),
      openNode: (studyId) => void this.openModal({ kind: "node", studyId }),
      abstractUnavailable: this.abstractUnavailable,
    }, payload);
  }

  private async renderTimelineView(mySeq: number): Promise<void> {
    const payload: TimelinePayload = await this.api.timeline(
      "both",
      this.state.filter,
      this.state.colorBy || undefined,
    );
    this.currentIds = payload.nodes.map((n) => n.study_id);
    const order = this.state.sortBy ? await this.labelMap(this.state.sortBy) : null;
    if (mySeq !== this.seq) return;
    const shown = {
      ...payload,
      nodes: this.sortNodes(payload.nodes, order),
      edges: payload.edges.filter(
        (edge) =>
          (edge.kind === "authors" && this.state.edgeAuthors) ||
          (edge.kind === "citations" && this.state.edgeCitations),
      ),
    };
    renderTimeline(this.elements.viewRoot, {
      state: this.state,
      colorableCriteria: this.categoricalCriteria(),
      setEdgeToggles: (edgeAuthors, edgeCitations) =>
        void this.update({ edgeAuthors, edgeCitations }),
      setColorBy: (colorBy) => void this.update({ colorBy }),
      setSortBy: (sortBy) => void this.update({ sortBy }),
      openNode: (studyId) => void this.openModal({ kind: "node", studyId }),
    }, shown);
  }

  async openModal(modal: ModalTarget): Promise<void> {
    await this.update({ modal });
  }

  private closeModalTarget = (): void => {
    this.state = { ...this.state, modal: null };
    this.onUrlChange(encodeState(this.state));
  };

  private async renderModal(): Promise<void> {
    const modal = this.state.modal;
    if (!modal) {
      closeModal(this.elements.modalRoot);
      return;
    }
    const openStudy = (studyId: string) => void this.openModal({ kind: "study", studyId });
    if (modal.kind === "study") {
      await openFullRecord(this.elements.modalRoot, this.api, modal.studyId, this.closeModalTarget);
      return;
    }
    if (modal.kind === "bar") {
      const payload = await this.barStudies(modal.criterion, modal.label);
      renderStudyListModal(
        this.elements.modalRoot,
        `${modal.criterion}: ${modal.label}`,
        payload,
        openStudy,
        this.closeModalTarget,
      );
      return;
    }
    await this.renderNodeModal(modal.studyId, openStudy);
  }

  /** Studies behind one distribution bar: the records matching the current
   * filter AND owning the bar's label. Both pieces come from the API; the
   * client only intersects the two id sets. */
  private async barStudies(criterion: string, label: string): Promise<StudiesPayload> {
    const constraint = { ...(this.state.filter[criterion] ?? {}) };
    if (label === "N/A") {
      constraint.include = [];
      delete constraint.include_na;
    } else {
      constraint.include = [label];
      constraint.include_na = false;
    }
    const merged: FilterSpec = { ...this.state.filter, [criterion]: constraint };
    const columns = ["study_id", ...this.defaultColumns()];
    const [ofLabel, ofFilter] = await Promise.all([
      this.api.studies(merged, columns),
      this.api.studies(this.state.filter, ["study_id"]),
    ]);
    const visible = new Set(ofFilter.rows.map((row) => String(row["study_id"])));
    const rows = ofLabel.rows.filter((row) => visible.has(String(row["study_id"])));
    return { ...ofLabel, rows, total: rows.length };
  }

  /** Node modal: partners of the clicked study under the current view's
   * semantics (similarity threshold, or selected timeline edge kinds). */
  private async renderNodeModal(
    studyId: string,
    openStudy: (studyId: string) => void,
  ): Promise<void> {
    const columns = ["study_id", ...this.defaultColumns()];
    if (this.state.view === "similarity") {
      const payload = await this.api.similarity(
        this.state.similarityMode,
        this.state.similarityThreshold,
        this.state.filter,
        studyId,
      );
      const neighbors = payload.focus?.neighbors ?? [];
      const order = new Map(neighbors.map((n, i) => [n.study_id, i]));
      const zById = new Map(neighbors.map((n) => [n.study_id, n.z]));
      const studies = await this.api.studies(this.state.filter, columns);
      const rows = studies.rows
        .filter((row) => order.has(String(row["study_id"])))
        .sort((a, b) => order.get(String(a["study_id"]))! - order.get(String(b["study_id"]))!);
      renderStudyListModal(
        this.elements.modalRoot,
        `Similar to ${studyId} (z ≥ ${this.state.similarityThreshold})`,
        { ...studies, rows, total: rows.length },
        openStudy,
        this.closeModalTarget,
        { header: "z", text: (id) => zById.get(id)?.toFixed(2) ?? "" },
      );
      return;
    }
    const payload = await this.api.timeline("both", this.state.filter);
    const connected = new Set<string>();
    for (const edge of payload.edges) {
      if (edge.kind === "authors" && !this.state.edgeAuthors) continue;
      if (edge.kind === "citations" && !this.state.edgeCitations) continue;
      if (edge.a === studyId) connected.add(edge.b);
      if (edge.b === studyId) connected.add(edge.a);
    }
    const studies = await this.api.studies(this.state.filter, columns);
    const rows = studies.rows.filter((row) => connected.has(String(row["study_id"])));
    renderStudyListModal(
      this.elements.modalRoot,
      `Connections of ${studyId}`,
      { ...studies, rows, total: rows.length },
      openStudy,
      this.closeModalTarget,
    );
  }

  shownIds(): string[] {
    return [...this.currentIds];
  }
}

export function appElements(root: HTMLElement): AppElements {
  const get = (id: string) => {
    const el = root.querySelector<HTMLElement>(`#${id}`);
    if (!el) throw new Error(`missing #${id}`);
    return el;
  };
  return {
    viewMenu: get("view-menu"),
    sidebar: get("sidebar"),
    viewRoot: get("view-root"),
    modalRoot: get("modal-root"),
    errorBanner: get("error-banner"),
    snapshotInfo: get("snapshot-info"),
  };
}

export const APP_SKELETON = `
  <header>
    <h1>Study Atlas</h1>
    <nav id="view-menu"></nav>
    <span id="snapshot-info"></span>
    <div id="error-banner"></div>
  </header>
  <div class="layout">
    <aside id="sidebar"></aside>
    <main id="view-root"></main>
  </div>
  <div id="modal-root"></div>
`;

export async function createApp(
  root: HTMLElement,
  api: ApiClient,
  query = "",
  onUrlChange: (query: string) => void = () => {},
): Promise<App> {
  root.innerHTML = APP_SKELETON;
  const app = new App(api, appElements(root), onUrlChange);
  await app.boot(query);
  if (app.schema) {
    app.elements.snapshotInfo.textContent = `snapshot ${app.schema.snapshot_id.slice(0, 12)}`;
  }
  return app;
}
