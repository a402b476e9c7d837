/** Tabular view: sortable study table with column toggles, row info icons,
 * and CSV download of the live filter. */

import { ApiClient, CellValue, StudiesPayload } from "../api.js";
import { ExplorationState } from "../state.js";

export interface TableContext {
  api: ApiClient;
  state: ExplorationState;
  defaultColumns: string[];
  allColumns: string[];
  setColumns: (columns: string[]) => void;
  openStudy: (studyId: string) => void;
}

function cellText(value: CellValue | undefined): string {
  if (value === undefined) return "";
  if (Array.isArray(value)) return value.join("; ");
  return String(value);
}

export function visibleColumns(ctx: TableContext): string[] {
  return [...ctx.defaultColumns, ...ctx.state.columns.filter((c) => !ctx.defaultColumns.includes(c))];
}

export function renderTable(root: HTMLElement, ctx: TableContext, payload: StudiesPayload): void {
  root.innerHTML = "";

  const toggles = document.createElement("div");
  toggles.className = "column-toggles";
  for (const column of ctx.allColumns) {
    if (ctx.defaultColumns.includes(column)) continue;
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.dataset.column = column;
    box.checked = ctx.state.columns.includes(column);
    box.addEventListener("change", () => {
      const next = box.checked
        ? [...ctx.state.columns, column]
        : ctx.state.columns.filter((c) => c !== column);
      ctx.setColumns(next);
    });
    label.append(box, document.createTextNode(" " + column));
    toggles.append(label);
  }
  root.append(toggles);

  const bar = document.createElement("div");
  bar.className = "table-bar";
  const count = document.createElement("span");
  count.id = "study-count";
  count.textContent = `${payload.total} studies`;
  const download = document.createElement("a");
  download.id = "download-csv";
  download.textContent = "Download CSV";
  download.href = ctx.api.exportUrl(ctx.state.filter, ["study_id", "authors", ...visibleColumns(ctx)]);
  download.setAttribute("download", "corpus-export.csv");
  bar.append(count, download);
  root.append(bar);

  if (payload.total === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "0 studies match the current filters.";
    root.append(empty);
    return;
  }

  const table = document.createElement("table");
  table.id = "study-table";
  const head = table.createTHead().insertRow();
  head.append(document.createElement("th"));
  const columns = payload.columns.filter((c) => c !== "study_id");
  for (const column of columns) {
    const th = document.createElement("th");
    th.textContent = column;
    th.className = "sortable";
    th.addEventListener("click", () => sortBy(table, columns.indexOf(column) + 1));
    head.append(th);
  }
  const body = table.createTBody();
  for (const row of payload.rows) {
    const tr = body.insertRow();
    tr.dataset.studyId = cellText(row["study_id"]);
    const info = tr.insertCell();
    const icon = document.createElement("button");
    icon.className = "info-icon";
    icon.textContent = "ⓘ";
    icon.addEventListener("click", () => ctx.openStudy(cellText(row["study_id"])));
    info.append(icon);
    for (const column of columns) {
      tr.insertCell().textContent = cellText(row[column]);
    }
  }
  root.append(table);
}

function sortBy(table: HTMLTableElement, columnIndex: number): void {
  const body = table.tBodies[0];
  const rows = [...body.rows];
  const ascending = table.dataset.sortColumn !== String(columnIndex) || table.dataset.sortDir === "desc";
  rows.sort((a, b) => {
    const ta = a.cells[columnIndex]?.textContent ?? "";
    const tb = b.cells[columnIndex]?.textContent ?? "";
    const na = Number(ta);
    const nb = Number(tb);
    const result =
      Number.isFinite(na) && Number.isFinite(nb) && ta !== "" && tb !== ""
        ? na - nb
        : ta.localeCompare(tb);
    return ascending ? result : -result;
  });
  table.dataset.sortColumn = String(columnIndex);
  table.dataset.sortDir = ascending ? "asc" : "desc";
  body.append(...rows);
}
