/** Modal overlays: key-information study lists and the full-record view.
 * Every count and row shown here comes straight from an API payload. */

import { ApiClient, CellValue, StudiesPayload, StudyDetail } from "./api.js";

function cellText(value: CellValue | undefined): string {
  if (value === undefined) return "";
  if (Array.isArray(value)) return value.join("; ");
  return String(value);
}

export function closeModal(root: HTMLElement, onClose?: () => void): void {
  root.innerHTML = "";
  root.classList.remove("open");
  if (onClose) onClose();
}

function modalShell(root: HTMLElement, title: string, onClose: () => void): HTMLElement {
  root.innerHTML = "";
  root.classList.add("open");
  const overlay = document.createElement("div");
  overlay.className = "modal-overlay";
  overlay.addEventListener("click", (event) => {
    if (event.target === overlay) closeModal(root, onClose);
  });
  const box = document.createElement("div");
  box.className = "modal-box";
  const header = document.createElement("div");
  header.className = "modal-header";
  const heading = document.createElement("h2");
  heading.textContent = title;
  const close = document.createElement("button");
  close.className = "modal-close";
  close.textContent = "×";
  close.addEventListener("click", () => closeModal(root, onClose));
  header.append(heading, close);
  box.append(header);
  overlay.append(box);
  root.append(overlay);
  return box;
}

/** Key-info table for a set of studies, with info icons to full records. */
export function renderStudyListModal(
  root: HTMLElement,
  title: string,
  payload: StudiesPayload,
  openStudy: (studyId: string) => void,
  onClose: () => void,
  extraColumn?: { header: string; text: (studyId: string) => string },
): void {
  const box = modalShell(root, title, onClose);
  const note = document.createElement("p");
  note.className = "modal-count";
  note.textContent = `${payload.total} studies`;
  box.append(note);

  const table = document.createElement("table");
  table.className = "key-info";
  const head = table.createTHead().insertRow();
  head.append(document.createElement("th"));
  for (const column of payload.columns) {
    const cell = document.createElement("th");
    cell.textContent = column;
    head.append(cell);
  }
  if (extraColumn) {
    const cell = document.createElement("th");
    cell.textContent = extraColumn.header;
    head.append(cell);
  }
  const body = table.createTBody();
  for (const row of payload.rows) {
    const tr = body.insertRow();
    tr.dataset.studyId = cellText(row["study_id"]);
    const info = tr.insertCell();
    const icon = document.createElement("button");
    icon.className = "info-icon";
    icon.textContent = "ⓘ";
    icon.title = "Full record";
    icon.addEventListener("click", () => openStudy(cellText(row["study_id"])));
    info.append(icon);
    for (const column of payload.columns) {
      tr.insertCell().textContent = cellText(row[column]);
    }
    if (extraColumn) {
      tr.insertCell().textContent = extraColumn.text(cellText(row["study_id"]));
    }
  }
  box.append(table);
}

/** Every stored value for one study, plus abstract and outbound link. */
export function renderFullRecordModal(
  root: HTMLElement,
  detail: StudyDetail,
  onClose: () => void,
): void {
  const box = modalShell(root, detail.study_id, onClose);
  box.classList.add("full-record");

  if (detail.link) {
    const link = document.createElement("a");
    link.href = detail.link;
    link.target = "_blank";
    link.rel = "noopener";
    link.textContent = "Link to Study";
    link.className = "study-link";
    box.append(link);
  }

  const authors = document.createElement("p");
  authors.className = "record-authors";
  authors.textContent = detail.authors.join(", ");
  box.append(authors);

  const table = document.createElement("table");
  table.className = "record-values";
  for (const [name, value] of Object.entries(detail.values)) {
    const row = table.insertRow();
    const label = document.createElement("th");
    label.textContent = name;
    row.append(label);
    row.insertCell().textContent = cellText(value);
  }
  box.append(table);

  if (detail.abstract) {
    const heading = document.createElement("h3");
    heading.textContent = "Abstract";
    const abstract = document.createElement("p");
    abstract.className = "record-abstract";
    abstract.textContent = detail.abstract;
    box.append(heading, abstract);
  }
}

/** Fetch-and-show helper for the full-record modal. */
export async function openFullRecord(
  root: HTMLElement,
  api: ApiClient,
  studyId: string,
  onClose: () => void,
): Promise<void> {
  const detail = await api.study(studyId);
  renderFullRecordModal(root, detail, onClose);
}
