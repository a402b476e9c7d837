/** Contribution form: suggest a new study for the corpus. Submissions go
 * to the maintainer queue; nothing changes until one is accepted. */

import { ApiClient, ApiError, SchemaInfo } from "./api.js";

export function renderSubmissionForm(
  root: HTMLElement,
  api: ApiClient,
  schema: SchemaInfo,
  onClose: () => void,
): void {
  root.innerHTML = "";
  root.classList.add("open");
  const overlay = document.createElement("div");
  overlay.className = "modal-overlay";
  const box = document.createElement("div");
  box.className = "modal-box submission-form";

  const heading = document.createElement("h2");
  heading.textContent = "Suggest a study";
  const close = document.createElement("button");
  close.className = "modal-close";
  close.textContent = "×";
  close.addEventListener("click", () => {
    root.innerHTML = "";
    root.classList.remove("open");
    onClose();
  });
  const header = document.createElement("div");
  header.className = "modal-header";
  header.append(heading, close);
  box.append(header);

  const form = document.createElement("form");
  form.id = "submission-form";

  const contact = document.createElement("input");
  contact.name = "contact";
  contact.placeholder = "Your contact (required)";
  contact.required = true;
  form.append(label("Contact", contact));

  const note = document.createElement("textarea");
  note.name = "note";
  note.placeholder = "Anything the maintainers should know";
  form.append(label("Note", note));

  const rowFields = new Map<string, HTMLInputElement>();
  const rowSection = document.createElement("details");
  const rowSummary = document.createElement("summary");
  rowSummary.textContent = "Candidate record (optional)";
  rowSection.append(rowSummary);
  for (const column of ["study_id", "authors", ...schema.criteria.map((c) => c.name)]) {
    const input = document.createElement("input");
    input.name = `row:${column}`;
    rowFields.set(column, input);
    rowSection.append(label(column, input));
  }
  form.append(rowSection);

  const status = document.createElement("p");
  status.id = "submission-status";
  const send = document.createElement("button");
  send.type = "submit";
  send.textContent = "Submit";
  form.append(send, status);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const row: Record<string, string> = {};
    for (const [column, input] of rowFields) {
      if (input.value.trim() !== "") {
        row[column] = input.value;
      }
    }
    void api
      .submit(contact.value, row, note.value)
      .then((result) => {
        status.textContent = `Submitted for review (#${result.submission_id}). Thank you!`;
        status.className = "ok";
      })
      .catch((error) => {
        status.textContent =
          error instanceof ApiError ? `Rejected: ${error.message}` : String(error);
        status.className = "bad";
      });
  });

  box.append(form);
  overlay.append(box);
  root.append(overlay);
}

function label(text: string, control: HTMLElement): HTMLElement {
  const wrap = document.createElement("label");
  wrap.className = "form-row";
  const span = document.createElement("span");
  span.textContent = text;
  wrap.append(span, control);
  return wrap;
}
