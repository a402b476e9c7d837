/** Sidebar filter panel: include/exclude toggles per criterion value,
 * numeric ranges, and the N/A switch. Vocabularies come from the unfiltered
 * distribution endpoint so open-vocabulary criteria list observed labels. */

import { ApiClient, CriterionConstraint, CriterionInfo, FilterSpec } from "./api.js";
import { toggleLabel } from "./state.js";

export interface FilterPanelContext {
  api: ApiClient;
  criteria: CriterionInfo[];
  getFilter: () => FilterSpec;
  setFilter: (filter: FilterSpec) => void;
}

const NA_LITERAL = "N/A";

async function labelsFor(api: ApiClient, criterion: CriterionInfo): Promise<string[]> {
  const fromSchema = (criterion.options ?? []).filter((label) => label !== NA_LITERAL);
  if (fromSchema.length) return fromSchema;
  const dist = await api.distribution(criterion.name, {}, 0);
  return dist.bars.map((bar) => bar.label).filter((label) => label !== NA_LITERAL).sort();
}

function numericRow(
  name: string,
  constraint: CriterionConstraint,
  update: (next: CriterionConstraint) => void,
): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "filter-range";
  const lo = document.createElement("input");
  const hi = document.createElement("input");
  for (const [input, index, placeholder] of [[lo, 0, "min"], [hi, 1, "max"]] as const) {
    input.type = "number";
    input.placeholder = placeholder;
    input.value = constraint.range ? String(constraint.range[index]) : "";
    input.addEventListener("change", () => {
      const loValue = Number(lo.value);
      const hiValue = Number(hi.value);
      if (lo.value === "" || hi.value === "" || !Number.isFinite(loValue) || !Number.isFinite(hiValue)) {
        const next = { ...constraint };
        delete next.range;
        update(next);
        return;
      }
      update({ ...constraint, range: [Math.min(loValue, hiValue), Math.max(loValue, hiValue)] });
    });
  }
  wrap.append(lo, document.createTextNode("–"), hi);
  return wrap;
}

export async function renderFilterPanel(root: HTMLElement, ctx: FilterPanelContext): Promise<void> {
  root.innerHTML = "";
  const heading = document.createElement("h2");
  heading.textContent = "Filters";
  root.append(heading);

  const clear = document.createElement("button");
  clear.id = "clear-filters";
  clear.textContent = "Deselect all";
  clear.addEventListener("click", () => ctx.setFilter({}));
  root.append(clear);

  for (const criterion of ctx.criteria) {
    if (criterion.kind === "identity") continue;
    const section = document.createElement("details");
    section.className = "filter-section";
    section.dataset.criterion = criterion.name;
    const summary = document.createElement("summary");
    summary.textContent = criterion.name;
    section.append(summary);

    const constraint = () => ctx.getFilter()[criterion.name] ?? {};
    const setConstraint = (next: CriterionConstraint) => {
      const filter = { ...ctx.getFilter() };
      filter[criterion.name] = next;
      ctx.setFilter(filter);
    };

    if (criterion.kind === "numeric") {
      section.append(numericRow(criterion.name, constraint(), setConstraint));
    } else {
      const labels = await labelsFor(ctx.api, criterion);
      const list = document.createElement("div");
      list.className = "filter-options";
      for (const label of labels) {
        const row = document.createElement("div");
        row.className = "filter-option";
        row.dataset.label = label;
        const name = document.createElement("span");
        name.textContent = label;
        const includeBtn = document.createElement("button");
        includeBtn.className = "opt-include";
        includeBtn.textContent = "+";
        includeBtn.title = `Only studies with ${label}`;
        const excludeBtn = document.createElement("button");
        excludeBtn.className = "opt-exclude";
        excludeBtn.textContent = "−";
        excludeBtn.title = `Hide studies with ${label}`;
        const paint = () => {
          const c = constraint();
          includeBtn.classList.toggle("active", (c.include ?? []).includes(label));
          excludeBtn.classList.toggle("active", (c.exclude ?? []).includes(label));
        };
        includeBtn.addEventListener("click", () => {
          ctx.setFilter(toggleLabel(ctx.getFilter(), criterion.name, "include", label));
          paint();
        });
        excludeBtn.addEventListener("click", () => {
          ctx.setFilter(toggleLabel(ctx.getFilter(), criterion.name, "exclude", label));
          paint();
        });
        paint();
        row.append(includeBtn, excludeBtn, name);
        list.append(row);
      }
      section.append(list);
    }

    const naRow = document.createElement("label");
    naRow.className = "filter-na";
    const naBox = document.createElement("input");
    naBox.type = "checkbox";
    naBox.checked = constraint().include_na !== false;
    naBox.addEventListener("change", () => {
      const next = { ...constraint() };
      if (naBox.checked) {
        delete next.include_na;
      } else {
        next.include_na = false;
      }
      setConstraint(next);
    });
    naRow.append(naBox, document.createTextNode(` include ${NA_LITERAL}`));
    section.append(naRow);
    root.append(section);
  }
}
