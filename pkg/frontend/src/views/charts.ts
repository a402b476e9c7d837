/** Graphical view: one bar chart per selected criterion, a max-bars slider,
 * and bar click-through to the studies behind the bar. Chart height adapts
 * to the number of bars. */

import { DistributionPayload } from "../api.js";
import { ExplorationState } from "../state.js";

export interface ChartsContext {
  state: ExplorationState;
  defaultCharts: string[];
  allCharts: string[];
  setCharts: (charts: string[]) => void;
  setMaxBars: (maxBars: number) => void;
  openBar: (criterion: string, label: string) => void;
}

export function selectedCharts(ctx: ChartsContext): string[] {
  const extra = ctx.state.charts.filter((c) => !ctx.defaultCharts.includes(c));
  return [...ctx.defaultCharts.filter((c) => ctx.allCharts.includes(c)), ...extra];
}

const BAR_HEIGHT = 22;
const CHART_WIDTH = 420;
const LABEL_WIDTH = 170;

function renderChart(payload: DistributionPayload, openBar: ChartsContext["openBar"]): HTMLElement {
  const figure = document.createElement("figure");
  figure.className = "chart";
  figure.dataset.criterion = payload.criterion;
  const caption = document.createElement("figcaption");
  caption.textContent = payload.criterion + (payload.truncated ? " (truncated)" : "");
  figure.append(caption);

  const svgNs = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(svgNs, "svg");
  const height = Math.max(payload.bars.length * BAR_HEIGHT, BAR_HEIGHT);
  svg.setAttribute("viewBox", `0 0 ${CHART_WIDTH} ${height}`);
  svg.setAttribute("width", String(CHART_WIDTH));
  svg.setAttribute("height", String(height));
  const maxCount = Math.max(...payload.bars.map((b) => b.count), 1);

  payload.bars.forEach((bar, index) => {
    const group = document.createElementNS(svgNs, "g");
    group.classList.add("bar");
    group.dataset.label = bar.label;
    group.dataset.count = String(bar.count);
    const y = index * BAR_HEIGHT;
    const width = ((CHART_WIDTH - LABEL_WIDTH - 40) * bar.count) / maxCount;

    const label = document.createElementNS(svgNs, "text");
    label.setAttribute("x", String(LABEL_WIDTH - 6));
    label.setAttribute("y", String(y + BAR_HEIGHT / 2 + 4));
    label.setAttribute("text-anchor", "end");
    label.textContent = bar.label;

    const rect = document.createElementNS(svgNs, "rect");
    rect.setAttribute("x", String(LABEL_WIDTH));
    rect.setAttribute("y", String(y + 3));
    rect.setAttribute("width", String(Math.max(width, 1)));
    rect.setAttribute("height", String(BAR_HEIGHT - 6));

    const count = document.createElementNS(svgNs, "text");
    count.setAttribute("x", String(LABEL_WIDTH + Math.max(width, 1) + 6));
    count.setAttribute("y", String(y + BAR_HEIGHT / 2 + 4));
    count.textContent = String(bar.count);

    group.append(label, rect, count);
    group.addEventListener("click", () => openBar(payload.criterion, bar.label));
    svg.append(group);
  });
  figure.append(svg);
  return figure;
}

export function renderCharts(
  root: HTMLElement,
  ctx: ChartsContext,
  distributions: DistributionPayload[],
): void {
  root.innerHTML = "";

  const controls = document.createElement("div");
  controls.className = "chart-controls";

  const selectAll = document.createElement("button");
  selectAll.id = "select-all-charts";
  selectAll.textContent = "Select All";
  selectAll.addEventListener("click", () => ctx.setCharts([...ctx.allCharts]));
  controls.append(selectAll);

  for (const criterion of ctx.allCharts) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.dataset.chart = criterion;
    box.checked = selectedCharts(ctx).includes(criterion);
    box.addEventListener("change", () => {
      const current = new Set(selectedCharts(ctx));
      if (box.checked) {
        current.add(criterion);
      } else {
        current.delete(criterion);
      }
      ctx.setCharts([...current]);
    });
    label.append(box, document.createTextNode(" " + criterion));
    controls.append(label);
  }

  const sliderLabel = document.createElement("label");
  sliderLabel.className = "max-bars";
  const slider = document.createElement("input");
  slider.type = "range";
  slider.id = "max-bars";
  slider.min = "0";
  slider.max = "25";
  slider.value = String(ctx.state.maxBars);
  const readout = document.createElement("span");
  readout.textContent = ctx.state.maxBars > 0 ? String(ctx.state.maxBars) : "all";
  slider.addEventListener("change", () => ctx.setMaxBars(Number(slider.value)));
  sliderLabel.append(document.createTextNode("max bars "), slider, readout);
  controls.append(sliderLabel);
  root.append(controls);

  const grid = document.createElement("div");
  grid.id = "chart-grid";
  for (const payload of distributions) {
    grid.append(renderChart(payload, ctx.openBar));
  }
  root.append(grid);
}
