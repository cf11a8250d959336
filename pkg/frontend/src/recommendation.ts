// Recommendation panel: posterior-mean heatmap, Pareto polyline (cost vs
// expected improvement), the recommended installment, and the Accept
// action. Every number shown comes verbatim from the service payload —
// the only arithmetic here is linear pixel placement.

import { AdvisorClient, ApiError, RecommendationPayload } from "./api.js";
import { SessionView } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const PLOT_W = 360;
const PLOT_H = 220;
const PAD = 24;

function scale(value: number, lo: number, hi: number, outLo: number, outHi: number): number {
  if (hi === lo) return (outLo + outHi) / 2;
  return outLo + ((value - lo) / (hi - lo)) * (outHi - outLo);
}

function renderParetoPlot(payload: RecommendationPayload): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${PLOT_W} ${PLOT_H}`);
  svg.setAttribute("class", "pareto-plot");

  const front = payload.pareto_front;
  const costs = front.map((p) => p.cost);
  const eis = front.map((p) => p.ei);
  const costLo = Math.min(...costs);
  const costHi = Math.max(...costs);
  const eiLo = Math.min(...eis);
  const eiHi = Math.max(...eis);

  const toX = (cost: number) => scale(cost, costLo, costHi, PAD, PLOT_W - PAD);
  const toY = (ei: number) => scale(ei, eiLo, eiHi, PLOT_H - PAD, PAD);

  const polyline = document.createElementNS(SVG_NS, "polyline");
  polyline.setAttribute("class", "pareto-front");
  polyline.setAttribute(
    "points",
    front.map((p) => `${toX(p.cost)},${toY(p.ei)}`).join(" "),
  );
  svg.appendChild(polyline);

  for (const point of front) {
    const vertex = document.createElementNS(SVG_NS, "circle");
    vertex.setAttribute("class", "pareto-vertex");
    vertex.setAttribute("cx", String(toX(point.cost)));
    vertex.setAttribute("cy", String(toY(point.ei)));
    vertex.setAttribute("r", "3");
    vertex.dataset.cost = String(point.cost);
    vertex.dataset.ei = String(point.ei);
    vertex.dataset.c = String(point.c);
    vertex.dataset.s = String(point.s);
    svg.appendChild(vertex);
  }

  const threshold = document.createElementNS(SVG_NS, "line");
  threshold.setAttribute("class", "threshold-line");
  threshold.setAttribute("x1", String(PAD));
  threshold.setAttribute("x2", String(PLOT_W - PAD));
  threshold.setAttribute("y1", String(toY(payload.threshold)));
  threshold.setAttribute("y2", String(toY(payload.threshold)));
  threshold.dataset.threshold = String(payload.threshold);
  svg.appendChild(threshold);

  return svg;
}

function renderHeatmap(payload: RecommendationPayload, view: SessionView): HTMLElement {
  const { c: cAxis, s: sAxis, means } = payload.posterior;
  const flat = means.flat();
  const lo = Math.min(...flat);
  const hi = Math.max(...flat);

  const grid = document.createElement("div");
  grid.className = "heatmap";
  grid.style.gridTemplateColumns = `repeat(${cAxis.length}, 1fr)`;

  // Rows from high s to low s so the segmentation axis points up.
  for (let j = sAxis.length - 1; j >= 0; j--) {
    for (let i = 0; i < cAxis.length; i++) {
      const value = means[j][i];
      const cell = document.createElement("div");
      cell.className = "heatmap-cell";
      cell.dataset.c = String(cAxis[i]);
      cell.dataset.s = String(sAxis[j]);
      cell.dataset.mean = String(value);
      const intensity = scale(value, lo, hi, 0, 1);
      cell.style.backgroundColor = `rgba(31, 119, 180, ${intensity})`;
      cell.title = `C=${cAxis[i]}, S=${sAxis[j]}: ${value}`;
      if (
        view.strategy.c >= cAxis[i] &&
        (i === cAxis.length - 1 || view.strategy.c < cAxis[i + 1]) &&
        view.strategy.s >= sAxis[j] &&
        (j === sAxis.length - 1 || view.strategy.s < sAxis[j + 1])
      ) {
        cell.classList.add("current-strategy");
      }
      grid.appendChild(cell);
    }
  }
  return grid;
}

export function renderRecommendationPanel(
  container: HTMLElement,
  client: AdvisorClient,
  view: SessionView,
  payload: RecommendationPayload,
  onAccepted: () => void,
): HTMLElement {
  const panel = document.createElement("section");
  panel.className = "recommendation";

  const headline = document.createElement("h3");
  headline.textContent = payload.final
    ? `Campaign finished at (${payload.strategy.c}, ${payload.strategy.s})`
    : `Next installment: +${payload.delta.delta_c} class labels, ` +
      `+${payload.delta.delta_s} masks → (${payload.strategy.c}, ${payload.strategy.s})`;
  if (payload.final) headline.classList.add("final-strategy");
  panel.appendChild(headline);

  const budgetLine = document.createElement("p");
  budgetLine.className = "remaining-budget";
  budgetLine.textContent = `Remaining budget after this installment: ${payload.remaining_budget}`;
  panel.appendChild(budgetLine);

  panel.appendChild(renderParetoPlot(payload));
  panel.appendChild(renderHeatmap(payload, view));

  const accept = document.createElement("button");
  accept.className = "accept";
  accept.textContent = "Accept installment";
  accept.disabled = payload.final || !view.canAccept;
  const error = document.createElement("span");
  error.className = "row-error";
  accept.addEventListener("click", () => {
    accept.disabled = true;
    client
      .acceptRecommendation(view.id)
      .then(onAccepted)
      .catch((err) => {
        if (err instanceof ApiError && err.status === 409) {
          onAccepted(); // stale phase; refetch and re-render
        } else {
          accept.disabled = false;
          error.textContent = err instanceof Error ? err.message : String(err);
        }
      });
  });
  panel.appendChild(accept);
  panel.appendChild(error);

  container.appendChild(panel);
  return panel;
}
