// Score entry for a pending evaluation round: one row per request emitted
// by confirm-annotation, already-submitted rows shown locked.

import { AdvisorClient, ApiError, SessionSnapshot } from "./api.js";

export function renderEvaluationEntry(
  container: HTMLElement,
  client: AdvisorClient,
  snapshot: SessionSnapshot,
  onPhaseChange: () => void,
): HTMLElement {
  const panel = document.createElement("section");
  panel.className = "evaluation";

  const progress = document.createElement("p");
  progress.className = "progress";
  panel.appendChild(progress);

  const table = document.createElement("table");
  table.innerHTML =
    "<thead><tr><th>Request</th><th>Class labels</th><th>Masks</th>" +
    "<th>Score</th><th></th></tr></thead>";
  const body = document.createElement("tbody");
  table.appendChild(body);
  panel.appendChild(table);

  const updateProgress = () => {
    const done = body.querySelectorAll("tr.locked").length;
    const total = snapshot.pending_requests.length;
    progress.textContent = `${done} of ${total} evaluations submitted`;
  };

  for (const request of snapshot.pending_requests) {
    const row = document.createElement("tr");
    row.dataset.requestId = request.request_id;
    const submitted = request.request_id in snapshot.observations;

    row.innerHTML =
      `<td>${request.request_id}</td><td>${request.c}</td><td>${request.s}</td>`;

    const scoreCell = document.createElement("td");
    const input = document.createElement("input");
    input.type = "number";
    input.min = "0";
    input.max = "1";
    input.step = "any";
    if (submitted) {
      input.value = String(snapshot.observations[request.request_id]);
      input.disabled = true;
      row.classList.add("locked");
    }
    scoreCell.appendChild(input);
    row.appendChild(scoreCell);

    const actionCell = document.createElement("td");
    const button = document.createElement("button");
    button.textContent = "Submit";
    button.disabled = submitted;
    const error = document.createElement("span");
    error.className = "row-error";
    actionCell.appendChild(button);
    actionCell.appendChild(error);
    row.appendChild(actionCell);

    button.addEventListener("click", () => {
      error.textContent = "";
      const score = Number(input.value);
      if (!Number.isFinite(score) || score < 0 || score > 1) {
        error.textContent = "score must lie in [0, 1]";
        return;
      }
      button.disabled = true;
      client
        .submitObservation(snapshot.id, request.request_id, score)
        .then((result) => {
          input.disabled = true;
          row.classList.add("locked");
          updateProgress();
          if (result.phase !== "awaiting_evaluations") {
            onPhaseChange();
          }
        })
        .catch((err) => {
          button.disabled = false;
          error.textContent = err instanceof ApiError ? err.message : "submit failed";
          if (err instanceof ApiError && err.status === 409) {
            onPhaseChange(); // stale view; let the caller refetch
          }
        });
    });

    body.appendChild(row);
  }

  updateProgress();
  container.appendChild(panel);
  return panel;
}
