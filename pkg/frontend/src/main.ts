// App shell: hash routing between the session list/wizard and a session
// page that polls its snapshot every two seconds. Polling only reads;
// every mutation is a button the user pressed.

import { AdvisorClient, RecommendationPayload, SessionSnapshot } from "./api.js";
import { deriveSessionView, SessionView } from "./state.js";
import { renderEvaluationEntry } from "./evaluation.js";
import { renderRecommendationPanel } from "./recommendation.js";
import { renderWizard } from "./wizard.js";

export const POLL_INTERVAL_MS = 2000;

function phaseBadge(view: SessionView): HTMLElement {
  const badge = document.createElement("span");
  badge.className = `phase-badge phase-${view.phase}`;
  badge.textContent = view.phaseLabel;
  return badge;
}

function summaryBlock(view: SessionView): HTMLElement {
  const block = document.createElement("div");
  block.className = "summary";
  const spendBar = document.createElement("progress");
  spendBar.max = 1;
  spendBar.value = view.spentFraction;
  block.appendChild(phaseBadge(view));
  block.insertAdjacentHTML(
    "beforeend",
    `<p>Step ${view.step} of ${view.totalSteps} — strategy ` +
      `(${view.strategy.c}, ${view.strategy.s}), spent ${view.spent} of ${view.budget}</p>`,
  );
  block.appendChild(spendBar);
  if (view.historyRows.length > 0) {
    const table = document.createElement("table");
    table.className = "history";
    table.innerHTML =
      "<thead><tr><th>Step</th><th>Strategy</th><th>Spent</th>" +
      "<th>Observed</th><th>Installment</th></tr></thead>";
    const body = document.createElement("tbody");
    for (const row of view.historyRows) {
      const tr = document.createElement("tr");
      tr.innerHTML =
        `<td>${row.step}</td><td>${row.strategy}</td><td>${row.spent}</td>` +
        `<td>${row.incumbent}</td><td>${row.delta}</td>`;
      body.appendChild(tr);
    }
    table.appendChild(body);
    block.appendChild(table);
  }
  return block;
}

export async function renderSessionPage(
  container: HTMLElement,
  client: AdvisorClient,
  sessionId: string,
): Promise<SessionView> {
  const snapshot: SessionSnapshot = await client.getSession(sessionId);
  const view = deriveSessionView(snapshot);

  container.replaceChildren();
  container.appendChild(summaryBlock(view));
  const refresh = () => {
    void renderSessionPage(container, client, sessionId);
  };

  if (view.canConfirm) {
    const confirm = document.createElement("button");
    confirm.className = "confirm";
    confirm.textContent =
      `Confirm annotation of +${view.installment.deltaC} class labels, ` +
      `+${view.installment.deltaS} masks`;
    confirm.addEventListener("click", () => {
      confirm.disabled = true;
      client.confirmAnnotation(sessionId).then(refresh, refresh);
    });
    container.appendChild(confirm);
  }

  if (view.canEnterScores) {
    renderEvaluationEntry(container, client, snapshot, refresh);
  }

  if (view.canAccept || view.isFinished) {
    const payload: RecommendationPayload = await client.getRecommendation(sessionId);
    renderRecommendationPanel(container, client, view, payload, refresh);
  }

  return view;
}

function renderHome(container: HTMLElement, client: AdvisorClient): void {
  container.replaceChildren();
  const heading = document.createElement("h2");
  heading.textContent = "Start an annotation campaign";
  container.appendChild(heading);
  renderWizard(container, client, (snapshot) => {
    window.location.hash = `#/session/${snapshot.id}`;
  });

  const listHeading = document.createElement("h2");
  listHeading.textContent = "Existing sessions";
  container.appendChild(listHeading);
  const list = document.createElement("ul");
  list.className = "session-list";
  container.appendChild(list);
  client.listSessions().then((sessions) => {
    for (const snapshot of sessions) {
      const view = deriveSessionView(snapshot);
      const item = document.createElement("li");
      const link = document.createElement("a");
      link.href = `#/session/${view.id}`;
      link.textContent = `${view.id.slice(0, 8)} — ${view.phaseLabel}, ` +
        `(${view.strategy.c}, ${view.strategy.s})`;
      item.appendChild(link);
      list.appendChild(item);
    }
  });
}

export function startApp(root: HTMLElement, client: AdvisorClient): () => void {
  let pollTimer: ReturnType<typeof setInterval> | undefined;

  const route = () => {
    if (pollTimer !== undefined) {
      clearInterval(pollTimer);
      pollTimer = undefined;
    }
    const match = window.location.hash.match(/^#\/session\/(\w+)$/);
    if (match) {
      const sessionId = match[1];
      void renderSessionPage(root, client, sessionId);
      pollTimer = setInterval(() => {
        void renderSessionPage(root, client, sessionId);
      }, POLL_INTERVAL_MS);
    } else {
      renderHome(root, client);
    }
  };

  window.addEventListener("hashchange", route);
  route();
  return () => {
    if (pollTimer !== undefined) clearInterval(pollTimer);
    window.removeEventListener("hashchange", route);
  };
}

declare global {
  interface Window {
    __budgetwiseStarted?: boolean;
  }
}

if (typeof document !== "undefined" && document.getElementById("app") && !window.__budgetwiseStarted) {
  window.__budgetwiseStarted = true;
  startApp(document.getElementById("app") as HTMLElement, new AdvisorClient(""));
}
