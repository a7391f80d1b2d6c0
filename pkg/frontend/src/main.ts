// Browser entry point: hash-routed pages over the API client.  All state
// is re-fetched on navigation; the UI never caches truth.

import { ApiClient, ApiError } from "./client.js";
import { EventFeed, pollEvents } from "./eventFeed.js";
import { buildTimeline, renderTimeline } from "./failoverTimeline.js";
import {
  EMPTY_FORM,
  buildPayload,
  submitState,
  type ProvisionFormState,
} from "./provisionForm.js";
import {
  renderDevices,
  renderEvents,
  renderInstances,
  renderPolicies,
  renderRib,
} from "./pages.js";

import { INSTANCE_TYPES } from "./types.js";

const client = new ApiClient(
  (window as { NETORCH_API?: string }).NETORCH_API ?? "",
);

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node;
}

function showError(err: unknown): void {
  const box = el("error-box");
  box.textContent =
    err instanceof ApiError ? `${err.code}: ${err.detail}` : String(err);
  box.classList.remove("hidden");
}

function clearError(): void {
  el("error-box").classList.add("hidden");
}

async function renderPage(): Promise<void> {
  clearError();
  const main = el("main");
  const route = window.location.hash.replace(/^#\/?/, "") || "devices";
  try {
    if (route === "devices") {
      main.innerHTML = renderDevices(await client.listDevices());
    } else if (route === "instances") {
      main.innerHTML =
        provisionFormHtml() + renderInstances(await client.listInstances());
      wireProvisionForm();
    } else if (route === "policies") {
      const [policies, events] = await Promise.all([
        client.listPolicies(),
        client.events(0),
      ]);
      const timelines = policies
        .map((p) => renderTimeline(buildTimeline(events, p.service)))
        .join("\n");
      main.innerHTML = renderPolicies(policies) + timelines;
    } else if (route.startsWith("rib/")) {
      const speaker = route.slice("rib/".length);
      main.innerHTML = renderRib(speaker, await client.rib(speaker));
    } else if (route === "events") {
      main.innerHTML = renderEvents(await client.events(0));
    } else {
      main.textContent = `unknown page: ${route}`;
    }
  } catch (err) {
    showError(err);
  }
}

function provisionFormHtml(): string {
  const options = INSTANCE_TYPES.map(
    (t) => `<option value="${t}">${t}</option>`,
  ).join("");
  return `
<form id="provision-form">
  <input id="pf-host" placeholder="host name" />
  <input id="pf-tenant" placeholder="tenant" />
  <input id="pf-count" type="number" value="1" min="1" />
  <select id="pf-type"><option value="">type…</option>${options}</select>
  <select id="pf-kind"><option value="">kind…</option>
    <option value="container">container</option><option value="vm">vm</option>
  </select>
  <label><input id="pf-validate" type="checkbox" /> validate</label>
  <label><input id="pf-fresh" type="checkbox" /> fresh install</label>
  <button id="pf-submit" type="submit">provision</button>
  <span id="pf-message"></span>
</form>`;
}

function readForm(): ProvisionFormState {
  return {
    ...EMPTY_FORM,
    host: (el("pf-host") as HTMLInputElement).value,
    tenant: (el("pf-tenant") as HTMLInputElement).value,
    count: Number((el("pf-count") as HTMLInputElement).value),
    type: (el("pf-type") as HTMLSelectElement)
      .value as ProvisionFormState["type"],
    kind: (el("pf-kind") as HTMLSelectElement)
      .value as ProvisionFormState["kind"],
    validate: (el("pf-validate") as HTMLInputElement).checked,
    freshInstall: (el("pf-fresh") as HTMLInputElement).checked,
  };
}

function wireProvisionForm(): void {
  const form = el("provision-form") as HTMLFormElement;
  const refresh = (): void => {
    const state = submitState(readForm());
    (el("pf-submit") as HTMLButtonElement).disabled = state.disabled;
    el("pf-message").textContent = state.message;
  };
  form.addEventListener("input", refresh);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void (async () => {
      try {
        const result = await client.createInstances(buildPayload(readForm()));
        el("pf-message").textContent = `created: ${result.ids.join(", ")}`;
        await renderPage();
      } catch (err) {
        showError(err); // inline; the form keeps its values
      }
    })();
  });
  refresh();
}

export function start(): void {
  window.addEventListener("hashchange", () => void renderPage());
  void renderPage();

  // live feed in the footer, resuming from the last seen seq
  const feed = new EventFeed(0);
  void pollEvents(
    (since) => client.events(since, 2000),
    feed,
    (fresh) => {
      const footer = el("live-events");
      footer.innerHTML = renderEvents(feed.rendered.slice(-20).concat());
      footer.dataset["lastSeq"] = String(fresh[fresh.length - 1].seq);
    },
    () => false,
    (ms) => new Promise((resolve) => setTimeout(resolve, ms)),
  );
}

if (typeof document !== "undefined" && document.getElementById("main")) {
  start();
}
