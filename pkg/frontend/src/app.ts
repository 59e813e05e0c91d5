/** DOM wiring.  All state lives in the Store; this file only translates
 * events into store calls and store state into innerHTML. */

import { Api } from "./api.js";
import {
  renderAuditDrawer,
  renderEvaluation,
  renderFixtureOptions,
  renderFrameShift,
  renderProblem,
  renderProfilePresets,
  renderRanking,
  renderToast,
} from "./render.js";
import { Store, ViewState } from "./state.js";

const SHELL = `
<header>
  <h1>Comparative what-if console</h1>
  <p class="tagline">marked-outcome evaluation, straight from the service &mdash; the page never computes a number itself</p>
</header>
<section class="controls">
  <label>fixture
    <select id="fixture-select"></select>
  </label>
  <label>decision
    <select id="decision-select"></select>
  </label>
  <button id="open-fixture" type="button">open</button>
  <span class="spacer"></span>
  <label>marking preset
    <select id="preset-select"></select>
  </label>
  <button id="apply-profile" type="button">apply</button>
  <span id="busy" class="busy-dot" hidden>working&hellip;</span>
</section>
<main>
  <section id="ranking-strip"></section>
  <section id="problem"></section>
  <section id="evaluation"></section>
</main>
<section class="audits">
  <div class="audit-block">
    <h2>Transitivity</h2>
    <button id="audit-joint" type="button">joint</button>
    <button id="audit-pairwise" type="button">pairwise</button>
    <div id="audit-output"></div>
  </div>
  <div class="audit-block">
    <h2>Frame shift</h2>
    <label>offset <input id="offset-input" type="number" step="any" value="0"></label>
    <label><input id="use-profile" type="checkbox"> re-derive marks from profile</label>
    <button id="run-shift" type="button">run</button>
    <div id="frameshift-output"></div>
  </div>
</section>
<div id="toast-region"></div>
`;

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

export function boot(root: HTMLElement): Store {
  root.innerHTML = SHELL;
  const api = new Api((url, init) => window.fetch(url, init), "");
  const store = new Store(api);

  const fixtureSelect = byId<HTMLSelectElement>("fixture-select");
  const decisionSelect = byId<HTMLSelectElement>("decision-select");
  const presetSelect = byId<HTMLSelectElement>("preset-select");
  const problemEl = byId<HTMLElement>("problem");
  const rankingEl = byId<HTMLElement>("ranking-strip");
  const evaluationEl = byId<HTMLElement>("evaluation");
  const auditEl = byId<HTMLElement>("audit-output");
  const frameShiftEl = byId<HTMLElement>("frameshift-output");
  const toastEl = byId<HTMLElement>("toast-region");
  const busyEl = byId<HTMLElement>("busy");
  const offsetInput = byId<HTMLInputElement>("offset-input");

  let lastFixtures: unknown = null;

  function syncDecisions(): void {
    const entry = store.current.fixtures.find((f) => f.id === fixtureSelect.value);
    const count = entry ? entry.decisions : 0;
    decisionSelect.innerHTML = Array.from(
      { length: count },
      (_, i) => `<option value="${i}">${i}</option>`,
    ).join("");
  }

  function render(state: ViewState): void {
    if (state.fixtures !== lastFixtures) {
      lastFixtures = state.fixtures;
      fixtureSelect.innerHTML = renderFixtureOptions(state.fixtures);
      presetSelect.innerHTML = renderProfilePresets(state.fixtures);
      syncDecisions();
    }
    if (state.envelope) {
      problemEl.innerHTML = renderProblem(state.envelope);
      rankingEl.innerHTML = renderRanking(state.envelope);
      evaluationEl.innerHTML = renderEvaluation(state.envelope);
    } else {
      problemEl.innerHTML = `<p class="empty">Open a fixture to start.</p>`;
      rankingEl.innerHTML = "";
      evaluationEl.innerHTML = "";
    }
    auditEl.innerHTML = renderAuditDrawer(state.auditReport);
    frameShiftEl.innerHTML = renderFrameShift(state.frameShift);
    toastEl.innerHTML = renderToast(state.toast);
    busyEl.hidden = !state.busy;
  }

  store.subscribe(render);

  fixtureSelect.addEventListener("change", syncDecisions);

  byId<HTMLButtonElement>("open-fixture").addEventListener("click", () => {
    const fid = fixtureSelect.value;
    if (!fid) return;
    const decision = Number(decisionSelect.value || "0");
    const entry = store.current.fixtures.find((f) => f.id === fid);
    if (entry && entry.invariance_offset !== null) {
      offsetInput.value = String(entry.invariance_offset);
    }
    void store.openFixture(fid, decision);
  });

  byId<HTMLButtonElement>("apply-profile").addEventListener("click", () => {
    const entry = store.current.fixtures.find((f) => f.id === presetSelect.value);
    if (entry && entry.profile) void store.applyProfile(entry.profile);
  });

  // Mark toggles and value/probability edits, delegated from the card region.
  problemEl.addEventListener("change", (event) => {
    const target = event.target;
    if (!(target instanceof HTMLInputElement)) return;
    const prospect = target.dataset.prospect;
    const index = Number(target.dataset.index);
    if (prospect === undefined || Number.isNaN(index)) return;
    if (target.classList.contains("mark")) {
      void store.toggleMark(prospect, index, target.checked);
    } else if (target.classList.contains("edit-value")) {
      const value = Number(target.value);
      if (Number.isFinite(value)) void store.editOutcome(prospect, index, { value });
    } else if (target.classList.contains("edit-p")) {
      const p = Number(target.value);
      if (Number.isFinite(p)) void store.editOutcome(prospect, index, { p });
    }
  });

  byId<HTMLButtonElement>("audit-joint").addEventListener("click", () => {
    void store.runTransitivity("joint");
  });
  byId<HTMLButtonElement>("audit-pairwise").addEventListener("click", () => {
    void store.runTransitivity("pairwise");
  });

  byId<HTMLButtonElement>("run-shift").addEventListener("click", () => {
    const offset = Number(offsetInput.value);
    if (!Number.isFinite(offset)) return;
    const useProfile = byId<HTMLInputElement>("use-profile").checked;
    void store.runFrameShift(offset, useProfile);
  });

  toastEl.addEventListener("click", (event) => {
    const target = event.target;
    if (target instanceof HTMLElement && target.dataset.dismiss !== undefined) {
      store.dismissToast();
    }
  });

  void store.loadFixtures();
  return store;
}

boot(byId<HTMLElement>("app"));
