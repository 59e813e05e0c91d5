/** Pure view renderers: server state in, HTML strings out.  No arithmetic —
 * every number is a server value passed through the 3-decimal formatter. */

import {
  AuditReportDoc,
  Envelope,
  FixtureEntry,
  FrameEvidence,
  RowDoc,
} from "./api.js";
import { escapeHtml, fmt3, fmtP } from "./format.js";
import { FrameShiftState } from "./state.js";

/** One card per prospect: outcome columns (probability / value / mark
 * checkbox) and a CEU footer row, mirroring the marked-table layout. */
export function renderProblem(envelope: Envelope): string {
  const { problem, marking } = envelope.session;
  const rowsByName = new Map(envelope.evaluation.rows.map((r) => [r.prospect, r]));
  const cards = problem.prospects.map((prospect) => {
    const flags = marking[prospect.name] ?? [];
    const row = rowsByName.get(prospect.name);
    const headCells = prospect.outcomes
      .map((_, i) => `<th scope="col">#${i + 1}</th>`)
      .join("");
    const probCells = prospect.outcomes
      .map(
        (o, i) => `<td><input class="edit-p" type="number" step="0.01" min="0" max="1"
          data-prospect="${escapeHtml(prospect.name)}" data-index="${i}"
          value="${fmtP(o.p)}"></td>`,
      )
      .join("");
    const valueCells = prospect.outcomes
      .map(
        (o, i) => `<td><input class="edit-value" type="number" step="any"
          data-prospect="${escapeHtml(prospect.name)}" data-index="${i}"
          value="${String(o.value)}"></td>`,
      )
      .join("");
    const markCells = prospect.outcomes
      .map(
        (_, i) => `<td><input class="mark" type="checkbox"
          data-prospect="${escapeHtml(prospect.name)}" data-index="${i}"
          ${flags[i] ? "checked" : ""} aria-label="mark ${escapeHtml(prospect.name)} outcome ${i + 1}"></td>`,
      )
      .join("");
    const span = prospect.outcomes.length;
    const footer = row
      ? `<tr class="ceu-footer"><th scope="row">CEU</th>` +
        `<td colspan="${span}" data-ceu-for="${escapeHtml(prospect.name)}">${fmt3(row.ceu)}</td></tr>`
      : "";
    return `<section class="prospect-card" data-prospect-card="${escapeHtml(prospect.name)}">
  <h3>${escapeHtml(prospect.name)}</h3>
  <table>
    <thead><tr><th></th>${headCells}</tr></thead>
    <tbody>
      <tr><th scope="row">probability</th>${probCells}</tr>
      <tr><th scope="row">value</th>${valueCells}</tr>
      <tr class="marks"><th scope="row">mark</th>${markCells}</tr>
      ${footer}
    </tbody>
  </table>
</section>`;
  });
  return `<div class="prospects">${cards.join("\n")}</div>`;
}

export function renderEvaluation(envelope: Envelope): string {
  const header =
    "<tr><th>prospect</th><th>Ex</th><th>best alt</th><th>alt Ex</th>" +
    "<th>marked mass</th><th>CCC</th><th>CEU</th></tr>";
  const rows = envelope.evaluation.rows
    .map(
      (r: RowDoc) =>
        `<tr data-eval-row="${escapeHtml(r.prospect)}">` +
        `<td>${escapeHtml(r.prospect)}</td>` +
        `<td>${fmt3(r.ex)}</td>` +
        `<td>${escapeHtml(r.best_alt)}${r.best_alt_tied ? "*" : ""}</td>` +
        `<td>${fmt3(r.best_alt_ex)}</td>` +
        `<td>${fmt3(r.ccc_prob_mass)}</td>` +
        `<td>${fmt3(r.ccc)}</td>` +
        `<td>${fmt3(r.ceu)}</td></tr>`,
    )
    .join("");
  const tied = envelope.evaluation.rows.some((r) => r.best_alt_tied)
    ? `<p class="footnote">(*) best-alternative tie, broken by problem order</p>`
    : "";
  const warnings = envelope.evaluation.warnings
    .map((w) => `<p class="warning">${escapeHtml(w)}</p>`)
    .join("");
  return `<table class="evaluation">${header}${rows}</table>${tied}${warnings}`;
}

/** Plain-markup ranking strip; the recommendation carries the badge. */
export function renderRanking(envelope: Envelope): string {
  const { ranking } = envelope.evaluation;
  const chips = ranking.order
    .map((entry, i) => {
      const badge =
        entry.prospect === ranking.recommended
          ? ` <span class="badge" data-badge>recommended</span>`
          : "";
      return `<li class="rank-chip" data-rank="${i + 1}" data-rank-prospect="${escapeHtml(entry.prospect)}">` +
        `${escapeHtml(entry.prospect)} <span class="score">${fmt3(entry.score)}</span>${badge}</li>`;
    })
    .join("");
  const ties = ranking.tie_breaks
    .map((t) => `<p class="footnote">tie-break: ${escapeHtml(t)}</p>`)
    .join("");
  return `<ol class="ranking" data-recommended="${escapeHtml(ranking.recommended)}">${chips}</ol>${ties}`;
}

export function renderAuditDrawer(report: AuditReportDoc | null): string {
  if (!report) {
    return `<p class="empty">No audit run yet.</p>`;
  }
  const verdictClass = report.verdict === "holds-on-input" ? "holds" : "violated";
  const witness = report.witness
    ? `<pre class="witness">${escapeHtml(JSON.stringify(report.witness, null, 2))}</pre>`
    : "";
  return `<div class="audit-result ${verdictClass}" data-audit-verdict="${report.verdict}">
  <p><strong>${escapeHtml(report.axiom)}</strong>: ${report.verdict}</p>
  ${witness}
</div>`;
}

function frameTable(evidence: FrameEvidence, highlight: Set<string>): string {
  const rows = evidence.rows
    .map((r) => {
      const cls = highlight.has(r.prospect) ? ` class="diff"` : "";
      return `<tr${cls}><td>${escapeHtml(r.prospect)}</td><td>${fmt3(r.ceu)}</td></tr>`;
    })
    .join("");
  const order = evidence.order.map(escapeHtml).join(" &gt; ");
  return `<div class="frame" data-frame="${escapeHtml(evidence.frame)}">
  <h4>${escapeHtml(evidence.frame)} (offset ${fmt3(evidence.offset)})</h4>
  <table><tr><th>prospect</th><th>CEU</th></tr>${rows}</table>
  <p class="order">order: ${order}</p>
</div>`;
}

/** Side-by-side original/shifted panels with a green/red agreement light. */
export function renderFrameShift(state: FrameShiftState | null): string {
  if (!state) {
    return `<p class="empty">Pick an offset and run the shift.</p>`;
  }
  const [original, shifted] = state.report.evidence as unknown as FrameEvidence[];
  const agrees = state.report.verdict === "holds-on-input";
  const highlight = new Set<string>();
  if (!agrees && original && shifted) {
    original.order.forEach((name, i) => {
      if (shifted.order[i] !== name) {
        highlight.add(name);
        const other = shifted.order[i];
        if (other !== undefined) highlight.add(other);
      }
    });
  }
  const light = agrees
    ? `<p class="agreement green" data-agreement="green">rankings agree</p>`
    : `<p class="agreement red" data-agreement="red">rankings diverge</p>`;
  return `<div class="frame-shift">
  ${light}
  <div class="frames">${frameTable(original, highlight)}${frameTable(shifted, highlight)}</div>
</div>`;
}

/** Fixture browser options: exactly the fixtures the service lists. */
export function renderFixtureOptions(fixtures: FixtureEntry[]): string {
  return fixtures
    .map(
      (f) =>
        `<option value="${escapeHtml(f.id)}">${escapeHtml(f.id)} — ${escapeHtml(f.title)}</option>`,
    )
    .join("");
}

/** Profile presets: the replicating parameter sets shipped with the corpus. */
export function renderProfilePresets(fixtures: FixtureEntry[]): string {
  return fixtures
    .filter((f) => f.profile !== null)
    .map(
      (f) =>
        `<option value="${escapeHtml(f.id)}">${escapeHtml(f.id)} — ${escapeHtml(f.title)} (${escapeHtml(f.profile!.policy)})</option>`,
    )
    .join("");
}

export function renderToast(message: string | null): string {
  if (!message) return "";
  return `<div class="toast" role="alert">${escapeHtml(message)}
  <button type="button" data-dismiss>dismiss</button></div>`;
}
