// Pure HTML-string rendering: every number shown is a formatted view of an
// API value, carried verbatim in a data-value attribute.

import { fmtCount, fmtPercent, numberSpan } from "./format.js";
import type { SearchFormState } from "./state.js";
import type {
  EventRow,
  GroupResult,
  SearchResponse,
  SummaryRow,
  TrialRow,
} from "./types.js";

const FORM_STRINGS = {
  en: {
    trialTypes: "Trial types",
    indications: "Indications",
    principals: "Active principles",
    release: "release",
    route: "route",
    dose: "daily dose",
    unit: "dose unit",
    intakes: "intakes/day",
    addGroup: "Add a group",
    removeGroup: "Remove",
    search: "Search",
    openList: 'open list (", etc")',
    needCriteria: "Enter at least one criterion in one group.",
    resultSets: ["Direct comparisons", "Direct and indirect comparisons", "Absolute values"],
    groupTitle: (n: number) => `Group ${n}`,
    restrict: "Restrict to this indication",
    compareSelected: "Compare selected treatments",
    addSelected: "Add selected treatments to the search",
    applyExclusions: "Recompute without unchecked trials",
    patients: "effective patients",
    trials: "trials",
    overall: "overall rate",
    seriousOverall: "serious rate",
    delta: "outline over other glyphs",
  },
  fr: {
    trialTypes: "Types d'essai",
    indications: "Indications",
    principals: "Principes actifs",
    release: "libération",
    route: "voie",
    dose: "dose/jour",
    unit: "unité",
    intakes: "prises/jour",
    addGroup: "Ajouter un groupe",
    removeGroup: "Retirer",
    search: "Rechercher",
    openList: "liste ouverte (« , etc »)",
    needCriteria: "Saisissez au moins un critère dans un groupe.",
    resultSets: ["Comparaisons directes", "Comparaisons directes et indirectes", "Valeurs absolues"],
    groupTitle: (n: number) => `Groupe ${n}`,
    restrict: "Restreindre à cette indication",
    compareSelected: "Comparer les traitements sélectionnés",
    addSelected: "Ajouter les traitements sélectionnés",
    applyExclusions: "Recalculer sans les essais décochés",
    patients: "patients effectifs",
    trials: "essais",
    overall: "taux global",
    seriousOverall: "taux grave",
    delta: "contour sur les autres glyphes",
  },
};

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function input(
  name: string,
  value: string,
  placeholder: string,
  extra = "",
): string {
  return (
    `<input name="${name}" value="${esc(value)}" ` +
    `placeholder="${esc(placeholder)}" autocomplete="off" ${extra}>`
  );
}

export function renderForm(state: SearchFormState): string {
  const s = FORM_STRINGS[state.lang];
  const groups = state.groups
    .map((group, gi) => {
      const principals = group.principals.length > 0 ? group.principals : [
        { ap: "", release: "", route: "", dose: "", unit: "", intakes: "" },
      ];
      const principalRows = principals
        .map(
          (p, pi) => `
      <div class="principal-row" data-group="${gi}" data-principal="${pi}">
        ${input(`g${gi}p${pi}_ap`, p.ap, s.principals, `data-autocomplete="active_principle" data-field="ap"`)}
        <select name="g${gi}p${pi}_release" data-field="release">
          <option value=""${p.release === "" ? " selected" : ""}>${s.release}</option>
          <option value="immediate"${p.release === "immediate" ? " selected" : ""}>immediate</option>
          <option value="modified"${p.release === "modified" ? " selected" : ""}>modified</option>
        </select>
        <select name="g${gi}p${pi}_route" data-field="route">
          <option value=""${p.route === "" ? " selected" : ""}>${s.route}</option>
          ${["oral", "intravenous", "subcutaneous", "transdermal", "topical", "intramuscular", "rectal", "nasal"]
            .map((r) => `<option value="${r}"${p.route === r ? " selected" : ""}>${r}</option>`)
            .join("")}
        </select>
        ${input(`g${gi}p${pi}_dose`, p.dose, s.dose, `data-field="dose" class="narrow"`)}
        ${input(`g${gi}p${pi}_unit`, p.unit, s.unit, `data-field="unit" class="narrow"`)}
        ${input(`g${gi}p${pi}_intakes`, p.intakes, s.intakes, `data-field="intakes" class="narrow"`)}
        <button type="button" data-action="add-principal" data-group="${gi}" title="+">+</button>
      </div>`,
        )
        .join("");
      return `
  <fieldset class="group" data-group="${gi}">
    <legend>${s.groupTitle(gi + 1)}
      ${state.groups.length > 1 ? `<button type="button" data-action="remove-group" data-group="${gi}">${s.removeGroup}</button>` : ""}
    </legend>
    ${input(`g${gi}_trialtype`, group.trialTypes.join(", "), s.trialTypes, `data-autocomplete="trial_type" data-field="trialtype" data-group="${gi}"`)}
    ${input(`g${gi}_indication`, group.indications.join(", "), s.indications, `data-autocomplete="indication" data-field="indication" data-group="${gi}"`)}
    ${principalRows}
    <label class="open-list"><input type="checkbox" data-field="openlist" data-group="${gi}"${group.openList ? " checked" : ""}> ${s.openList}</label>
  </fieldset>`;
    })
    .join("");

  return `
<form id="search-form" autocomplete="off">
  ${groups}
  <div class="form-actions">
    <button type="button" data-action="add-group">${s.addGroup}</button>
    <button type="submit" data-action="search">${s.search}</button>
    <span id="form-error" class="error" role="alert"></span>
  </div>
</form>`;
}

export function renderResultSetTabs(state: SearchFormState, response: SearchResponse): string {
  const s = FORM_STRINGS[state.lang];
  const kinds: ("direct" | "mixed" | "absolute")[] = ["direct", "mixed", "absolute"];
  return `<nav class="result-sets">${kinds
    .map(
      (kind, i) =>
        `<button type="button" data-action="result-set" data-kind="${kind}" ` +
        `class="${kind === response.result_set_kind ? "active" : ""}">${s.resultSets[i]}</button>`,
    )
    .join("")}</nav>`;
}

export function renderGlyphs(state: SearchFormState, response: SearchResponse): string {
  const s = FORM_STRINGS[state.lang];
  const cells = response.groups
    .map((group: GroupResult, i: number) => {
      const stats =
        `${numberSpan(group.profile.overall_rate, "num overall")} ${s.overall}` +
        ` · ${numberSpan(group.profile.overall_serious_rate, "num serious")} ${s.seriousOverall}` +
        ` · <span data-value="${group.profile.n_trials}">${group.profile.n_trials}</span> ${s.trials}` +
        ` · <span data-value="${group.profile.effective_patients}">${fmtCount(group.profile.effective_patients)}</span> ${s.patients}`;
      return `
  <figure class="glyph" data-group-index="${i}">
    <div class="glyph-svg">${group.svg}</div>
    <figcaption>
      <strong>${esc(group.caption)}</strong><br>
      ${stats}<br>
      <em class="correction-line">${esc(group.correction_line)}</em>
      <button type="button" class="delta" data-action="overlay" data-index="${i}"
              title="${s.delta}">Δ</button>
    </figcaption>
  </figure>`;
    })
    .join("");
  const empty = response.empty
    ? `<p class="empty-result">${esc(response.empty_label)}</p>`
    : "";
  return `<section id="glyphs">${empty}<div class="bouquet">${cells}</div></section>`;
}

function eventTable(rows: EventRow[], groups: GroupResult[], tabKey: string): string {
  let lastCategory = "";
  const body = rows
    .map((row) => {
      const header =
        row.category_id !== lastCategory
          ? `<tr class="category-header" id="${tabKey}-cat-${row.category_id}">` +
            `<th colspan="${1 + row.rates.length}">${esc(row.category_label)}</th></tr>`
          : "";
      lastCategory = row.category_id;
      const cells = row.rates
        .map(
          (rate, i) =>
            `<td style="background:${row.colors[i]}" data-value="${rate}">${fmtPercent(rate)}</td>`,
        )
        .join("");
      return `${header}<tr><td>${esc(row.label)}</td>${cells}</tr>`;
    })
    .join("");
  const headRow = groups.map((g) => `<th>${esc(g.caption)}</th>`).join("");
  return `<table class="events"><thead><tr><th></th>${headRow}</tr></thead><tbody>${body}</tbody></table>`;
}

function summaryTable(
  rows: SummaryRow[],
  kind: "radio" | "checkbox",
  action: string,
  buttonLabel: string,
): string {
  const body = rows
    .map(
      (row) => `
    <tr><td><label>
      <input type="${kind}" name="summary-${action}" value="${esc(row.id)}"> ${esc(row.label)}
    </label></td><td data-value="${row.n_trials}">${row.n_trials}</td></tr>`,
    )
    .join("");
  return (
    `<table class="summary"><tbody>${body}</tbody></table>` +
    `<button type="button" data-action="${action}">${esc(buttonLabel)}</button>`
  );
}

function trialTable(rows: TrialRow[], groups: GroupResult[], applyLabel: string): string {
  const headRow = groups.map((g) => `<th>${esc(g.caption)}</th>`).join("");
  const body = rows
    .map((row) => {
      const cells = row.rates
        .map((rate) =>
          rate === null
            ? "<td>—</td>"
            : `<td data-value="${rate}">${fmtPercent(rate)}</td>`,
        )
        .join("");
      return (
        `<tr><td><label><input type="checkbox" data-action="trial-toggle" ` +
        `value="${esc(row.trial_id)}"${row.included ? " checked" : ""}> ` +
        `<a href="/api/trials/${encodeURIComponent(row.trial_id)}" target="_blank">${esc(row.trial_id)}</a></label></td>` +
        `<td class="trial-title">${esc(row.title)}</td>${cells}</tr>`
      );
    })
    .join("");
  return (
    `<table class="trials"><thead><tr><th></th><th></th>${headRow}</tr></thead>` +
    `<tbody>${body}</tbody></table>` +
    `<button type="button" data-action="apply-exclusions">${esc(applyLabel)}</button>`
  );
}

export function renderInfoTabs(state: SearchFormState, response: SearchResponse): string {
  const s = FORM_STRINGS[state.lang];
  const entries: [string, string, string][] = [];
  entries.push([
    "all_events",
    response.tabs.all_events.title,
    eventTable(response.tabs.all_events.rows, response.groups, "all"),
  ]);
  entries.push([
    "serious_events",
    response.tabs.serious_events.title,
    eventTable(response.tabs.serious_events.rows, response.groups, "serious"),
  ]);
  entries.push([
    "indication_summary",
    response.tabs.indication_summary.title,
    summaryTable(
      response.tabs.indication_summary.rows,
      "radio",
      "restrict-indication",
      s.restrict,
    ),
  ]);
  if (response.tabs.treatment_summary) {
    entries.push([
      "treatment_summary",
      response.tabs.treatment_summary.title,
      summaryTable(
        response.tabs.treatment_summary.rows,
        "checkbox",
        "compare-treatments",
        s.compareSelected,
      ),
    ]);
  }
  if (response.tabs.comparable_treatments) {
    entries.push([
      "comparable_treatments",
      response.tabs.comparable_treatments.title,
      summaryTable(
        response.tabs.comparable_treatments.rows,
        "checkbox",
        "add-treatments",
        s.addSelected,
      ),
    ]);
  }
  entries.push([
    "trial_list",
    response.tabs.trial_list.title,
    trialTable(response.tabs.trial_list.rows, response.groups, s.applyExclusions),
  ]);

  const active = Math.min(Math.max(state.tab, 0), entries.length - 1);
  const buttons = entries
    .map(
      ([key, title], i) =>
        `<button type="button" data-action="info-tab" data-tab="${i}" ` +
        `class="${i === active ? "active" : ""}" id="tab-btn-${key}">${esc(title)}</button>`,
    )
    .join("");
  const panels = entries
    .map(
      ([key, , html], i) =>
        `<div class="tab-panel${i === active ? " active" : ""}" id="tab-${key}">${html}</div>`,
    )
    .join("");
  return `<section id="info-tabs"><nav class="tab-bar">${buttons}</nav>${panels}</section>`;
}

export function renderLangToggle(state: SearchFormState): string {
  return `
<nav class="lang-toggle">
  <button type="button" data-action="lang" data-lang="en" class="${state.lang === "en" ? "active" : ""}">EN</button>
  <button type="button" data-action="lang" data-lang="fr" class="${state.lang === "fr" ? "active" : ""}">FR</button>
</nav>`;
}

export function renderResults(state: SearchFormState, response: SearchResponse): string {
  return (
    renderResultSetTabs(state, response) +
    renderGlyphs(state, response) +
    renderInfoTabs(state, response)
  );
}

/** Every numeric value rendered, in document order (testing hook). */
export function extractRenderedValues(html: string): number[] {
  const values: number[] = [];
  const re = /data-value="([^"]+)"/g;
  let match: RegExpExecArray | null;
  while ((match = re.exec(html)) !== null) {
    values.push(Number(match[1]));
  }
  return values;
}
