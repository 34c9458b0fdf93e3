// Single-page bootstrap: URL-driven state, form wiring, glyph interactivity.
// Every user action funnels through applyState(), which rewrites the URL and
// re-queries; the newest request supersedes any in-flight one.

import * as api from "./api.js";
import { fmtPercent } from "./format.js";
import * as state from "./state.js";
import { esc, renderForm, renderLangToggle, renderResults } from "./render.js";
import type { SearchResponse, TermRates } from "./types.js";

let current: state.SearchFormState = state.initialState();
let lastResponse: SearchResponse | null = null;

const app = () => document.getElementById("app")!;
const resultsEl = () => document.getElementById("results")!;

function readFormIntoState(): void {
  const form = document.getElementById("search-form");
  if (!form) return;
  const groups = current.groups.map((group, gi) => {
    const trialtype = form.querySelector<HTMLInputElement>(
      `[data-field="trialtype"][data-group="${gi}"]`,
    );
    const indication = form.querySelector<HTMLInputElement>(
      `[data-field="indication"][data-group="${gi}"]`,
    );
    const openList = form.querySelector<HTMLInputElement>(
      `[data-field="openlist"][data-group="${gi}"]`,
    );
    const rows = [...form.querySelectorAll<HTMLElement>(
      `.principal-row[data-group="${gi}"]`,
    )];
    const principals = rows.map((row) => ({
      ap: row.querySelector<HTMLInputElement>('[data-field="ap"]')!.value,
      release: row.querySelector<HTMLSelectElement>('[data-field="release"]')!.value,
      route: row.querySelector<HTMLSelectElement>('[data-field="route"]')!.value,
      dose: row.querySelector<HTMLInputElement>('[data-field="dose"]')!.value,
      unit: row.querySelector<HTMLInputElement>('[data-field="unit"]')!.value,
      intakes: row.querySelector<HTMLInputElement>('[data-field="intakes"]')!.value,
    })).filter((p) => p.ap.trim() !== "");
    return {
      trialTypes: (trialtype?.value ?? "").split(",").map((v) => v.trim()).filter(Boolean),
      indications: (indication?.value ?? "").split(",").map((v) => v.trim()).filter(Boolean),
      principals,
      openList: openList?.checked ?? false,
    };
  });
  current = { ...current, groups };
}

function showError(message: string): void {
  const slot = document.getElementById("form-error");
  if (slot) slot.textContent = message;
}

async function applyState(next: state.SearchFormState, push = true): Promise<void> {
  current = next;
  renderShell();
  if (!state.hasCriteria(current)) {
    resultsEl().innerHTML = "";
    if (push) history.pushState(null, "", location.pathname);
    return;
  }
  const query = state.toQueryString(current);
  if (push) history.pushState(null, "", `?${query}`);
  try {
    const response = await api.search(query);
    lastResponse = response;
    showError("");
    resultsEl().innerHTML = renderResults(current, response);
  } catch (error) {
    if (error instanceof DOMException && error.name === "AbortError") return;
    if (error instanceof api.ApiError) {
      showError(error.param ? `${error.param}: ${error.message}` : error.message);
      return;
    }
    showError(String(error));
  }
}

function renderShell(): void {
  app().innerHTML =
    renderLangToggle(current) +
    renderForm(current) +
    '<div id="results"></div>';
  if (lastResponse && state.hasCriteria(current)) {
    resultsEl().innerHTML = renderResults(current, lastResponse);
  }
}

// ---- glyph interactivity ----------------------------------------------------

function bubbleText(groupIndex: number, categoryId: string): string {
  if (!lastResponse) return "";
  const group = lastResponse.groups[groupIndex];
  const rates = group.profile.categories[categoryId];
  if (!rates) return "";
  const terms = Object.entries(group.profile.terms)
    .filter(([, t]) => (t as TermRates).category_ids.includes(categoryId))
    .sort((a, b) => (b[1] as TermRates).total - (a[1] as TermRates).total)
    .slice(0, 3)
    .map(([, t]) => `${esc((t as TermRates).label)} ${fmtPercent((t as TermRates).total)}`);
  const lines = [
    `<strong>${esc(rates.label)}</strong>`,
    `${fmtPercent(rates.total)} · ${fmtPercent(rates.serious)}`,
  ];
  if (terms.length > 0) lines.push(terms.join("<br>"));
  return lines.join("<br>");
}

function wireGlyphEvents(): void {
  const bubble = document.createElement("div");
  bubble.id = "bubble";
  bubble.hidden = true;
  document.body.appendChild(bubble);

  document.addEventListener("mousemove", (event) => {
    const target = event.target as Element | null;
    const region = target?.closest?.("[data-category]");
    if (!region) {
      bubble.hidden = true;
      return;
    }
    const glyph = region.closest(".glyph") as HTMLElement | null;
    if (!glyph) return;
    const text = bubbleText(
      Number(glyph.dataset.groupIndex), region.getAttribute("data-category")!,
    );
    if (!text) {
      bubble.hidden = true;
      return;
    }
    bubble.innerHTML = text;
    bubble.hidden = false;
    bubble.style.left = `${event.pageX + 12}px`;
    bubble.style.top = `${event.pageY + 12}px`;
  });

  document.addEventListener("click", (event) => {
    const target = event.target as Element | null;
    const region = target?.closest?.("[data-category]");
    if (region) {
      const categoryId = region.getAttribute("data-category")!;
      document
        .getElementById(`all-cat-${categoryId}`)
        ?.scrollIntoView({ behavior: "smooth" });
    }
  });

  // Hovering the delta button swaps in the server-rendered overlay variant.
  document.addEventListener("mouseover", async (event) => {
    const button = (event.target as Element | null)?.closest?.('[data-action="overlay"]');
    if (!button || !state.hasCriteria(current)) return;
    const index = Number(button.getAttribute("data-index"));
    const query = state.toQueryString(state.setOverlay(current, index));
    try {
      const response = await api.searchOnce(query);
      response.groups.forEach((group, i) => {
        const slot = document.querySelector(
          `.glyph[data-group-index="${i}"] .glyph-svg`,
        );
        if (slot) slot.innerHTML = group.svg;
      });
    } catch {
      // overlay is cosmetic; ignore fetch failures
    }
  });
  document.addEventListener("mouseout", (event) => {
    const button = (event.target as Element | null)?.closest?.('[data-action="overlay"]');
    if (!button || !lastResponse) return;
    lastResponse.groups.forEach((group, i) => {
      const slot = document.querySelector(
        `.glyph[data-group-index="${i}"] .glyph-svg`,
      );
      if (slot) slot.innerHTML = group.svg;
    });
  });
}

// ---- autocompletion ----------------------------------------------------------

function wireAutocomplete(): void {
  let list: HTMLDataListElement | null = null;
  document.addEventListener("input", async (event) => {
    const input = event.target as HTMLInputElement;
    const kind = input.dataset?.autocomplete;
    if (!kind) return;
    const fragment = input.value.split(",").pop()?.trim() ?? "";
    const entries = await api.autocomplete(kind, fragment, current.lang);
    if (!list) {
      list = document.createElement("datalist");
      list.id = "autocomplete-list";
      document.body.appendChild(list);
    }
    const prefix = input.value.includes(",")
      ? input.value.slice(0, input.value.lastIndexOf(",") + 1) + " "
      : "";
    list.innerHTML = entries
      .map((e) => `<option value="${esc(prefix + e.label)}"></option>`)
      .join("");
    input.setAttribute("list", "autocomplete-list");
  });
}

// ---- action dispatch -----------------------------------------------------------

function selectedSummaryIds(action: string): string[] {
  return [...document.querySelectorAll<HTMLInputElement>(
    `input[name="summary-${action}"]:checked`,
  )].map((input) => input.value);
}

function wireActions(): void {
  document.addEventListener("submit", (event) => {
    const form = (event.target as Element).closest("#search-form");
    if (!form) return;
    event.preventDefault();
    readFormIntoState();
    if (!state.hasCriteria(current)) {
      showError(current.lang === "fr"
        ? "Saisissez au moins un critère dans un groupe."
        : "Enter at least one criterion in one group.");
      return;
    }
    void applyState({ ...current, overlay: null });
  });

  document.addEventListener("click", (event) => {
    const button = (event.target as Element | null)?.closest?.("[data-action]");
    if (!button) return;
    const action = button.getAttribute("data-action")!;
    switch (action) {
      case "add-group": {
        readFormIntoState();
        current = { ...current, groups: [...current.groups, state.emptyGroup()] };
        renderShell();
        break;
      }
      case "remove-group": {
        readFormIntoState();
        const index = Number(button.getAttribute("data-group"));
        const groups = current.groups.filter((_, i) => i !== index);
        current = { ...current, groups: groups.length ? groups : [state.emptyGroup()] };
        renderShell();
        break;
      }
      case "add-principal": {
        readFormIntoState();
        const index = Number(button.getAttribute("data-group"));
        const groups = current.groups.map((g, i) =>
          i === index
            ? { ...g, principals: [...g.principals, state.emptyPrincipal()] }
            : g,
        );
        current = { ...current, groups };
        renderShell();
        break;
      }
      case "lang":
        readFormIntoState();
        void applyState(
          state.setLang(current, button.getAttribute("data-lang") as "en" | "fr"),
        );
        break;
      case "result-set":
        void applyState(
          state.setResultSet(
            current,
            button.getAttribute("data-kind") as "direct" | "mixed" | "absolute",
          ),
        );
        break;
      case "info-tab":
        void applyState(state.setTab(current, Number(button.getAttribute("data-tab"))));
        break;
      case "restrict-indication": {
        const picked = selectedSummaryIds("restrict-indication");
        if (picked.length === 1) {
          void applyState(state.restrictToIndication(current, picked[0]));
        }
        break;
      }
      case "compare-treatments": {
        const picked = selectedSummaryIds("compare-treatments");
        if (picked.length > 0) {
          void applyState(state.compareSelectedTreatments(current, picked));
        }
        break;
      }
      case "add-treatments": {
        const picked = selectedSummaryIds("add-treatments");
        if (picked.length > 0) {
          void applyState(state.addComparableTreatments(current, picked));
        }
        break;
      }
      case "apply-exclusions": {
        let next = current;
        document
          .querySelectorAll<HTMLInputElement>('input[data-action="trial-toggle"]')
          .forEach((box) => {
            next = state.setTrialIncluded(next, box.value, box.checked);
          });
        void applyState(next);
        break;
      }
      default:
        break;
    }
  });
}

function boot(): void {
  current = state.fromQueryString(location.search);
  wireActions();
  wireGlyphEvents();
  wireAutocomplete();
  window.addEventListener("popstate", () => {
    void applyState(state.fromQueryString(location.search), false);
  });
  void applyState(current, false);
}

document.addEventListener("DOMContentLoaded", boot);
