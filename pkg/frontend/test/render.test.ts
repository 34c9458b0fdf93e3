import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { fmtPercent, roundHalfEven } from "../src/format.js";
import { extractRenderedValues, renderResults } from "../src/render.js";
import { fromQueryString } from "../src/state.js";
import type { SearchResponse } from "../src/types.js";

const FIXTURES = join(__dirname, "fixtures");

function load(name: string): SearchResponse {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8"));
}

describe("percent formatting", () => {
  it("formats rates as one-decimal percentages", () => {
    expect(fmtPercent(2.031)).toBe("203.1%");
    expect(fmtPercent(0.044)).toBe("4.4%");
    expect(fmtPercent(0)).toBe("0.0%");
  });

  it("rounds halves to even", () => {
    expect(roundHalfEven(4.45, 1)).toBe(4.4);
    expect(roundHalfEven(4.55, 1)).toBe(4.6);
    expect(roundHalfEven(4.65, 1)).toBe(4.6);
    expect(fmtPercent(0.0445)).toBe("4.4%");
    expect(fmtPercent(0.0455)).toBe("4.6%");
  });
});

describe("rendering from API payloads", () => {
  it("renders every number verbatim from the payload", () => {
    const response = load("search_en.json");
    const state = fromQueryString(response.url);
    const html = renderResults(state, response);
    const rendered = new Set(extractRenderedValues(html));
    // Overall and per-term rates of the payload must appear untransformed.
    for (const group of response.groups) {
      expect(rendered.has(group.profile.overall_rate)).toBe(true);
      expect(rendered.has(group.profile.effective_patients)).toBe(true);
    }
    for (const row of response.tabs.all_events.rows) {
      for (const rate of row.rates) expect(rendered.has(rate)).toBe(true);
    }
  });

  it("renders identical numbers for both languages", () => {
    const en = load("search_en.json");
    const fr = load("search_fr.json");
    const htmlEn = renderResults(fromQueryString(en.url), en);
    const htmlFr = renderResults(fromQueryString(fr.url), fr);
    expect(extractRenderedValues(htmlEn)).toEqual(extractRenderedValues(htmlFr));
    // And the labels really do differ, so the comparison is not vacuous.
    expect(htmlEn).toContain("Corrections applied");
    expect(htmlFr).toContain("Corrections appliquées");
  });

  it("shows exactly one of treatment summary and comparable treatments", () => {
    const response = load("search_en.json");
    const html = renderResults(fromQueryString(response.url), response);
    const hasComparable = html.includes('id="tab-comparable_treatments"');
    const hasSummary = html.includes('id="tab-treatment_summary"');
    expect(hasComparable !== hasSummary).toBe(true);
  });

  it("marks excluded trials as unchecked checkboxes", () => {
    const response = load("search_en.json");
    const html = renderResults(fromQueryString(response.url), response);
    for (const row of response.tabs.trial_list.rows) {
      const checked = html.includes(`value="${row.trial_id}" checked`);
      expect(checked).toBe(row.included);
    }
  });
});

describe("delta overlay", () => {
  const PATH_FILL_RE =
    /class="petal" data-category="[^"]+" data-total="([^"]+)" data-serious="[^"]+" d="([^"]+)"/g;
  const WIRE_RE = /class="wire" d="([^"]+)"/g;

  it("wireframe coincides with the fills when profiles are identical", () => {
    const response = load("overlay_self.json");
    // Group 0 is the selected glyph; group 1 carries the overlay variant.
    const svg = response.groups[1].svg;
    const wires = new Set([...svg.matchAll(WIRE_RE)].map((m) => m[1]));
    expect(wires.size).toBeGreaterThan(0);
    for (const match of svg.matchAll(PATH_FILL_RE)) {
      if (match[1] !== "0.000") {
        expect(wires.has(match[2])).toBe(true);
      }
    }
  });

  it("the selected glyph itself is rendered without a wireframe", () => {
    const response = load("overlay_self.json");
    expect(response.groups[0].svg).not.toContain('class="wire"');
  });
});
