// URL-driven form state.  The entire UI state round-trips through the
// service's URL scheme: parsing a URL and replaying the interactions that
// would produce it yield the same canonical query string, hence the same
// API request and the same rendered numbers.

import type { Lang, ResultSetKind } from "./types.js";

export interface PrincipalRow {
  ap: string;
  release: string;
  route: string;
  dose: string;
  unit: string;
  intakes: string;
}

export interface GroupRow {
  trialTypes: string[];
  indications: string[];
  principals: PrincipalRow[];
  openList: boolean;
}

export interface SearchFormState {
  groups: GroupRow[];
  excludeTrials: string[];
  set: ResultSetKind;
  tab: number;
  lang: Lang;
  includeTitration: boolean;
  overlay: number | null;
}

export function emptyPrincipal(): PrincipalRow {
  return { ap: "", release: "", route: "", dose: "", unit: "", intakes: "" };
}

export function emptyGroup(): GroupRow {
  return { trialTypes: [], indications: [], principals: [], openList: false };
}

export function initialState(): SearchFormState {
  return {
    groups: [emptyGroup()],
    excludeTrials: [],
    set: "direct",
    tab: 0,
    lang: "en",
    includeTitration: false,
    overlay: null,
  };
}

function splitCsv(value: string): string[] {
  return value.split(",").map((part) => part.trim());
}

function nonEmpty(values: string[]): string[] {
  return values.filter((v) => v.length > 0);
}

/** Positional per-principle field, trailing blanks stripped. */
function positional(values: string[]): string {
  const copy = values.slice();
  while (copy.length > 0 && copy[copy.length - 1] === "") copy.pop();
  return copy.join(",");
}

export function toQueryString(state: SearchFormState): string {
  const pairs: [string, string][] = [];
  state.groups.forEach((group, index) => {
    const prefix = `group_${index + 1}`;
    const principals = group.principals.filter((p) => p.ap.trim() !== "");
    if (principals.length > 0) {
      let ap = principals.map((p) => p.ap.trim()).join(",");
      if (group.openList) ap += ",etc";
      pairs.push([`${prefix}_ap`, ap]);
      const release = positional(principals.map((p) => p.release.trim()));
      if (release) pairs.push([`${prefix}_release`, release]);
      const route = positional(principals.map((p) => p.route.trim()));
      if (route) pairs.push([`${prefix}_route`, route]);
      const dose = positional(principals.map((p) => p.dose.trim()));
      if (dose) pairs.push([`${prefix}_dose`, dose]);
      const unit = positional(principals.map((p) => p.unit.trim()));
      if (unit) pairs.push([`${prefix}_unit`, unit]);
      const intakes = positional(principals.map((p) => p.intakes.trim()));
      if (intakes) pairs.push([`${prefix}_intakes`, intakes]);
    }
    const indications = nonEmpty(group.indications.map((i) => i.trim()));
    if (indications.length > 0) {
      pairs.push([`${prefix}_indication`, [...indications].sort().join(",")]);
    }
    const trialTypes = nonEmpty(group.trialTypes.map((t) => t.trim()));
    if (trialTypes.length > 0) {
      pairs.push([`${prefix}_trialtype`, [...trialTypes].sort().join(",")]);
    }
  });
  if (state.excludeTrials.length > 0) {
    pairs.push(["exclude_trials", [...state.excludeTrials].sort().join(",")]);
  }
  if (state.set !== "direct") pairs.push(["set", state.set]);
  if (state.tab !== 0) pairs.push(["tab", String(state.tab)]);
  if (state.lang !== "en") pairs.push(["lang", state.lang]);
  if (state.includeTitration) pairs.push(["include_titration", "1"]);
  if (state.overlay !== null) pairs.push(["overlay", String(state.overlay)]);
  return pairs
    .map(([key, value]) => `${encodeURIComponent(key)}=${encodeURIComponent(value)}`)
    .join("&");
}

const GROUP_RE = /^group_(\d+)_(ap|indication|trialtype|release|route|dose|unit|intakes)$/;

export function fromQueryString(query: string): SearchFormState {
  const params = new URLSearchParams(query.replace(/^\?/, ""));
  const grouped = new Map<number, Map<string, string>>();
  params.forEach((value, key) => {
    const match = GROUP_RE.exec(key);
    if (!match) return;
    const index = Number(match[1]);
    if (!grouped.has(index)) grouped.set(index, new Map());
    grouped.get(index)!.set(match[2], value);
  });

  const groups: GroupRow[] = [];
  for (const index of [...grouped.keys()].sort((a, b) => a - b)) {
    const fields = grouped.get(index)!;
    let apParts = nonEmpty(splitCsv(fields.get("ap") ?? ""));
    let openList = false;
    if (apParts.length > 0 && apParts[apParts.length - 1].toLowerCase() === "etc") {
      openList = true;
      apParts = apParts.slice(0, -1);
    }
    const per = (name: string): string[] => {
      const raw = fields.get(name);
      const values = raw === undefined ? [] : splitCsv(raw);
      while (values.length < apParts.length) values.push("");
      return values.slice(0, apParts.length);
    };
    const releases = per("release");
    const routes = per("route");
    const doses = per("dose");
    const units = per("unit");
    const intakes = per("intakes");
    groups.push({
      trialTypes: nonEmpty(splitCsv(fields.get("trialtype") ?? "")),
      indications: nonEmpty(splitCsv(fields.get("indication") ?? "")),
      principals: apParts.map((ap, i) => ({
        ap,
        release: releases[i],
        route: routes[i],
        dose: doses[i],
        unit: units[i],
        intakes: intakes[i],
      })),
      openList,
    });
  }
  if (groups.length === 0) groups.push(emptyGroup());

  const set = (params.get("set") ?? "direct") as ResultSetKind;
  const lang = (params.get("lang") ?? "en") as Lang;
  const overlayRaw = params.get("overlay");
  return {
    groups,
    excludeTrials: nonEmpty(splitCsv(params.get("exclude_trials") ?? "")),
    set: ["direct", "mixed", "absolute"].includes(set) ? set : "direct",
    tab: Number(params.get("tab") ?? "0") || 0,
    lang: lang === "fr" ? "fr" : "en",
    includeTitration: ["1", "true"].includes(params.get("include_titration") ?? ""),
    overlay: overlayRaw === null || overlayRaw === "" ? null : Number(overlayRaw),
  };
}

export function hasCriteria(state: SearchFormState): boolean {
  return state.groups.some(
    (group) =>
      group.principals.some((p) => p.ap.trim() !== "") ||
      nonEmpty(group.indications).length > 0 ||
      nonEmpty(group.trialTypes).length > 0,
  );
}

// ---- feedback-loop actions (tabs 3-6) --------------------------------------

/** Indication-summary radio: restrict every group to the chosen indication. */
export function restrictToIndication(
  state: SearchFormState,
  indicationId: string,
): SearchFormState {
  return {
    ...state,
    groups: state.groups.map((group) => ({ ...group, indications: [indicationId] })),
    overlay: null,
  };
}

/** Treatment-summary checkboxes: compare the selected treatments within the
 * previously entered indication(s). */
export function compareSelectedTreatments(
  state: SearchFormState,
  treatmentIds: string[],
): SearchFormState {
  const indications = state.groups[0]?.indications ?? [];
  const trialTypes = state.groups[0]?.trialTypes ?? [];
  return {
    ...state,
    groups: treatmentIds.map((ap) => ({
      trialTypes: [...trialTypes],
      indications: [...indications],
      principals: [{ ...emptyPrincipal(), ap }],
      openList: false,
    })),
    overlay: null,
  };
}

/** Comparable-treatments checkboxes: add the selected comparators as new
 * groups next to the current ones. */
export function addComparableTreatments(
  state: SearchFormState,
  treatmentIds: string[],
): SearchFormState {
  const indications = state.groups[0]?.indications ?? [];
  const added: GroupRow[] = treatmentIds.map((ap) => ({
    trialTypes: [],
    indications: [...indications],
    principals: [{ ...emptyPrincipal(), ap }],
    openList: false,
  }));
  return { ...state, groups: [...state.groups, ...added], overlay: null };
}

/** Trial-list checkboxes: include/exclude one trial from the result set. */
export function setTrialIncluded(
  state: SearchFormState,
  trialId: string,
  included: boolean,
): SearchFormState {
  const excluded = new Set(state.excludeTrials);
  if (included) excluded.delete(trialId);
  else excluded.add(trialId);
  return { ...state, excludeTrials: [...excluded].sort() };
}

export function setLang(state: SearchFormState, lang: Lang): SearchFormState {
  return { ...state, lang };
}

export function setResultSet(
  state: SearchFormState,
  set: ResultSetKind,
): SearchFormState {
  return { ...state, set, overlay: null };
}

export function setTab(state: SearchFormState, tab: number): SearchFormState {
  return { ...state, tab };
}

export function setOverlay(
  state: SearchFormState,
  overlay: number | null,
): SearchFormState {
  return { ...state, overlay };
}
