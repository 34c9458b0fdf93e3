// Shapes of the JSON API (docs/api.md in the repository root).

export type ResultSetKind = "direct" | "mixed" | "absolute";
export type Lang = "en" | "fr";

export interface CategoryRates {
  label: string;
  total: number;
  serious: number;
}

export interface TermRates {
  label: string;
  total: number;
  serious: number;
  category_ids: string[];
}

export interface Profile {
  categories: Record<string, CategoryRates>;
  terms: Record<string, TermRates>;
  n_trials: number;
  effective_patients: number;
  overall_rate: number;
  overall_serious_rate: number;
}

export interface GroupResult {
  query_index: number;
  caption: string;
  profile: Profile;
  svg: string;
  corrections: string[];
  correction_line: string;
}

export interface EventRow {
  category_id: string;
  category_label: string;
  term: string;
  label: string;
  meddra_code: string | null;
  rates: number[];
  serious_rates: number[];
  colors: string[];
}

export interface SummaryRow {
  id: string;
  label: string;
  n_trials: number;
}

export interface TrialRow {
  trial_id: string;
  title: string;
  rates: (number | null)[];
  included: boolean;
}

export interface Tab<R> {
  title: string;
  rows: R[];
}

export interface SearchTabs {
  all_events: Tab<EventRow>;
  serious_events: Tab<EventRow>;
  indication_summary: Tab<SummaryRow>;
  treatment_summary?: Tab<SummaryRow>;
  comparable_treatments?: Tab<SummaryRow>;
  trial_list: Tab<TrialRow>;
}

export interface SearchResponse {
  result_set_kind: ResultSetKind;
  result_set_label: string;
  lang: Lang;
  tab: number;
  empty: boolean;
  empty_label: string;
  reference_rate: number;
  n_trials: number;
  groups: GroupResult[];
  tabs: SearchTabs;
  url: string;
}

export interface AutocompleteEntry {
  id: string;
  label: string;
}

export interface TaxonomyNode {
  id: string;
  label: string;
  labels: Record<string, string>;
  parents: string[];
}
