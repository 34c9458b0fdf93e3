// Thin typed client.  A new request supersedes the in-flight one
// (last-write-wins), matching the single-threaded UI event loop.

import type { AutocompleteEntry, SearchResponse, TaxonomyNode } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public param?: string,
  ) {
    super(message);
  }
}

let searchController: AbortController | null = null;

async function getJson<T>(url: string, signal?: AbortSignal): Promise<T> {
  const response = await fetch(url, { signal });
  if (!response.ok) {
    let message = `HTTP ${response.status}`;
    let param: string | undefined;
    try {
      const body = await response.json();
      if (body && typeof body.error === "string") message = body.error;
      if (body && typeof body.param === "string") param = body.param;
    } catch {
      // non-JSON error body; keep the status message
    }
    throw new ApiError(response.status, message, param);
  }
  return (await response.json()) as T;
}

export function search(queryString: string): Promise<SearchResponse> {
  if (searchController) searchController.abort();
  searchController = new AbortController();
  return getJson<SearchResponse>(`/api/search?${queryString}`, searchController.signal);
}

export function searchOnce(queryString: string): Promise<SearchResponse> {
  return getJson<SearchResponse>(`/api/search?${queryString}`);
}

export function autocomplete(
  kind: string,
  q: string,
  lang: string,
  limit = 8,
): Promise<AutocompleteEntry[]> {
  const params = new URLSearchParams({ kind, q, lang, limit: String(limit) });
  return getJson<AutocompleteEntry[]>(`/api/autocomplete?${params}`);
}

export function taxonomy(kind: string, lang: string): Promise<{ kind: string; nodes: TaxonomyNode[] }> {
  const params = new URLSearchParams({ kind, lang });
  return getJson(`/api/taxonomy?${params}`);
}
