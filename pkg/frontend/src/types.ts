/** Shared shapes for the UI core and its injectable transports. */

export interface SearchSuggestion {
  id: string;
  label: string;
  description: string;
}

/** One row of the rendered result list: an API hit plus its display label. */
export interface LabeledHit {
  item: string;
  similarity: number;
  label: string;
}

export type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

/** Similarity service gateway (the embedding model endpoint). */
export interface ModelApi {
  mostSimilar(entity: string, n: number): Promise<{ item: string; similarity: number }[]>;
}

/** Wikidata Action API gateway (search + labels), called directly from the browser. */
export interface WikidataGateway {
  search(query: string, language: string, limit: number): Promise<SearchSuggestion[]>;
  labels(ids: string[], language: string): Promise<Map<string, string>>;
}

export class NotInVocabularyError extends Error {
  constructor(public entity: string) {
    super(`not in vocabulary: ${entity}`);
  }
}

export class TransportFailure extends Error {}
