import { debounce, Debounced } from "./debounce.js";
import { DEFAULT_LANGUAGE, formatHash, normalizeLanguage } from "./router.js";
import {
  LabeledHit,
  ModelApi,
  NotInVocabularyError,
  SearchSuggestion,
  WikidataGateway,
} from "./types.js";

export interface UiState {
  language: string;
  query: string;
  suggestions: SearchSuggestion[];
  currentEntity: string | null;
  results: LabeledHit[];
  /** non-blocking inline notice; "oov" offers no retry, "transport" does */
  notice: { kind: "oov" | "transport"; message: string } | null;
  busy: boolean;
}

export interface AppOptions {
  api: ModelApi;
  wikidata: WikidataGateway;
  resultCount?: number;
  suggestionCount?: number;
  debounceMs?: number;
  language?: string;
  /** called whenever the canonical #/{entity}?lang= URL should change */
  onUrlChange?: (hash: string) => void;
}

type Listener = (state: UiState) => void;

const MIN_QUERY_LENGTH = 2;

/**
 * Headless UI core: suggestion search, neighbor exploration, language
 * switching. All I/O goes through the injected gateways, so the whole
 * thing is testable offline. Stale async responses (superseded queries or
 * navigations) are detected by generation counters and discarded.
 */
export class App {
  readonly state: UiState;
  private listeners: Listener[] = [];
  private searchGeneration = 0;
  private exploreGeneration = 0;
  private scheduledSearch: Debounced<[string]>;
  private options: Required<Pick<AppOptions, "resultCount" | "suggestionCount">> & AppOptions;

  constructor(options: AppOptions) {
    this.options = { resultCount: 10, suggestionCount: 7, ...options };
    this.state = {
      language: normalizeLanguage(options.language ?? DEFAULT_LANGUAGE),
      query: "",
      suggestions: [],
      currentEntity: null,
      results: [],
      notice: null,
      busy: false,
    };
    this.scheduledSearch = debounce(
      (query: string) => void this.runSearch(query),
      options.debounceMs ?? 250,
    );
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  private announceUrl(): void {
    this.options.onUrlChange?.(formatHash(this.state.currentEntity, this.state.language));
  }

  /** Keystroke entry point: debounced search, cleared under 2 characters. */
  setQuery(query: string): void {
    this.state.query = query;
    if (query.trim().length < MIN_QUERY_LENGTH) {
      this.scheduledSearch.cancel();
      this.searchGeneration++; // orphan any in-flight response
      this.state.suggestions = [];
      this.emit();
      return;
    }
    this.scheduledSearch(query.trim());
    this.emit();
  }

  private async runSearch(query: string): Promise<void> {
    const generation = ++this.searchGeneration;
    try {
      const found = await this.options.wikidata.search(
        query,
        this.state.language,
        this.options.suggestionCount,
      );
      if (generation !== this.searchGeneration) return; // superseded; discard
      this.state.suggestions = found;
      this.state.notice = null;
    } catch {
      if (generation !== this.searchGeneration) return;
      this.state.notice = { kind: "transport", message: "entity search is unreachable" };
    }
    this.emit();
  }

  /** Fetch neighbors for an entity and label them in the current language. */
  async explore(entity: string): Promise<void> {
    const generation = ++this.exploreGeneration;
    this.state.currentEntity = entity;
    this.state.suggestions = [];
    this.state.query = "";
    this.state.busy = true;
    this.state.notice = null;
    this.emit();
    this.announceUrl();

    let hits;
    try {
      hits = await this.options.api.mostSimilar(entity, this.options.resultCount);
    } catch (err) {
      if (generation !== this.exploreGeneration) return;
      this.state.busy = false;
      this.state.results = [];
      this.state.notice =
        err instanceof NotInVocabularyError
          ? { kind: "oov", message: `${entity} is not in the embedding vocabulary` }
          : { kind: "transport", message: "similarity service is unreachable" };
      this.emit();
      return;
    }
    if (generation !== this.exploreGeneration) return;

    const labels = await this.labelsFor(hits.map((h) => h.item));
    if (generation !== this.exploreGeneration) return;
    this.state.results = hits.map((h) => ({
      item: h.item,
      similarity: h.similarity, // verbatim API value
      label: labels.get(h.item) ?? h.item,
    }));
    this.state.busy = false;
    this.emit();
  }

  /** One batched label fetch; on failure every id displays as itself. */
  private async labelsFor(ids: string[]): Promise<Map<string, string>> {
    if (ids.length === 0) return new Map();
    try {
      return await this.options.wikidata.labels(ids, this.state.language);
    } catch {
      return new Map(ids.map((id) => [id, id]));
    }
  }

  /** Switch display language: re-labels current results, never re-queries the model. */
  async setLanguage(code: string): Promise<void> {
    const language = normalizeLanguage(code);
    this.state.language = language;
    this.announceUrl();
    if (this.state.results.length > 0) {
      const generation = ++this.exploreGeneration;
      const labels = await this.labelsFor(this.state.results.map((r) => r.item));
      if (generation !== this.exploreGeneration) return;
      this.state.results = this.state.results.map((r) => ({
        ...r,
        label: labels.get(r.item) ?? r.item,
      }));
    }
    this.emit();
  }

  /** Retry affordance for transport failures. */
  async retry(): Promise<void> {
    if (this.state.currentEntity) {
      await this.explore(this.state.currentEntity);
    }
  }
}
