import { ModelApi, SearchSuggestion, WikidataGateway } from "../src/types.js";

export interface Deferred<T> {
  promise: Promise<T>;
  resolve(value: T): void;
  reject(err: unknown): void;
}

export function deferred<T>(): Deferred<T> {
  let resolve!: (value: T) => void;
  let reject!: (err: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

/** Scripted model API: records calls, optionally hands out manual promises. */
export class FakeModelApi implements ModelApi {
  calls: { entity: string; n: number }[] = [];
  queue: Deferred<{ item: string; similarity: number }[]>[] = [];
  auto: Record<string, { item: string; similarity: number }[]> = {};
  autoError: Error | null = null;

  mostSimilar(entity: string, n: number) {
    this.calls.push({ entity, n });
    if (this.autoError) return Promise.reject(this.autoError);
    const scripted = this.queue.shift();
    if (scripted) return scripted.promise;
    return Promise.resolve(this.auto[entity] ?? []);
  }
}

export class FakeWikidata implements WikidataGateway {
  searchCalls: { query: string; language: string }[] = [];
  labelCalls: { ids: string[]; language: string }[] = [];
  searchQueue: Deferred<SearchSuggestion[]>[] = [];
  labelsByLanguage: Record<string, Record<string, string>> = {};
  failLabels = false;

  search(query: string, language: string) {
    this.searchCalls.push({ query, language });
    const scripted = this.searchQueue.shift();
    if (scripted) return scripted.promise;
    return Promise.resolve([{ id: "Q1", label: `hit for ${query}`, description: "" }]);
  }

  labels(ids: string[], language: string) {
    this.labelCalls.push({ ids: [...ids], language });
    if (this.failLabels) return Promise.reject(new Error("labels down"));
    const table = this.labelsByLanguage[language] ?? {};
    return Promise.resolve(new Map(ids.map((id) => [id, table[id] ?? id])));
  }
}

export async function settled(): Promise<void> {
  // let chained microtasks run
  for (let i = 0; i < 10; i++) await Promise.resolve();
}
