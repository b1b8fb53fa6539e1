import { FetchLike, SearchSuggestion, TransportFailure, WikidataGateway } from "./types.js";

export const WIKIDATA_API = "https://www.wikidata.org/w/api.php";
const LABEL_CHUNK = 50; // wbgetentities page limit

/**
 * Browser-side Wikidata Action API gateway. Requests are anonymous
 * cross-origin calls (origin=*), exactly like the search box on the
 * Wikidata homepage.
 */
export function createWikidataGateway(fetchLike: FetchLike, apiUrl = WIKIDATA_API): WikidataGateway {
  async function call(params: Record<string, string>): Promise<unknown> {
    const search = new URLSearchParams({ ...params, format: "json", origin: "*" });
    let response;
    try {
      response = await fetchLike(`${apiUrl}?${search}`);
    } catch (err) {
      throw new TransportFailure(String(err));
    }
    if (!response.ok) {
      throw new TransportFailure(`wikidata api answered ${response.status}`);
    }
    return response.json();
  }

  return {
    async search(query, language, limit): Promise<SearchSuggestion[]> {
      const body = (await call({
        action: "wbsearchentities",
        search: query,
        language,
        uselang: language,
        limit: String(limit),
      })) as { search?: { id: string; label?: string; description?: string }[] };
      return (body.search ?? []).map((entry) => ({
        id: entry.id,
        label: entry.label ?? "",
        description: entry.description ?? "",
      }));
    },

    async labels(ids, language): Promise<Map<string, string>> {
      const out = new Map<string, string>();
      for (let start = 0; start < ids.length; start += LABEL_CHUNK) {
        const chunk = ids.slice(start, start + LABEL_CHUNK);
        const body = (await call({
          action: "wbgetentities",
          ids: chunk.join("|"),
          props: "labels",
          languages: language,
        })) as {
          entities?: Record<string, { missing?: string; labels?: Record<string, { value?: string }> }>;
        };
        for (const id of chunk) {
          const entry = body.entities?.[id];
          const value = entry && entry.missing === undefined ? entry.labels?.[language]?.value : undefined;
          out.set(id, value || id); // unlabeled entities display as their raw id
        }
      }
      return out;
    },
  };
}
