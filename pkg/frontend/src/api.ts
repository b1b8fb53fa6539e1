import { FetchLike, ModelApi, NotInVocabularyError, TransportFailure } from "./types.js";

/** Client for the similarity service's JSON API. */
export function createModelApi(fetchLike: FetchLike, baseUrl = ""): ModelApi {
  return {
    async mostSimilar(entity, n) {
      let response;
      try {
        response = await fetchLike(`${baseUrl}/api/most-similar/${encodeURIComponent(entity)}?n=${n}`);
      } catch (err) {
        throw new TransportFailure(String(err));
      }
      if (response.status === 404) {
        throw new NotInVocabularyError(entity);
      }
      if (!response.ok) {
        throw new TransportFailure(`similarity service answered ${response.status}`);
      }
      const body = (await response.json()) as {
        most_similar: { item: string; similarity: number }[];
      };
      // scores are passed through verbatim; the UI never computes similarity
      return body.most_similar;
    },
  };
}
