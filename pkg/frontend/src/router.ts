/** Hash routing: explorations live at #/{entity}?lang=xx so they are linkable. */

const ENTITY_RE = /^[QP][1-9][0-9]*$/;
const LANG_RE = /^[a-z]{2,3}(-[a-zA-Z0-9]+)*$/;

export const DEFAULT_LANGUAGE = "en";

export interface Route {
  entity: string | null;
  lang: string;
}

export function normalizeLanguage(code: string | null | undefined): string {
  if (code && LANG_RE.test(code)) return code;
  return DEFAULT_LANGUAGE;
}

export function parseHash(hash: string): Route {
  const trimmed = hash.replace(/^#\/?/, "");
  const [path, query = ""] = trimmed.split("?", 2);
  const params = new URLSearchParams(query);
  const entity = path && ENTITY_RE.test(path) ? path : null;
  return { entity, lang: normalizeLanguage(params.get("lang")) };
}

export function formatHash(entity: string | null, lang: string): string {
  const suffix = `?lang=${normalizeLanguage(lang)}`;
  return entity ? `#/${entity}${suffix}` : `#/${suffix}`;
}
