import { createModelApi } from "./api.js";
import { App, UiState } from "./app.js";
import { parseHash } from "./router.js";
import { createWikidataGateway } from "./wikidata.js";

const LANGUAGES = ["en", "sv", "de", "fr", "es", "da", "ja", "zh", "ru", "ar"];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function render(state: UiState): void {
  const suggestionsBox = el<HTMLUListElement>("suggestions");
  suggestionsBox.replaceChildren(
    ...state.suggestions.map((s) => {
      const li = document.createElement("li");
      const link = document.createElement("a");
      link.href = `#/${s.id}?lang=${state.language}`;
      link.textContent = s.label || s.id;
      const note = document.createElement("small");
      note.textContent = ` ${s.id}${s.description ? ` - ${s.description}` : ""}`;
      li.append(link, note);
      return li;
    }),
  );

  el<HTMLElement>("current").textContent = state.currentEntity
    ? `Most similar to ${state.currentEntity}`
    : "Search for an item to explore its neighbors";

  const notice = el<HTMLElement>("notice");
  notice.replaceChildren();
  if (state.notice) {
    notice.append(state.notice.message);
    if (state.notice.kind === "transport" && state.currentEntity) {
      const retry = document.createElement("button");
      retry.textContent = "retry";
      retry.addEventListener("click", () => void app.retry());
      notice.append(" ", retry);
    }
  }

  const results = el<HTMLOListElement>("results");
  results.replaceChildren(
    ...state.results.map((hit) => {
      const li = document.createElement("li");
      const link = document.createElement("a");
      link.href = `#/${hit.item}?lang=${state.language}`; // click re-runs the exploration
      link.textContent = hit.label;
      const score = document.createElement("span");
      score.className = "score";
      score.textContent = hit.similarity.toFixed(6);
      li.append(link, ` (${hit.item}) `, score);
      return li;
    }),
  );
  el<HTMLElement>("busy").hidden = !state.busy;
}

const initial = parseHash(location.hash);
const app = new App({
  api: createModelApi((url) => fetch(url)),
  wikidata: createWikidataGateway((url) => fetch(url)),
  language: initial.lang,
  onUrlChange: (hash) => {
    if (location.hash !== hash) history.replaceState(null, "", hash);
  },
});
app.subscribe(render);

const searchInput = el<HTMLInputElement>("search");
searchInput.addEventListener("input", () => app.setQuery(searchInput.value));

const languageSelect = el<HTMLSelectElement>("language");
for (const code of LANGUAGES) {
  const option = document.createElement("option");
  option.value = code;
  option.textContent = code;
  languageSelect.append(option);
}
languageSelect.value = initial.lang;
languageSelect.addEventListener("change", () => void app.setLanguage(languageSelect.value));

window.addEventListener("hashchange", () => {
  const route = parseHash(location.hash);
  if (route.lang !== app.state.language) {
    languageSelect.value = route.lang;
    void app.setLanguage(route.lang);
  }
  if (route.entity && route.entity !== app.state.currentEntity) {
    void app.explore(route.entity);
  }
});

if (initial.entity) {
  void app.explore(initial.entity);
}
