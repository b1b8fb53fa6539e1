"""Client for the live Wikidata Action API: entity search and label lookup.

Everything goes through an injectable transport so the module is fully
testable offline with recorded fixtures. Labels are cached in a TTL-bounded
LRU; requests carry a descriptive User-Agent as the API etiquette asks, and
transient transport failures are retried with backoff while API-level errors
surface immediately.
"""

from __future__ import annotations

import os
import threading
import time
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Iterable, Protocol, Sequence

from .ids import EntityId

DEFAULT_API_URL = "https://www.wikidata.org/w/api.php"
API_URL_ENV = "WEMBED_WIKIDATA_API"
USER_AGENT = "wembed/0.1 (https://github.com/wembed/wembed; knowledge-graph embedding toolkit)"

MAX_IDS_PER_REQUEST = 50  # wbgetentities page limit
_RETRY_BACKOFFS = (0.25, 1.0)


class TransportError(ConnectionError):
    """Network failure, non-2xx status, or unparseable response body."""


class RemoteApiError(RuntimeError):
    """The API answered with an error object; not retried."""

    def __init__(self, code: str, info: str):
        super().__init__(f"wikidata api error {code}: {info}")
        self.code = code


@dataclass(frozen=True)
class SearchResult:
    id: EntityId
    label: str
    description: str
    language: str


class Transport(Protocol):
    def get(self, url: str, params: dict[str, str], headers: dict[str, str], timeout: float) -> dict:
        """Issue one GET; return the decoded JSON body or raise TransportError."""


class RequestsTransport:
    """Default transport backed by a pooled requests session."""

    def __init__(self) -> None:
        import requests

        self._session = requests.Session()
        self._requests = requests

    def get(self, url: str, params: dict[str, str], headers: dict[str, str], timeout: float) -> dict:
        try:
            response = self._session.get(url, params=params, headers=headers, timeout=timeout)
        except self._requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        if not 200 <= response.status_code < 300:
            raise TransportError(f"HTTP {response.status_code} from {url}")
        try:
            return response.json()
        except ValueError as exc:
            raise TransportError(f"malformed JSON from {url}") from exc


class LabelCache:
    """TTL + capacity bounded LRU of (entity, language) -> label."""

    def __init__(self, ttl: float, capacity: int, clock: Callable[[], float]):
        self.ttl = ttl
        self.capacity = capacity
        self._clock = clock
        self._entries: OrderedDict[tuple[str, str], tuple[str, float]] = OrderedDict()
        self._lock = threading.Lock()

    def get(self, entity: str, language: str) -> str | None:
        key = (entity, language)
        with self._lock:
            hit = self._entries.get(key)
            if hit is None:
                return None
            label, fetched_at = hit
            if self._clock() - fetched_at >= self.ttl:
                del self._entries[key]
                return None
            self._entries.move_to_end(key)
            return label

    def put(self, entity: str, language: str, label: str) -> None:
        key = (entity, language)
        with self._lock:
            self._entries[key] = (label, self._clock())
            self._entries.move_to_end(key)
            while len(self._entries) > self.capacity:
                self._entries.popitem(last=False)

    def __len__(self) -> int:
        return len(self._entries)


def default_api_url() -> str:
    return os.environ.get(API_URL_ENV, DEFAULT_API_URL)


class WikidataClient:
    """Thread-safe client for wbsearchentities / wbgetentities."""

    def __init__(
        self,
        api_url: str | None = None,
        transport: Transport | None = None,
        user_agent: str = USER_AGENT,
        timeout: float = 10.0,
        retries: int = 2,
        backoffs: Sequence[float] = _RETRY_BACKOFFS,
        sleep: Callable[[float], None] = time.sleep,
        clock: Callable[[], float] = time.monotonic,
        cache_ttl: float = 3600.0,
        cache_capacity: int = 100_000,
        max_in_flight: int = 4,
    ):
        self.api_url = api_url or default_api_url()
        self.transport = transport or RequestsTransport()
        self.user_agent = user_agent
        self.timeout = timeout
        self.retries = retries
        self.backoffs = tuple(backoffs)
        self._sleep = sleep
        self.cache = LabelCache(cache_ttl, cache_capacity, clock)
        self._in_flight = threading.Semaphore(max_in_flight)

    # -- plumbing ---------------------------------------------------------

    def _request(self, params: dict[str, str]) -> dict:
        headers = {"User-Agent": self.user_agent}
        attempt = 0
        while True:
            try:
                with self._in_flight:
                    body = self.transport.get(self.api_url, params=params, headers=headers, timeout=self.timeout)
                break
            except TransportError:
                if attempt >= self.retries:
                    raise
                self._sleep(self.backoffs[min(attempt, len(self.backoffs) - 1)])
                attempt += 1
        if isinstance(body, dict) and "error" in body:
            error = body["error"]
            raise RemoteApiError(str(error.get("code", "unknown")), str(error.get("info", "")))
        return body

    # -- operations -------------------------------------------------------

    def search_entities(self, query: str, language: str = "en", limit: int = 7) -> list[SearchResult]:
        """Prefix-search entities in the given language, preserving API order."""
        if not query:
            raise ValueError("search query must be non-empty")
        if not 1 <= limit <= 50:
            raise ValueError(f"limit must be in 1..50, got {limit}")
        body = self._request(
            {
                "action": "wbsearchentities",
                "search": query,
                "language": language,
                "format": "json",
                "limit": str(limit),
            }
        )
        results = []
        for entry in body.get("search", []):
            try:
                entity = EntityId.parse(entry.get("id", ""))
            except ValueError:
                continue  # lexemes etc.; not part of this embedding
            results.append(
                SearchResult(
                    id=entity,
                    label=entry.get("label", "") or "",
                    description=entry.get("description", "") or "",
                    language=language,
                )
            )
        return results

    def get_labels(
        self,
        ids: Iterable[EntityId | str],
        language: str = "en",
        fallback_languages: Sequence[str] = (),
    ) -> dict[str, str]:
        """Resolve display labels for a batch of entities.

        The first available language along [language] + fallbacks wins; an
        entity with no label in any of them (or unknown to the API) maps to
        its own serialized id, so every requested id gets a display string.
        """
        wanted = [str(i) for i in ids]
        chain = [language] + [l for l in fallback_languages if l != language]
        labels: dict[str, str] = {}
        misses: list[str] = []
        for entity in wanted:
            cached = self.cache.get(entity, language)
            if cached is not None:
                labels[entity] = cached
            elif entity not in labels and entity not in misses:
                misses.append(entity)

        for start in range(0, len(misses), MAX_IDS_PER_REQUEST):
            chunk = misses[start : start + MAX_IDS_PER_REQUEST]
            body = self._request(
                {
                    "action": "wbgetentities",
                    "ids": "|".join(chunk),
                    "props": "labels",
                    "languages": "|".join(chain),
                    "format": "json",
                }
            )
            entities = body.get("entities", {})
            for entity in chunk:
                label = entity  # fall back to the raw id
                entry = entities.get(entity)
                if entry and "missing" not in entry:
                    entry_labels = entry.get("labels", {})
                    for lang in chain:
                        value = entry_labels.get(lang)
                        if value and value.get("value"):
                            label = value["value"]
                            break
                labels[entity] = label
                self.cache.put(entity, language, label)
        return {entity: labels[entity] for entity in wanted}
