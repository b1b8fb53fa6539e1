"""Vocabulary construction and the triple-to-sentence view of the corpus.

Every triple is a 3-token sentence ``[subject, predicate, object]``. The
vocabulary counts all three positions, drops tokens under ``min_count`` and
fixes a deterministic order: descending count, then ascending token text.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .ids import Triple
from . import ingest


@dataclass(frozen=True)
class VocabStats:
    total_tokens_kept: int
    n_items: int
    n_properties: int


class Vocabulary:
    """Frequency-ranked token table with O(1) token -> index lookup.

    ``counts[i]`` belongs to ``tokens[i]``; a count of 0 means "unknown"
    (tokens restored from a model file, where counts are not stored).
    """

    __slots__ = ("tokens", "counts", "index")

    def __init__(self, entries: Sequence[tuple[str, int]]):
        self.tokens: list[str] = [t for t, _ in entries]
        self.counts: list[int] = [c for _, c in entries]
        self.index: dict[str, int] = {t: i for i, t in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise ValueError("duplicate token in vocabulary")

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "Vocabulary":
        return cls([(t, 0) for t in tokens])

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self.tokens == other.tokens and self.counts == other.counts

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for token, count in zip(self.tokens, self.counts):
                fh.write(f"{token}\t{count}\n")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        entries = []
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                parts = line.rstrip("\n").split("\t")
                if len(parts) != 2:
                    raise ValueError(f"{path}:{line_no}: expected token<TAB>count")
                entries.append((parts[0], int(parts[1])))
        return cls(entries)


def sentence_of(triple: Triple) -> list[str]:
    """The 3-token sentence for one triple, in subject/predicate/object order."""
    return list(triple.tokens())


def build_vocabulary(triples: Iterable[Triple], min_count: int) -> tuple[Vocabulary, VocabStats]:
    """Count every token position of every triple, prune, and rank.

    One pass over the stream; the same multiset of triples always produces
    the identical vocabulary (ties in count break on ascending token text).
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    counts: Counter[str] = Counter()
    for triple in triples:
        counts.update(triple.tokens())
    kept = [(t, c) for t, c in counts.items() if c >= min_count]
    kept.sort(key=lambda tc: (-tc[1], tc[0]))
    vocab = Vocabulary(kept)
    n_properties = sum(1 for t in vocab.tokens if t[0] == "P")
    stats = VocabStats(
        total_tokens_kept=sum(vocab.counts),
        n_items=len(vocab) - n_properties,
        n_properties=n_properties,
    )
    return vocab, stats


def encode_sentence(vocab: Vocabulary, tokens: Iterable[str]) -> list[int]:
    """Map tokens to vocabulary indices, silently dropping OOV tokens."""
    index = vocab.index
    return [index[t] for t in tokens if t in index]


def keep_probability(count: int, total: int, t: float) -> float:
    """Survival probability of one token occurrence under frequency subsampling.

    With f = count/total: p = min(1, (sqrt(f/t) + 1) * t/f). Rare tokens are
    always kept; very frequent ones are mostly dropped.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if total < count:
        raise ValueError(f"total ({total}) must be >= count ({count})")
    if t <= 0:
        raise ValueError(f"subsample threshold must be > 0, got {t}")
    f = count / total
    return min(1.0, (math.sqrt(f / t) + 1.0) * (t / f))


class TripleFileCorpus:
    """Re-iterable sentence stream over a triple text file.

    Each iteration re-reads the file, so memory stays bounded no matter how
    many epochs consume it.
    """

    def __init__(self, path: str | Path):
        self.path = str(path)

    def __iter__(self) -> Iterator[list[str]]:
        for triple in ingest.read_triples(self.path):
            yield sentence_of(triple)
