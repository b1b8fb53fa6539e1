"""Semantic-relatedness evaluation over Wordsim-353-style word pairs.

Word pairs are scored by cosine similarity of their mapped Wikidata items
and compared with the human ratings via Pearson and Spearman correlations.
The word -> item mapping is a curated, versioned data file; pairs whose
words are unmapped, or whose items were pruned from the model, are skipped
and reported.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import store
from .ids import EntityId
from .trainer import EmbeddingModel


class EvaluationError(RuntimeError):
    """Evaluation cannot produce correlations (e.g. fewer than 2 usable pairs)."""


@dataclass(frozen=True)
class WordsimPair:
    word1: str
    word2: str
    human_score: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.human_score <= 10.0):
            raise ValueError(f"human score must be in [0, 10], got {self.human_score}")


class SkipCause(Enum):
    UNMAPPED_WORD = "unmapped_word"
    OOV_ENTITY = "oov_entity"


@dataclass(frozen=True)
class EvalReport:
    n_total: int
    n_used: int
    pearson: float
    spearman: float
    skipped: tuple[tuple[WordsimPair, SkipCause], ...]

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_total": self.n_total,
                "n_used": self.n_used,
                "pearson": self.pearson,
                "spearman": self.spearman,
                "skipped": [
                    {"word1": p.word1, "word2": p.word2, "reason": cause.value}
                    for p, cause in self.skipped
                ],
            }
        )


def packaged_wordsim_path() -> Path:
    """The shipped 353-pair fixture (see the data file header for caveats)."""
    return Path(str(resources.files("wembed") / "data" / "wordsim353_fixture.csv"))


def packaged_mapping_path() -> Path:
    """The shipped, curated word -> Wikidata item mapping."""
    return Path(str(resources.files("wembed") / "data" / "wordsim_item_mapping.tsv"))


def load_wordsim(path: str | Path) -> list[WordsimPair]:
    """Parse a word-pair file: ``word1,word2,score`` (or tab-separated).

    A single header line is tolerated; anything else malformed raises with
    its line number.
    """
    pairs: list[WordsimPair] = []
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    data_lines = [(no, ln) for no, ln in enumerate(lines, start=1) if ln.strip()]
    if not data_lines:
        raise ValueError(f"{path}: no word pairs found")
    sep = "\t" if "\t" in data_lines[0][1] else ","
    for pos, (line_no, line) in enumerate(data_lines):
        fields = [f.strip() for f in line.split(sep)]
        if len(fields) != 3:
            raise ValueError(f"{path}:{line_no}: expected 3 fields, got {len(fields)}")
        try:
            score = float(fields[2])
        except ValueError:
            if pos == 0:
                continue  # header line
            raise ValueError(f"{path}:{line_no}: unparseable score {fields[2]!r}") from None
        try:
            pairs.append(WordsimPair(fields[0], fields[1], score))
        except ValueError as exc:
            raise ValueError(f"{path}:{line_no}: {exc}") from None
    if not pairs:
        raise ValueError(f"{path}: no word pairs found")
    return pairs


def load_mapping(path: str | Path) -> dict[str, EntityId]:
    """Parse the ``word<TAB>QID`` mapping; '#' lines are curation notes."""
    mapping: dict[str, EntityId] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{line_no}: expected word<TAB>QID")
            word, qid = parts[0], parts[1].strip()
            entity = EntityId.parse(qid)
            if not entity.is_item:
                raise ValueError(f"{path}:{line_no}: mapping target must be an item, got {qid}")
            if word in mapping:
                raise ValueError(f"{path}:{line_no}: duplicate mapping for {word!r}")
            mapping[word] = entity
    return mapping


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation; rejects degenerate inputs.

    All reductions use exactly-rounded summation, so the result is
    bit-identical under any permutation of the observations.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be 1-d sequences of equal length")
    if len(x) < 2:
        raise ValueError(f"need at least 2 observations, got {len(x)}")
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    vx = math.fsum((xi - mx) ** 2 for xi in x)
    vy = math.fsum((yi - my) ** 2 for yi in y)
    if vx == 0.0 or vy == 0.0:
        raise ValueError("zero variance: correlation undefined")
    cov = math.fsum((xi - mx) * (yi - my) for xi, yi in zip(x, y))
    return cov / math.sqrt(vx * vy)


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks with ties assigned the fractional (average) rank."""
    v = np.asarray(values, dtype=np.float64)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v), dtype=np.float64)
    i = 0
    n = len(v)
    while i < n:
        j = i
        while j + 1 < n and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman rank correlation: Pearson over average-tie ranks."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be 1-d sequences of equal length")
    if len(x) < 2:
        raise ValueError(f"need at least 2 observations, got {len(x)}")
    return pearson(average_ranks(x), average_ranks(y))


def evaluate(
    model: EmbeddingModel,
    pairs: Sequence[WordsimPair],
    mapping: Mapping[str, EntityId],
) -> EvalReport:
    """Score every mappable, in-vocabulary pair and correlate with the humans.

    Deterministic and permutation-invariant up to the order of the skipped
    list, which follows the input order.
    """
    predicted: list[float] = []
    human: list[float] = []
    skipped: list[tuple[WordsimPair, SkipCause]] = []
    for pair in pairs:
        e1 = mapping.get(pair.word1)
        e2 = mapping.get(pair.word2)
        if e1 is None or e2 is None:
            skipped.append((pair, SkipCause.UNMAPPED_WORD))
            continue
        t1, t2 = str(e1), str(e2)
        if not store.contains(model, t1) or not store.contains(model, t2):
            skipped.append((pair, SkipCause.OOV_ENTITY))
            continue
        predicted.append(store.similarity(model, t1, t2))
        human.append(pair.human_score)
    if len(predicted) < 2:
        raise EvaluationError(
            f"only {len(predicted)} usable pairs; correlations need at least 2"
        )
    return EvalReport(
        n_total=len(pairs),
        n_used=len(predicted),
        pearson=pearson(predicted, human),
        spearman=spearman(predicted, human),
        skipped=tuple(skipped),
    )
