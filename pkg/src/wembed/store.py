"""Model persistence and exact cosine-similarity queries.

The text format is the interchange contract: a ``<vocab_size> <dim>`` header
line, then one ``<token> <v1> … <vdim>`` line per vocabulary entry with
components printed to 9 significant digits, which round-trips 32-bit floats
exactly. Nearest-neighbor queries are exact full scans over a unit-normalized
copy of the matrix; at ~600k x 100 that is a single BLAS matrix-vector
product, well inside an interactive latency budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Vocabulary
from .ids import EntityId, is_valid_entity_id
from .trainer import EmbeddingModel


class NotInVocabulary(LookupError):
    """Query id is valid but absent from the model vocabulary."""

    def __init__(self, entity: str):
        super().__init__(f"not in vocabulary: {entity}")
        self.entity = entity


class ModelFormatError(ValueError):
    """Model file violates the text format contract."""

    def __init__(self, path: str, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class SimilarityHit:
    entity: EntityId
    score: float


def save_text(model: EmbeddingModel, path: str | Path) -> None:
    """Write the model in the text format; loading it back is lossless."""
    model.validate()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(model.vocab)} {model.dim}\n")
        for i, token in enumerate(model.vocab.tokens):
            comps = " ".join("%.9g" % c for c in model.vectors[i].tolist())
            fh.write(f"{token} {comps}\n")


def load_text(path: str | Path) -> EmbeddingModel:
    """Read a model written by :func:`save_text`, checking every row."""
    path = str(path)
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise ModelFormatError(path, 1, f"expected '<vocab_size> <dim>' header, got {header!r}")
        try:
            n, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise ModelFormatError(path, 1, f"non-integer header: {header!r}") from None
        if n < 0 or dim < 1:
            raise ModelFormatError(path, 1, f"bad dimensions in header: {n} x {dim}")

        vectors = np.empty((n, dim), dtype=np.float32)
        tokens: list[str] = []
        for line_no, line in enumerate(fh, start=2):
            i = line_no - 2
            if i >= n:
                raise ModelFormatError(path, line_no, f"more than {n} vector rows")
            fields = line.split()
            if len(fields) != dim + 1:
                raise ModelFormatError(path, line_no, f"expected 1 token + {dim} components, got {len(fields)} fields")
            token = fields[0]
            if not is_valid_entity_id(token):
                raise ModelFormatError(path, line_no, f"invalid entity id: {token!r}")
            try:
                row = np.array(fields[1:], dtype=np.float32)
            except ValueError:
                raise ModelFormatError(path, line_no, "unparseable vector component") from None
            if not np.isfinite(row).all():
                raise ModelFormatError(path, line_no, "non-finite vector component")
            vectors[i] = row
            tokens.append(token)
        if len(tokens) != n:
            raise ModelFormatError(path, len(tokens) + 1, f"expected {n} vector rows, found {len(tokens)}")

    try:
        vocab = Vocabulary.from_tokens(tokens)
    except ValueError as exc:
        raise ModelFormatError(path, 1, str(exc)) from None
    model = EmbeddingModel(vocab=vocab, vectors=vectors)
    model.validate()
    return model


class UnitIndex:
    """Row-normalized copy of the matrix for full-scan nearest neighbors.

    Zero-norm rows (degenerate inputs only) are flagged and never appear in
    results.
    """

    def __init__(self, model: EmbeddingModel):
        vectors = model.vectors
        norms = np.sqrt(np.einsum("ij,ij->i", vectors, vectors, dtype=np.float64))
        self.zero_rows = norms == 0.0
        safe = np.where(self.zero_rows, 1.0, norms).astype(np.float32)
        self.unit = vectors / safe[:, None]
        self.norms = norms

    @property
    def n_zero_rows(self) -> int:
        return int(self.zero_rows.sum())


def _index_of(model: EmbeddingModel, entity: str) -> int:
    idx = model.vocab.index.get(entity)
    if idx is None:
        raise NotInVocabulary(entity)
    return idx


def contains(model: EmbeddingModel, entity: str) -> bool:
    """True iff the (case-sensitive) serialized id is in the vocabulary."""
    return entity in model.vocab


def similarity(model: EmbeddingModel, a: str, b: str) -> float:
    """Cosine similarity of two in-vocabulary entities.

    Zero-norm degenerate vectors yield 0.0 rather than NaN.
    """
    va = model.vectors[_index_of(model, a)].astype(np.float64)
    vb = model.vectors[_index_of(model, b)].astype(np.float64)
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(va @ vb) / (na * nb)


def top_k_indices(scores: np.ndarray, k: int, exclude: np.ndarray) -> np.ndarray:
    """Indices of the k largest scores, excluding masked rows.

    Deterministic order: descending score, then ascending index (exact even
    across ties at the k-th score boundary).
    """
    s = scores.astype(np.float32, copy=True)
    s[exclude] = -np.inf
    n = s.shape[0]
    if k < n:
        kth = np.partition(s, n - k)[n - k]
    else:
        kth = -np.inf
    if kth > -np.inf:
        cand = np.flatnonzero(s >= kth)
    else:
        cand = np.flatnonzero(s > -np.inf)
    order = np.lexsort((cand, -s[cand]))
    return cand[order][:k]


def most_similar(
    model: EmbeddingModel, entity: str, k: int, index: UnitIndex | None = None
) -> list[SimilarityHit]:
    """The k nearest entities by cosine, excluding the query itself.

    Exact full scan; pass a prebuilt :class:`UnitIndex` to amortize the
    normalization across queries.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    qi = _index_of(model, entity)
    if index is None:
        index = UnitIndex(model)
    scores = index.unit @ index.unit[qi]
    exclude = index.zero_rows.copy()
    exclude[qi] = True
    top = top_k_indices(scores, k, exclude)
    tokens = model.vocab.tokens
    return [
        SimilarityHit(entity=EntityId.parse(tokens[i]), score=float(scores[i]))
        for i in top
    ]
