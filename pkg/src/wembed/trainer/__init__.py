"""Embedding training: CBOW / skip-gram with negative sampling.

Defaults are pinned to the reference setup for this corpus: dimension 100,
window 1, min count 20, CBOW, 5 negatives, 5 epochs, subsampling at 1e-3,
unigram^0.75 noise, linear learning-rate decay.

The per-sentence inner loop is the hot path. At import time we select the
compiled Cython kernel when the extension built, otherwise the NumPy
fallback from :mod:`wembed.trainer.pure`; both honor the same RNG and
update-order contract. ``kernel_backend()`` reports which one is active and
``WEMBED_KERNELS=python`` forces the fallback.
"""

from __future__ import annotations

import os
import queue
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

from ..corpus import Vocabulary, encode_sentence, keep_probability
from . import pure
from .pure import TrainRng, pair_loss, rng_init, step_pair

if os.environ.get("WEMBED_KERNELS", "").lower() == "python":
    _batch_impl = pure.train_batch
    _BACKEND = "python"
else:
    try:
        from . import _kernels

        _batch_impl = _kernels.train_batch
        _BACKEND = "compiled"
    except ImportError:
        _batch_impl = pure.train_batch
        _BACKEND = "python"

DEFAULT_DIM = 100
DEFAULT_WINDOW = 1
DEFAULT_MIN_COUNT = 20
DEFAULT_NEGATIVE = 5
DEFAULT_EPOCHS = 5
DEFAULT_LR_INITIAL = 0.025
DEFAULT_LR_MIN = 1e-4
DEFAULT_SUBSAMPLE_T = 1e-3
DEFAULT_NOISE_EXPONENT = 0.75

_BATCH_TOKENS = 10_000


def kernel_backend() -> str:
    """Which train_batch implementation is active: "compiled" or "python"."""
    return _BACKEND


class Algorithm(Enum):
    CBOW = "cbow"
    SKIPGRAM = "sg"


class TrainingDiverged(RuntimeError):
    """Non-finite values appeared in the model during training."""


@dataclass
class TrainingConfig:
    dim: int = DEFAULT_DIM
    window: int = DEFAULT_WINDOW
    min_count: int = DEFAULT_MIN_COUNT
    algorithm: Algorithm = Algorithm.CBOW
    negative: int = DEFAULT_NEGATIVE
    epochs: int = DEFAULT_EPOCHS
    lr_initial: float = DEFAULT_LR_INITIAL
    lr_min: float = DEFAULT_LR_MIN
    subsample_t: float = DEFAULT_SUBSAMPLE_T
    seed: int = 1
    noise_exponent: float = DEFAULT_NOISE_EXPONENT
    workers: int = 1

    def __post_init__(self) -> None:
        if isinstance(self.algorithm, str):
            self.algorithm = Algorithm(self.algorithm)
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if self.min_count < 1:
            raise ValueError(f"min_count must be >= 1, got {self.min_count}")
        if self.negative < 1:
            raise ValueError(f"negative must be >= 1, got {self.negative}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not (0 < self.lr_min <= self.lr_initial):
            raise ValueError(f"need 0 < lr_min <= lr_initial, got {self.lr_min}, {self.lr_initial}")
        if self.subsample_t < 0:
            raise ValueError(f"subsample_t must be >= 0 (0 disables), got {self.subsample_t}")
        if not (0 <= self.seed < 2**32):
            raise ValueError(f"seed must fit in 32 bits, got {self.seed}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


@dataclass
class EmbeddingModel:
    """A trained (or loaded) embedding: vocabulary plus the input vectors."""

    vocab: Vocabulary
    vectors: np.ndarray  # float32, one row per vocabulary entry
    config: TrainingConfig | None = None
    trained_tokens: int = 0
    epoch_losses: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def validate(self) -> None:
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.vocab):
            raise ValueError(
                f"vector matrix is {self.vectors.shape}, vocabulary has {len(self.vocab)} entries"
            )
        if self.vectors.dtype != np.float32:
            raise ValueError(f"vectors must be float32, got {self.vectors.dtype}")
        if not np.isfinite(self.vectors).all():
            raise ValueError("vector matrix contains non-finite components")


class NoiseTable:
    """Negative-sampling noise distribution: P(i) ~ count_i ** exponent.

    Sampling uses a cumulative table scaled to a 2^31 integer domain and a
    binary search, identically in both kernel backends.
    """

    DOMAIN = 1 << 31

    def __init__(self, counts: Sequence[int], exponent: float = DEFAULT_NOISE_EXPONENT):
        if len(counts) == 0:
            raise ValueError("noise table needs a non-empty vocabulary")
        weights = np.asarray(counts, dtype=np.float64) ** exponent
        total = float(weights.sum())
        if not (total > 0 and np.isfinite(total)):
            raise ValueError("noise weights must sum to a positive finite value")
        self.probs = weights / total
        cum = np.round(np.cumsum(self.probs) * self.DOMAIN).astype(np.int64)
        cum[-1] = self.DOMAIN
        self.cum = cum

    def __len__(self) -> int:
        return len(self.cum)

    def sample(self, rng: TrainRng) -> int:
        r = rng.next_u31()
        return int(np.searchsorted(self.cum, r, side="right"))


def negative_sample(table: NoiseTable, rng: TrainRng) -> int:
    """Draw one vocabulary index from the noise distribution."""
    return table.sample(rng)


def init_model(config: TrainingConfig, vocab: Vocabulary) -> tuple[np.ndarray, np.ndarray]:
    """Seeded initial matrices: uniform [-0.5/dim, 0.5/dim) input, zero output."""
    if len(vocab) == 0:
        raise ValueError("cannot initialize a model over an empty vocabulary")
    rs = np.random.RandomState(config.seed)
    w_in = ((rs.rand(len(vocab), config.dim) - 0.5) / config.dim).astype(np.float32)
    w_out = np.zeros((len(vocab), config.dim), dtype=np.float32)
    return w_in, w_out


def _pack_batch(sentences: list[list[int]]) -> tuple[np.ndarray, np.ndarray]:
    offsets = np.zeros(len(sentences) + 1, dtype=np.int32)
    for i, s in enumerate(sentences):
        offsets[i + 1] = offsets[i] + len(s)
    data = np.fromiter(
        (idx for s in sentences for idx in s), dtype=np.int32, count=int(offsets[-1])
    )
    return data, offsets


_EMPTY_PROBS = np.ones(1, dtype=np.float64)


def _run_sentence(
    w_in: np.ndarray,
    w_out: np.ndarray,
    sentence: Sequence[int],
    lr: float,
    rng: TrainRng,
    noise: NoiseTable,
    cbow: bool,
    window: int,
    negative: int,
) -> tuple[float, int]:
    data, offsets = _pack_batch([list(sentence)])
    loss, pairs, _, state = _batch_impl(
        w_in, w_out, data, offsets, cbow, window, negative, lr,
        noise.cum, _EMPTY_PROBS, False, rng.state,
    )
    rng.state = state
    return loss, pairs


def train_cbow_sentence(
    w_in: np.ndarray,
    w_out: np.ndarray,
    sentence: Sequence[int],
    lr: float,
    rng: TrainRng,
    noise: NoiseTable,
    window: int = DEFAULT_WINDOW,
    negative: int = DEFAULT_NEGATIVE,
) -> tuple[float, int]:
    """Train one already-encoded sentence with CBOW; returns (loss, pairs).

    Sentences shorter than 2 tokens are skipped silently.
    """
    return _run_sentence(w_in, w_out, sentence, lr, rng, noise, True, window, negative)


def train_skipgram_sentence(
    w_in: np.ndarray,
    w_out: np.ndarray,
    sentence: Sequence[int],
    lr: float,
    rng: TrainRng,
    noise: NoiseTable,
    window: int = DEFAULT_WINDOW,
    negative: int = DEFAULT_NEGATIVE,
) -> tuple[float, int]:
    """Skip-gram twin of :func:`train_cbow_sentence`."""
    return _run_sentence(w_in, w_out, sentence, lr, rng, noise, False, window, negative)


def _iter_batches(
    corpus: Iterable[Sequence[str]], vocab: Vocabulary, max_tokens: int
):
    pending: list[list[int]] = []
    n_tokens = 0
    for sentence in corpus:
        encoded = encode_sentence(vocab, sentence)
        if not encoded:
            continue
        pending.append(encoded)
        n_tokens += len(encoded)
        if n_tokens >= max_tokens:
            yield _pack_batch(pending)
            pending, n_tokens = [], 0
    if pending:
        yield _pack_batch(pending)


def train(
    corpus: Callable[[], Iterable[Sequence[str]]] | Iterable[Sequence[str]],
    config: TrainingConfig,
    vocab: Vocabulary,
    progress: Callable[[int, float, float], None] | None = None,
) -> EmbeddingModel:
    """Run the full training loop over a re-iterable sentence stream.

    ``corpus`` is iterated once per epoch (a list, a zero-argument factory,
    or any re-iterable such as :class:`wembed.corpus.TripleFileCorpus`).
    The learning rate decays linearly from lr_initial to lr_min over the
    expected total token count; the RNG stream of every batch is derived
    from (seed, global batch index), which makes single-worker runs
    bit-reproducible. ``progress``, when given, is called after each epoch
    with (epoch, mean_loss, lr).
    """
    if len(vocab) == 0:
        raise ValueError("cannot train over an empty vocabulary")
    corpus_factory = corpus if callable(corpus) else lambda: corpus

    w_in, w_out = init_model(config, vocab)
    noise = NoiseTable(vocab.counts, config.noise_exponent)

    total_tokens = sum(vocab.counts)
    if total_tokens <= 0:
        total_tokens = sum(
            len(encode_sentence(vocab, s)) for s in corpus_factory()
        )
    expected = max(1, total_tokens * config.epochs)

    use_subsample = config.subsample_t > 0
    if use_subsample:
        keep_probs = np.array(
            [keep_probability(max(c, 1), max(total_tokens, 1), config.subsample_t) for c in vocab.counts],
            dtype=np.float64,
        )
    else:
        keep_probs = _EMPTY_PROBS

    cbow = config.algorithm is Algorithm.CBOW
    lr_span = config.lr_initial - config.lr_min

    scheduled = 0
    batch_counter = 0
    trained_tokens = 0
    epoch_losses: list[float] = []

    def _make_jobs(epoch_corpus):
        nonlocal scheduled, batch_counter
        for data, offsets in _iter_batches(epoch_corpus, vocab, _BATCH_TOKENS):
            lr = config.lr_initial - lr_span * (scheduled / expected)
            lr = max(lr, config.lr_min)
            state = rng_init(config.seed, stream=batch_counter)
            scheduled += int(data.shape[0])
            batch_counter += 1
            yield data, offsets, lr, state

    def _run_job(job) -> tuple[float, int, int]:
        data, offsets, lr, state = job
        loss, pairs, centers, _ = _batch_impl(
            w_in, w_out, data, offsets, cbow, config.window, config.negative,
            lr, noise.cum, keep_probs, use_subsample, state,
        )
        return loss, pairs, centers

    for epoch in range(config.epochs):
        loss_sum = 0.0
        pair_count = 0
        jobs = _make_jobs(corpus_factory())

        if config.workers == 1:
            for job in jobs:
                loss, pairs, centers = _run_job(job)
                loss_sum += loss
                pair_count += pairs
                trained_tokens += centers
        else:
            job_queue: queue.Queue = queue.Queue(maxsize=2 * config.workers)
            results: list[tuple[float, int, int]] = []
            lock = threading.Lock()

            def _worker():
                acc = (0.0, 0, 0)
                while True:
                    job = job_queue.get()
                    if job is None:
                        break
                    loss, pairs, centers = _run_job(job)
                    acc = (acc[0] + loss, acc[1] + pairs, acc[2] + centers)
                with lock:
                    results.append(acc)

            threads = [threading.Thread(target=_worker) for _ in range(config.workers)]
            for t in threads:
                t.start()
            for job in jobs:
                job_queue.put(job)
            for _ in threads:
                job_queue.put(None)
            for t in threads:
                t.join()
            for loss, pairs, centers in results:
                loss_sum += loss
                pair_count += pairs
                trained_tokens += centers

        if not (np.isfinite(w_in).all() and np.isfinite(w_out).all()):
            raise TrainingDiverged(f"non-finite weights after epoch {epoch + 1}")
        mean_loss = loss_sum / pair_count if pair_count else float("nan")
        epoch_losses.append(mean_loss)
        if progress is not None:
            lr_now = max(config.lr_initial - lr_span * (scheduled / expected), config.lr_min)
            progress(epoch + 1, mean_loss, lr_now)

    model = EmbeddingModel(
        vocab=vocab,
        vectors=w_in,
        config=config,
        trained_tokens=trained_tokens,
        epoch_losses=epoch_losses,
    )
    model.validate()
    return model
