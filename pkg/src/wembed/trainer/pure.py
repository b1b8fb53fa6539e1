"""NumPy reference implementation of the training kernels.

This is the fallback selected when the compiled extension is unavailable and
the semantic reference the extension must agree with. Both implementations
share one RNG contract (64-bit LCG, splitmix-style seeding) so that, given
the same state, they consume identical draw sequences: subsampling first
(one float per token), then per center position one window draw, then the
negative draws. Only floating-point rounding may differ between backends.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_LCG_MULT = 25214903917
_LCG_ADD = 11
_F53 = 1.0 / 9007199254740992.0  # 2**-53


def rng_init(seed: int, stream: int = 0) -> int:
    """Derive a well-mixed 64-bit LCG state from (seed, stream)."""
    z = (seed + (stream + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _lcg(state: int) -> int:
    return (state * _LCG_MULT + _LCG_ADD) & _MASK64


class TrainRng:
    """Deterministic training RNG; a thin mutable wrapper over the LCG state."""

    __slots__ = ("state",)

    def __init__(self, seed: int, stream: int = 0):
        self.state = rng_init(seed, stream)

    def next_u31(self) -> int:
        self.state = _lcg(self.state)
        return self.state >> 33

    def next_float(self) -> float:
        self.state = _lcg(self.state)
        return (self.state >> 11) * _F53


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _softplus(x: float) -> float:
    # log(1 + e^x) without overflow
    if x > 0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


def step_pair(w_out, h, target: int, label: int, lr: float):
    """One logistic step against output row ``target``.

    Computes g = (label - sigmoid(u.h)) * lr on the current row u, adds g*h
    to the row, and returns (g*u_old, loss) where the loss is the pre-update
    value -[label log s(u.h) + (1-label) log s(-u.h)]. Works for float32
    training matrices and float64 test matrices alike.
    """
    row = w_out[target]
    d = float(row @ h)
    g = (label - _sigmoid(d)) * lr
    g_t = w_out.dtype.type(g)
    grad_h = g_t * row
    row += g_t * h
    loss = _softplus(-d) if label else _softplus(d)
    return grad_h, loss


def pair_loss(h, u, label: int) -> float:
    """Loss of a single (projection, output-row, label) pair; oracle helper."""
    d = float(np.dot(h, u))
    return _softplus(-d) if label else _softplus(d)


def _draw_negative(cum_table, target: int, state: int) -> tuple[int, int]:
    """Sample from the noise table, rejecting the positive target.

    Returns (index, state); index is -1 when 100 attempts all hit the target.
    """
    for _ in range(100):
        state = _lcg(state)
        r = state >> 33
        cand = int(np.searchsorted(cum_table, r, side="right"))
        if cand != target:
            return cand, state
    return -1, state


def train_batch(
    w_in,
    w_out,
    data,
    offsets,
    cbow: bool,
    window: int,
    negative: int,
    lr: float,
    cum_table,
    keep_probs,
    use_subsample: bool,
    rng_state: int,
):
    """Train on a packed batch of sentences; returns (loss, pairs, centers, state).

    ``data``/``offsets`` hold the encoded sentences CSR-style. The loss is
    the summed pre-update pair loss, ``pairs`` the number of logistic steps,
    ``centers`` the number of center positions actually trained.
    """
    loss_sum = 0.0
    n_pairs = 0
    n_centers = 0
    state = rng_state & _MASK64
    dtype = w_in.dtype
    dim = w_in.shape[1]

    for s in range(len(offsets) - 1):
        sent = data[offsets[s] : offsets[s + 1]].tolist()
        if use_subsample:
            kept = []
            for idx in sent:
                state = _lcg(state)
                if (state >> 11) * _F53 < keep_probs[idx]:
                    kept.append(idx)
        else:
            kept = sent
        n = len(kept)
        if n < 2:
            continue

        for pos in range(n):
            state = _lcg(state)
            b = 1 + ((state >> 33) % window)
            lo = max(0, pos - b)
            hi = min(n - 1, pos + b)
            target = kept[pos]

            if cbow:
                ctx = [kept[q] for q in range(lo, hi + 1) if q != pos]
                if not ctx:
                    continue
                h64 = w_in[ctx].sum(axis=0, dtype=np.float64)
                h = (h64 * (1.0 / len(ctx))).astype(dtype)
                neu1e = np.zeros(dim, dtype=dtype)
                for d in range(negative + 1):
                    if d == 0:
                        u_idx, label = target, 1
                    else:
                        u_idx, state = _draw_negative(cum_table, target, state)
                        if u_idx < 0:
                            continue
                        label = 0
                    grad_h, loss = step_pair(w_out, h, u_idx, label, lr)
                    neu1e += grad_h
                    loss_sum += loss
                    n_pairs += 1
                neu1e *= dtype.type(1.0 / len(ctx))
                for j in ctx:
                    w_in[j] += neu1e
                n_centers += 1
            else:
                trained = False
                for q in range(lo, hi + 1):
                    if q == pos:
                        continue
                    h_idx = kept[q]
                    h = w_in[h_idx]
                    neu1e = np.zeros(dim, dtype=dtype)
                    for d in range(negative + 1):
                        if d == 0:
                            u_idx, label = target, 1
                        else:
                            u_idx, state = _draw_negative(cum_table, target, state)
                            if u_idx < 0:
                                continue
                            label = 0
                        grad_h, loss = step_pair(w_out, h, u_idx, label, lr)
                        neu1e += grad_h
                        loss_sum += loss
                        n_pairs += 1
                    w_in[h_idx] += neu1e
                    trained = True
                if trained:
                    n_centers += 1

    return loss_sum, n_pairs, n_centers, state
