"""Label-to-pivot transformation.

Event-type label words go through a small encoder/decoder stack that maps
each label position to a vocabulary distribution, and a Gumbel-softmax
selection turns those distributions into concrete "pivot" token choices
that stay differentiable. The output always has exactly one pivot per
label word, in the same order as the (possibly shuffled) input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocks import DecoderLayer, EncoderLayer, FFNNHead, LayerNorm, Module, full_mask
from .ops import straight_through
from .tensor import Tensor

_U_CLAMP = 1e-12

PIVOT_MODES = ("soft", "straight_through", "bypass")


def gumbel_noise(shape, rng: np.random.Generator) -> np.ndarray:
    """Standard Gumbel draws via -log(-log(U)), with U clamped away from
    {0, 1} so the double log never overflows."""
    u = np.clip(rng.random(shape), _U_CLAMP, 1.0 - _U_CLAMP)
    return -np.log(-np.log(u))


def gumbel_softmax_select(logits: Tensor, tau: float,
                          noise: np.ndarray | None = None,
                          mode: str = "soft") -> tuple[Tensor, np.ndarray]:
    """Perturb logits with Gumbel noise, anneal by ``tau``, and select.

    Returns the differentiable selection ([n, V] rows summing to 1; exact
    one-hots under ``straight_through``) plus the hard argmax ids. Passing
    ``noise=None`` skips the perturbation, which is the deterministic
    evaluation path.
    """
    if tau <= 0.0:
        raise ValueError(f"temperature must be positive, got {tau}")
    if mode not in ("soft", "straight_through"):
        raise ValueError(f"unknown selection mode {mode!r}")
    if logits.data.ndim != 2:
        raise ValueError(f"expected [n, V] logits, got shape {logits.shape}")
    from .ops import softmax
    perturbed = logits if noise is None else logits + Tensor(noise)
    dist = softmax(perturbed * (1.0 / tau), axis=-1)
    hard_ids = dist.data.argmax(axis=1)
    if mode == "straight_through":
        return straight_through(dist), hard_ids
    return dist, hard_ids


def shuffle_label_blocks(schema, rng: np.random.Generator | None) -> list[int]:
    """A permutation of type indices. Label words travel as whole per-type
    blocks so multiword labels stay contiguous; ``rng=None`` means the
    canonical order."""
    n = len(schema.types)
    if rng is None:
        return list(range(n))
    return [int(i) for i in rng.permutation(n)]


@dataclass
class PivotSequence:
    """What the label words became: one pivot per label word position.

    ``selection`` is the differentiable block consumed downstream ([n, V]
    distributions, or exact one-hots in straight-through mode); it is None
    when the transformation is bypassed and ``hard_ids`` are the raw label
    ids themselves. ``owners`` maps each position to its event type index.
    ``positions`` carries per-word position ids pinned to the canonical
    block order, so shuffling blocks permutes the stream without moving
    any word's position embedding.
    """
    hard_ids: np.ndarray
    owners: list[int]
    block_order: list[int]
    selection: Tensor | None = None
    dist: Tensor | None = None
    positions: np.ndarray | None = None

    def __len__(self) -> int:
        return int(self.hard_ids.shape[0])

    def soft_block(self) -> Tensor:
        if self.selection is None:
            raise ValueError("bypassed pivots carry no differentiable block")
        return self.selection


def ordered_label_ids(schema, vocab, block_order: list[int]
                      ) -> tuple[np.ndarray, list[int]]:
    """Label word ids and owning type index per position, with the types
    arranged per ``block_order``."""
    ids: list[int] = []
    owners: list[int] = []
    for ti in block_order:
        et = schema.types[ti]
        for w in et.label_words:
            ids.append(vocab.id_of(w))
            owners.append(ti)
    return np.asarray(ids, dtype=np.int64), owners


def canonical_offsets(schema, block_order: list[int]) -> np.ndarray:
    """For each position of the (possibly shuffled) label stream, the offset
    that word has under the canonical block order."""
    sizes = [len(t.label_words) for t in schema.types]
    starts = np.concatenate([[0], np.cumsum(sizes)])
    out: list[int] = []
    for ti in block_order:
        out.extend(range(int(starts[ti]), int(starts[ti]) + sizes[ti]))
    return np.asarray(out, dtype=np.int64)


class LabelSemanticLearner(Module):
    """Encoder/decoder stack from embedded label words to per-position
    vocabulary logits. All attention masks are full: every label position
    may look at every other one."""

    def __init__(self, dim: int, heads: int, layers: int, ffn_dim: int,
                 vocab_size: int, rng: np.random.Generator, name: str = "lsl"):
        super().__init__(name)
        self.encoder = [
            self._child(f"encoder.{i}", EncoderLayer(dim, heads, ffn_dim, rng))
            for i in range(layers)
        ]
        self.decoder = [
            self._child(f"decoder.{i}", DecoderLayer(dim, heads, ffn_dim, rng))
            for i in range(layers)
        ]
        self.norm_out = self._child("norm_out", LayerNorm(dim))
        self.head = self._child("head", FFNNHead(dim, dim, vocab_size, rng))

    def __call__(self, embedded: Tensor, *, train: bool = False,
                 drop_rate: float = 0.0,
                 rng: np.random.Generator | None = None) -> Tensor:
        n = embedded.shape[0]
        mask = full_mask(n, n)
        x = embedded
        for layer in self.encoder:
            x = layer(x, mask, train=train, drop_rate=drop_rate, rng=rng)
        memory = x
        y = embedded
        for layer in self.decoder:
            y = layer(y, memory, mask, mask, train=train, drop_rate=drop_rate,
                      rng=rng)
        return self.head(self.norm_out(y))
