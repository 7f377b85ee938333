"""The full two-stage model: label transformation feeding trigger tagging.

One shared embedding stack serves both stages, so whatever the label side
learns about a word is visible from the sentence side through the same
table. Parameter names are dotted paths (``lsl.encoder.0.attn.wq``), which
is also the checkpoint key format.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocks import EmbeddingStack, Module
from .classifier import TagSet, TriggerClassifier, assemble_input
from .corpus import EventSchema
from .ops import cross_entropy, straight_through
from .pivots import (PIVOT_MODES, LabelSemanticLearner, PivotSequence,
                     canonical_offsets, gumbel_noise, gumbel_softmax_select,
                     ordered_label_ids, shuffle_label_blocks)
from .tensor import Tensor, no_grad
from .text import Vocabulary


@dataclass(frozen=True)
class ModelConfig:
    dim: int = 64
    lsl_layers: int = 3
    lsl_heads: int = 4
    tc_layers: int = 4
    tc_heads: int = 4
    ffn_dim: int = 128
    max_len: int = 256
    tau: float = 0.1
    lsl_mode: str = "straight_through"
    use_labels: bool = True
    drop_rate: float = 0.1
    copy_bias: float = 12.0

    def __post_init__(self):
        problems = []
        if self.lsl_mode not in PIVOT_MODES:
            problems.append(f"lsl_mode {self.lsl_mode!r} not one of {PIVOT_MODES}")
        if self.copy_bias < 0:
            problems.append(f"copy_bias must be non-negative, got {self.copy_bias}")
        if self.dim % self.lsl_heads or self.dim % self.tc_heads:
            problems.append(
                f"dim {self.dim} must be divisible by lsl_heads "
                f"{self.lsl_heads} and tc_heads {self.tc_heads}")
        if self.tau <= 0:
            problems.append(f"tau must be positive, got {self.tau}")
        if not 0.0 <= self.drop_rate < 1.0:
            problems.append(f"drop_rate {self.drop_rate} outside [0, 1)")
        for fname in ("dim", "lsl_layers", "tc_layers", "ffn_dim", "max_len"):
            if getattr(self, fname) < 1:
                problems.append(f"{fname} must be positive")
        if problems:
            raise ValueError("; ".join(problems))


class EventModel(Module):
    def __init__(self, vocab: Vocabulary, schema: EventSchema,
                 config: ModelConfig, rng: np.random.Generator):
        super().__init__("model")
        self.vocab = vocab
        self.schema = schema
        self.config = config
        self.tags = TagSet(schema)
        self.embed = self._child(
            "embed", EmbeddingStack(len(vocab), config.dim, config.max_len, rng))
        self.lsl = self._child(
            "lsl", LabelSemanticLearner(config.dim, config.lsl_heads,
                                        config.lsl_layers, config.ffn_dim,
                                        len(vocab), rng))
        self.tc = self._child(
            "tc", TriggerClassifier(config.dim, config.tc_heads,
                                    config.tc_layers, config.ffn_dim,
                                    len(self.tags), rng))
        for key, t in self.parameters().items():
            t.name = key

    # ---------------------------------------------------------------- pivots

    def lsl_pivots(self, train: bool = False,
                   rng: np.random.Generator | None = None,
                   block_order: list[int] | None = None) -> PivotSequence | None:
        """Run the label transformation once; the result is shared by every
        sentence it is paired with. Returns None when labels are unused.

        Training mode shuffles the label blocks (unless an explicit order is
        given) and perturbs the selection with fresh noise; evaluation uses
        the canonical order and no noise.
        """
        if not self.config.use_labels:
            return None
        if block_order is None:
            block_order = shuffle_label_blocks(self.schema, rng if train else None)
        ids, owners = ordered_label_ids(self.schema, self.vocab, block_order)
        # position ids stay pinned to the canonical order, so a shuffled
        # epoch permutes the blocks without moving any word's position
        offsets = canonical_offsets(self.schema, block_order)
        mode = self.config.lsl_mode
        if mode == "bypass":
            return PivotSequence(ids, owners, block_order, positions=1 + offsets)
        n = ids.shape[0]
        embedded = self.embed.embed(ids, np.ones(n, dtype=np.int64), offsets)
        drop = self.config.drop_rate if train else 0.0
        logits = self.lsl(embedded, train=train, drop_rate=drop, rng=rng)
        if self.config.copy_bias > 0.0:
            # anchor each position's selection at its own label word, so the
            # untrained transformation starts from the identity rather than
            # from vocabulary noise; learned logits can still override it
            anchor = np.zeros(logits.shape)
            anchor[np.arange(n), ids] = self.config.copy_bias
            logits = logits + anchor
        noise = gumbel_noise(logits.shape, rng) if train else None
        dist, hard = gumbel_softmax_select(logits, self.config.tau, noise, "soft")
        selection = straight_through(dist) if mode == "straight_through" else dist
        return PivotSequence(hard, owners, block_order, selection, dist,
                             positions=1 + offsets)

    # ------------------------------------------------------------- sentences

    def encode_sentence(self, tokens) -> np.ndarray:
        return np.asarray(self.vocab.encode(tokens), dtype=np.int64)

    def sentence_logits(self, sent_ids: np.ndarray,
                        pivots: PivotSequence | None,
                        train: bool = False,
                        rng: np.random.Generator | None = None,
                        capture: list | None = None,
                        pivot_positions: np.ndarray | None = None) -> Tensor:
        if pivot_positions is None and pivots is not None:
            pivot_positions = pivots.positions
        encoded = assemble_input(sent_ids, pivots, self.config.max_len,
                                 pivot_positions)
        drop = self.config.drop_rate if train else 0.0
        return self.tc(encoded, self.embed, train=train, drop_rate=drop,
                       rng=rng, capture=capture)

    def sentence_loss(self, sent_ids: np.ndarray, tag_ids: np.ndarray,
                      pivots: PivotSequence | None, train: bool = False,
                      rng: np.random.Generator | None = None) -> Tensor:
        logits = self.sentence_logits(sent_ids, pivots, train=train, rng=rng)
        return cross_entropy(logits, tag_ids)

    def predict_tags(self, sent_ids: np.ndarray,
                     pivots: PivotSequence | None) -> np.ndarray:
        with no_grad():
            logits = self.sentence_logits(sent_ids, pivots, train=False)
        return logits.data.argmax(axis=1)

    def eval_pivots(self) -> PivotSequence | None:
        with no_grad():
            return self.lsl_pivots(train=False)

    # ------------------------------------------------------------ parameters

    def lsl_parameters(self) -> dict[str, Tensor]:
        return {k: v for k, v in self.parameters().items()
                if k.startswith("lsl.")}

    def trainable_parameters(self, train_lsl: bool = True) -> dict[str, Tensor]:
        """All parameters, optionally with the label-side stack left out
        (used when that stack is bypassed, frozen, or absent)."""
        if train_lsl:
            return self.parameters()
        return {k: v for k, v in self.parameters().items()
                if not k.startswith("lsl.")}


def build_model(vocab: Vocabulary, schema: EventSchema, config: ModelConfig,
                seed: int | np.random.Generator = 0) -> EventModel:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return EventModel(vocab, schema, config, rng)
