"""Trigger classification over a joint pivot + sentence input stream.

The input to the classifier is one flat token sequence: a start marker,
the pivot block, a separator, the sentence, and a final separator. Segment
ids mark which positions belong to the pivot side (pivots and the final
separator) versus the sentence side (everything else), and the tagging
head reads only the sentence positions. Tags follow the begin/inside/out
convention with one begin and one inside tag per event type.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocks import EncoderLayer, FFNNHead, LayerNorm, LengthError, Module, full_mask
from .corpus import EventSchema, TriggerSpan
from .ops import concat, dropout, take_rows
from .tensor import Tensor
from .text import CLS, SEP
from .pivots import PivotSequence


class TagSet:
    """Tag inventory: O plus a begin and an inside tag per event type."""

    def __init__(self, schema: EventSchema):
        self.schema = schema
        self.names = ["O"]
        for t in schema.types:
            self.names.append(f"B-{t.name}")
            self.names.append(f"I-{t.name}")
        self._index = {n: i for i, n in enumerate(self.names)}

    def __len__(self) -> int:
        return len(self.names)

    O = 0

    def begin(self, type_name: str) -> int:
        return self._index[f"B-{type_name}"]

    def inside(self, type_name: str) -> int:
        return self._index[f"I-{type_name}"]

    def type_of(self, tag_id: int) -> str | None:
        if tag_id == 0:
            return None
        return self.names[tag_id][2:]

    def is_begin(self, tag_id: int) -> bool:
        return tag_id != 0 and self.names[tag_id].startswith("B-")

    def encode_spans(self, spans: list[TriggerSpan], length: int) -> np.ndarray:
        tags = np.zeros(length, dtype=np.int64)
        taken = np.zeros(length, dtype=bool)
        for sp in spans:
            if sp.end >= length:
                raise ValueError(f"span ({sp.start}, {sp.end}) outside {length} tokens")
            if taken[sp.start:sp.end + 1].any():
                raise ValueError("overlapping spans cannot be tagged")
            taken[sp.start:sp.end + 1] = True
            tags[sp.start] = self.begin(sp.type_name)
            for i in range(sp.start + 1, sp.end + 1):
                tags[i] = self.inside(sp.type_name)
        return tags

    def decode_tags(self, tags: np.ndarray) -> list[TriggerSpan]:
        """Tag ids back to spans. An inside tag without a matching open span
        is promoted to a begin, so output spans never overlap."""
        spans: list[TriggerSpan] = []
        start = None
        cur: str | None = None
        for i, t in enumerate(np.asarray(tags, dtype=np.int64)):
            t = int(t)
            name = self.type_of(t)
            if t == 0:
                if cur is not None:
                    spans.append(TriggerSpan(start, i - 1, cur))
                    cur = None
            elif self.is_begin(t) or name != cur:
                if cur is not None:
                    spans.append(TriggerSpan(start, i - 1, cur))
                start, cur = i, name
        if cur is not None:
            spans.append(TriggerSpan(start, len(tags) - 1, cur))
        return spans


SEG_SENTENCE = 0
SEG_PIVOT = 1


@dataclass
class EncodedInput:
    """The assembled classifier input stream.

    ``pivots`` carries the differentiable pivot block (or raw ids when
    bypassed); ``None`` means the no-label layout: just markers around the
    sentence. Every index array refers to positions in the flat stream.
    """
    sentence_ids: np.ndarray
    pivots: PivotSequence | None
    segment_ids: np.ndarray
    positions: np.ndarray
    sentence_slots: np.ndarray
    pivot_slots: np.ndarray
    special_slots: np.ndarray
    special_ids: np.ndarray
    length: int

    def groups(self) -> dict[str, np.ndarray]:
        return {"sent": self.sentence_slots, "pivot": self.pivot_slots,
                "special": self.special_slots}


def assemble_input(sentence_ids: np.ndarray, pivots: PivotSequence | None,
                   max_len: int = 256,
                   pivot_positions: np.ndarray | None = None) -> EncodedInput:
    """Lay out ``[CLS] pivots [SEP] sentence [SEP]`` (or ``[CLS] sentence
    [SEP]`` without pivots). Sequences that do not fit the position table
    are rejected outright, never truncated.

    ``pivot_positions`` overrides the position indices fed to the pivot
    slots; by default they are the stream offsets.
    """
    sentence_ids = np.asarray(sentence_ids, dtype=np.int64)
    ns = int(sentence_ids.shape[0])
    if ns == 0:
        raise ValueError("cannot assemble an empty sentence")
    if pivots is None:
        length = ns + 2
        if length > max_len:
            raise LengthError(
                f"sequence of {length} positions exceeds the limit {max_len}")
        seg = np.zeros(length, dtype=np.int64)
        positions = np.arange(length, dtype=np.int64)
        sent_slots = np.arange(1, 1 + ns, dtype=np.int64)
        special_slots = np.asarray([0, length - 1], dtype=np.int64)
        special_ids = np.asarray([CLS, SEP], dtype=np.int64)
        return EncodedInput(sentence_ids, None, seg, positions, sent_slots,
                            np.empty(0, dtype=np.int64), special_slots,
                            special_ids, length)
    npiv = len(pivots)
    length = ns + npiv + 3
    if length > max_len:
        raise LengthError(
            f"sequence of {length} positions exceeds the limit {max_len}")
    seg = np.zeros(length, dtype=np.int64)
    piv_slots = np.arange(1, 1 + npiv, dtype=np.int64)
    sep1 = 1 + npiv
    sent_slots = np.arange(sep1 + 1, sep1 + 1 + ns, dtype=np.int64)
    sep2 = length - 1
    # the pivot block and the closing separator form the pivot segment
    seg[piv_slots] = SEG_PIVOT
    seg[sep2] = SEG_PIVOT
    positions = np.arange(length, dtype=np.int64)
    if pivot_positions is not None:
        pivot_positions = np.asarray(pivot_positions, dtype=np.int64)
        if pivot_positions.shape != (npiv,):
            raise ValueError(
                f"pivot_positions must have shape ({npiv},), got "
                f"{pivot_positions.shape}")
        positions[piv_slots] = pivot_positions
    special_slots = np.asarray([0, sep1, sep2], dtype=np.int64)
    special_ids = np.asarray([CLS, SEP, SEP], dtype=np.int64)
    return EncodedInput(sentence_ids, pivots, seg, positions, sent_slots,
                        piv_slots, special_slots, special_ids, length)


class TriggerClassifier(Module):
    """Encoder stack over the joint stream plus a tagging head applied at
    sentence positions only."""

    def __init__(self, dim: int, heads: int, layers: int, ffn_dim: int,
                 n_tags: int, rng: np.random.Generator, name: str = "tc"):
        super().__init__(name)
        self.encoder = [
            self._child(f"encoder.{i}", EncoderLayer(dim, heads, ffn_dim, rng))
            for i in range(layers)
        ]
        self.norm_out = self._child("norm_out", LayerNorm(dim))
        self.head = self._child("head", FFNNHead(dim, dim, n_tags, rng))

    def __call__(self, encoded: EncodedInput, embed_stack, *,
                 train: bool = False, drop_rate: float = 0.0,
                 rng: np.random.Generator | None = None,
                 capture: list | None = None) -> Tensor:
        word = self._word_block(encoded, embed_stack)
        x = embed_stack.embed_parts(word, encoded.segment_ids, encoded.positions)
        x = dropout(x, drop_rate, rng, train)
        mask = full_mask(encoded.length, encoded.length)
        for layer in self.encoder:
            x = layer(x, mask, train=train, drop_rate=drop_rate, rng=rng,
                      capture=capture)
        x = self.norm_out(x)
        return self.head(take_rows(x, encoded.sentence_slots))

    @staticmethod
    def _word_block(encoded: EncodedInput, embed_stack) -> Tensor:
        piv = encoded.pivots
        if piv is None:
            ids = np.concatenate([[CLS], encoded.sentence_ids, [SEP]])
            return embed_stack.word_rows(ids)
        if piv.selection is None:
            # bypass: the pivot block is plain token ids
            ids = np.concatenate([[CLS], piv.hard_ids, [SEP],
                                  encoded.sentence_ids, [SEP]])
            return embed_stack.word_rows(ids)
        head = embed_stack.word_rows(np.asarray([CLS], dtype=np.int64))
        soft = embed_stack.word_rows(piv.selection)
        tail = embed_stack.word_rows(
            np.concatenate([[SEP], encoded.sentence_ids, [SEP]]))
        return concat([head, soft, tail], axis=0)


# ---------------------------------------------------------------------------
# attention interaction report


@dataclass
class HeadInteraction:
    """Mean attention mass between position groups for one head."""
    layer: int
    head: int
    mass: dict[str, float]


@dataclass
class InteractionReport:
    heads: list[HeadInteraction]
    n_layers: int
    n_heads: int

    def mean_mass(self, key: str) -> float:
        vals = [h.mass[key] for h in self.heads if key in h.mass]
        return float(np.mean(vals)) if vals else float("nan")

    def to_json_obj(self) -> dict:
        return {
            "n_layers": self.n_layers,
            "n_heads": self.n_heads,
            "heads": [{"layer": h.layer, "head": h.head, "mass": h.mass}
                      for h in self.heads],
            "means": {k: self.mean_mass(k)
                      for k in sorted({k for h in self.heads for k in h.mass})},
        }


def attention_interactions(weights_per_layer: list[np.ndarray],
                           encoded: EncodedInput) -> InteractionReport:
    """Partition the captured attention weights of every layer and head by
    query/key group (sentence, pivot, special) and average the mass each
    query group sends to each key group.

    For every query row the group masses add up to the full attention mass,
    so per query the partition sums to 1.
    """
    groups = encoded.groups()
    heads: list[HeadInteraction] = []
    for li, w in enumerate(weights_per_layer):
        for hi in range(w.shape[0]):
            a = w[hi]
            mass: dict[str, float] = {}
            for qname, qidx in groups.items():
                if qidx.size == 0:
                    continue
                rows = a[qidx]
                for kname, kidx in groups.items():
                    if kidx.size == 0:
                        continue
                    mass[f"{qname}->{kname}"] = float(rows[:, kidx].sum(axis=1).mean())
            heads.append(HeadInteraction(li, hi, mass))
    return InteractionReport(heads, len(weights_per_layer),
                             weights_per_layer[0].shape[0] if weights_per_layer else 0)
