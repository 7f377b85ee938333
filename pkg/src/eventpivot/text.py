"""Deterministic word-level tokenizer and the shared vocabulary.

Sentence words and event-type label words live in one vocabulary so both
draw on the same embedding table downstream.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from typing import Iterable, Iterator, Sequence

PAD, UNK, CLS, SEP, MASK = 0, 1, 2, 3, 4
SPECIALS = {"PAD": PAD, "UNK": UNK, "CLS": CLS, "SEP": SEP, "MASK": MASK}
N_SPECIALS = len(SPECIALS)

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, and split punctuation into its own
    tokens. Deterministic; idempotent on its own space-joined output."""
    return _TOKEN_RE.findall(text.lower())


class Vocabulary:
    """Immutable token/id bijection with five reserved special ids."""

    def __init__(self, tokens: Sequence[str]):
        seen: dict[str, int] = {}
        for tok in tokens:
            if tok in SPECIALS:
                raise ValueError(f"token {tok!r} collides with a reserved special")
            if tok not in seen:
                seen[tok] = N_SPECIALS + len(seen)
        self._token_to_id = seen
        self._id_to_token = list(SPECIALS) + list(seen)

    def __len__(self) -> int:
        return len(self._id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self._token_to_id

    def id_of(self, token: str) -> int:
        return self._token_to_id.get(token, UNK)

    def token_of(self, idx: int) -> str:
        return self._id_to_token[idx]

    def encode(self, tokens: Iterable[str]) -> list[int]:
        get = self._token_to_id.get
        return [get(t, UNK) for t in tokens]

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self._id_to_token[i] for i in ids]

    @property
    def tokens(self) -> list[str]:
        """Non-special tokens in id order."""
        return self._id_to_token[N_SPECIALS:]

    def to_json(self) -> str:
        return json.dumps({"tokens": self.tokens, "specials": SPECIALS},
                          ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Vocabulary":
        obj = json.loads(text)
        if obj.get("specials") != SPECIALS:
            raise ValueError("vocabulary file declares unexpected special ids")
        return cls(obj["tokens"])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json())
            f.write("\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(f.read())


def build_vocab(sentences: Iterator[Sequence[str]], schema=None,
                min_count: int = 1) -> Vocabulary:
    """Collect corpus tokens (first-appearance order) plus every schema
    label word. Label words are always kept; other tokens need at least
    ``min_count`` occurrences and fall back to UNK otherwise."""
    counts: Counter[str] = Counter()
    order: dict[str, None] = {}
    for toks in sentences:
        for t in toks:
            counts[t] += 1
            order.setdefault(t)
    kept: list[str] = []
    if schema is not None:
        for et in schema.types:
            for w in et.label_words:
                if w not in kept:
                    kept.append(w)
    for t in order:
        if counts[t] >= min_count and t not in kept:
            kept.append(t)
    return Vocabulary(kept)
