"""Transformer building blocks: embeddings, attention, encoder/decoder layers.

Layers use pre-norm residuals. Multi-head attention runs all heads as one
batched 3-d matmul to keep the autodiff graph small. A layer whose output
projections are zero-initialized starts as the identity map, so stacking
depth never hurts at initialization.
"""

from __future__ import annotations

import math

import numpy as np

from .ops import MaskError, apply_mask, dropout, embedding_lookup, layer_norm, relu, softmax
from .tensor import Tensor


class LengthError(ValueError):
    """A sequence does not fit the model's position table."""


def xavier_uniform(rng: np.random.Generator, fan_in: int, fan_out: int,
                   shape: tuple[int, ...] | None = None) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    if shape is None:
        shape = (fan_in, fan_out)
    return rng.uniform(-limit, limit, size=shape)


class Module:
    """Named parameter container. Children are registered under a prefix and
    ``parameters()`` flattens everything into dotted paths."""

    def __init__(self, name: str = ""):
        self.name = name
        self._params: dict[str, Tensor] = {}
        self._children: dict[str, Module] = {}

    def _param(self, name: str, data: np.ndarray) -> Tensor:
        t = Tensor(np.asarray(data, dtype=np.float64), requires_grad=True, name=name)
        self._params[name] = t
        return t

    def _child(self, name: str, module: "Module") -> "Module":
        self._children[name] = module
        return module

    def parameters(self) -> dict[str, Tensor]:
        out = dict(self._params)
        for cname, child in self._children.items():
            for k, v in child.parameters().items():
                out[f"{cname}.{k}"] = v
        return out

    def zero_grad(self) -> None:
        for t in self.parameters().values():
            t.zero_grad()


class LayerNorm(Module):
    def __init__(self, dim: int, name: str = ""):
        super().__init__(name)
        self.gain = self._param("gain", np.ones(dim))
        self.bias = self._param("bias", np.zeros(dim))

    def __call__(self, x: Tensor) -> Tensor:
        return layer_norm(x, self.gain, self.bias)


class EmbeddingStack(Module):
    """Word, position, and segment tables summed into one input embedding.

    One stack is shared by every component of a model, so label words and
    sentence words always map through the same word table.
    """

    def __init__(self, vocab_size: int, dim: int, max_len: int,
                 rng: np.random.Generator, n_segments: int = 2, name: str = "embed"):
        super().__init__(name)
        self.dim = dim
        self.max_len = max_len
        self.word = self._param("word", xavier_uniform(rng, vocab_size, dim))
        self.pos = self._param("pos", xavier_uniform(rng, max_len, dim))
        self.seg = self._param("seg", xavier_uniform(rng, n_segments, dim))

    def word_rows(self, tokens) -> Tensor:
        """Word-table rows for integer ids, or distributions @ table when
        ``tokens`` is a Tensor of per-position distributions."""
        return embedding_lookup(self.word, tokens)

    def embed_parts(self, word_part: Tensor, segment_ids: np.ndarray,
                    positions: np.ndarray) -> Tensor:
        positions = np.asarray(positions, dtype=np.int64)
        if positions.size and positions.max() >= self.max_len:
            raise LengthError(
                f"position {int(positions.max())} exceeds the table size "
                f"{self.max_len}")
        return (word_part
                + embedding_lookup(self.pos, positions)
                + embedding_lookup(self.seg, segment_ids))

    def embed(self, tokens, segment_ids: np.ndarray,
              positions: np.ndarray) -> Tensor:
        return self.embed_parts(self.word_rows(tokens), segment_ids, positions)


class AttentionLayer(Module):
    """Multi-head scaled dot-product attention with an output projection."""

    def __init__(self, dim: int, heads: int, rng: np.random.Generator,
                 name: str = ""):
        super().__init__(name)
        if dim % heads != 0:
            raise ValueError(f"dim {dim} not divisible by heads {heads}")
        self.dim = dim
        self.heads = heads
        self.head_dim = dim // heads
        self.wq = self._param("wq", xavier_uniform(rng, dim, dim))
        self.wk = self._param("wk", xavier_uniform(rng, dim, dim))
        self.wv = self._param("wv", xavier_uniform(rng, dim, dim))
        self.wo = self._param("wo", xavier_uniform(rng, dim, dim))

    def _split(self, x: Tensor, t: int) -> Tensor:
        # [T, dim] -> [heads, T, head_dim]
        return x.reshape(t, self.heads, self.head_dim).transpose(1, 0, 2)

    def __call__(self, q_in: Tensor, k_in: Tensor, v_in: Tensor,
                 mask: np.ndarray, capture: list | None = None) -> Tensor:
        tq, tk = q_in.shape[0], k_in.shape[0]
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (tq, tk):
            raise MaskError(f"mask shape {mask.shape} does not match ({tq}, {tk})")
        if not mask.any(axis=1).all():
            row = int(np.flatnonzero(~mask.any(axis=1))[0])
            raise MaskError(f"query position {row} has every key masked out")
        q = self._split(q_in @ self.wq, tq)
        k = self._split(k_in @ self.wk, tk)
        v = self._split(v_in @ self.wv, tk)
        scores = (q @ k.transpose(0, 2, 1)) * (1.0 / math.sqrt(self.head_dim))
        weights = softmax(apply_mask(scores, mask), axis=-1)
        if capture is not None:
            capture.append(weights.data.copy())
        ctx = (weights @ v).transpose(1, 0, 2).reshape(tq, self.dim)
        return ctx @ self.wo


class FeedForward(Module):
    def __init__(self, dim: int, hidden: int, rng: np.random.Generator,
                 name: str = ""):
        super().__init__(name)
        self.w1 = self._param("w1", xavier_uniform(rng, dim, hidden))
        self.b1 = self._param("b1", np.zeros(hidden))
        self.w2 = self._param("w2", xavier_uniform(rng, hidden, dim))
        self.b2 = self._param("b2", np.zeros(dim))

    def __call__(self, x: Tensor) -> Tensor:
        return relu(x @ self.w1 + self.b1) @ self.w2 + self.b2


class EncoderLayer(Module):
    """Pre-norm self-attention block: x + attn(norm(x)), then x + ffn(norm(x))."""

    def __init__(self, dim: int, heads: int, ffn_dim: int,
                 rng: np.random.Generator, name: str = ""):
        super().__init__(name)
        self.attn = self._child("attn", AttentionLayer(dim, heads, rng))
        self.norm1 = self._child("norm1", LayerNorm(dim))
        self.norm2 = self._child("norm2", LayerNorm(dim))
        self.ffn = self._child("ffn", FeedForward(dim, ffn_dim, rng))

    def __call__(self, x: Tensor, mask: np.ndarray, *, train: bool = False,
                 drop_rate: float = 0.0, rng: np.random.Generator | None = None,
                 capture: list | None = None) -> Tensor:
        h = self.norm1(x)
        a = self.attn(h, h, h, mask, capture=capture)
        x = x + dropout(a, drop_rate, rng, train)
        f = self.ffn(self.norm2(x))
        return x + dropout(f, drop_rate, rng, train)


class DecoderLayer(Module):
    """Pre-norm self-attention plus cross-attention over an encoded memory."""

    def __init__(self, dim: int, heads: int, ffn_dim: int,
                 rng: np.random.Generator, name: str = ""):
        super().__init__(name)
        self.self_attn = self._child("self_attn", AttentionLayer(dim, heads, rng))
        self.cross_attn = self._child("cross_attn", AttentionLayer(dim, heads, rng))
        self.norm1 = self._child("norm1", LayerNorm(dim))
        self.norm2 = self._child("norm2", LayerNorm(dim))
        self.norm3 = self._child("norm3", LayerNorm(dim))
        self.ffn = self._child("ffn", FeedForward(dim, ffn_dim, rng))

    def __call__(self, x: Tensor, memory: Tensor, self_mask: np.ndarray,
                 cross_mask: np.ndarray, *, train: bool = False,
                 drop_rate: float = 0.0, rng: np.random.Generator | None = None,
                 capture: list | None = None) -> Tensor:
        h = self.norm1(x)
        x = x + dropout(self.self_attn(h, h, h, self_mask, capture=capture),
                        drop_rate, rng, train)
        h = self.norm2(x)
        x = x + dropout(self.cross_attn(h, memory, memory, cross_mask),
                        drop_rate, rng, train)
        f = self.ffn(self.norm3(x))
        return x + dropout(f, drop_rate, rng, train)


class FFNNHead(Module):
    """Two-layer classification head: relu hidden layer, then logits."""

    def __init__(self, dim: int, hidden: int, n_out: int,
                 rng: np.random.Generator, name: str = ""):
        super().__init__(name)
        self.w1 = self._param("w1", xavier_uniform(rng, dim, hidden))
        self.b1 = self._param("b1", np.zeros(hidden))
        self.w2 = self._param("w2", xavier_uniform(rng, hidden, n_out))
        self.b2 = self._param("b2", np.zeros(n_out))

    def __call__(self, x: Tensor) -> Tensor:
        return relu(x @ self.w1 + self.b1) @ self.w2 + self.b2


def full_mask(tq: int, tk: int) -> np.ndarray:
    """Every query may attend to every key."""
    return np.ones((tq, tk), dtype=bool)
