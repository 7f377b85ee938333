"""Differentiable primitives built on :class:`~eventpivot.tensor.Tensor`.

All functions record onto the graph when any input requires gradients and
graph recording is enabled. Stochastic ops (dropout) take an explicit
numpy Generator so every draw is reproducible.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from .tensor import NumericError, ShapeError, Tensor, grad_enabled


class BoundsError(IndexError):
    """An index fell outside the table it addresses."""


class MaskError(ValueError):
    """An attention mask leaves some query with nothing to attend to."""


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Max-subtracted softmax along ``axis``.

    Accepts -inf entries (masked slots get exactly zero mass) but rejects
    NaN and +inf inputs, and rows with no finite entry.
    """
    d = x.data
    if np.isnan(d).any() or np.isposinf(d).any():
        raise NumericError("softmax input contains NaN or +inf")
    m = np.max(d, axis=axis, keepdims=True)
    if np.isneginf(m).any():
        raise NumericError("softmax row has no finite entry")
    e = np.exp(d - m)
    y = e / e.sum(axis=axis, keepdims=True)
    out = Tensor(y)
    if grad_enabled() and x.requires_grad:

        def bw(g, acc):
            s = (g * y).sum(axis=axis, keepdims=True)
            acc(x, y * (g - s))

        out._record((x,), bw)
    return out


def relu(x: Tensor) -> Tensor:
    out = Tensor(np.maximum(x.data, 0.0))
    if grad_enabled() and x.requires_grad:
        mask = x.data > 0.0
        out._record((x,), lambda g, acc: acc(x, g * mask))
    return out


def dropout(x: Tensor, rate: float, rng: np.random.Generator | None = None,
            train: bool = True) -> Tensor:
    """Inverted dropout; identity when ``train`` is False or ``rate`` is 0."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not train or rate == 0.0:
        return x
    if rng is None:
        raise ValueError("train-mode dropout needs an explicit rng")
    keep = rng.random(x.shape) >= rate
    scale = 1.0 / (1.0 - rate)
    out = Tensor(x.data * keep * scale)
    if grad_enabled() and x.requires_grad:
        out._record((x,), lambda g, acc: acc(x, g * keep * scale))
    return out


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then scale and shift."""
    d = x.data
    if gain.shape != d.shape[-1:] or bias.shape != d.shape[-1:]:
        raise ShapeError(
            f"layer_norm gain/bias must have shape {d.shape[-1:]}, got "
            f"{gain.shape} and {bias.shape}"
        )
    mu = d.mean(axis=-1, keepdims=True)
    xc = d - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out = Tensor(xhat * gain.data + bias.data)
    if grad_enabled() and (x.requires_grad or gain.requires_grad or bias.requires_grad):

        def bw(g, acc):
            lead = tuple(range(g.ndim - 1))
            acc(gain, (g * xhat).sum(axis=lead))
            acc(bias, g.sum(axis=lead))
            dxhat = g * gain.data
            acc(x, inv * (dxhat - dxhat.mean(axis=-1, keepdims=True)
                          - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)))

        out._record((x, gain, bias), bw)
    return out


def embedding_lookup(table: Tensor, index: Union[Tensor, Sequence[int], np.ndarray]) -> Tensor:
    """Rows of ``table`` by integer index, or ``distribution @ table``.

    A Tensor index is treated as one distribution row per output position
    (soft lookup), which is what lets gradients flow through sampled token
    choices. An exact one-hot distribution reproduces the hard lookup.
    """
    if isinstance(index, Tensor):
        if index.data.ndim != 2 or index.shape[1] != table.shape[0]:
            raise ShapeError(
                f"soft lookup needs distributions of width {table.shape[0]}, "
                f"got shape {index.shape}"
            )
        from .tensor import matmul
        return matmul(index, table)
    ids = np.asarray(index, dtype=np.int64)
    if ids.ndim != 1:
        raise ShapeError(f"hard lookup expects a 1-d index list, got shape {ids.shape}")
    n = table.shape[0]
    if ids.size and (ids.min() < 0 or ids.max() >= n):
        bad = ids[(ids < 0) | (ids >= n)]
        raise BoundsError(f"index {bad[0]} out of range for table of {n} rows")
    out = Tensor(table.data[ids])
    if grad_enabled() and table.requires_grad:

        def bw(g, acc):
            gt = np.zeros_like(table.data)
            np.add.at(gt, ids, g)
            acc(table, gt)

        out._record((table,), bw)
    return out


def cross_entropy(logits: Tensor, targets: Union[Sequence[int], np.ndarray]) -> Tensor:
    """Mean negative log-likelihood of ``targets`` under softmax(logits).

    ``logits`` is [N, C]; ``targets`` holds N class ids.
    """
    d = logits.data
    if d.ndim != 2:
        raise ShapeError(f"cross_entropy expects [N, C] logits, got {logits.shape}")
    t = np.asarray(targets, dtype=np.int64)
    n, c = d.shape
    if t.shape != (n,):
        raise ShapeError(f"expected {n} targets, got shape {t.shape}")
    if t.size and (t.min() < 0 or t.max() >= c):
        raise BoundsError(f"target class out of range for {c} classes")
    m = d.max(axis=1, keepdims=True)
    e = np.exp(d - m)
    z = e.sum(axis=1, keepdims=True)
    logp = d - m - np.log(z)
    loss = -logp[np.arange(n), t].mean()
    out = Tensor(loss)
    if grad_enabled() and logits.requires_grad:
        probs = e / z

        def bw(g, acc):
            gl = probs.copy()
            gl[np.arange(n), t] -= 1.0
            acc(logits, gl * (float(g) / n))

        out._record((logits,), bw)
    return out


def concat(parts: Sequence[Tensor], axis: int = 0) -> Tensor:
    """Concatenate along ``axis``; backward splits the gradient."""
    if not parts:
        raise ShapeError("concat of zero tensors")
    out = Tensor(np.concatenate([p.data for p in parts], axis=axis))
    if grad_enabled() and any(p.requires_grad for p in parts):
        sizes = [p.data.shape[axis] for p in parts]
        offsets = np.cumsum([0] + sizes)
        held = tuple(parts)

        def bw(g, acc):
            for p, lo, hi in zip(held, offsets[:-1], offsets[1:]):
                sl = [slice(None)] * g.ndim
                sl[axis] = slice(lo, hi)
                acc(p, g[tuple(sl)])

        out._record(held, bw)
    return out


def take_rows(x: Tensor, rows: Union[Sequence[int], np.ndarray]) -> Tensor:
    """Select rows along axis 0; backward scatter-adds into place."""
    idx = np.asarray(rows, dtype=np.int64)
    n = x.shape[0]
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise BoundsError(f"row index out of range for {n} rows")
    out = Tensor(x.data[idx])
    if grad_enabled() and x.requires_grad:

        def bw(g, acc):
            gx = np.zeros_like(x.data)
            np.add.at(gx, idx, g)
            acc(x, gx)

        out._record((x,), bw)
    return out


def apply_mask(scores: Tensor, mask: np.ndarray) -> Tensor:
    """Set masked-out slots to -inf ahead of a softmax.

    ``mask`` is boolean with True meaning "may attend"; its shape must be
    broadcastable onto ``scores`` as a trailing suffix.
    """
    mask = np.asarray(mask, dtype=bool)
    suffix = scores.shape[len(scores.shape) - mask.ndim:]
    if mask.ndim > len(scores.shape) or mask.shape != suffix:
        raise MaskError(
            f"mask shape {mask.shape} is not a trailing suffix of scores "
            f"shape {scores.shape}")
    out = Tensor(np.where(mask, scores.data, -np.inf))
    if grad_enabled() and scores.requires_grad:
        out._record((scores,), lambda g, acc: acc(scores, g * mask))
    return out


def straight_through(dist: Tensor) -> Tensor:
    """One-hot of the row-wise argmax forward; identity gradient backward."""
    d = dist.data
    if d.ndim != 2:
        raise ShapeError(f"straight_through expects [N, C] distributions, got {dist.shape}")
    hard = np.zeros_like(d)
    hard[np.arange(d.shape[0]), d.argmax(axis=1)] = 1.0
    out = Tensor(hard)
    if grad_enabled() and dist.requires_grad:
        out._record((dist,), lambda g, acc: acc(dist, g))
    return out
