"""Transformer building blocks: embeddings, attention, encoder/decoder layers."""

import math

import numpy as np
import pytest

from eventpivot.blocks import (AttentionLayer, DecoderLayer, EmbeddingStack,
                               EncoderLayer, FFNNHead, LengthError,
                               full_mask, xavier_uniform)
from eventpivot.ops import MaskError
from eventpivot.tensor import Tensor


def rng_for(seed=0):
    return np.random.default_rng(seed)


def test_xavier_uniform_bounds_and_shape():
    w = xavier_uniform(rng_for(), 30, 20)
    assert w.shape == (30, 20)
    bound = math.sqrt(6.0 / 50)
    assert np.abs(w).max() <= bound
    # roughly fills the interval rather than clustering at zero
    assert np.abs(w).max() > 0.8 * bound


def test_embedding_stack_sums_three_tables():
    emb = EmbeddingStack(vocab_size=9, dim=4, max_len=8, rng=rng_for())
    ids = np.array([2, 5])
    seg = np.array([0, 1])
    pos = np.array([0, 3])
    out = emb.embed(ids, seg, pos)
    expect = emb.word.data[ids] + emb.pos.data[pos] + emb.seg.data[seg]
    np.testing.assert_allclose(out.data, expect, atol=1e-15)


def test_embedding_stack_rejects_long_positions():
    emb = EmbeddingStack(vocab_size=5, dim=4, max_len=4, rng=rng_for())
    with pytest.raises(LengthError):
        emb.embed(np.array([1]), np.array([0]), np.array([4]))


def test_attention_weights_rows_sum_to_one():
    attn = AttentionLayer(dim=8, heads=2, rng=rng_for(1))
    x = Tensor(rng_for(2).normal(size=(5, 8)))
    captured = []
    attn(x, x, x, full_mask(5, 5), capture=captured)
    (weights,) = captured
    assert weights.shape == (2, 5, 5)
    np.testing.assert_allclose(weights.sum(axis=-1), 1.0, atol=1e-12)


def test_attention_respects_mask():
    attn = AttentionLayer(dim=4, heads=1, rng=rng_for(3))
    x = Tensor(rng_for(4).normal(size=(3, 4)))
    mask = full_mask(3, 3)
    mask[:, 2] = False
    mask[2, 2] = True   # keep the last query satisfiable
    captured = []
    attn(x, x, x, mask, capture=captured)
    w = captured[0]
    assert (w[:, :2, 2] == 0).all()


def test_attention_mask_shape_error():
    attn = AttentionLayer(dim=4, heads=1, rng=rng_for(0))
    x = Tensor(np.zeros((3, 4)))
    with pytest.raises(MaskError):
        attn(x, x, x, np.ones((2, 3), dtype=bool))


def test_attention_fully_masked_query_error():
    attn = AttentionLayer(dim=4, heads=1, rng=rng_for(0))
    x = Tensor(np.zeros((3, 4)))
    mask = full_mask(3, 3)
    mask[1, :] = False
    with pytest.raises(MaskError, match="query position 1"):
        attn(x, x, x, mask)


def test_cross_attention_rectangular_mask():
    attn = AttentionLayer(dim=4, heads=2, rng=rng_for(5))
    q = Tensor(rng_for(6).normal(size=(2, 4)))
    kv = Tensor(rng_for(7).normal(size=(5, 4)))
    out = attn(q, kv, kv, full_mask(2, 5))
    assert out.shape == (2, 4)


def test_encoder_layer_zero_projections_is_identity():
    rng = rng_for(8)
    layer = EncoderLayer(dim=6, heads=2, ffn_dim=8, rng=rng)
    layer.attn.wo.data[:] = 0.0
    layer.ffn.w2.data[:] = 0.0
    x = Tensor(rng.normal(size=(4, 6)))
    out = layer(x, full_mask(4, 4))
    np.testing.assert_allclose(out.data, x.data, atol=1e-15)


def test_encoder_stack_stays_finite():
    rng = rng_for(9)
    layers = [EncoderLayer(dim=8, heads=2, ffn_dim=12, rng=rng, name=str(i))
              for i in range(3)]
    for trial in range(100):
        x = Tensor(rng.normal(size=(6, 8)))
        for layer in layers:
            x = layer(x, full_mask(6, 6))
        assert np.isfinite(x.data).all()


def test_decoder_layer_shapes_and_masks():
    rng = rng_for(10)
    layer = DecoderLayer(dim=8, heads=2, ffn_dim=8, rng=rng)
    x = Tensor(rng.normal(size=(3, 8)))
    memory = Tensor(rng.normal(size=(5, 8)))
    out = layer(x, memory, full_mask(3, 3), full_mask(3, 5))
    assert out.shape == (3, 8)


def test_ffnn_head_output_width():
    head = FFNNHead(dim=6, hidden=4, n_out=11, rng=rng_for(11))
    out = head(Tensor(np.zeros((3, 6))))
    assert out.shape == (3, 11)


def test_module_parameters_use_dotted_names():
    layer = EncoderLayer(dim=4, heads=2, ffn_dim=4, rng=rng_for(12))
    names = set(layer.parameters())
    assert "attn.wq" in names
    assert "norm1.gain" in names
    assert "ffn.w1" in names


def test_zero_grad_clears_all():
    layer = EncoderLayer(dim=4, heads=2, ffn_dim=4, rng=rng_for(13))
    x = Tensor(rng_for(14).normal(size=(3, 4)))
    layer(x, full_mask(3, 3)).sum().backward()
    assert any(p.grad is not None for p in layer.parameters().values())
    layer.zero_grad()
    assert all(p.grad is None for p in layer.parameters().values())
