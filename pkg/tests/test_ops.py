"""Neural primitives: softmax, cross-entropy, dropout, lookups, masking."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import array_shapes, arrays

from eventpivot.ops import (BoundsError, MaskError, apply_mask, concat,
                            cross_entropy, dropout, embedding_lookup,
                            layer_norm, relu, softmax, straight_through,
                            take_rows)
from eventpivot.tensor import NumericError, Tensor


# ----------------------------------------------------------------- softmax

def test_softmax_symmetry():
    out = softmax(Tensor([[2.0, 2.0, 2.0]]))
    np.testing.assert_allclose(out.data, [[1 / 3, 1 / 3, 1 / 3]], atol=1e-12)


def test_softmax_hand_values():
    out = softmax(Tensor([[0.0, math.log(2.0)]]))
    np.testing.assert_allclose(out.data, [[1 / 3, 2 / 3]], atol=1e-12)


def test_softmax_large_logit_stability():
    out = softmax(Tensor([[1000.0, 0.0]]))
    assert np.isfinite(out.data).all()
    np.testing.assert_allclose(out.data[0, 0], 1.0, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, array_shapes(min_dims=2, max_dims=3, min_side=1, max_side=5),
              elements=st.floats(-50, 50)))
def test_softmax_rows_sum_to_one(x):
    out = softmax(Tensor(x))
    np.testing.assert_allclose(out.data.sum(axis=-1), 1.0, atol=1e-12)
    assert (out.data >= 0).all()


def test_softmax_rejects_nan_and_positive_inf():
    with pytest.raises(NumericError):
        softmax(Tensor([[np.nan, 0.0]]))
    with pytest.raises(NumericError):
        softmax(Tensor([[np.inf, 0.0]]))


def test_softmax_gradient_small_case():
    x = Tensor(np.array([[0.3, -1.2, 0.7]]), requires_grad=True)
    w = np.array([[1.0, -2.0, 0.5]])
    (softmax(x) * Tensor(w)).sum().backward()
    p = softmax(Tensor(x.data)).data
    expect = p * (w - (w * p).sum(axis=-1, keepdims=True))
    np.testing.assert_allclose(x.grad, expect, atol=1e-12)


# ------------------------------------------------------------ cross entropy

def test_cross_entropy_uniform_is_log_c():
    for c in (2, 5, 7):
        logits = Tensor(np.zeros((3, c)))
        loss = cross_entropy(logits, np.array([0, 1, c - 1]))
        assert abs(loss.data.item() - math.log(c)) < 1e-12


def test_cross_entropy_prefers_correct_class():
    logits = Tensor(np.array([[5.0, 0.0], [0.0, 5.0]]))
    good = cross_entropy(logits, np.array([0, 1])).data.item()
    bad = cross_entropy(logits, np.array([1, 0])).data.item()
    assert good < 0.01 < bad


# ----------------------------------------------------------------- dropout

def test_dropout_rate_zero_is_identity():
    x = Tensor(np.arange(6, dtype=np.float64).reshape(2, 3))
    out = dropout(x, 0.0, rng=np.random.default_rng(0), train=True)
    np.testing.assert_array_equal(out.data, x.data)


def test_dropout_eval_mode_is_identity():
    x = Tensor(np.ones((4, 4)))
    out = dropout(x, 0.5, train=False)
    np.testing.assert_array_equal(out.data, x.data)


def test_dropout_train_scales_survivors():
    x = Tensor(np.ones((100, 100)))
    rate = 0.3
    out = dropout(x, rate, rng=np.random.default_rng(7), train=True)
    vals = np.unique(out.data)
    assert set(np.round(vals, 12)) <= {0.0, round(1 / (1 - rate), 12)}
    # survivor fraction close to keep probability
    assert abs((out.data != 0).mean() - (1 - rate)) < 0.02


def test_dropout_train_requires_rng():
    with pytest.raises(ValueError):
        dropout(Tensor(np.ones(3)), 0.5, train=True)


# ------------------------------------------------------------------ lookup

def test_soft_one_hot_lookup_equals_hard_lookup():
    table = Tensor(np.random.default_rng(0).normal(size=(6, 4)))
    onehot = np.zeros((2, 6))
    onehot[0, 3] = 1.0
    onehot[1, 5] = 1.0
    soft = embedding_lookup(table, Tensor(onehot))
    hard = embedding_lookup(table, np.array([3, 5]))
    np.testing.assert_array_equal(soft.data, hard.data)


def test_hard_lookup_bounds_check():
    table = Tensor(np.zeros((4, 2)))
    with pytest.raises(BoundsError):
        embedding_lookup(table, np.array([0, 4]))
    with pytest.raises(BoundsError):
        embedding_lookup(table, np.array([-1]))


def test_hard_lookup_gradient_scatters():
    table = Tensor(np.zeros((5, 3)), requires_grad=True)
    out = embedding_lookup(table, np.array([1, 1, 4]))
    out.sum().backward()
    expect = np.zeros((5, 3))
    expect[1] = 2.0
    expect[4] = 1.0
    np.testing.assert_array_equal(table.grad, expect)


# ------------------------------------------------------------------- masks

def test_apply_mask_blocks_attention():
    scores = Tensor(np.zeros((2, 3)))
    mask = np.array([[True, True, False], [True, True, True]])
    probs = softmax(apply_mask(scores, mask))
    assert probs.data[0, 2] < 1e-12
    np.testing.assert_allclose(probs.data[0, :2], 0.5, atol=1e-12)


def test_apply_mask_shape_mismatch():
    with pytest.raises(MaskError):
        apply_mask(Tensor(np.zeros((2, 3))), np.ones((3, 3), dtype=bool))


def test_fully_masked_row_fails_at_softmax():
    scores = apply_mask(Tensor(np.zeros((1, 3))), np.zeros((1, 3), dtype=bool))
    with pytest.raises(NumericError):
        softmax(scores)


# --------------------------------------------------------- straight-through

def test_straight_through_forward_is_one_hot():
    dist = softmax(Tensor([[0.2, 1.4, -0.3], [2.0, 0.0, 0.0]]))
    hard = straight_through(dist)
    np.testing.assert_array_equal(hard.data, [[0, 1, 0], [1, 0, 0]])


def test_straight_through_backward_is_identity():
    x = Tensor(np.array([[0.2, 1.4, -0.3]]), requires_grad=True)
    dist = softmax(x)
    w = np.array([[3.0, -1.0, 2.0]])
    (straight_through(dist) * Tensor(w)).sum().backward()
    x2 = Tensor(x.data.copy(), requires_grad=True)
    (softmax(x2) * Tensor(w)).sum().backward()
    np.testing.assert_array_equal(x.grad, x2.grad)


# ----------------------------------------------------------- shape helpers

def test_concat_and_take_rows_backward():
    a = Tensor(np.ones((2, 3)), requires_grad=True)
    b = Tensor(np.ones((1, 3)), requires_grad=True)
    joined = concat([a, b], axis=0)
    assert joined.shape == (3, 3)
    picked = take_rows(joined, np.array([0, 2]))
    picked.sum().backward()
    np.testing.assert_array_equal(a.grad, [[1, 1, 1], [0, 0, 0]])
    np.testing.assert_array_equal(b.grad, [[1, 1, 1]])


def test_relu_forward_and_gradient():
    x = Tensor(np.array([-1.0, 0.0, 2.0]), requires_grad=True)
    relu(x).sum().backward()
    np.testing.assert_array_equal(x.grad, [0.0, 0.0, 1.0])


def test_layer_norm_normalizes_rows():
    rng = np.random.default_rng(3)
    x = Tensor(rng.normal(2.0, 3.0, size=(4, 8)))
    gain = Tensor(np.ones(8))
    bias = Tensor(np.zeros(8))
    out = layer_norm(x, gain, bias).data
    np.testing.assert_allclose(out.mean(axis=-1), 0.0, atol=1e-12)
    np.testing.assert_allclose(out.std(axis=-1), 1.0, atol=1e-4)
