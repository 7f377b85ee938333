"""Autodiff core: forward values, backward rules, tape mechanics."""

import numpy as np
import pytest

from eventpivot.tensor import GradTape, ShapeError, Tensor, grad_enabled, no_grad


def finite_diff(f, x, h=1e-5):
    """Central finite differences of a scalar-valued f wrt ndarray x."""
    g = np.zeros_like(x)
    flat = x.ravel()
    gf = g.ravel()
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + h
        hi = f()
        flat[i] = keep - h
        lo = f()
        flat[i] = keep
        gf[i] = (hi - lo) / (2 * h)
    return g


# ---------------------------------------------------------------- forward

def test_matmul_hand_example():
    a = Tensor([[1.0, 2.0], [3.0, 4.0]])
    b = Tensor([[1.0], [1.0]])
    out = a @ b
    assert out.shape == (2, 1)
    np.testing.assert_array_equal(out.data, [[3.0], [7.0]])


def test_matmul_identity():
    m = np.arange(9, dtype=np.float64).reshape(3, 3)
    out = Tensor(np.eye(3)) @ Tensor(m)
    np.testing.assert_array_equal(out.data, m)


def test_matmul_shape_error_names_both_shapes():
    with pytest.raises(ShapeError) as exc:
        Tensor(np.ones((2, 3))) @ Tensor(np.ones((4, 5)))
    msg = str(exc.value)
    assert "(2, 3)" in msg and "(4, 5)" in msg


def test_square_at_three_has_gradient_six():
    x = Tensor(3.0, requires_grad=True)
    (x * x).backward()
    assert abs(x.grad - 6.0) < 1e-8


# ---------------------------------------------------------------- backward

def test_matmul_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    a_val = rng.normal(size=(3, 4))
    b_val = rng.normal(size=(4, 2))
    a = Tensor(a_val.copy(), requires_grad=True)
    b = Tensor(b_val, requires_grad=True)
    (a @ b).sum().backward()

    fd = finite_diff(lambda: (a.data @ b.data).sum(), a.data)
    rel = np.abs(a.grad - fd) / np.maximum(1.0, np.abs(fd))
    assert rel.max() < 1e-6


def test_shared_subexpression_accumulates():
    x = Tensor(np.array([1.5, -2.0]), requires_grad=True)
    (x + x).sum().backward()
    np.testing.assert_array_equal(x.grad, [2.0, 2.0])


def test_backward_twice_doubles_grads_exactly():
    rng = np.random.default_rng(1)
    x = Tensor(rng.normal(size=(4, 3)), requires_grad=True)
    w = Tensor(rng.normal(size=(3, 2)), requires_grad=True)
    loss = ((x @ w) * (x @ w)).sum()
    loss.backward()
    first = w.grad.copy()
    loss.backward()
    # same replay order, so the doubling is bit-for-bit
    np.testing.assert_array_equal(w.grad, 2.0 * first)


def test_broadcast_add_suffix_only():
    x = Tensor(np.ones((2, 3)), requires_grad=True)
    bias = Tensor(np.arange(3, dtype=np.float64), requires_grad=True)
    out = x + bias
    assert out.shape == (2, 3)
    out.sum().backward()
    np.testing.assert_array_equal(bias.grad, [2.0, 2.0, 2.0])
    np.testing.assert_array_equal(x.grad, np.ones((2, 3)))

    with pytest.raises(ShapeError):
        Tensor(np.ones((3, 2))) + Tensor(np.ones(3))


def test_mean_and_sum_axis_backward():
    x = Tensor(np.arange(6, dtype=np.float64).reshape(2, 3), requires_grad=True)
    x.mean(axis=1).sum().backward()
    np.testing.assert_allclose(x.grad, np.full((2, 3), 1 / 3))

    y = Tensor(np.arange(6, dtype=np.float64).reshape(2, 3), requires_grad=True)
    y.sum(axis=0, keepdims=True).sum().backward()
    np.testing.assert_array_equal(y.grad, np.ones((2, 3)))


def test_transpose_reshape_roundtrip_gradient():
    x = Tensor(np.arange(12, dtype=np.float64).reshape(3, 4), requires_grad=True)
    w = np.arange(12, dtype=np.float64).reshape(4, 3)
    (x.transpose(1, 0) * Tensor(w)).sum().backward()
    np.testing.assert_array_equal(x.grad, w.T)

    y = Tensor(np.arange(12, dtype=np.float64).reshape(3, 4), requires_grad=True)
    (y.reshape(2, 6) * Tensor(np.ones((2, 6)))).sum().backward()
    np.testing.assert_array_equal(y.grad, np.ones((3, 4)))


def test_batched_matmul_matches_loop():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(5, 2, 3))
    b = rng.normal(size=(5, 3, 4))
    out = Tensor(a) @ Tensor(b)
    expect = np.stack([a[i] @ b[i] for i in range(5)])
    np.testing.assert_allclose(out.data, expect, atol=1e-12)

    at = Tensor(a, requires_grad=True)
    (at @ Tensor(b)).sum().backward()
    fd = finite_diff(lambda: (at.data @ b).sum(), at.data)
    rel = np.abs(at.grad - fd) / np.maximum(1.0, np.abs(fd))
    assert rel.max() < 1e-6


# --------------------------------------------------------------- tape/flags

def test_no_grad_blocks_recording():
    x = Tensor(np.ones(3), requires_grad=True)
    with no_grad():
        assert not grad_enabled()
        out = (x * 2.0).sum()
    assert out.requires_grad is False
    out.backward()   # nothing recorded, so nothing to populate
    assert x.grad is None
    assert grad_enabled()


def test_grad_requires_scalar_loss():
    x = Tensor(np.ones((2, 2)), requires_grad=True)
    with pytest.raises(ValueError):
        (x * 2.0).backward()


def test_tape_reverse_topological_chain():
    # three dependent ops; the gradient through the chain is the product rule
    x = Tensor(2.0, requires_grad=True)
    y = x * x        # 4
    z = y * x        # 8  (= x^3, dz/dx = 3x^2 = 12)
    z.backward()
    assert abs(x.grad - 12.0) < 1e-12


def test_gradtape_orders_parents_before_consumers():
    x = Tensor(np.ones(2), requires_grad=True)
    y = x * 3.0
    z = (y + x).sum()
    tape = GradTape(z)
    pos = {id(t): i for i, t in enumerate(tape.order)}
    assert pos[id(x)] < pos[id(y)] < pos[id(z)]


def test_every_reachable_param_gets_grad():
    a = Tensor(np.ones((2, 2)), requires_grad=True)
    b = Tensor(np.ones((2, 2)), requires_grad=True)
    c = Tensor(np.ones((2, 2)))          # constant, stays grad-free
    ((a @ b) * c).sum().backward()
    assert a.grad is not None and b.grad is not None
    assert c.grad is None
