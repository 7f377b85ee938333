"""Reverse-mode automatic differentiation over dense float64 arrays.

Every value is a numpy float64 ndarray wrapped in a :class:`Tensor`. Ops
build the graph eagerly; ``Tensor.backward()`` materializes a
:class:`GradTape` (the reverse-topological list of recorded operations)
and replays it. Gradients accumulate across repeated backward calls until
``zero_grad`` is used.

Broadcasting is restricted to leading batch dimensions: two operands are
compatible when their shapes are equal or one shape is a trailing suffix
of the other. Anything else requires an explicit reshape.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np


class ShapeError(ValueError):
    """Operand shapes are incompatible for the requested operation."""


class NumericError(ValueError):
    """Non-finite values appeared where finite ones are required."""


_grad_enabled: bool = True


def grad_enabled() -> bool:
    return _grad_enabled


class no_grad:
    """Context manager that turns off graph recording (pure forward math)."""

    def __enter__(self) -> "no_grad":
        global _grad_enabled
        self._prev = _grad_enabled
        _grad_enabled = False
        return self

    def __exit__(self, *exc) -> bool:
        global _grad_enabled
        _grad_enabled = self._prev
        return False


def _suffix_compatible(sa: tuple[int, ...], sb: tuple[int, ...]) -> bool:
    if sa == sb:
        return True
    shorter, longer = (sa, sb) if len(sa) <= len(sb) else (sb, sa)
    return longer[len(longer) - len(shorter):] == shorter


def _reduce_to(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to the operand's shape."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    return g.sum(axis=tuple(range(extra)))


class Tensor:
    """Dense float64 array, optionally participating in gradient recording.

    ``data`` holds the values, ``grad`` (same shape) is populated by
    ``backward()`` for every tensor created with ``requires_grad=True``
    that is reachable from the loss. Outputs of recorded operations carry
    ``requires_grad=True`` automatically when any input does.
    """

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward", "name")

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self._parents: tuple["Tensor", ...] = ()
        self._backward: Optional[Callable] = None
        self.name = name

    # --- introspection -------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def __repr__(self) -> str:
        req = ", requires_grad=True" if self.requires_grad else ""
        nm = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.data.shape}{req}{nm})"

    def item(self) -> float:
        return float(self.data.reshape(()))

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    # --- graph plumbing -------------------------------------------------
    def _record(self, parents: tuple["Tensor", ...], backward: Callable) -> None:
        self.requires_grad = True
        self._parents = parents
        self._backward = backward

    def backward(self, grad=None) -> None:
        """Accumulate d(self)/d(x) into ``x.grad`` for the recorded graph.

        Calling twice on the same graph without zeroing doubles every grad:
        each replay recomputes identical contributions into fresh buffers
        and adds them to whatever ``grad`` already holds.
        """
        if grad is None:
            if self.data.size != 1:
                raise ShapeError(
                    f"backward() without an explicit gradient needs a scalar "
                    f"output, got shape {self.shape}"
                )
            seed = np.ones_like(self.data)
        else:
            seed = np.array(grad, dtype=np.float64)
            if seed.shape != self.data.shape:
                raise ShapeError(
                    f"seed gradient shape {seed.shape} does not match output "
                    f"shape {self.data.shape}"
                )
        tape = GradTape(self)
        buffers = tape.replay(self, seed)
        for node in tape.order:
            g = buffers.get(id(node))
            if g is not None and node.requires_grad:
                node.grad = g.copy() if node.grad is None else node.grad + g

    # --- arithmetic -----------------------------------------------------
    def _coerce(self, other) -> "Tensor":
        return other if isinstance(other, Tensor) else Tensor(other)

    def __add__(self, other) -> "Tensor":
        other = self._coerce(other)
        if not _suffix_compatible(self.shape, other.shape):
            raise ShapeError(f"cannot add shapes {self.shape} and {other.shape}")
        out = Tensor(self.data + other.data)
        if _grad_enabled and (self.requires_grad or other.requires_grad):
            a, b = self, other

            def bw(g, acc):
                acc(a, _reduce_to(g, a.shape))
                acc(b, _reduce_to(g, b.shape))

            out._record((a, b), bw)
        return out

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        out = Tensor(-self.data)
        if _grad_enabled and self.requires_grad:
            a = self
            out._record((a,), lambda g, acc: acc(a, -g))
        return out

    def __sub__(self, other) -> "Tensor":
        other = self._coerce(other)
        if not _suffix_compatible(self.shape, other.shape):
            raise ShapeError(f"cannot subtract shapes {self.shape} and {other.shape}")
        out = Tensor(self.data - other.data)
        if _grad_enabled and (self.requires_grad or other.requires_grad):
            a, b = self, other

            def bw(g, acc):
                acc(a, _reduce_to(g, a.shape))
                acc(b, _reduce_to(-g, b.shape))

            out._record((a, b), bw)
        return out

    def __rsub__(self, other) -> "Tensor":
        return self._coerce(other).__sub__(self)

    def __mul__(self, other) -> "Tensor":
        other = self._coerce(other)
        if not _suffix_compatible(self.shape, other.shape):
            raise ShapeError(f"cannot multiply shapes {self.shape} and {other.shape}")
        out = Tensor(self.data * other.data)
        if _grad_enabled and (self.requires_grad or other.requires_grad):
            a, b = self, other

            def bw(g, acc):
                acc(a, _reduce_to(g * b.data, a.shape))
                acc(b, _reduce_to(g * a.data, b.shape))

            out._record((a, b), bw)
        return out

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Tensor":
        if isinstance(other, Tensor):
            raise ShapeError("tensor/tensor division is not supported; "
                             "multiply by a reciprocal instead")
        return self * (1.0 / float(other))

    def __pow__(self, p) -> "Tensor":
        p = float(p)
        out = Tensor(self.data ** p)
        if _grad_enabled and self.requires_grad:
            a = self
            out._record((a,), lambda g, acc: acc(a, g * (p * a.data ** (p - 1.0))))
        return out

    def exp(self) -> "Tensor":
        out = Tensor(np.exp(self.data))
        if _grad_enabled and self.requires_grad:
            a, y = self, out.data
            out._record((a,), lambda g, acc: acc(a, g * y))
        return out

    def log(self) -> "Tensor":
        out = Tensor(np.log(self.data))
        if _grad_enabled and self.requires_grad:
            a = self
            out._record((a,), lambda g, acc: acc(a, g / a.data))
        return out

    # --- linear algebra & shape ops --------------------------------------
    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)

    def transpose(self, *axes: int) -> "Tensor":
        if not axes:
            axes = tuple(reversed(range(self.data.ndim)))
        out = Tensor(np.transpose(self.data, axes))
        if _grad_enabled and self.requires_grad:
            a = self
            inv = tuple(np.argsort(axes))
            out._record((a,), lambda g, acc: acc(a, np.transpose(g, inv)))
        return out

    @property
    def T(self) -> "Tensor":
        return self.transpose()

    def reshape(self, *shape: int) -> "Tensor":
        out = Tensor(self.data.reshape(shape))
        if _grad_enabled and self.requires_grad:
            a = self
            orig = self.data.shape
            out._record((a,), lambda g, acc: acc(a, g.reshape(orig)))
        return out

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        out = Tensor(self.data.sum(axis=axis, keepdims=keepdims))
        if _grad_enabled and self.requires_grad:
            a = self
            shape = self.data.shape

            def bw(g, acc):
                if axis is None:
                    acc(a, np.broadcast_to(g.reshape((1,) * len(shape)), shape))
                elif keepdims:
                    acc(a, np.broadcast_to(g, shape))
                else:
                    axes = (axis,) if isinstance(axis, int) else tuple(axis)
                    gg = np.expand_dims(g, axes)
                    acc(a, np.broadcast_to(gg, shape))

            out._record((a,), bw)
        return out

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        if axis is None:
            count = self.data.size
        else:
            axes = (axis,) if isinstance(axis, int) else tuple(axis)
            count = int(np.prod([self.data.shape[ax] for ax in axes]))
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of 2-d operands, or batched over one leading axis."""
    if a.data.ndim == 2 and b.data.ndim == 2:
        if a.shape[1] != b.shape[0]:
            raise ShapeError(
                f"matmul inner dimensions disagree: {a.shape} vs {b.shape}"
            )
    elif a.data.ndim == 3 and b.data.ndim == 3:
        if a.shape[0] != b.shape[0] or a.shape[2] != b.shape[1]:
            raise ShapeError(
                f"batched matmul dimensions disagree: {a.shape} vs {b.shape}"
            )
    else:
        raise ShapeError(
            f"matmul expects 2-d or equal-batch 3-d operands, got "
            f"{a.shape} and {b.shape}"
        )
    out = Tensor(a.data @ b.data)
    if _grad_enabled and (a.requires_grad or b.requires_grad):
        if a.data.ndim == 2:

            def bw(g, acc):
                acc(a, g @ b.data.T)
                acc(b, a.data.T @ g)

        else:

            def bw(g, acc):
                acc(a, g @ b.data.transpose(0, 2, 1))
                acc(b, a.data.transpose(0, 2, 1) @ g)

        out._record((a, b), bw)
    return out


class GradTape:
    """Reverse-topological record of the operations behind one output.

    ``order`` lists every reachable tensor with parents before consumers;
    each recorded tensor carries references to its inputs and the local
    backward rule. Replay walks the list in reverse, so the accumulation
    order is fixed for a fixed graph and repeated replays are
    bit-for-bit identical.
    """

    def __init__(self, root: Tensor):
        order: list[Tensor] = []
        seen = {id(root)}
        stack: list[tuple[Tensor, int]] = [(root, 0)]
        while stack:
            node, i = stack[-1]
            parents = node._parents
            if i < len(parents):
                stack[-1] = (node, i + 1)
                p = parents[i]
                if id(p) not in seen:
                    seen.add(id(p))
                    stack.append((p, 0))
            else:
                stack.pop()
                order.append(node)
        self.order = order

    def replay(self, root: Tensor, seed: np.ndarray) -> dict[int, np.ndarray]:
        buffers: dict[int, np.ndarray] = {id(root): seed}

        def accumulate(t: Tensor, g) -> None:
            # contributions flow through every recorded node; requires_grad
            # is sticky on recorded outputs so this prunes only dead leaves
            if t.requires_grad:
                prev = buffers.get(id(t))
                buffers[id(t)] = np.asarray(g, dtype=np.float64) if prev is None else prev + g

        for node in reversed(self.order):
            fn = node._backward
            if fn is None:
                continue
            g = buffers.get(id(node))
            if g is None:
                continue
            fn(g, accumulate)
        return buffers
