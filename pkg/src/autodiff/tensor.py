# src/autodiff/tensor.py

"""
Reverse-mode automatic differentiation over dense float64 arrays.

Operations on tensors that require gradients are recorded on the active
`Tape` (entered with `with Tape() as tape:`). Outside a tape every
operation is a plain numpy computation, so inference code and shared
read-only tensors never touch recording state. Tapes are dynamic: a
training loop builds a fresh one every step.
"""

import threading
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..utils.errors import DomainError, NonFiniteError, ShapeError

ArrayLike = Union['Tensor', np.ndarray, float, int, Sequence[float]]

_local = threading.local()


def _tape_stack() -> List['Tape']:
    if not hasattr(_local, 'stack'):
        _local.stack = []
    return _local.stack


def active_tape() -> Optional['Tape']:
    stack = _tape_stack()
    return stack[-1] if stack else None


class _Node:
    __slots__ = ('output', 'parents', 'backward')

    def __init__(self, output: 'Tensor', parents: Tuple['Tensor', ...],
                 backward: Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]):
        self.output = output
        self.parents = parents
        self.backward = backward


class Tape:
    """
    Records operation nodes in execution order.

    Each node keeps references to its parent tensors and a closure over the
    cached forward values it needs for the backward pass. A tape belongs to
    one thread.
    """

    def __init__(self):
        self.nodes: List[_Node] = []

    def __enter__(self) -> 'Tape':
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()

    def record(self, output: 'Tensor', parents: Tuple['Tensor', ...], backward) -> None:
        self.nodes.append(_Node(output, parents, backward))

    def backward(self, output: 'Tensor') -> Dict['Tensor', np.ndarray]:
        """
        Propagate gradients from a scalar output back to the leaf tensors.

        Nodes are visited once each, in reverse recording order. Leaf
        gradients are also stored on `tensor.grad`.

        Args:
            output: Scalar tensor produced on this tape

        Returns:
            Mapping from each leaf tensor requiring gradients to its gradient

        Raises:
            ShapeError: If the output is not a scalar
        """
        if output.data.size != 1:
            raise ShapeError(f"backward needs a scalar output, got shape {output.shape}")

        grads: Dict[int, np.ndarray] = {id(output): np.ones_like(output.data)}
        produced = set()
        tensors: Dict[int, Tensor] = {id(output): output}

        for node in reversed(self.nodes):
            produced.add(id(node.output))
            grad_out = grads.pop(id(node.output), None)
            if grad_out is None:
                continue
            parent_grads = node.backward(grad_out)
            for parent, grad in zip(node.parents, parent_grads):
                if grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                tensors[key] = parent
                if key in grads:
                    grads[key] = grads[key] + grad
                else:
                    grads[key] = grad

        leaves: Dict[Tensor, np.ndarray] = {}
        for key, grad in grads.items():
            tensor = tensors[key]
            if key in produced or not tensor.requires_grad:
                continue
            tensor.grad = grad
            leaves[tensor] = grad
        return leaves


def backward(tape: Tape, output: 'Tensor') -> Dict['Tensor', np.ndarray]:
    return tape.backward(output)


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def _check_finite(data: np.ndarray, op: str) -> None:
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(f"Non-finite value produced by {op}")


def as_tensor(value: ArrayLike) -> 'Tensor':
    return value if isinstance(value, Tensor) else Tensor(value)


class Tensor:
    """
    Dense real tensor with optional gradient tracking.

    Attributes:
        data (np.ndarray): float64 values, row-major
        requires_grad (bool): Whether this tensor takes part in backward passes
        grad (Optional[np.ndarray]): Gradient from the last backward pass
    """

    __array_priority__ = 100

    def __init__(self, data: ArrayLike, requires_grad: bool = False):
        if isinstance(data, Tensor):
            data = data.data
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single value, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> 'Tensor':
        return Tensor(self.data.copy())

    def __repr__(self) -> str:
        flag = ', requires_grad=True' if self.requires_grad else ''
        return f"Tensor(shape={self.shape}{flag})"

    # recording helper

    @staticmethod
    def _result(data: np.ndarray, op: str, parents: Tuple['Tensor', ...],
                backward: Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]) -> 'Tensor':
        _check_finite(data, op)
        tape = active_tape()
        tracked = tape is not None and any(p.requires_grad for p in parents)
        out = Tensor(data, requires_grad=tracked)
        if tracked:
            tape.record(out, parents, backward)
        return out

    # arithmetic

    def __add__(self, other: ArrayLike) -> 'Tensor':
        return add(self, other)

    def __radd__(self, other: ArrayLike) -> 'Tensor':
        return add(other, self)

    def __sub__(self, other: ArrayLike) -> 'Tensor':
        return add(self, neg(as_tensor(other)))

    def __rsub__(self, other: ArrayLike) -> 'Tensor':
        return add(other, neg(self))

    def __mul__(self, other: ArrayLike) -> 'Tensor':
        return mul(self, other)

    def __rmul__(self, other: ArrayLike) -> 'Tensor':
        return mul(other, self)

    def __neg__(self) -> 'Tensor':
        return neg(self)

    def __truediv__(self, other: ArrayLike) -> 'Tensor':
        if isinstance(other, Tensor):
            return mul(self, exp(neg(log(other))))
        return mul(self, 1.0 / np.asarray(other, dtype=np.float64))

    def __matmul__(self, other: ArrayLike) -> 'Tensor':
        return matmul(self, other)

    def exp(self) -> 'Tensor':
        return exp(self)

    def log(self) -> 'Tensor':
        return log(self)

    def sigmoid(self) -> 'Tensor':
        return sigmoid(self)

    def relu(self) -> 'Tensor':
        return relu(self)

    def sum(self, axis: Optional[int] = None) -> 'Tensor':
        return reduce_sum(self, axis)

    def reshape(self, *shape: int) -> 'Tensor':
        return reshape(self, shape[0] if len(shape) == 1 and isinstance(shape[0], tuple) else shape)


def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        data = a.data + b.data
    except ValueError as e:
        raise ShapeError(f"add: incompatible shapes {a.shape} and {b.shape}") from e
    return Tensor._result(data, 'add', (a, b),
                          lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        data = a.data * b.data
    except ValueError as e:
        raise ShapeError(f"mul: incompatible shapes {a.shape} and {b.shape}") from e
    return Tensor._result(data, 'mul', (a, b),
                          lambda g: (_unbroadcast(g * b.data, a.shape),
                                     _unbroadcast(g * a.data, b.shape)))


def neg(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    return Tensor._result(-a.data, 'neg', (a,), lambda g: (-g,))


def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")
    return Tensor._result(a.data @ b.data, 'matmul', (a, b),
                          lambda g: (g @ b.data.T, a.data.T @ g))


def exp(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    with np.errstate(over='ignore'):
        data = np.exp(a.data)
    return Tensor._result(data, 'exp', (a,), lambda g: (g * data,))


def log(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    if np.any(a.data <= 0):
        raise DomainError("log of a non-positive value")
    return Tensor._result(np.log(a.data), 'log', (a,), lambda g: (g / a.data,))


def _stable_sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def sigmoid(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    s = _stable_sigmoid(a.data)
    return Tensor._result(s, 'sigmoid', (a,), lambda g: (g * s * (1.0 - s),))


def log_sigmoid(a: ArrayLike) -> Tensor:
    """log(sigmoid(x)) without underflow for large negative x."""
    a = as_tensor(a)
    data = -np.logaddexp(0.0, -a.data)
    return Tensor._result(data, 'log_sigmoid', (a,),
                          lambda g: (g * _stable_sigmoid(-a.data),))


def relu(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    mask = a.data > 0
    return Tensor._result(np.where(mask, a.data, 0.0), 'relu', (a,), lambda g: (g * mask,))


def reduce_sum(a: ArrayLike, axis: Optional[int] = None) -> Tensor:
    a = as_tensor(a)
    data = np.sum(a.data, axis=axis)

    def backward(g: np.ndarray):
        if axis is None:
            return (np.broadcast_to(g, a.shape).copy(),)
        return (np.broadcast_to(np.expand_dims(g, axis), a.shape).copy(),)

    return Tensor._result(np.asarray(data), 'reduce_sum', (a,), backward)


def log_sum_exp(a: ArrayLike, axis: int = -1) -> Tensor:
    """Overflow-safe log(sum(exp(a))) along one axis (max-shifted)."""
    a = as_tensor(a)
    if a.data.shape[axis] == 0:
        raise ShapeError("log_sum_exp over an empty axis")
    shift = np.max(a.data, axis=axis, keepdims=True)
    weights = np.exp(a.data - shift)
    total = np.sum(weights, axis=axis, keepdims=True)
    data = np.squeeze(shift + np.log(total), axis=axis)
    softmax = weights / total

    def backward(g: np.ndarray):
        return (np.expand_dims(g, axis) * softmax,)

    return Tensor._result(np.asarray(data), 'log_sum_exp', (a,), backward)


def reshape(a: ArrayLike, shape: Tuple[int, ...]) -> Tensor:
    a = as_tensor(a)
    try:
        data = a.data.reshape(shape)
    except ValueError as e:
        raise ShapeError(f"reshape: cannot reshape {a.shape} into {shape}") from e
    return Tensor._result(data, 'reshape', (a,), lambda g: (g.reshape(a.shape),))


def take(a: ArrayLike, indices: np.ndarray) -> Tensor:
    """Gather rows (leading axis) by integer index."""
    a = as_tensor(a)
    indices = np.asarray(indices, dtype=np.int64)
    data = a.data[indices]

    def backward(g: np.ndarray):
        grad = np.zeros_like(a.data)
        np.add.at(grad, indices, g)
        return (grad,)

    return Tensor._result(data, 'take', (a,), backward)


def segment_sum(a: ArrayLike, segment_ids: np.ndarray, num_segments: int) -> Tensor:
    """Sum rows (leading axis) into `num_segments` buckets."""
    a = as_tensor(a)
    segment_ids = np.asarray(segment_ids, dtype=np.int64)
    if segment_ids.shape[0] != a.shape[0]:
        raise ShapeError("segment_sum: one segment id per row required")
    data = np.zeros((num_segments,) + a.shape[1:])
    np.add.at(data, segment_ids, a.data)
    return Tensor._result(data, 'segment_sum', (a,), lambda g: (g[segment_ids],))


def parameters_finite(tensors: Iterable[Tensor]) -> bool:
    return all(np.all(np.isfinite(t.data)) for t in tensors)
