"""Dense tensors with reverse-mode automatic differentiation.

A thread-local tape records every differentiable operation whose operands
are tracked (a parameter, or anything computed from one).  ``backward`` on a
scalar walks the tape in reverse, accumulates gradients into the leaves, and
clears the tape.  Only float32/float64 dense arrays are supported; float64
exists for finite-difference verification.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from typing import Callable, Iterable, Sequence

import numpy as np

from ..errors import NumericError, ShapeError, StateError

DEFAULT_DTYPE = np.float32
_FLOAT_DTYPES = (np.float32, np.float64)


class Tensor:
    """A dense N-dimensional float array, optionally tracked for gradients."""

    __slots__ = ("data", "requires_grad", "grad", "_tracked")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.asarray(data, dtype=dtype if dtype is not None else None)
        if arr.dtype not in _FLOAT_DTYPES:
            arr = arr.astype(DEFAULT_DTYPE)
        if not np.all(np.isfinite(arr)):
            raise NumericError("tensor holds non-finite values")
        self.data = arr
        self.requires_grad = requires_grad
        self.grad = np.zeros_like(arr) if requires_grad else None
        self._tracked = False

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def _wrap(data: np.ndarray) -> "Tensor":
        """Internal fast path: wrap op output without the finiteness scan."""
        t = Tensor.__new__(Tensor)
        t.data = data
        t.requires_grad = False
        t.grad = None
        t._tracked = False
        return t

    # -- basic introspection ---------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() on tensor of shape {self.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        """The underlying array (a view; do not mutate tracked tensors)."""
        return self.data

    def detach(self) -> "Tensor":
        return Tensor._wrap(self.data)

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad[...] = 0

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype.name}{flag})"

    # Arithmetic sugar; the implementations live in ops.py (set at import).
    def __add__(self, other):
        return _OPS["add"](self, other)

    def __radd__(self, other):
        return _OPS["add"](self, other)

    def __sub__(self, other):
        return _OPS["sub"](self, other)

    def __mul__(self, other):
        return _OPS["mul"](self, other)

    def __rmul__(self, other):
        return _OPS["mul"](self, other)

    def __neg__(self):
        return _OPS["scale"](self, -1.0)

    def sum(self):
        return _OPS["sum_all"](self)

    def mean(self):
        return _OPS["mean_all"](self)

    def reshape(self, shape):
        return _OPS["reshape"](self, shape)

    def transpose(self, axes):
        return _OPS["transpose"](self, axes)


_OPS: dict[str, Callable] = {}


class Parameter:
    """A named trainable tensor with a persistent gradient buffer."""

    __slots__ = ("name", "value")

    def __init__(self, data, name: str = "", dtype=DEFAULT_DTYPE):
        self.name = name
        self.value = Tensor(np.asarray(data, dtype=dtype), requires_grad=True)

    @property
    def grad(self) -> np.ndarray:
        return self.value.grad

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def zero_grad(self) -> None:
        self.value.zero_grad()

    def __repr__(self) -> str:
        return f"Parameter({self.name or '<unnamed>'}, shape={self.shape})"


class _Node:
    __slots__ = ("out", "inputs", "vjp")

    def __init__(self, out: Tensor, inputs: tuple[Tensor, ...], vjp: Callable):
        self.out = out
        self.inputs = inputs
        self.vjp = vjp


class Graph:
    """Ordered tape of executed operations for one forward pass."""

    __slots__ = ("nodes",)

    def __init__(self):
        self.nodes: list[_Node] = []

    def clear(self) -> None:
        self.nodes.clear()

    def __len__(self) -> int:
        return len(self.nodes)


class _State(threading.local):
    def __init__(self):
        self.graph = Graph()
        self.grad_enabled = True
        self.mac_counters: list = []


_STATE = _State()


def active_graph() -> Graph:
    return _STATE.graph


def reset_graph() -> None:
    """Drop any recorded operations (e.g. after an aborted forward pass)."""
    _STATE.graph.clear()


@contextmanager
def no_grad():
    """Disable tape recording inside the block (inference / frozen stages)."""
    prev = _STATE.grad_enabled
    _STATE.grad_enabled = False
    try:
        yield
    finally:
        _STATE.grad_enabled = prev


def grad_enabled() -> bool:
    return _STATE.grad_enabled


def record(out: Tensor, inputs: Sequence[Tensor], vjp: Callable) -> None:
    """Append one op to the active tape if any operand is tracked."""
    if not _STATE.grad_enabled:
        return
    if not any(t.requires_grad or t._tracked for t in inputs):
        return
    out._tracked = True
    _STATE.graph.nodes.append(_Node(out, tuple(inputs), vjp))


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(leaf) into every reachable leaf's grad buffer.

    Walks the active tape once, in reverse; intermediate gradients are
    discarded as soon as consumed.  The tape is cleared afterwards, so a new
    forward pass is needed before the next call.
    """
    if not isinstance(loss, Tensor):
        raise TypeError("backward expects a Tensor")
    if loss.data.size != 1:
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
    graph = _STATE.graph
    if not graph.nodes:
        raise StateError("backward on empty graph: no operations were recorded")
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    if loss.requires_grad:
        loss.grad += 1.0
    try:
        for node in reversed(graph.nodes):
            gout = grads.pop(id(node.out), None)
            if gout is None:
                continue
            gins = node.vjp(gout)
            for t, gin in zip(node.inputs, gins):
                if gin is None:
                    continue
                if t.requires_grad:
                    t.grad += gin
                else:
                    key = id(t)
                    if key in grads:
                        # vjp outputs may alias shared upstream arrays; never
                        # accumulate in place.
                        grads[key] = grads[key] + gin
                    else:
                        grads[key] = gin
    finally:
        graph.clear()


class MacCounter:
    """Accumulates multiply-accumulate counts reported by heavy ops."""

    __slots__ = ("total", "by_kind")

    def __init__(self):
        self.total = 0
        self.by_kind: dict[str, int] = {}

    def add(self, kind: str, macs: int) -> None:
        self.total += macs
        self.by_kind[kind] = self.by_kind.get(kind, 0) + macs


@contextmanager
def count_macs():
    """Collect analytic MAC counts of conv/matmul ops run inside the block."""
    counter = MacCounter()
    _STATE.mac_counters.append(counter)
    try:
        yield counter
    finally:
        _STATE.mac_counters.pop()


def _tally_macs(kind: str, macs: int) -> None:
    for counter in _STATE.mac_counters:
        counter.add(kind, macs)


def as_tensor(x, dtype=None) -> Tensor:
    """Wrap a value as an untracked constant tensor."""
    if isinstance(x, Tensor):
        return x
    return Tensor(x, dtype=dtype)


def parameters_finite(params: Iterable[Parameter]) -> bool:
    return all(np.all(np.isfinite(p.value.data)) for p in params)
