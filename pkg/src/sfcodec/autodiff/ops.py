"""Differentiable operations over :class:`Tensor`.

Every op validates shapes before computing, returns the documented shape, and
registers a vector-Jacobian product on the active tape.  Broadcasting is
limited to numpy semantics on elementwise ops; the backward pass sums the
gradient over broadcast axes.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from .tensor import Tensor, _OPS, _tally_macs, record


def _out(data: np.ndarray) -> Tensor:
    return Tensor._wrap(data)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum `grad` down to `shape` (inverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _coerce(a, b):
    if not isinstance(a, Tensor):
        a = Tensor(np.asarray(a, dtype=b.dtype))
    if not isinstance(b, Tensor):
        b = Tensor(np.asarray(b, dtype=a.dtype))
    return a, b


def _check_broadcast(a: Tensor, b: Tensor, opname: str) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{opname}: shapes {a.shape} and {b.shape} do not broadcast") from None


# -- elementwise arithmetic ----------------------------------------------------


def add(a, b) -> Tensor:
    a, b = _coerce(a, b)
    _check_broadcast(a, b, "add")
    out = _out(a.data + b.data)
    record(out, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))
    return out


def sub(a, b) -> Tensor:
    a, b = _coerce(a, b)
    _check_broadcast(a, b, "sub")
    out = _out(a.data - b.data)
    record(out, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))
    return out


def mul(a, b) -> Tensor:
    a, b = _coerce(a, b)
    _check_broadcast(a, b, "mul")
    out = _out(a.data * b.data)
    record(
        out,
        (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )
    return out


def scale(a: Tensor, s: float) -> Tensor:
    s = float(s)
    out = _out(a.data * s)
    record(out, (a,), lambda g: (g * s,))
    return out


def add_const(a: Tensor, c: float) -> Tensor:
    out = _out(a.data + a.dtype.type(c))
    record(out, (a,), lambda g: (g,))
    return out


# -- nonlinearities -------------------------------------------------------------


def leaky_relu(x: Tensor, slope: float = 0.01) -> Tensor:
    pos = x.data > 0
    out = _out(np.where(pos, x.data, x.dtype.type(slope) * x.data))
    record(out, (x,), lambda g: (np.where(pos, g, x.dtype.type(slope) * g),))
    return out


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)
    out = _out(y)
    record(out, (x,), lambda g: (g * (1.0 - y * y),))
    return out


def sigmoid(x: Tensor) -> Tensor:
    # exp of -|x| never overflows
    z = np.exp(-np.abs(x.data))
    y = np.where(x.data >= 0, 1.0 / (1.0 + z), z / (1.0 + z)).astype(x.dtype)
    out = _out(y)
    record(out, (x,), lambda g: (g * y * (1.0 - y),))
    return out


def softplus(x: Tensor) -> Tensor:
    y = (np.log1p(np.exp(-np.abs(x.data))) + np.maximum(x.data, 0)).astype(x.dtype)
    out = _out(y)
    z = np.exp(-np.abs(x.data))
    sig = np.where(x.data >= 0, 1.0 / (1.0 + z), z / (1.0 + z)).astype(x.dtype)
    record(out, (x,), lambda g: (g * sig,))
    return out


def exp(x: Tensor) -> Tensor:
    y = np.exp(x.data)
    out = _out(y)
    record(out, (x,), lambda g: (g * y,))
    return out


def log(x: Tensor) -> Tensor:
    if np.any(x.data <= 0):
        raise ShapeError("log: input must be strictly positive")
    out = _out(np.log(x.data))
    record(out, (x,), lambda g: (g / x.data,))
    return out


def pow_const(x: Tensor, p: float) -> Tensor:
    p = float(p)
    y = np.power(x.data, p)
    out = _out(y)
    record(out, (x,), lambda g: (g * p * np.power(x.data, p - 1.0),))
    return out


def huber(x: Tensor, beta: float = 1.0) -> Tensor:
    """Elementwise smooth-L1: 0.5*x^2/beta inside |x|<beta, |x|-beta/2 outside."""
    beta = float(beta)
    if beta <= 0:
        raise ShapeError("huber: beta must be positive")
    ax = np.abs(x.data)
    inner = ax < beta
    y = np.where(inner, 0.5 * x.data * x.data / beta, ax - 0.5 * beta).astype(x.dtype)
    out = _out(y)
    record(out, (x,), lambda g: (g * np.clip(x.data / beta, -1.0, 1.0),))
    return out


def lower_bound(x: Tensor, bound: float) -> Tensor:
    """max(x, bound); gradients pass where unclamped or pushing x upward."""
    bound = x.dtype.type(bound)
    out = _out(np.maximum(x.data, bound))
    passthrough = x.data >= bound

    def vjp(g):
        return (np.where(passthrough | (g < 0), g, 0.0).astype(x.dtype),)

    record(out, (x,), vjp)
    return out


def round_ste(x: Tensor) -> Tensor:
    """Nearest-integer rounding (ties to even) with a straight-through gradient."""
    out = _out(np.rint(x.data))
    record(out, (x,), lambda g: (g,))
    return out


# -- shape manipulation ----------------------------------------------------------


def reshape(x: Tensor, shape) -> Tensor:
    shape = tuple(int(s) for s in shape)
    if int(np.prod(shape)) != x.size:
        raise ShapeError(f"reshape: cannot view {x.shape} as {shape}")
    out = _out(x.data.reshape(shape))
    record(out, (x,), lambda g: (g.reshape(x.shape),))
    return out


def transpose(x: Tensor, axes) -> Tensor:
    axes = tuple(int(a) for a in axes)
    if sorted(axes) != list(range(x.data.ndim)):
        raise ShapeError(f"transpose: axes {axes} invalid for rank {x.data.ndim}")
    inv = tuple(int(a) for a in np.argsort(axes))
    out = _out(np.ascontiguousarray(x.data.transpose(axes)))
    record(out, (x,), lambda g: (np.ascontiguousarray(g.transpose(inv)),))
    return out


def channel_concat(a: Tensor, b: Tensor) -> Tensor:
    """Concatenate two NCHW tensors along channels."""
    if a.data.ndim != 4 or b.data.ndim != 4:
        raise ShapeError("channel_concat expects rank-4 NCHW tensors")
    if a.shape[0] != b.shape[0] or a.shape[2:] != b.shape[2:]:
        raise ShapeError(
            f"channel_concat: batch/spatial mismatch between {a.shape} and {b.shape}"
        )
    ca = a.shape[1]
    out = _out(np.concatenate([a.data, b.data], axis=1))
    record(out, (a, b), lambda g: (g[:, :ca], g[:, ca:]))
    return out


def channel_split(x: Tensor, c1: int) -> tuple[Tensor, Tensor]:
    """Split an NCHW tensor into the first `c1` channels and the rest."""
    if x.data.ndim != 4:
        raise ShapeError("channel_split expects a rank-4 NCHW tensor")
    c = x.shape[1]
    if not 0 < c1 < c:
        raise ShapeError(f"channel_split: c1={c1} out of range for {c} channels")

    first = _out(np.ascontiguousarray(x.data[:, :c1]))
    second = _out(np.ascontiguousarray(x.data[:, c1:]))

    def vjp_first(g):
        full = np.zeros_like(x.data)
        full[:, :c1] = g
        return (full,)

    def vjp_second(g):
        full = np.zeros_like(x.data)
        full[:, c1:] = g
        return (full,)

    record(first, (x,), vjp_first)
    record(second, (x,), vjp_second)
    return first, second


# -- reductions -------------------------------------------------------------------


def sum_all(x: Tensor) -> Tensor:
    out = _out(np.asarray(x.data.sum(), dtype=x.dtype))
    record(out, (x,), lambda g: (np.broadcast_to(g, x.shape).astype(x.dtype),))
    return out


def mean_all(x: Tensor) -> Tensor:
    return scale(sum_all(x), 1.0 / x.size)


def log_softmax_channels(x: Tensor) -> Tensor:
    """log softmax over axis 1 of an NCHW tensor."""
    if x.data.ndim != 4:
        raise ShapeError("log_softmax_channels expects a rank-4 NCHW tensor")
    m = x.data.max(axis=1, keepdims=True)
    z = x.data - m
    lse = np.log(np.exp(z).sum(axis=1, keepdims=True))
    y = z - lse
    out = _out(y.astype(x.dtype))
    sm = np.exp(y).astype(x.dtype)
    record(out, (x,), lambda g: (g - sm * g.sum(axis=1, keepdims=True),))
    return out


# -- matmul -----------------------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """2-D or batch-matched 3-D matrix product."""
    if a.data.ndim != b.data.ndim or a.data.ndim not in (2, 3):
        raise ShapeError(f"matmul: rank mismatch {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[-2] or (a.data.ndim == 3 and a.shape[0] != b.shape[0]):
        raise ShapeError(f"matmul: incompatible shapes {a.shape} @ {b.shape}")
    out = _out(np.matmul(a.data, b.data))
    batch = a.shape[0] if a.data.ndim == 3 else 1
    _tally_macs("matmul", batch * a.shape[-2] * a.shape[-1] * b.shape[-1])

    def vjp(g):
        ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
        gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
        return ga, gb

    record(out, (a, b), vjp)
    return out


# -- convolution ------------------------------------------------------------------


def _conv_geometry(h: int, w: int, k: int, stride: int, padding: int) -> tuple[int, int]:
    ho = (h + 2 * padding - k) // stride + 1
    wo = (w + 2 * padding - k) // stride + 1
    return ho, wo


def _im2col(x: np.ndarray, k: int, stride: int, padding: int) -> np.ndarray:
    """(N,C,H,W) -> (N, C*k*k, Ho*Wo) patch matrix."""
    n, c, h, w = x.shape
    ho, wo = _conv_geometry(h, w, k, stride, padding)
    if padding:
        x = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    cols = np.empty((n, c, k, k, ho, wo), dtype=x.dtype)
    for i in range(k):
        for j in range(k):
            cols[:, :, i, j] = x[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride]
    return cols.reshape(n, c * k * k, ho * wo)


def _col2im(
    cols: np.ndarray, c: int, h: int, w: int, k: int, stride: int, padding: int
) -> np.ndarray:
    """Adjoint of :func:`_im2col`: scatter-add patches back to (N,C,H,W)."""
    n = cols.shape[0]
    ho, wo = _conv_geometry(h, w, k, stride, padding)
    cols = cols.reshape(n, c, k, k, ho, wo)
    out = np.zeros((n, c, h + 2 * padding, w + 2 * padding), dtype=cols.dtype)
    for i in range(k):
        for j in range(k):
            out[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride] += cols[
                :, :, i, j
            ]
    if padding:
        out = out[:, :, padding : padding + h, padding : padding + w]
    return np.ascontiguousarray(out)


def _check_conv_args(stride: int, padding: int) -> tuple[int, int]:
    stride, padding = int(stride), int(padding)
    if stride < 1:
        raise ShapeError(f"stride must be positive, got {stride}")
    if padding < 0:
        raise ShapeError(f"padding must be non-negative, got {padding}")
    return stride, padding


def conv2d(x: Tensor, weight: Tensor, bias: Tensor, stride: int = 1, padding: int = 0) -> Tensor:
    """Cross-correlation of NCHW input with OIHW weight."""
    stride, padding = _check_conv_args(stride, padding)
    if x.data.ndim != 4 or weight.data.ndim != 4:
        raise ShapeError("conv2d expects rank-4 input and weight")
    n, cin, h, w = x.shape
    cout, cin_w, kh, kw = weight.shape
    if kh != kw:
        raise ShapeError(f"conv2d supports square kernels only, got {kh}x{kw}")
    k = kh
    if cin != cin_w:
        raise ShapeError(
            f"conv2d: input has {cin} channels but weight expects {cin_w} "
            f"(input {x.shape}, weight {weight.shape})"
        )
    if bias.data.ndim != 1 or bias.shape[0] != cout:
        raise ShapeError(f"conv2d: bias shape {bias.shape} does not match Cout={cout}")
    if k > h + 2 * padding or k > w + 2 * padding:
        raise ShapeError(
            f"conv2d: kernel {k} exceeds padded input {h + 2 * padding}x{w + 2 * padding}"
        )

    ho, wo = _conv_geometry(h, w, k, stride, padding)
    cols = _im2col(x.data, k, stride, padding)
    wmat = weight.data.reshape(cout, cin * k * k)
    y = np.matmul(wmat, cols) + bias.data.reshape(1, cout, 1)
    out = _out(np.ascontiguousarray(y.reshape(n, cout, ho, wo)))
    _tally_macs("conv", n * cout * ho * wo * cin * k * k)

    def vjp(g):
        gflat = g.reshape(n, cout, ho * wo)
        gw = np.tensordot(gflat, cols, axes=([0, 2], [0, 2])).reshape(weight.shape)
        gb = gflat.sum(axis=(0, 2))
        gcols = np.matmul(wmat.T, gflat)
        gx = _col2im(gcols, cin, h, w, k, stride, padding)
        return gx, gw, gb

    record(out, (x, weight, bias), vjp)
    return out


def conv_transpose2d(
    x: Tensor, weight: Tensor, bias: Tensor, stride: int = 1, padding: int = 0
) -> Tensor:
    """Transposed convolution (adjoint of conv2d) with IOHW weight."""
    stride, padding = _check_conv_args(stride, padding)
    if x.data.ndim != 4 or weight.data.ndim != 4:
        raise ShapeError("conv_transpose2d expects rank-4 input and weight")
    n, cin, h, w = x.shape
    cin_w, cout, kh, kw = weight.shape
    if kh != kw:
        raise ShapeError(f"conv_transpose2d supports square kernels only, got {kh}x{kw}")
    k = kh
    if cin != cin_w:
        raise ShapeError(
            f"conv_transpose2d: input has {cin} channels but weight expects {cin_w} "
            f"(input {x.shape}, weight {weight.shape})"
        )
    if bias.data.ndim != 1 or bias.shape[0] != cout:
        raise ShapeError(f"conv_transpose2d: bias shape {bias.shape} does not match Cout={cout}")
    hb = (h - 1) * stride - 2 * padding + k
    wb = (w - 1) * stride - 2 * padding + k
    if hb < 1 or wb < 1:
        raise ShapeError(
            f"conv_transpose2d: output {hb}x{wb} is empty for input {h}x{w}, "
            f"k={k}, stride={stride}, padding={padding}"
        )

    wmat = weight.data.reshape(cin, cout * k * k)
    xflat = x.data.reshape(n, cin, h * w)
    cols = np.matmul(wmat.T, xflat)
    y = _col2im(cols, cout, hb, wb, k, stride, padding) + bias.data.reshape(1, cout, 1, 1)
    out = _out(y)
    _tally_macs("conv", n * cin * h * w * cout * k * k)

    def vjp(g):
        gcols = _im2col(g, k, stride, padding)
        gx = np.matmul(wmat, gcols).reshape(n, cin, h, w)
        gw = np.tensordot(xflat, gcols, axes=([0, 2], [0, 2])).reshape(weight.shape)
        gb = g.sum(axis=(0, 2, 3))
        return gx, gw, gb

    record(out, (x, weight, bias), vjp)
    return out


_OPS.update(
    add=add,
    sub=sub,
    mul=mul,
    scale=scale,
    sum_all=sum_all,
    mean_all=mean_all,
    reshape=reshape,
    transpose=transpose,
)
