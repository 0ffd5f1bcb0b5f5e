"""Minimal dense-tensor engine with reverse-mode autodiff and Adam."""

from .tensor import (
    Graph,
    MacCounter,
    Parameter,
    Tensor,
    active_graph,
    as_tensor,
    backward,
    count_macs,
    grad_enabled,
    no_grad,
    record,
    reset_graph,
)
from .ops import (
    add,
    add_const,
    channel_concat,
    channel_split,
    conv2d,
    conv_transpose2d,
    exp,
    huber,
    leaky_relu,
    log,
    log_softmax_channels,
    lower_bound,
    matmul,
    mean_all,
    mul,
    pow_const,
    reshape,
    round_ste,
    scale,
    sigmoid,
    softplus,
    sub,
    sum_all,
    tanh,
    transpose,
)
from .optim import Adam, cosine_lr
from .check import gradcheck, nudge_from_kinks

__all__ = [
    "Adam",
    "Graph",
    "MacCounter",
    "Parameter",
    "Tensor",
    "active_graph",
    "add",
    "add_const",
    "as_tensor",
    "backward",
    "channel_concat",
    "channel_split",
    "conv2d",
    "conv_transpose2d",
    "cosine_lr",
    "count_macs",
    "exp",
    "grad_enabled",
    "gradcheck",
    "huber",
    "leaky_relu",
    "log",
    "log_softmax_channels",
    "lower_bound",
    "matmul",
    "mean_all",
    "mul",
    "no_grad",
    "nudge_from_kinks",
    "pow_const",
    "record",
    "reset_graph",
    "reshape",
    "round_ste",
    "scale",
    "sigmoid",
    "softplus",
    "sub",
    "sum_all",
    "tanh",
    "transpose",
]
