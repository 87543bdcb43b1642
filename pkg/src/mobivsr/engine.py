"""Forward execution of layer graphs, with optional operation counting.

The middle stack's 2-D layers run per frame: a rank-4 (C, L, H, W) value is
folded so the time axis becomes the kernels' batch axis and unfolded after.
Weight-stationary counting is preserved because a folded layer is still a
single kernel invocation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import GraphValidationError, ValidationError
from .graph import LayerGraph, LayerSpec, weight_shapes
from .tensor import CounterLedger, Tensor

_COSTED_KINDS = ("conv2d", "ds_conv2d", "conv3d", "ds_conv3d", "temporal_conv1d", "fc")


def _fan_in(spec: LayerSpec, name: str) -> int:
    k2 = (spec.kernel_size or 1) ** 2
    if spec.kind == "conv2d":
        return spec.in_channels * k2
    if spec.kind == "conv3d":
        return spec.in_channels * k2 * spec.temporal_size
    if spec.kind == "ds_conv2d":
        return k2 if name == "depthwise" else spec.in_channels
    if spec.kind == "ds_conv3d":
        if name == "depthwise":
            return k2 * spec.temporal_size
        return spec.in_channels * (spec.temporal_size if spec.pointwise_mode == "partial" else 1)
    if spec.kind == "temporal_conv1d":
        return spec.in_channels * spec.kernel_size
    if spec.kind == "fc":
        return spec.in_features
    return 1


def init_weights(graph: LayerGraph, seed: int = 0) -> dict:
    """Seeded random weights for every layer that needs them.

    Normal draws with std 1/sqrt(fan_in), which keeps activations (and hence
    the untrained softmax) well conditioned through the deep stack. Batchnorm
    layers get identity statistics. Returns {node id: {tensor name: Tensor}}
    in graph order.
    """
    rng = np.random.default_rng(seed)
    bundle = {}
    for node_id, spec in graph.nodes:
        shapes = weight_shapes(spec)
        if not shapes:
            continue
        tensors = {}
        for name, shape in shapes.items():
            n = math.prod(shape)
            if spec.kind == "batchnorm":
                value = {"mean": 0.0, "var": 1.0, "gamma": 1.0, "beta": 0.0}[name]
                data = np.full(n, value, dtype=np.float32)
            else:
                std = math.sqrt(1.0 / _fan_in(spec, name))
                data = rng.normal(0.0, std, size=n).astype(np.float32)
            tensors[name] = Tensor(shape=shape, data=data)
        bundle[node_id] = tensors
    return bundle


def _fold_time(x: np.ndarray) -> np.ndarray:
    # (C, L, H, W) -> (L, C, H, W): frames become the batch axis
    return x.swapaxes(0, 1)


def forward_layer(spec: LayerSpec, x: np.ndarray, weights: dict | None,
                  ledger: CounterLedger | None = None) -> np.ndarray:
    """Run one layer on an array value; residual_add is handled by run_graph."""
    kind = spec.kind
    if kind in ("conv2d", "ds_conv2d") and x.ndim not in (3, 4):
        raise ValidationError(f"{kind} expects a rank 3 or 4 value, got rank {x.ndim}")
    if kind == "conv2d":
        w = weights["weights"]
        folded = x.ndim == 4
        xb = _fold_time(x) if folded else x[None]
        out = kernels.conv2d_array(xb, w, spec.stride, spec.padding, ledger)
        out = _fold_time(out) if folded else out[0]
    elif kind == "ds_conv2d":
        dw, pw = weights["depthwise"], weights["pointwise"]
        folded = x.ndim == 4
        xb = _fold_time(x) if folded else x[None]
        out = kernels.ds_conv2d_array(xb, dw, pw, spec.stride, spec.padding, ledger)
        out = _fold_time(out) if folded else out[0]
    elif kind == "conv3d":
        out = kernels.conv3d_array(x, weights["weights"], stride=spec.stride,
                                   temporal_stride=1, padding=spec.padding, ledger=ledger)
    elif kind == "ds_conv3d":
        out = kernels.ds_conv3d_array(x, weights["depthwise"], weights["pointwise"],
                                      stride=spec.stride, pointwise_mode=spec.pointwise_mode,
                                      padding=spec.padding, ledger=ledger)
    elif kind == "temporal_conv1d":
        out = kernels.conv1d_array(x, weights["weights"], spec.stride, spec.padding, ledger)
    elif kind == "fc":
        out = kernels.fc_array(x, weights["weights"], ledger)
    elif kind == "maxpool":
        out = kernels.maxpool1d_array(x, spec.window, spec.stride)
    elif kind == "relu":
        out = kernels.relu_array(x)
    elif kind == "batchnorm":
        out = kernels.batchnorm_array(x, weights["mean"], weights["var"],
                                      weights["gamma"], weights["beta"], spec.eps)
    elif kind == "softmax":
        out = kernels.softmax_array(x)
    elif kind == "spatial_avg":
        out = x.mean(axis=(-2, -1))
    elif kind == "temporal_avg":
        out = x.mean(axis=-1)
    else:
        raise ValueError(f"cannot execute layer kind {kind!r} standalone")
    if ledger is not None and kind in _COSTED_KINDS:
        ledger.output_writes += int(out.size)
    return np.asarray(out, dtype=np.float32)


def counted_forward(layer: LayerSpec, input, weights: dict | None = None):
    """Run one layer and return (output Tensor, CounterLedger).

    ``weights`` maps tensor names to Tensors (or arrays) for weighted kinds.
    The output is bit-identical to an uncounted call; cost-free kinds yield
    an all-zero ledger.
    """
    ledger = CounterLedger()
    x = input.as_array() if isinstance(input, Tensor) else np.asarray(input, dtype=np.float32)
    wmap = None
    needed = weight_shapes(layer)
    if needed:
        if weights is None:
            raise ValidationError(f"layer kind {layer.kind!r} needs weights {sorted(needed)}")
        wmap = {
            name: (t.as_array() if isinstance(t, Tensor) else np.asarray(t, dtype=np.float32))
            for name, t in weights.items()
        }
    out = forward_layer(layer, x, wmap, ledger)
    return Tensor.from_array(out), ledger


@dataclass
class RunResult:
    output: Tensor
    ledger: CounterLedger | None = None
    node_outputs: dict | None = None


def run_graph(graph: LayerGraph, weights: dict, input, counted: bool = False,
              keep_outputs: bool = False) -> RunResult:
    """Execute a graph end to end.

    ``weights`` is the {node id: {name: Tensor}} bundle; int8 tensors are
    dequantized before execution. With ``counted`` a single ledger accumulates
    over all layers; with ``keep_outputs`` every node's output array is kept.
    """
    incoming = graph.validate()
    x = input.as_array() if isinstance(input, Tensor) else np.asarray(input, dtype=np.float32)
    ledger = CounterLedger() if counted else None
    outputs = {}
    value = x
    for node_id, spec in graph.nodes:
        src = incoming.get(node_id)
        if spec.kind == "residual_add":
            other = outputs[src]
            if value.shape != other.shape:
                raise GraphValidationError(
                    f"residual edge ({src!r}, {node_id!r}) joins shapes "
                    f"{other.shape} and {value.shape}",
                    edge=(src, node_id),
                )
            value = value + other
        else:
            xin = outputs[src] if src is not None else value
            wmap = None
            if node_id in weights:
                wmap = {name: t.as_array() if isinstance(t, Tensor) else t
                        for name, t in weights[node_id].items()}
            elif weight_shapes(spec):
                raise ValidationError(f"missing weights for node {node_id!r}")
            value = forward_layer(spec, xin, wmap, ledger)
        outputs[node_id] = value
    return RunResult(output=Tensor.from_array(value), ledger=ledger,
                     node_outputs=outputs if keep_outputs else None)
