"""Layer-graph intermediate representation and shape inference.

A graph is an ordered list of (id, LayerSpec) nodes plus residual edges.
Nodes execute in list order, each reading the previous node's output, with
two edge-driven exceptions:

* an edge into a ``residual_add`` node supplies its second addend;
* an edge into any other node redirects that node's input to the edge
  source (a tap, used for skip-path convolutions).

Edges always point forward in node order, so graphs are acyclic by
construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

from .errors import DimensionMismatch, GraphValidationError, MissingDimension
from .kernels import out_extent

KINDS = (
    "conv2d",
    "conv3d",
    "ds_conv2d",
    "ds_conv3d",
    "temporal_conv1d",
    "fc",
    "maxpool",
    "relu",
    "batchnorm",
    "softmax",
    "residual_add",
    "spatial_avg",
    "temporal_avg",
)

_REQUIRED = {
    "conv2d": ("in_channels", "out_channels", "kernel_size"),
    "conv3d": ("in_channels", "out_channels", "kernel_size", "temporal_size"),
    "ds_conv2d": ("in_channels", "out_channels", "kernel_size"),
    "ds_conv3d": ("in_channels", "out_channels", "kernel_size", "temporal_size"),
    "temporal_conv1d": ("in_channels", "out_channels", "kernel_size"),
    "fc": ("in_features", "out_features"),
    "maxpool": ("window",),
    "batchnorm": ("in_channels",),
    "relu": (),
    "softmax": (),
    "residual_add": (),
    "spatial_avg": (),
    "temporal_avg": (),
}

_CONV_KINDS = ("conv2d", "conv3d", "ds_conv2d", "ds_conv3d", "temporal_conv1d")


@dataclass(frozen=True)
class LayerSpec:
    """One layer: a kind tag plus the hyperparameters that kind requires."""

    kind: str
    in_channels: int | None = None
    out_channels: int | None = None
    kernel_size: int | None = None
    temporal_size: int | None = None
    stride: int = 1
    padding: str = "same"
    pointwise_mode: str | None = None
    window: int | None = None
    in_features: int | None = None
    out_features: int | None = None
    eps: float = 1e-5

    def __post_init__(self):
        if self.kind not in _REQUIRED:
            raise ValueError(f"unknown layer kind {self.kind!r}")
        for name in _REQUIRED[self.kind]:
            value = getattr(self, name)
            if value is None:
                raise MissingDimension(self.kind, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{self.kind}.{name} must be a positive int, got {value!r}")
        if self.stride < 1:
            raise ValueError(f"stride must be positive, got {self.stride}")
        if self.padding not in ("same", "valid"):
            raise ValueError(f"padding must be 'same' or 'valid', got {self.padding!r}")
        if self.kind == "ds_conv3d":
            mode = self.pointwise_mode or "partial"
            if mode not in ("partial", "full"):
                raise ValueError(f"pointwise_mode must be 'partial' or 'full', got {mode!r}")
            object.__setattr__(self, "pointwise_mode", mode)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        for f in fields(self):
            if f.name == "kind":
                continue
            value = getattr(self, f.name)
            if value is not None and value != f.default:
                d[f.name] = value
        return d


@dataclass
class LayerGraph:
    """Ordered layers plus residual edges; optionally a default input shape."""

    nodes: list = field(default_factory=list)
    residual_edges: list = field(default_factory=list)
    channel_plan: str = "custom"
    input_shape: tuple | None = None

    def __post_init__(self):
        self.nodes = [(str(i), s) for i, s in self.nodes]
        self.residual_edges = [(str(a), str(b)) for a, b in self.residual_edges]
        if self.input_shape is not None:
            self.input_shape = tuple(int(v) for v in self.input_shape)

    def node_ids(self):
        return [i for i, _ in self.nodes]

    def spec(self, node_id) -> LayerSpec:
        for i, s in self.nodes:
            if i == node_id:
                return s
        raise KeyError(node_id)

    def validate(self):
        order = {}
        for idx, (node_id, spec) in enumerate(self.nodes):
            if node_id in order:
                raise GraphValidationError(f"duplicate node id {node_id!r}", node_id=node_id)
            order[node_id] = idx
        incoming = {}
        for src, dst in self.residual_edges:
            if src not in order or dst not in order:
                raise GraphValidationError(
                    f"edge ({src!r}, {dst!r}) references a missing node", edge=(src, dst)
                )
            if order[src] >= order[dst]:
                raise GraphValidationError(
                    f"edge ({src!r}, {dst!r}) must point forward in node order",
                    edge=(src, dst),
                )
            if dst in incoming:
                raise GraphValidationError(
                    f"node {dst!r} has more than one incoming edge", node_id=dst
                )
            incoming[dst] = src
        for idx, (node_id, spec) in enumerate(self.nodes):
            if spec.kind == "residual_add":
                if idx == 0:
                    raise GraphValidationError(
                        "residual_add cannot be the first node", node_id=node_id
                    )
                if node_id not in incoming:
                    raise GraphValidationError(
                        f"residual_add node {node_id!r} has no incoming edge", node_id=node_id
                    )
        return incoming


def weight_shapes(spec: LayerSpec) -> dict:
    """Shapes of the weight tensors a layer needs, keyed by tensor name."""
    k = spec.kernel_size
    if spec.kind == "conv2d":
        return {"weights": (spec.out_channels, spec.in_channels, k, k)}
    if spec.kind == "conv3d":
        return {"weights": (spec.out_channels, spec.in_channels, spec.temporal_size, k, k)}
    if spec.kind == "ds_conv2d":
        return {
            "depthwise": (spec.in_channels, k, k),
            "pointwise": (spec.out_channels, spec.in_channels, 1, 1),
        }
    if spec.kind == "ds_conv3d":
        tp = spec.temporal_size if spec.pointwise_mode == "partial" else 1
        return {
            "depthwise": (spec.in_channels, spec.temporal_size, k, k),
            "pointwise": (spec.out_channels, spec.in_channels, tp, 1, 1),
        }
    if spec.kind == "temporal_conv1d":
        return {"weights": (spec.out_channels, spec.in_channels, k)}
    if spec.kind == "fc":
        return {"weights": (spec.out_features, spec.in_features)}
    if spec.kind == "batchnorm":
        c = (spec.in_channels,)
        return {"mean": c, "var": c, "gamma": c, "beta": c}
    return {}


def layer_output_shape(spec: LayerSpec, in_shape) -> tuple:
    """Output shape of one layer. 2-D conv kinds accept (C,H,W) or (C,L,H,W);
    the time axis of a rank-4 input rides along as a per-frame batch."""
    in_shape = tuple(in_shape)
    kind = spec.kind
    if kind in ("conv2d", "ds_conv2d"):
        if len(in_shape) not in (3, 4):
            raise DimensionMismatch("rank", "3 or 4", len(in_shape), kind)
        if in_shape[0] != spec.in_channels:
            raise DimensionMismatch("channel", spec.in_channels, in_shape[0], kind)
        h, w = in_shape[-2], in_shape[-1]
        ho = out_extent(h, spec.kernel_size, spec.stride, spec.padding, "height")
        wo = out_extent(w, spec.kernel_size, spec.stride, spec.padding, "width")
        return (spec.out_channels,) + in_shape[1:-2] + (ho, wo)
    if kind in ("conv3d", "ds_conv3d"):
        if len(in_shape) != 4:
            raise DimensionMismatch("rank", 4, len(in_shape), kind)
        if in_shape[0] != spec.in_channels:
            raise DimensionMismatch("channel", spec.in_channels, in_shape[0], kind)
        c, ln, h, w = in_shape
        lo = out_extent(ln, spec.temporal_size, 1, spec.padding, "time")
        ho = out_extent(h, spec.kernel_size, spec.stride, spec.padding, "height")
        wo = out_extent(w, spec.kernel_size, spec.stride, spec.padding, "width")
        return (spec.out_channels, lo, ho, wo)
    if kind == "temporal_conv1d":
        if len(in_shape) != 2:
            raise DimensionMismatch("rank", 2, len(in_shape), kind)
        if in_shape[0] != spec.in_channels:
            raise DimensionMismatch("channel", spec.in_channels, in_shape[0], kind)
        lo = out_extent(in_shape[1], spec.kernel_size, spec.stride, spec.padding, "time")
        return (spec.out_channels, lo)
    if kind == "fc":
        if len(in_shape) != 1:
            raise DimensionMismatch("rank", 1, len(in_shape), kind)
        if in_shape[0] != spec.in_features:
            raise DimensionMismatch("features", spec.in_features, in_shape[0], kind)
        return (spec.out_features,)
    if kind == "maxpool":
        n = in_shape[-1]
        stride = spec.stride
        if n < spec.window:
            raise DimensionMismatch("time", f"extent >= window {spec.window}", n, kind)
        return in_shape[:-1] + ((n - spec.window) // stride + 1,)
    if kind == "batchnorm":
        if in_shape[0] != spec.in_channels:
            raise DimensionMismatch("channel", spec.in_channels, in_shape[0], kind)
        return in_shape
    if kind == "spatial_avg":
        if len(in_shape) < 3:
            raise DimensionMismatch("rank", ">= 3", len(in_shape), kind)
        return in_shape[:-2]
    if kind == "temporal_avg":
        if len(in_shape) != 2:
            raise DimensionMismatch("rank", 2, len(in_shape), kind)
        return in_shape[:1]
    # relu, softmax, residual_add preserve shape
    return in_shape


def shape_infer(graph: LayerGraph, input_shape):
    """Propagate shapes through a graph.

    Returns (output_shape, {node_id: (in_shape, out_shape)}). Raises
    GraphValidationError naming the first inconsistent edge or node.
    """
    incoming = graph.validate()
    shapes = {}
    prev_shape = tuple(int(v) for v in input_shape)
    for node_id, spec in graph.nodes:
        if spec.kind == "residual_add":
            main = prev_shape
            src = incoming[node_id]
            other = shapes[src][1]
            if main != other:
                raise GraphValidationError(
                    f"residual edge ({src!r}, {node_id!r}) joins shapes {other} and {main}",
                    edge=(src, node_id),
                )
            in_shape, out_shape = main, main
        else:
            src = incoming.get(node_id)
            in_shape = shapes[src][1] if src is not None else prev_shape
            try:
                out_shape = layer_output_shape(spec, in_shape)
            except DimensionMismatch as exc:
                raise GraphValidationError(
                    f"node {node_id!r}: {exc}", node_id=node_id
                ) from exc
        shapes[node_id] = (in_shape, out_shape)
        prev_shape = out_shape
    return prev_shape, shapes


def volume(shape) -> int:
    return math.prod(int(v) for v in shape)
