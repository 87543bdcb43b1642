"""Analytical parameter, memory-access and FLOP accounting.

The closed forms below mirror the counting conventions of the reference
kernels. With V_in and V_out the full input and output volumes, K the square
kernel side, T the temporal kernel size, C_in/C_out the channel counts and
I/Q the fully-connected widths:

================  ==================  =====================================
layer             parameters          memory accesses
================  ==================  =====================================
conv2d            K^2 C_in C_out      P + V_in K^2 C_out + V_out
conv3d            K^2 T C_in C_out    P + V_in K^2 C_out T + V_out
ds_conv2d         C_in (K^2 + C_out)  P + V_in (K^2 + C_out) + V_out
ds_conv3d         C_in (K^2+C_out) T  P + V_in (K^2 + C_out) T + V_out
temporal_conv1d   K C_in C_out        P + V_in K C_out + V_out
fc                I Q                 P + V_in + V_out
================  ==================  =====================================

FLOPs are twice the multiply count: 2 (K^2 C_in) V_out for conv2d,
2 (K^2 T C_in) V_out for conv3d, 2 C_in (K^2 + C_out) V_out / C_out for the
separable forms (evaluated without the division to stay in exact integers),
K C_in in place of K^2 C_in for the temporal form, and 2 I Q for fc.

The memory-access read terms assume stride 1 and same padding, where the
output position count equals the input's; for strided or valid-padded layers
they are an upper bound on the instrumented counts. Activations, pooling,
normalization, softmax and residual adds cost nothing. The 1-D temporal form
is the one-axis specialization of the conv2d row.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import LayerGraph, LayerSpec, layer_output_shape, shape_infer, volume, weight_shapes

COSTED_KINDS = ("conv2d", "conv3d", "ds_conv2d", "ds_conv3d", "temporal_conv1d", "fc")


@dataclass(frozen=True)
class LayerCost:
    params: int = 0
    memory_accesses: int = 0
    flops: int = 0

    def __add__(self, other: "LayerCost") -> "LayerCost":
        return LayerCost(
            self.params + other.params,
            self.memory_accesses + other.memory_accesses,
            self.flops + other.flops,
        )


@dataclass
class CostReport:
    """Per-layer and total analytical costs for a whole graph."""

    per_layer: list
    totals: LayerCost
    size_bytes: int
    dtype: str


def params_of(layer: LayerSpec) -> int:
    """Learned parameter count of one layer; zero for cost-free kinds."""
    kind = layer.kind
    if kind == "conv2d":
        return layer.kernel_size**2 * layer.in_channels * layer.out_channels
    if kind == "conv3d":
        return (
            layer.kernel_size**2
            * layer.temporal_size
            * layer.in_channels
            * layer.out_channels
        )
    if kind == "ds_conv2d":
        return layer.in_channels * (layer.kernel_size**2 + layer.out_channels)
    if kind == "ds_conv3d":
        return (
            layer.in_channels
            * (layer.kernel_size**2 + layer.out_channels)
            * layer.temporal_size
        )
    if kind == "temporal_conv1d":
        return layer.kernel_size * layer.in_channels * layer.out_channels
    if kind == "fc":
        return layer.in_features * layer.out_features
    return 0


def mem_access_of(layer: LayerSpec, input_shape) -> int:
    """Memory accesses of one layer: weight reads + activation reads + writes."""
    kind = layer.kind
    if kind not in COSTED_KINDS:
        return 0
    vi = volume(input_shape)
    vo = volume(layer_output_shape(layer, input_shape))
    p = params_of(layer)
    k2 = (layer.kernel_size or 0) ** 2
    if kind == "conv2d":
        return p + vi * k2 * layer.out_channels + vo
    if kind == "conv3d":
        return p + vi * k2 * layer.out_channels * layer.temporal_size + vo
    if kind == "ds_conv2d":
        return p + vi * (k2 + layer.out_channels) + vo
    if kind == "ds_conv3d":
        return p + vi * (k2 + layer.out_channels) * layer.temporal_size + vo
    if kind == "temporal_conv1d":
        return p + vi * layer.kernel_size * layer.out_channels + vo
    return p + vi + vo  # fc


def flops_of(layer: LayerSpec, input_shape) -> int:
    """FLOPs of one layer under the 2-per-multiply convention."""
    kind = layer.kind
    if kind not in COSTED_KINDS:
        return 0
    if kind == "fc":
        return 2 * layer.in_features * layer.out_features
    vo = volume(layer_output_shape(layer, input_shape))
    k2 = layer.kernel_size**2
    if kind == "conv2d":
        return 2 * k2 * layer.in_channels * vo
    if kind == "conv3d":
        return 2 * k2 * layer.temporal_size * layer.in_channels * vo
    if kind == "temporal_conv1d":
        return 2 * layer.kernel_size * layer.in_channels * vo
    positions, rem = divmod(vo, layer.out_channels)
    if rem:
        raise ValueError(f"output volume {vo} not divisible by channels {layer.out_channels}")
    base = 2 * layer.in_channels * (k2 + layer.out_channels) * positions
    if kind == "ds_conv3d":
        return base * layer.temporal_size
    return base


def _costed_tensor_count(graph: LayerGraph) -> int:
    return sum(
        len(weight_shapes(spec)) for _, spec in graph.nodes if spec.kind in COSTED_KINDS
    )


def aggregate(graph: LayerGraph, input_shape=None, dtype: str = "fp32") -> CostReport:
    """Cost every layer of a graph and sum the columns.

    size_bytes covers learned parameters only: 4 bytes each for fp32, or one
    byte each plus 8 bytes of scale/zero-point metadata per weight tensor for
    int8. Residual adds and normalization stats are excluded, matching the
    per-layer formulas.
    """
    if dtype not in ("fp32", "int8"):
        raise ValueError(f"dtype must be 'fp32' or 'int8', got {dtype!r}")
    if input_shape is None:
        input_shape = graph.input_shape
    if input_shape is None:
        raise ValueError("graph has no input_shape; pass one explicitly")
    _, shapes = shape_infer(graph, input_shape)
    per_layer = []
    totals = LayerCost()
    for node_id, spec in graph.nodes:
        in_shape = shapes[node_id][0]
        cost = LayerCost(
            params=params_of(spec),
            memory_accesses=mem_access_of(spec, in_shape),
            flops=flops_of(spec, in_shape),
        )
        per_layer.append((node_id, cost))
        totals = totals + cost
    if dtype == "fp32":
        size_bytes = 4 * totals.params
    else:
        size_bytes = totals.params + 8 * _costed_tensor_count(graph)
    return CostReport(per_layer=per_layer, totals=totals, size_bytes=size_bytes, dtype=dtype)


@dataclass(frozen=True)
class EfficiencyRatios:
    """Accuracy per unit of size, compute, parameters and memory traffic."""

    acc_per_mb: float
    acc_per_gflop: float
    acc_per_mparam: float
    acc_per_kaccess: float


def efficiency_ratios(source, accuracy: float) -> EfficiencyRatios:
    """Accuracy divided by size (MB), FLOPs (billions), params (millions) and
    memory accesses (thousands).

    ``source`` is either a CostReport (raw counts, converted to those units)
    or any object with size_mb / params_m / mem_kaccess / flops_b attributes,
    e.g. a reference preset already expressed in them.
    """
    if isinstance(source, CostReport):
        size_mb = source.size_bytes / 1e6
        flops_b = source.totals.flops / 1e9
        params_m = source.totals.params / 1e6
        mem_k = source.totals.memory_accesses / 1e3
    else:
        size_mb = source.size_mb
        flops_b = source.flops_b
        params_m = source.params_m
        mem_k = source.mem_kaccess
    return EfficiencyRatios(
        acc_per_mb=accuracy / size_mb,
        acc_per_gflop=accuracy / flops_b,
        acc_per_mparam=accuracy / params_m,
        acc_per_kaccess=accuracy / mem_k,
    )
