"""Walk through the layer cost model on a single convolution.

The analytical formulas are checked live against an instrumented forward
pass of the reference kernel: the counted multiplies/adds/reads/writes of
the actual loops must equal the closed forms.
"""

import numpy as np

from mobivsr import (
    LayerGraph,
    LayerSpec,
    Tensor,
    counted_forward,
    flops_of,
    init_weights,
    mem_access_of,
    params_of,
)

spec = LayerSpec("conv2d", in_channels=3, out_channels=64, kernel_size=3)
in_shape = (3, 100, 100)

print("A 3x3 convolution, 3 -> 64 channels, on a 100x100 input (stride 1, same padding).")
print()
print(f"  parameters        : {params_of(spec):>12,}   (K^2 * Cin * Cout)")
print(f"  memory accesses   : {mem_access_of(spec, in_shape):>12,}   "
      "(weights once + one read per multiply + output writes)")
print(f"  FLOPs             : {flops_of(spec, in_shape):>12,}   (2 * K^2 * Cin * Vout)")
print()

rng = np.random.default_rng(0)
x = Tensor.from_array(rng.normal(size=in_shape).astype(np.float32))
weights = init_weights(LayerGraph(nodes=[("conv", spec)]), seed=1)["conv"]
_, ledger = counted_forward(spec, x, weights)

print("Instrumented execution of the same layer:")
print(f"  multiplies {ledger.multiplies:,}  adds {ledger.adds:,}")
print(f"  param reads {ledger.param_reads:,}  activation reads {ledger.activation_reads:,}"
      f"  output writes {ledger.output_writes:,}")
print()
assert ledger.flops() == flops_of(spec, in_shape)
assert ledger.memory_accesses() == mem_access_of(spec, in_shape)
print("Counted totals match the analytical formulas exactly.")

sep = LayerSpec("ds_conv2d", in_channels=3, out_channels=64, kernel_size=3)
print()
print("The depthwise-separable factorization of the same layer:")
print(f"  parameters {params_of(sep):,} ({params_of(spec) / params_of(sep):.1f}x fewer)")
print(f"  FLOPs      {flops_of(sep, in_shape):,} "
      f"({flops_of(spec, in_shape) / flops_of(sep, in_shape):.1f}x fewer)")
