"""Estimate per-inference energy and CO2 for every comparison model.

Energy is additive over operations: multiplies and adds at their respective
per-op costs, plus one DRAM transfer per memory access. DRAM cost is quoted
as a range, so a low/default/high band is shown. The LRW Baseline's published
energy cannot be derived from its own FLOPs under this model; its row is
flagged rather than silently reproduced.
"""

from mobivsr import (
    IMPACT_OUTLIERS,
    PUBLISHED_IMPACT,
    efficiency_ratios,
    energy_per_inference,
    impact_report,
    published_models,
)

print(f"{'model':<22} {'computed mJ':>12} {'published':>10} {'CO2 mg':>8} "
      f"{'low..high mJ':>16}")
for preset in published_models():
    report = impact_report(preset)
    low = energy_per_inference(report.flops, report.mem_accesses, dram="low")
    high = energy_per_inference(report.flops, report.mem_accesses, dram="high")
    published_mj = PUBLISHED_IMPACT[preset.name][0]
    flag = "  [!]" if preset.name in IMPACT_OUTLIERS else ""
    print(f"{preset.name:<22} {report.energy_mj:>12.2f} {published_mj:>10.2f} "
          f"{report.co2_mg:>8.2f} {low:>7.2f}..{high:<7.2f}{flag}")

print()
print("[!] published energy inconsistent with this model's FLOPs column; excluded")
print("    from reproduction checks.")
print()

rows = {p.name: p for p in published_models()}
small = efficiency_ratios(rows["MobiVSR-1"], rows["MobiVSR-1"].top1)
sota = efficiency_ratios(rows["LSTM + ResNet (SOTA)"], rows["LSTM + ResNet (SOTA)"].top1)
print("Efficiency headlines (accuracy per unit):")
print(f"  per MB      : MobiVSR-1 {small.acc_per_mb:.2f}  vs  SOTA {sota.acc_per_mb:.2f}")
print(f"  per GFLOP   : MobiVSR-1 {small.acc_per_gflop:.2f}  vs  SOTA {sota.acc_per_gflop:.2f}")
print(f"  per Mparam  : MobiVSR-1 {small.acc_per_mparam:.2f}  vs  SOTA {sota.acc_per_mparam:.2f}")
print(f"  per Kaccess : MobiVSR-1 {small.acc_per_kaccess:.2f}  vs  SOTA {sota.acc_per_kaccess:.2f}")
