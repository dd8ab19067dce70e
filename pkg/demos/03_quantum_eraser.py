"""
Eraser bench: coincidence subsets carve fringes out of a flat screen
====================================================================

Reflected idlers keep the slit tag (D3/D4); transmitted idlers merge and
exit via two eraser ports (D1/D2) whose coincidence subsets carry
complementary fringe phases. The pooled screen stays structureless.
"""

from dualitysim import Protocol, ProtocolConfig, run_quantum_eraser
from dualitysim.cli import ascii_histogram

cfg = ProtocolConfig(protocol=Protocol.QUANTUM_ERASER, n_pairs=80_000, seed=7)
run = run_quantum_eraser(cfg)

print("per-detector subsets:")
for key in sorted(run.subsets):
    s = run.subsets[key]
    vis = "n/a" if s.visibility is None else f"{s.visibility:.3f}"
    print(
        f"  {key}: count={s.count:>5}  verdict={s.verdict.value:>8}  "
        f"visibility={vis}  slit_counts={s.slit_counts}"
    )
print(f"pooled: verdict={run.pooled.verdict.value}  visibility={run.pooled.visibility:.3f}")

c = run.coincidences
print(f"\ncoincidences: matched={c.matched}  unmatched={c.unmatched_signals}  ambiguous={c.ambiguities}")

# the same picture as fixed-width text, straight from the report writer
print()
for line in ascii_histogram(run).splitlines():
    if line.startswith(("protocol", "subset D1", "subset D3")):
        print(line)
print("(full histograms: simrun run <manifest> --formats ascii)")
