"""
Default benchmark cell
======================

Thirty 30-second sessions per protocol at p=0.9, q=0.5 and a 400 ms RTT.
All protocols see the same seeds, so the channel trajectories match across
protocols.
"""

# %%
from chattersim.bench import ExperimentGrid, compare, format_comparison, format_rows, run_experiment

grid = ExperimentGrid(rtts=(400,), channels=((0.9, 0.5),), n_sessions=30)
rows = run_experiment(grid)
print(format_rows(rows))

# %%
# Reductions are percentages relative to the TCP-like row of the same cell.
print()
print(format_comparison(compare(rows, "tcp_like"), "tcp_like"))

# %%
# Chatterbox trades a modest amount of extra bytes for far fewer stalls;
# duplication pays K-1 extra copies of every packet.
for r in rows:
    print(f"{r.protocol:<11} stall {r.stall_ratio_mean:.3f}  redundancy {r.redundancy_mean:.2f}")
