"""
How the loss pattern changes the picture
========================================
"""

# %%
# Three channels with the same loss rate per Lossy slot but different
# burstiness: the default, frequent short bursts, and long sticky bursts.
from chattersim.bench import ExperimentGrid, percent_reduction, run_experiment
from chattersim.channel import stationary_loss_rate

channels = ((0.9, 0.5), (0.5, 0.5), (0.9, 0.8))
for p, q in channels:
    print(f"p={p} q={q}: long-run loss {stationary_loss_rate(p, q, 0.9):.3f}")

# %%
rows = run_experiment(ExperimentGrid(protocols=("chatterbox", "tcp_like", "dup2"), rtts=(400,),
                                     channels=channels, n_sessions=30))
by_cell = {}
for r in rows:
    by_cell.setdefault((r.p, r.q), {})[r.protocol] = r

# %%
# Long bursts (q=0.8) hurt everyone. Piggybacking cannot help while the
# path delivers nothing, so the relative gain over TCP shrinks.
for (p, q), cell in by_cell.items():
    c, t = cell["chatterbox"].stall_ratio_mean, cell["tcp_like"].stall_ratio_mean
    print(f"p={p} q={q}: chatterbox {c:.3f}  tcp {t:.3f}  dup2 "
          f"{cell['dup2'].stall_ratio_mean:.3f}  reduction {percent_reduction(t, c):.1f}%")
