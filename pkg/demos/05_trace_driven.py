"""
Replaying recorded loss
=======================

Sessions replay the committed bursty traces in tests/fixtures/traces, one
trace per session, looping when a session outlasts its trace.
"""

# %%
import pathlib

from chattersim.bench import ExperimentGrid, compare, format_comparison, run_experiment
from chattersim.traceio import read_loss_trace

trace_dir = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "traces"
traces = tuple(read_loss_trace(p) for p in sorted(trace_dir.glob("bursty_*.csv")))
print(f"{len(traces)} traces, mean loss {sum(t.loss_fraction for t in traces) / len(traces):.3f}")

# %%
rows = run_experiment(ExperimentGrid(protocols=("chatterbox", "tcp_like", "dup2"), rtts=(400,),
                                     n_sessions=len(traces), traces=traces))
for r in rows:
    print(f"{r.protocol:<11} stall {r.stall_ratio_mean:.3f}  late {r.late_frac_mean:.3f}  "
          f"p95 gap {r.p95_gap_mean_ms:.0f} ms")
print()
print(format_comparison(compare(rows), "tcp_like"))
