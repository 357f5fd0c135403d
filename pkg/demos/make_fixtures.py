"""Regenerate the bursty loss traces under tests/fixtures/traces.

Each trace has 2000 outcomes drawn from the default Markov channel at one
packet per 100 ms slot, with seed 1000 + k for trace k.
"""
import pathlib

from chattersim.traceio import synthesize_trace

out = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "traces"
out.mkdir(parents=True, exist_ok=True)
for k in range(30):
    trace = synthesize_trace(2000, 0.9, 0.5, 0.9, seed=1000 + k,
                             path=out / f"bursty_{k:02d}.csv")
    print(f"bursty_{k:02d}.csv  loss {trace.loss_fraction:.3f}")
