"""
The bursty loss channel
=======================
"""

# %%
# Two states, Good and Lossy, change only at 100 ms slot boundaries. ``p``
# and ``q`` are the probabilities of staying in Good and Lossy respectively.
import numpy as np

from chattersim.channel import LOSSY, MarkovChannel, stationary_loss_rate

p, q = 0.9, 0.5
print(f"expected long-run loss: {stationary_loss_rate(p, q, 0.9):.3f}")

# %%
# Walk the chain for an hour of simulated time, sending one packet per slot.
ch = MarkovChannel.from_seed(7, p, q, 0.9)
states = np.empty(36_000, dtype=bool)
for k in range(states.size):
    ch.transmit(None, k * 100)
    states[k] = ch.state == LOSSY
print(f"observed loss: {ch.lost / ch.sent:.3f}")

# %%
# Run lengths of each state give the mean dwell times, which should sit
# near 1000 ms (Good) and 200 ms (Lossy).
edges = np.flatnonzero(np.diff(states.astype(int))) + 1
runs = np.split(states, edges)
lossy = [100 * len(r) for r in runs if r[0]]
good = [100 * len(r) for r in runs if not r[0]]
print(f"mean Good dwell {np.mean(good):.0f} ms, mean Lossy dwell {np.mean(lossy):.0f} ms")

# %%
# A one-line picture of the first 30 seconds: '#' marks Lossy slots.
print("".join("#" if s else "." for s in states[:300]))
