"""
When does the backlog outgrow one packet?
=========================================

Chatterbox carries at most T tokens per packet. If tokens arrive every G ms
and acknowledgements are held up by two RTTs plus a loss period L, the
unacked backlog can exceed what one packet holds.
"""

# %%
from chattersim import SessionConfig, run_session
from chattersim.core import overflow_condition

print(overflow_condition(100, 10, 400, 200))
print(overflow_condition(100, 10, 100, 0))

# %%
# Sweep the loss period for a small packet to find where overflow begins.
for loss in range(0, 1001, 200):
    print(f"T=4 rtt=50 L={loss:>4}: {overflow_condition(100, 4, 50, loss)}")

# %%
# With T=1 only the new token fits, so a single early loss is never
# repaired by piggybacking and the idle resend has to step in.
trace = [True] + [False] * 50
for capacity in (1, 10):
    r = run_session(SessionConfig(n_tokens=6, packet_token_capacity=capacity), trace=trace)
    print(f"T={capacity:>2}: render times {r.render_times}")
