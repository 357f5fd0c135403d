"""
Three tokens, two losses
========================

Three tokens are generated 100 ms apart over a 400 ms RTT path, and the first
two packets are lost. This script shows how each sender recovers.
"""

# %%
# Chatterbox piggybacks every unacked token on each new packet. The third
# packet carries tokens 2, 0 and 1, so its arrival renders all three at once.
from chattersim import SessionConfig, run_session

LOSSES = [True, True, False] + [False] * 20
cfg = SessionConfig(n_tokens=3, rtt_ms=400)

chatter = run_session(cfg.replace(protocol="chatterbox"), trace=LOSSES)
for pkt in chatter.packet_log:
    fate = f"arrives {pkt.arrival_time}" if pkt.delivered else "lost"
    print(f"t={pkt.send_time:>5}  {pkt.kind:<12} tokens {pkt.token_indices}  {fate}")
print("chatterbox render times:", chatter.render_times)

# %%
# The TCP-like sender waits for gap reports or its RTO. Token 0 blocks the
# others until its retransmission lands.
tcp = run_session(cfg.replace(protocol="tcp_like"), trace=LOSSES)
print("tcp_like render times:  ", tcp.render_times)

# %%
# Duplication sends two copies of everything. With the first four copies
# lost it still needs a retransmission for token 0.
dup = run_session(cfg.replace(protocol="duplication", dup_factor=2),
                  trace=[True] * 4 + [False] * 40)
print("dup2 render times:      ", dup.render_times)
