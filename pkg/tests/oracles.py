"""Independent reference computations used to freeze expected values."""


def lossless_chatterbox_packets(n_tokens, gap_ms, rtt_ms, capacity, idle_ms):
    """Token lists of every packet Chatterbox sends over a perfect channel.

    Scans time one millisecond at a time instead of using an event queue.
    Over a perfect channel the ACK arriving at ``t`` covers every token
    generated at or before ``t - rtt``; ACKs at ``t`` are applied before a
    token generated at ``t`` is sent.
    """
    packets = []
    unacked = []
    send_times = set()
    last_send = None
    t = 0
    while True:
        if t - rtt_ms in send_times:
            unacked = [i for i in unacked if i * gap_ms > t - rtt_ms]
        if t % gap_ms == 0 and t // gap_ms < n_tokens:
            i = t // gap_ms
            packets.append([i] + unacked[:capacity - 1])
            unacked.append(i)
            send_times.add(t)
            last_send = t
        elif unacked and t - last_send >= idle_ms:
            packets.append(unacked[:capacity])
            send_times.add(t)
            last_send = t
        if t // gap_ms >= n_tokens and not unacked:
            return packets
        t += 1
