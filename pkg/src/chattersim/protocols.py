"""Sender and receiver state machines.

Senders share one event interface driven by the engine:

    on_token(token, now) -> packets
    on_ack(ack, now) -> packets
    on_timer(now) -> packets
    next_timer_deadline() -> time or None
    finished() -> bool

All three handlers return the packets to put on the wire at ``now``.
"""
from __future__ import annotations

import itertools
from typing import Optional

from .core import Ack, Packet, SessionConfig, Token


class Sender:
    def __init__(self, header_bytes=60, token_payload_bytes=8):
        self.header_bytes = header_bytes
        self.token_payload_bytes = token_payload_bytes
        self.eos_index: Optional[int] = None
        self._payload: dict[int, int] = {}
        self._ids = itertools.count()

    def _packet(self, indices, now, kind) -> Packet:
        size = self.header_bytes + sum(
            self._payload.get(i, self.token_payload_bytes) for i in indices)
        return Packet(next(self._ids), now, tuple(indices), kind, size)

    def _register(self, token: Token):
        self._payload[token.index] = token.payload_bytes
        if token.eos:
            self.eos_index = token.index

    def on_token(self, token: Token, now: int) -> list[Packet]:
        raise NotImplementedError

    def on_ack(self, ack: Ack, now: int) -> list[Packet]:
        raise NotImplementedError

    def on_timer(self, now: int) -> list[Packet]:
        return []

    def next_timer_deadline(self) -> Optional[int]:
        return None

    def finished(self) -> bool:
        raise NotImplementedError


class ChatterboxSender(Sender):
    """Piggybacks every unacknowledged token on the next outgoing packet.

    Each new token travels together with as many of the earliest unacked
    tokens as fit in ``capacity``. While tokens stay unacked and nothing has
    been sent for ``idle_resend_ms``, the earliest ``capacity`` unacked
    tokens are resent on their own. There is no loss-triggered
    retransmission.
    """

    def __init__(self, capacity=10, idle_resend_ms=200, **kw):
        super().__init__(**kw)
        self.capacity = capacity
        self.idle_resend_ms = idle_resend_ms
        self.unacked: list[int] = []
        self.last_send_time: Optional[int] = None

    def build_packet(self, new_token: Optional[Token], now: int) -> Packet:
        if new_token is None:
            if not self.unacked:
                raise ValueError("nothing to send: no new token and no unacked tokens")
            return self._packet(self.unacked[:self.capacity], now, "idle_resend")
        carried = [new_token.index] + self.unacked[:self.capacity - 1]
        return self._packet(carried, now, "initial")

    def on_token(self, token, now):
        self._register(token)
        packet = self.build_packet(token, now)
        self.unacked.append(token.index)
        self.last_send_time = now
        return [packet]

    def on_ack(self, ack, now):
        self.unacked = [i for i in self.unacked if not ack.holds(i)]
        return []

    def on_timer(self, now):
        deadline = self.next_timer_deadline()
        if deadline is None or now < deadline:
            return []
        self.last_send_time = now
        return [self.build_packet(None, now)]

    def next_timer_deadline(self):
        if not self.unacked:
            return None
        return self.last_send_time + self.idle_resend_ms

    def finished(self):
        # once EOS is sent, an empty unacked list means every token was acked
        return self.eos_index is not None and not self.unacked


class TcpLikeSender(Sender):
    """One packet per token, recovered by SACK-driven fast retransmit or RTO.

    Every ACK whose highest held index lies above an outstanding token counts
    as one gap report for that token; at ``dupthresh`` reports the token is
    retransmitted and its count restarts. The RTO retransmits the earliest
    outstanding token and backs off by ``rto_backoff`` up to ``rto_max``; any
    ACK that acks new data restores ``rto_base`` and restarts the timer.
    """

    def __init__(self, rto_base=1000, rto_backoff=2, dupthresh=3, rto_max=60_000, **kw):
        super().__init__(**kw)
        self.rto_base = rto_base
        self.rto_max = rto_max
        self.rto_backoff = rto_backoff
        self.dupthresh = dupthresh
        self.rto_current = rto_base
        self.rto_deadline: Optional[int] = None
        self.outstanding: dict[int, int] = {}  # index -> last send time, index order
        self.gap_reports: dict[int, int] = {}

    def on_token(self, token, now):
        self._register(token)
        self.outstanding[token.index] = now
        self.gap_reports[token.index] = 0
        if self.rto_deadline is None:
            self.rto_deadline = now + self.rto_current
        return [self._packet([token.index], now, "initial")]

    def _retransmit(self, index, now):
        self.outstanding[index] = now
        return self._packet([index], now, "retransmit")

    def on_ack(self, ack, now):
        newly = [i for i in self.outstanding if ack.holds(i)]
        for i in newly:
            del self.outstanding[i]
            del self.gap_reports[i]
        if newly:
            self.rto_current = self.rto_base
            self.rto_deadline = now + self.rto_current if self.outstanding else None
        packets = []
        top = ack.max_held
        for i in self.outstanding:
            if i >= top:
                break
            self.gap_reports[i] += 1
            if self.gap_reports[i] >= self.dupthresh:
                self.gap_reports[i] = 0
                packets.append(self._retransmit(i, now))
        return packets

    def on_timer(self, now):
        if self.rto_deadline is None or now < self.rto_deadline or not self.outstanding:
            return []
        earliest = next(iter(self.outstanding))
        self.rto_current = min(self.rto_current * self.rto_backoff, self.rto_max)
        self.rto_deadline = now + self.rto_current
        return [self._retransmit(earliest, now)]

    def next_timer_deadline(self):
        return self.rto_deadline if self.outstanding else None

    def finished(self):
        return self.eos_index is not None and not self.outstanding


class DuplicationSender(Sender):
    """Sends ``k`` copies of every packet its base sender emits, retransmissions included."""

    def __init__(self, base: Sender, k: int):
        if k < 2:
            raise ValueError("duplication factor must be >= 2")
        super().__init__(base.header_bytes, base.token_payload_bytes)
        self.base = base
        self.k = k

    def _copies(self, packets):
        out = []
        for pkt in packets:
            for copy in range(self.k):
                kind = pkt.kind if copy == 0 else "duplicate"
                out.append(Packet(next(self._ids), pkt.send_time, pkt.token_indices, kind,
                                  pkt.size_bytes))
        return out

    def on_token(self, token, now):
        return self._copies(self.base.on_token(token, now))

    def on_ack(self, ack, now):
        return self._copies(self.base.on_ack(ack, now))

    def on_timer(self, now):
        return self._copies(self.base.on_timer(now))

    def next_timer_deadline(self):
        return self.base.next_timer_deadline()

    def finished(self):
        return self.base.finished()


class Receiver:
    """Stores every token it sees and renders the longest contiguous prefix.

    Each arriving packet, duplicates included, is answered with one ACK
    describing the full set of held indices.
    """

    def __init__(self):
        self.rendered_count = 0
        self.pending: set[int] = set()  # held indices above the rendered prefix
        self.render_log: list[tuple[int, int]] = []

    @property
    def rendered_prefix(self) -> int:
        return self.rendered_count - 1

    @property
    def held(self) -> frozenset[int]:
        return frozenset(range(self.rendered_count)) | frozenset(self.pending)

    def on_packet(self, packet: Packet, now: int) -> tuple[list[int], Ack]:
        for i in packet.token_indices:
            if i >= self.rendered_count:
                self.pending.add(i)
        rendered = []
        while self.rendered_count in self.pending:
            self.pending.discard(self.rendered_count)
            rendered.append(self.rendered_count)
            self.render_log.append((self.rendered_count, now))
            self.rendered_count += 1
        return rendered, self.make_ack(packet.packet_id, now)

    def make_ack(self, packet_id: int, now: int) -> Ack:
        return Ack(packet_id, self.rendered_count, tuple(sorted(self.pending)), now)


def make_sender(cfg: SessionConfig) -> Sender:
    common = dict(header_bytes=cfg.header_bytes, token_payload_bytes=cfg.token_payload_bytes)
    if cfg.protocol == "chatterbox":
        return ChatterboxSender(cfg.packet_token_capacity, cfg.idle_resend_ms, **common)
    tcp = TcpLikeSender(cfg.rto_base, cfg.rto_backoff, cfg.dupthresh, cfg.rto_max_ms, **common)
    if cfg.protocol == "tcp_like":
        return tcp
    if cfg.protocol == "duplication":
        return DuplicationSender(tcp, cfg.dup_factor)
    raise ValueError(f"unknown protocol {cfg.protocol!r}")
