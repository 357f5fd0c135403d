"""Deterministic discrete-event loop for one token-streaming session."""
from __future__ import annotations

import dataclasses
import heapq
import itertools
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .channel import LosslessChannel, LossTrace, MarkovChannel, TraceChannel
from .core import SessionConfig, SimulationError, Token, validate_config
from .protocols import Receiver, make_sender

# event kinds double as tie-break priority at equal times
FWD_ARRIVAL, ACK_ARRIVAL, TOKEN_GEN, SENDER_TIMER = range(4)
COMPLETION_CAP_FACTOR = 10
RTO_CAP_INTERVALS = 100


@dataclass(frozen=True)
class PacketRecord:
    packet_id: int
    send_time: int
    kind: str
    token_indices: tuple[int, ...]
    size_bytes: int
    delivered: bool
    arrival_time: Optional[int]


@dataclass(frozen=True)
class AckRecord:
    acked_packet_id: int
    send_time: int
    prefix: int
    extras: tuple[int, ...]
    delivered: bool
    arrival_time: Optional[int]


@dataclass
class SessionResult:
    config: SessionConfig
    gen_times: list[int]
    render_times: list[int]
    packet_log: list[PacketRecord] = field(default_factory=list)
    ack_log: list[AckRecord] = field(default_factory=list)
    end_time: int = 0

    @property
    def n_tokens(self) -> int:
        return len(self.gen_times)

    @property
    def packets_sent(self) -> int:
        return len(self.packet_log)

    @property
    def packets_lost(self) -> int:
        return sum(not r.delivered for r in self.packet_log)

    @property
    def observed_loss_rate(self) -> float:
        return self.packets_lost / self.packets_sent if self.packet_log else 0.0

    @property
    def total_bytes(self) -> int:
        return sum(r.size_bytes for r in self.packet_log)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "gen_times": list(self.gen_times),
            "render_times": list(self.render_times),
            "end_time": self.end_time,
            "observed_loss_rate": self.observed_loss_rate,
            "packet_log": [dataclasses.asdict(r) for r in self.packet_log],
            "ack_log": [dataclasses.asdict(r) for r in self.ack_log],
        }

    def to_json(self, indent=None) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "SessionResult":
        cfg = dict(d["config"])
        if cfg.get("gen_times") is not None:
            cfg["gen_times"] = tuple(cfg["gen_times"])
        packets = [PacketRecord(**{**r, "token_indices": tuple(r["token_indices"])})
                   for r in d["packet_log"]]
        acks = [AckRecord(**{**r, "extras": tuple(r["extras"])}) for r in d["ack_log"]]
        return cls(SessionConfig(**cfg), list(d["gen_times"]), list(d["render_times"]),
                   packets, acks, d["end_time"])


def _forward_channel(cfg: SessionConfig, trace: Optional[LossTrace]):
    if cfg.channel == "trace" or trace is not None:
        if trace is None:
            from .traceio import read_loss_trace
            trace = read_loss_trace(cfg.trace)
        return TraceChannel(trace, one_way_ms=cfg.one_way_ms, loop=cfg.loop_trace)
    return MarkovChannel.from_seed(cfg.seed, cfg.p, cfg.q, cfg.loss_prob_lossy,
                                   slot_ms=cfg.state_slot_ms, one_way_ms=cfg.one_way_ms)


def _reverse_channel(cfg: SessionConfig):
    if cfg.ack_path_lossy:
        return MarkovChannel.from_seed(cfg.seed, cfg.p, cfg.q, cfg.loss_prob_lossy, reverse=True,
                                       slot_ms=cfg.state_slot_ms, one_way_ms=cfg.one_way_ms)
    return LosslessChannel(one_way_ms=cfg.one_way_ms)


def run_session(cfg: SessionConfig, trace: Optional[LossTrace | Sequence[bool]] = None,
                *, fwd_channel=None, rev_channel=None) -> SessionResult:
    """Simulate one session until the sender has every token acknowledged.

    ``trace`` overrides the configured forward channel with a replayed loss
    trace; ``fwd_channel`` / ``rev_channel`` accept any object with a
    ``transmit(packet, now)`` method.
    """
    cfg = validate_config(cfg)
    if trace is not None and not isinstance(trace, LossTrace):
        trace = LossTrace(tuple(trace))
    fwd = fwd_channel or _forward_channel(cfg, trace)
    rev = rev_channel or _reverse_channel(cfg)
    sender = make_sender(cfg)
    receiver = Receiver()

    gen_times = cfg.token_times()
    n = len(gen_times)
    render_times: list[Optional[int]] = [None] * n
    result = SessionResult(cfg, gen_times, render_times)
    # tail tokens on a lossy ACK path may wait out many maximal RTOs
    cap = (COMPLETION_CAP_FACTOR * max(cfg.session_len_ms, gen_times[-1] + cfg.token_gap_ms)
           + RTO_CAP_INTERVALS * cfg.rto_max_ms)

    heap: list = []
    seq = itertools.count()
    timers: set[int] = set()

    def push(t, kind, payload=None):
        heapq.heappush(heap, (t, kind, next(seq), payload))

    def send(packets, now):
        for pkt in packets:
            out = fwd.transmit(pkt, now)
            result.packet_log.append(PacketRecord(
                pkt.packet_id, now, pkt.kind, pkt.token_indices, pkt.size_bytes,
                out.delivered, out.arrival_time))
            if out.delivered:
                push(out.arrival_time, FWD_ARRIVAL, pkt)

    push(gen_times[0], TOKEN_GEN, 0)
    now = 0
    while not sender.finished():
        if not heap:
            raise SimulationError("event queue drained before the session completed")
        now, kind, _, payload = heapq.heappop(heap)
        if now > cap:
            raise SimulationError(f"session did not complete within {cap} ms")
        if kind == TOKEN_GEN:
            i = payload
            token = Token(i, gen_times[i], cfg.token_payload_bytes, eos=i == n - 1)
            if i + 1 < n:
                push(gen_times[i + 1], TOKEN_GEN, i + 1)
            send(sender.on_token(token, now), now)
        elif kind == FWD_ARRIVAL:
            rendered, ack = receiver.on_packet(payload, now)
            for i in rendered:
                render_times[i] = now
            out = rev.transmit(ack, now)
            result.ack_log.append(AckRecord(ack.acked_packet_id, now, ack.prefix, ack.extras,
                                            out.delivered, out.arrival_time))
            if out.delivered:
                push(out.arrival_time, ACK_ARRIVAL, ack)
        elif kind == ACK_ARRIVAL:
            send(sender.on_ack(payload, now), now)
        else:
            timers.discard(now)
            send(sender.on_timer(now), now)

        deadline = sender.next_timer_deadline()
        if deadline is not None:
            deadline = max(deadline, now)
            if deadline not in timers:
                timers.add(deadline)
                push(deadline, SENDER_TIMER)

    result.end_time = now
    if any(t is None for t in render_times):
        raise SimulationError("sender finished but some tokens were never rendered")
    return result


def run_sessions(cfg: SessionConfig, n_sessions: int, base_seed: int = 0,
                 traces: Optional[Sequence[LossTrace]] = None) -> list[SessionResult]:
    """Run ``n_sessions`` with seeds ``base_seed + k``; session k replays ``traces[k % len]``."""
    if n_sessions < 1:
        raise ValueError("n_sessions must be >= 1")
    results = []
    for k in range(n_sessions):
        trace = traces[k % len(traces)] if traces else None
        try:
            results.append(run_session(cfg.replace(seed=base_seed + k), trace))
        except SimulationError as exc:
            raise SimulationError(f"session {k}: {exc}") from exc
    return results
