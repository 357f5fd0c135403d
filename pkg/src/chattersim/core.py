"""Shared domain types, session configuration and the packet-overflow diagnostic.

All times are integer milliseconds since session start.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Iterable, Optional

PROTOCOLS = ("chatterbox", "tcp_like", "duplication")
PACKET_KINDS = ("initial", "retransmit", "duplicate", "idle_resend")

_PROTOCOL_ALIASES = {
    "chatterbox": ("chatterbox", None),
    "tcp": ("tcp_like", None),
    "tcp_like": ("tcp_like", None),
    "tcp-like": ("tcp_like", None),
    "duplication": ("duplication", None),
}


class ConfigError(ValueError):
    """Raised by :func:`validate_config` with every violated invariant."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Token:
    index: int
    gen_time: int
    payload_bytes: int = 8
    eos: bool = False


@dataclass(frozen=True)
class Packet:
    packet_id: int
    send_time: int
    token_indices: tuple[int, ...]
    kind: str
    size_bytes: int

    def __post_init__(self):
        if not self.token_indices:
            raise ValueError("packet carries no tokens")
        if len(set(self.token_indices)) != len(self.token_indices):
            raise ValueError(f"duplicate token index in packet {self.token_indices}")
        if self.kind not in PACKET_KINDS:
            raise ValueError(f"unknown packet kind {self.kind!r}")


@dataclass(frozen=True)
class Ack:
    """Receiver feedback: every index below ``prefix`` is held, plus ``extras``."""

    acked_packet_id: int
    prefix: int
    extras: tuple[int, ...] = ()
    send_time: int = 0

    @classmethod
    def from_held(cls, acked_packet_id: int, held: Iterable[int], send_time: int) -> "Ack":
        held = set(held)
        prefix = 0
        while prefix in held:
            prefix += 1
        extras = tuple(sorted(i for i in held if i > prefix))
        return cls(acked_packet_id, prefix, extras, send_time)

    @property
    def held_indices(self) -> frozenset[int]:
        return frozenset(range(self.prefix)) | frozenset(self.extras)

    def holds(self, index: int) -> bool:
        return index < self.prefix or index in self.extras

    @property
    def max_held(self) -> int:
        """Largest held index, or -1 when nothing is held."""
        if self.extras:
            return self.extras[-1]
        return self.prefix - 1


@dataclass(frozen=True)
class SessionConfig:
    token_gap_ms: int = 100
    session_len_ms: int = 30_000
    rtt_ms: int = 400
    packet_token_capacity: int = 10
    header_bytes: int = 60
    token_payload_bytes: int = 8
    stall_threshold_ms: int = 200
    late_threshold_ms: int = 400
    idle_resend_ms: int = 200
    protocol: str = "chatterbox"
    dup_factor: int = 2
    channel: str = "markov"
    p: float = 0.9
    q: float = 0.5
    loss_prob_lossy: float = 0.9
    state_slot_ms: int = 100
    trace: Optional[str] = None
    loop_trace: bool = False
    ack_path_lossy: bool = False
    rto_base_ms: Optional[int] = None
    rto_backoff: int = 2
    rto_max_ms: int = 60_000
    dupthresh: int = 3
    n_tokens: Optional[int] = None
    gen_times: Optional[tuple[int, ...]] = None
    seed: int = 0

    @property
    def one_way_ms(self) -> int:
        return self.rtt_ms // 2

    @property
    def rto_base(self) -> int:
        if self.rto_base_ms is not None:
            return self.rto_base_ms
        return 2 * self.rtt_ms + 200

    @property
    def token_count(self) -> int:
        if self.gen_times is not None:
            return len(self.gen_times)
        if self.n_tokens is not None:
            return self.n_tokens
        return self.session_len_ms // self.token_gap_ms

    def token_times(self) -> list[int]:
        if self.gen_times is not None:
            return list(self.gen_times)
        return [i * self.token_gap_ms for i in range(self.token_count)]

    @property
    def protocol_label(self) -> str:
        if self.protocol == "duplication":
            return f"dup{self.dup_factor}"
        return self.protocol

    def replace(self, **changes) -> "SessionConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if d["gen_times"] is not None:
            d["gen_times"] = list(d["gen_times"])
        return d


def parse_protocol(name: str) -> tuple[str, Optional[int]]:
    """Map a protocol name or alias (``tcp``, ``dup3``) to ``(protocol, dup_factor)``."""
    key = name.strip().lower()
    if key in _PROTOCOL_ALIASES:
        return _PROTOCOL_ALIASES[key]
    for prefix in ("duplication-", "duplication", "dup-", "dup"):
        if key.startswith(prefix) and key[len(prefix):].isdigit():
            return "duplication", int(key[len(prefix):])
    raise ValueError(f"unknown protocol {name!r}")


def validate_config(cfg: SessionConfig) -> SessionConfig:
    """Return a normalized copy of ``cfg`` or raise :class:`ConfigError`.

    Every violated invariant is collected before raising, so the error lists
    all offending fields at once. Normalization resolves protocol aliases and
    is idempotent.
    """
    errors = []
    changes = {}

    try:
        proto, k = parse_protocol(cfg.protocol)
        changes["protocol"] = proto
        if k is not None:
            changes["dup_factor"] = k
    except ValueError as exc:
        errors.append(f"protocol: {exc}")
        proto = cfg.protocol
    dup_factor = changes.get("dup_factor", cfg.dup_factor)

    def positive(name):
        if getattr(cfg, name) <= 0:
            errors.append(f"{name} must be positive")

    for name in ("token_gap_ms", "session_len_ms", "header_bytes", "token_payload_bytes",
                 "state_slot_ms", "idle_resend_ms"):
        positive(name)
    if cfg.packet_token_capacity < 1:
        errors.append("packet_token_capacity must be >= 1")
    if cfg.rtt_ms <= 0:
        errors.append("rtt must be positive")
    elif cfg.rtt_ms % 2:
        errors.append("rtt must be even")
    for name in ("stall_threshold_ms", "late_threshold_ms"):
        if getattr(cfg, name) < 0:
            errors.append(f"{name} must be non-negative")
    for name in ("p", "q", "loss_prob_lossy"):
        if not 0.0 <= getattr(cfg, name) <= 1.0:
            errors.append(f"{name} out of [0,1]")
    if proto == "duplication" and dup_factor not in (2, 3, 4, 5):
        errors.append("dup_factor must be in {2,3,4,5}")
    if cfg.channel not in ("markov", "trace"):
        errors.append(f"channel must be 'markov' or 'trace', got {cfg.channel!r}")
    if cfg.channel == "trace" and not cfg.trace:
        errors.append("trace channel requires a trace path")
    if cfg.rto_base_ms is not None and cfg.rto_base_ms <= 0:
        errors.append("rto_base_ms must be positive")
    if cfg.rto_max_ms < cfg.rto_base:
        errors.append("rto_max_ms must be >= the base RTO")
    if cfg.rto_backoff < 1:
        errors.append("rto_backoff must be >= 1")
    if cfg.dupthresh < 1:
        errors.append("dupthresh must be >= 1")
    if cfg.n_tokens is not None and cfg.n_tokens < 1:
        errors.append("n_tokens must be >= 1")
    if cfg.gen_times is not None:
        times = tuple(int(t) for t in cfg.gen_times)
        if not times:
            errors.append("gen_times must be non-empty")
        elif times[0] < 0 or any(b <= a for a, b in zip(times, times[1:])):
            errors.append("gen_times must be non-negative and strictly increasing")
        changes["gen_times"] = times
    elif cfg.token_gap_ms > 0 and cfg.token_count < 1:
        errors.append("session_len_ms must cover at least one token")
    if not 0 <= cfg.seed < 2**64:
        errors.append("seed must fit in 64 bits")

    if errors:
        raise ConfigError(errors)
    return dataclasses.replace(cfg, **changes)


@dataclass(frozen=True)
class OverflowDiagnosis:
    holds: bool
    lhs_ms: int
    rhs_ms: int

    def __str__(self):
        rel = "≤" if self.holds else ">"
        return f"holds: {str(self.holds).lower()} ({self.lhs_ms} {rel} {self.rhs_ms})"


def overflow_condition(gap_ms: int, capacity: int, rtt_ms: int, loss_ms: int) -> OverflowDiagnosis:
    """Check whether unacked tokens can outgrow one packet.

    The backlog can exceed ``capacity`` when ``gap_ms * (capacity - 1)``
    is at most ``2 * rtt_ms + loss_ms``, where ``loss_ms`` is the length of
    a loss period.
    """
    if min(gap_ms, rtt_ms, loss_ms) < 0 or capacity < 1:
        raise ValueError("arguments must be non-negative and capacity >= 1")
    lhs = gap_ms * (capacity - 1)
    rhs = 2 * rtt_ms + loss_ms
    return OverflowDiagnosis(lhs <= rhs, lhs, rhs)


# --- flat key = value config files -----------------------------------------

_FIELD_TYPES = {f.name: f for f in dataclasses.fields(SessionConfig)}


def _coerce(name: str, raw: str):
    raw = raw.strip()
    if name == "trace":
        return None if raw.lower() in ("", "none") else raw
    if name in ("protocol", "channel"):
        return raw
    if name in ("rto_base_ms", "n_tokens") and raw.lower() in ("", "none"):
        return None
    if name == "gen_times":
        if raw.lower() in ("", "none"):
            return None
        return tuple(int(x) for x in raw.replace(",", " ").split())
    if name in ("loop_trace", "ack_path_lossy"):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    if name in ("p", "q", "loss_prob_lossy"):
        return float(raw)
    return int(raw)


def config_from_mapping(values: dict, base: Optional[SessionConfig] = None) -> SessionConfig:
    """Build a config from string or typed values keyed by field name (dashes allowed)."""
    base = base or SessionConfig()
    changes = {}
    for key, value in values.items():
        name = key.replace("-", "_")
        if name not in _FIELD_TYPES:
            raise ConfigError([f"unknown config key {key!r}"])
        changes[name] = _coerce(name, value) if isinstance(value, str) else value
    return dataclasses.replace(base, **changes)


def parse_config_text(text: str) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError([f"line {lineno}: expected 'key = value'"])
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def load_config(path, base: Optional[SessionConfig] = None) -> SessionConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_mapping(parse_config_text(fh.read()), base)


def dump_config(cfg: SessionConfig) -> str:
    lines = []
    for name, value in cfg.to_dict().items():
        if value is None:
            value = "none"
        elif isinstance(value, bool):
            value = str(value).lower()
        elif isinstance(value, list):
            value = ",".join(str(v) for v in value)
        lines.append(f"{name} = {value}")
    return "\n".join(lines) + "\n"
