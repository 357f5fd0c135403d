"""Forward and reverse path models.

Every path has a constant one-way delay and never reorders. Loss comes from
a two-state (Good/Lossy) Markov chain evaluated on fixed time slots, or from
a replayed per-transmission loss trace.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import Packet, SimulationError

GOOD = "good"
LOSSY = "lossy"

_MASK64 = (1 << 64) - 1

# substream ids for derive_rng
FWD_STATE, FWD_LOSS, REV_STATE, REV_LOSS = range(4)


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_rng(seed: int, stream: int) -> random.Random:
    """Independent Mersenne Twister for one substream of a 64-bit session seed.

    The substream seed is ``splitmix64(splitmix64(seed) ^ stream)`` so streams
    of neighbouring session seeds do not overlap.
    """
    return random.Random(splitmix64(splitmix64(seed & _MASK64) ^ stream))


def stationary_loss_rate(p: float, q: float, loss_prob_lossy: float) -> float:
    """Long-run packet loss of the Markov channel (``p``, ``q`` are stay probabilities)."""
    if p >= 1.0 and q >= 1.0:
        raise ValueError("degenerate chain: p = q = 1 has no unique stationary distribution")
    return loss_prob_lossy * (1.0 - p) / ((1.0 - p) + (1.0 - q))


@dataclass(frozen=True)
class DeliveryOutcome:
    delivered: bool
    arrival_time: Optional[int] = None


class MarkovChannel:
    """Gilbert-Elliott style channel with slot-aligned state changes.

    ``p`` is the probability of staying Good across a slot boundary and ``q``
    the probability of staying Lossy, so mean dwell times are
    ``slot_ms / (1 - p)`` and ``slot_ms / (1 - q)``.

    State transitions and per-packet loss draws use separate generators, so
    the state trajectory for a given seed does not depend on how many packets
    a protocol sends.
    """

    def __init__(self, p, q, loss_prob_lossy=0.9, *, slot_ms=100, one_way_ms=200,
                 state_rng=None, loss_rng=None, state=GOOD, loss_prob_good=0.0):
        self.p = p
        self.q = q
        self.loss_prob_lossy = loss_prob_lossy
        self.loss_prob_good = loss_prob_good
        self.slot_ms = slot_ms
        self.one_way_ms = one_way_ms
        self.state = state
        self.slot_start = 0
        self.state_rng = state_rng or random.Random(0)
        self.loss_rng = loss_rng or random.Random(1)
        self.sent = 0
        self.lost = 0

    @classmethod
    def from_seed(cls, seed, p, q, loss_prob_lossy=0.9, *, reverse=False, **kw):
        streams = (REV_STATE, REV_LOSS) if reverse else (FWD_STATE, FWD_LOSS)
        return cls(p, q, loss_prob_lossy, state_rng=derive_rng(seed, streams[0]),
                   loss_rng=derive_rng(seed, streams[1]), **kw)

    def advance_to(self, now: int) -> str:
        if now < self.slot_start:
            raise ValueError(f"cannot rewind channel from {self.slot_start} to {now}")
        boundaries = (now - self.slot_start) // self.slot_ms
        rand = self.state_rng.random
        for _ in range(boundaries):
            stay = self.p if self.state == GOOD else self.q
            if rand() >= stay:
                self.state = LOSSY if self.state == GOOD else GOOD
        self.slot_start += boundaries * self.slot_ms
        return self.state

    @property
    def loss_prob(self) -> float:
        return self.loss_prob_lossy if self.state == LOSSY else self.loss_prob_good

    def transmit(self, packet: Optional[Packet], now: int) -> DeliveryOutcome:
        self.advance_to(now)
        self.sent += 1
        if self.loss_rng.random() < self.loss_prob:
            self.lost += 1
            return DeliveryOutcome(False)
        return DeliveryOutcome(True, now + self.one_way_ms)


@dataclass(frozen=True)
class LossTrace:
    """Per-transmission loss outcomes; ``True`` means the packet was lost."""

    outcomes: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(bool(x) for x in self.outcomes))

    def __len__(self):
        return len(self.outcomes)

    @property
    def loss_fraction(self) -> float:
        return sum(self.outcomes) / len(self.outcomes) if self.outcomes else 0.0


class TraceChannel:
    """Replays a :class:`LossTrace`, one outcome per transmitted packet."""

    def __init__(self, trace: LossTrace | Sequence[bool], *, one_way_ms=200, loop=False):
        self.trace = trace if isinstance(trace, LossTrace) else LossTrace(tuple(trace))
        self.one_way_ms = one_way_ms
        self.loop = loop
        self.cursor = 0
        self.sent = 0
        self.lost = 0

    def transmit(self, packet: Optional[Packet], now: int) -> DeliveryOutcome:
        n = len(self.trace)
        if self.cursor >= n:
            if not self.loop or n == 0:
                raise SimulationError(f"trace exhausted at packet {self.cursor}")
            self.cursor = 0
        lost = self.trace.outcomes[self.cursor]
        self.cursor += 1
        self.sent += 1
        if lost:
            self.lost += 1
            return DeliveryOutcome(False)
        return DeliveryOutcome(True, now + self.one_way_ms)


class LosslessChannel:
    def __init__(self, *, one_way_ms=200):
        self.one_way_ms = one_way_ms
        self.sent = 0
        self.lost = 0

    def transmit(self, packet, now: int) -> DeliveryOutcome:
        self.sent += 1
        return DeliveryOutcome(True, now + self.one_way_ms)
