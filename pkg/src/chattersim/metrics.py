"""Playback-quality and overhead metrics computed from a finished session."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence


class MetricError(ValueError):
    pass


def _gaps(timeline: Sequence[int]) -> list[int]:
    if len(timeline) < 2:
        raise MetricError("undefined stall ratio: fewer than 2 rendered tokens")
    return [b - a for a, b in zip(timeline, timeline[1:])]


def stall_time(timeline: Sequence[int], threshold_ms: int = 200, *, excess: bool = False) -> int:
    """Total time spent in inter-render gaps longer than ``threshold_ms``.

    By default a stalled gap counts in full; with ``excess`` only the part
    beyond the threshold counts.
    """
    stalled = [g for g in _gaps(timeline) if g > threshold_ms]
    if excess:
        return sum(g - threshold_ms for g in stalled)
    return sum(stalled)


def stall_ratio(timeline: Sequence[int], threshold_ms: int = 200, *, excess: bool = False,
                span_ms: Optional[int] = None) -> float:
    """Fraction of the render span (first to last render) spent stalled.

    ``span_ms`` replaces the denominator, e.g. with the session length.
    """
    stalled = stall_time(timeline, threshold_ms, excess=excess)
    span = span_ms if span_ms is not None else timeline[-1] - timeline[0]
    return stalled / span if span > 0 else 0.0


def redundancy_rate(packet_sizes: Sequence[int], n_tokens: int, header_bytes: int = 60,
                    token_payload_bytes: int = 8) -> float:
    """Bytes sent beyond one single-token packet per token, relative to that ideal.

    Not clamped: a scheme that batches new tokens can come out negative.
    """
    ideal = n_tokens * (header_bytes + token_payload_bytes)
    return (sum(packet_sizes) - ideal) / ideal


def late_fraction(timeline: Sequence[int], gen_times: Sequence[int],
                  late_threshold_ms: int = 400) -> float:
    if len(timeline) != len(gen_times):
        raise MetricError("render and generation timelines differ in length")
    if not timeline:
        return 0.0
    late = sum(r - g > late_threshold_ms for r, g in zip(timeline, gen_times))
    return late / len(timeline)


def p95_gap(timeline: Sequence[int]) -> int:
    """95th percentile inter-render gap, nearest-rank method."""
    gaps = sorted(_gaps(timeline))
    rank = -(-95 * len(gaps) // 100)
    return gaps[rank - 1]


@dataclass(frozen=True)
class MetricsReport:
    stall_ratio: float
    redundancy_rate: float
    late_fraction: float
    p95_gap_ms: int
    total_bytes_sent: int
    observed_loss_rate: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)

    def format_table(self) -> str:
        rows = [
            ("stall_ratio", f"{self.stall_ratio:.4f}"),
            ("redundancy_rate", f"{self.redundancy_rate:.4f}"),
            ("late_fraction", f"{self.late_fraction:.4f}"),
            ("p95_gap_ms", str(self.p95_gap_ms)),
            ("total_bytes_sent", str(self.total_bytes_sent)),
            ("observed_loss_rate", f"{self.observed_loss_rate:.4f}"),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v:>10}" for k, v in rows)


def compute_metrics(result, *, stall_excess: bool = False,
                    stall_denominator: str = "span") -> MetricsReport:
    """Build a :class:`MetricsReport` from a :class:`~chattersim.engine.SessionResult`.

    ``stall_denominator`` is ``"span"`` (first to last render) or
    ``"session"`` (the configured session length).
    """
    cfg = result.config
    if stall_denominator not in ("span", "session"):
        raise MetricError(f"unknown stall denominator {stall_denominator!r}")
    span = cfg.session_len_ms if stall_denominator == "session" else None
    timeline = result.render_times
    if len(timeline) >= 2:
        stall = stall_ratio(timeline, cfg.stall_threshold_ms, excess=stall_excess, span_ms=span)
        p95 = p95_gap(timeline)
    else:
        stall, p95 = 0.0, 0
    return MetricsReport(
        stall_ratio=stall,
        redundancy_rate=redundancy_rate([r.size_bytes for r in result.packet_log],
                                        result.n_tokens, cfg.header_bytes,
                                        cfg.token_payload_bytes),
        late_fraction=late_fraction(timeline, result.gen_times, cfg.late_threshold_ms),
        p95_gap_ms=p95,
        total_bytes_sent=result.total_bytes,
        observed_loss_rate=result.observed_loss_rate,
    )
