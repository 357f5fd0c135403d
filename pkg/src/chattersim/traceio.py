"""Read, write and synthesize per-packet loss traces.

File format: UTF-8 CSV with header ``seq,lost`` and one row per transmitted
packet; ``seq`` runs 0..n-1 and ``lost`` is 0 or 1.
"""
from __future__ import annotations

import csv
import io
import os
from typing import IO, Optional

from .channel import GOOD, LossTrace, MarkovChannel


class TraceFormatError(ValueError):
    pass


def parse_loss_trace(stream: IO[str] | str) -> LossTrace:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["seq", "lost"]:
        raise TraceFormatError("missing header 'seq,lost' (line 1)")
    outcomes = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise TraceFormatError(f"expected 2 fields, got {len(row)} (line {line})")
        try:
            seq, lost = int(row[0]), int(row[1])
        except ValueError:
            raise TraceFormatError(f"non-integer field (line {line})") from None
        if seq != len(outcomes):
            raise TraceFormatError(f"seq must be {len(outcomes)}, got {seq} (line {line})")
        if lost not in (0, 1):
            raise TraceFormatError(f"lost must be 0 or 1 (line {line})")
        outcomes.append(bool(lost))
    if not outcomes:
        raise TraceFormatError("empty trace")
    return LossTrace(tuple(outcomes))


def read_loss_trace(path) -> LossTrace:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_loss_trace(fh)


def format_loss_trace(trace: LossTrace) -> str:
    rows = ["seq,lost"]
    rows.extend(f"{i},{int(lost)}" for i, lost in enumerate(trace.outcomes))
    return "\n".join(rows) + "\n"


def write_loss_trace(trace: LossTrace, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_loss_trace(trace))


def synthesize_trace(n: int, p=0.9, q=0.5, loss_prob_lossy=0.9, seed=0, *,
                     spacing_ms=100, slot_ms=100, path: Optional[os.PathLike] = None) -> LossTrace:
    """Sample ``n`` packet outcomes from the Markov channel, one every ``spacing_ms``.

    The chain starts Good. When ``path`` is given the canonical CSV is written
    there too.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    chan = MarkovChannel.from_seed(seed, p, q, loss_prob_lossy, slot_ms=slot_ms, state=GOOD)
    trace = LossTrace(tuple(not chan.transmit(None, i * spacing_ms).delivered for i in range(n)))
    if path is not None:
        write_loss_trace(trace, path)
    return trace
