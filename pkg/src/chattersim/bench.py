"""Parameter sweeps over protocols, RTTs and loss patterns, with per-cell aggregates."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .channel import LossTrace
from .core import SessionConfig, SimulationError, parse_protocol
from .engine import run_sessions
from .metrics import compute_metrics

DEFAULT_PROTOCOLS = ("chatterbox", "tcp_like", "dup2", "dup3", "dup4", "dup5")

CSV_COLUMNS = ("protocol", "rtt_ms", "p", "q", "n", "stall_ratio_mean", "stall_ratio_std",
               "redundancy_mean", "redundancy_std", "late_frac_mean", "p95_gap_mean_ms",
               "observed_loss_mean")


@dataclass(frozen=True)
class ExperimentGrid:
    """Cartesian sweep. With ``traces`` set, the channel axis is replaced by trace replay."""

    protocols: tuple[str, ...] = DEFAULT_PROTOCOLS
    rtts: tuple[int, ...] = (100, 200, 400)
    channels: tuple[tuple[float, float], ...] = ((0.9, 0.5), (0.5, 0.5), (0.9, 0.8))
    n_sessions: int = 30
    base_seed: int = 0
    base_config: SessionConfig = field(default_factory=SessionConfig)
    traces: Optional[tuple[LossTrace, ...]] = None

    def validate(self):
        if not self.protocols or not self.rtts or not (self.channels or self.traces):
            raise ValueError("experiment grid has an empty axis")
        if self.n_sessions < 1:
            raise ValueError("n_sessions must be >= 1")
        for name in self.protocols:
            parse_protocol(name)

    def cells(self):
        chans = [None] if self.traces else list(self.channels)
        for rtt in self.rtts:
            for chan in chans:
                for proto in self.protocols:
                    yield proto, rtt, chan


@dataclass(frozen=True)
class AggregateRow:
    protocol: str
    rtt_ms: int
    p: Optional[float]
    q: Optional[float]
    n: int
    stall_ratio_mean: float
    stall_ratio_std: float
    redundancy_mean: float
    redundancy_std: float
    late_frac_mean: float
    late_frac_std: float
    p95_gap_mean_ms: float
    observed_loss_mean: float

    @property
    def cell(self) -> tuple:
        return self.rtt_ms, self.p, self.q

    @property
    def stall_ratio_ci95(self) -> float:
        """Half-width of the normal-approximation 95% interval on the mean."""
        return 1.96 * self.stall_ratio_std / math.sqrt(self.n)

    def csv_values(self) -> list[str]:
        chan = ("trace", "trace") if self.p is None else (f"{self.p:g}", f"{self.q:g}")
        return [self.protocol, str(self.rtt_ms), *chan, str(self.n),
                f"{self.stall_ratio_mean:.6f}", f"{self.stall_ratio_std:.6f}",
                f"{self.redundancy_mean:.6f}", f"{self.redundancy_std:.6f}",
                f"{self.late_frac_mean:.6f}", f"{self.p95_gap_mean_ms:.3f}",
                f"{self.observed_loss_mean:.6f}"]


def _std(x) -> float:
    return float(np.std(x, ddof=1)) if len(x) > 1 else 0.0


def aggregate(protocol: str, rtt_ms: int, chan, reports) -> AggregateRow:
    stall = [m.stall_ratio for m in reports]
    red = [m.redundancy_rate for m in reports]
    late = [m.late_fraction for m in reports]
    p, q = chan if chan is not None else (None, None)
    return AggregateRow(
        protocol, rtt_ms, p, q, len(reports),
        float(np.mean(stall)), _std(stall), float(np.mean(red)), _std(red),
        float(np.mean(late)), _std(late),
        float(np.mean([m.p95_gap_ms for m in reports])),
        float(np.mean([m.observed_loss_rate for m in reports])),
    )


def _cell_config(grid: ExperimentGrid, proto, rtt, chan) -> SessionConfig:
    name, k = parse_protocol(proto)
    changes = dict(protocol=name, rtt_ms=rtt)
    if k is not None:
        changes["dup_factor"] = k
    if chan is not None:
        changes.update(channel="markov", p=chan[0], q=chan[1])
    else:
        changes["loop_trace"] = True
    return grid.base_config.replace(**changes)


def run_cell(grid: ExperimentGrid, proto: str, rtt: int, chan) -> AggregateRow:
    cfg = _cell_config(grid, proto, rtt, chan)
    try:
        results = run_sessions(cfg, grid.n_sessions, grid.base_seed, grid.traces)
    except SimulationError as exc:
        where = f"{proto}, rtt={rtt}" + (f", p={chan[0]}, q={chan[1]}" if chan else ", trace")
        raise SimulationError(f"cell ({where}): {exc}") from exc
    return aggregate(cfg.protocol_label, rtt, chan, [compute_metrics(r) for r in results])


def _run_cell_args(args):
    return run_cell(*args)


def run_experiment(grid: ExperimentGrid, workers: int = 1) -> list[AggregateRow]:
    """Run every cell of ``grid``; rows come back in cell order whatever ``workers`` is.

    Every cell uses seeds ``base_seed .. base_seed + n_sessions - 1``, so
    protocols in the same cell see the same channel state trajectories.
    """
    grid.validate()
    jobs = [(grid, *cell) for cell in grid.cells()]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_run_cell_args, jobs))
    return [_run_cell_args(job) for job in jobs]


@dataclass(frozen=True)
class Reduction:
    protocol: str
    rtt_ms: int
    p: Optional[float]
    q: Optional[float]
    stall_pct: Optional[float]
    redundancy_pct: Optional[float]
    late_pct: Optional[float]


def percent_reduction(base: float, x: float) -> Optional[float]:
    if base == 0:
        return None
    return 100.0 * (base - x) / base


def compare(rows: Sequence[AggregateRow], baseline_protocol: str = "tcp_like") -> list[Reduction]:
    """Percentage reduction of each row's means relative to the baseline in the same cell."""
    if baseline_protocol in ("tcp", "tcp-like"):
        baseline_protocol = "tcp_like"
    baselines = {r.cell: r for r in rows if r.protocol == baseline_protocol}
    out = []
    for r in rows:
        if r.cell not in baselines:
            raise ValueError(f"baseline {baseline_protocol!r} missing for cell {r.cell}")
        b = baselines[r.cell]
        out.append(Reduction(
            r.protocol, r.rtt_ms, r.p, r.q,
            percent_reduction(b.stall_ratio_mean, r.stall_ratio_mean),
            percent_reduction(b.redundancy_mean, r.redundancy_mean),
            percent_reduction(b.late_frac_mean, r.late_frac_mean),
        ))
    return out


def best_of(rows: Sequence[AggregateRow], prefix: str = "dup") -> dict:
    """Lowest-stall row per cell among protocols whose name starts with ``prefix``."""
    best = {}
    for r in rows:
        if r.protocol.startswith(prefix):
            if r.cell not in best or r.stall_ratio_mean < best[r.cell].stall_ratio_mean:
                best[r.cell] = r
    return best


def rows_to_csv(rows: Sequence[AggregateRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow(r.csv_values())
    return buf.getvalue()


def write_csv(rows: Sequence[AggregateRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))


def read_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def format_rows(rows: Sequence[AggregateRow]) -> str:
    lines = [f"{'protocol':<11} {'rtt':>4} {'p':>5} {'q':>5} {'stall':>16} {'redund':>8} "
             f"{'late':>7} {'p95':>7} {'loss':>6}"]
    for r in rows:
        p = "trace" if r.p is None else f"{r.p:g}"
        q = "" if r.q is None else f"{r.q:g}"
        lines.append(
            f"{r.protocol:<11} {r.rtt_ms:>4} {p:>5} {q:>5} "
            f"{r.stall_ratio_mean:>7.4f}±{r.stall_ratio_ci95:<7.4f} {r.redundancy_mean:>8.3f} "
            f"{r.late_frac_mean:>7.4f} {r.p95_gap_mean_ms:>7.0f} {r.observed_loss_mean:>6.3f}")
    return "\n".join(lines)


def format_comparison(reductions: Sequence[Reduction], baseline: str) -> str:
    def pct(x):
        return "n/a" if x is None else f"{x:.1f}%"

    lines = [f"reduction vs {baseline}",
             f"{'protocol':<11} {'rtt':>4} {'p':>5} {'q':>5} {'stall':>8} {'redund':>8} {'late':>8}"]
    for r in reductions:
        p = "trace" if r.p is None else f"{r.p:g}"
        q = "" if r.q is None else f"{r.q:g}"
        lines.append(f"{r.protocol:<11} {r.rtt_ms:>4} {p:>5} {q:>5} {pct(r.stall_pct):>8} "
                     f"{pct(r.redundancy_pct):>8} {pct(r.late_pct):>8}")
    return "\n".join(lines)
