import pytest

from chattersim import SessionConfig
from chattersim.bench import (CSV_COLUMNS, AggregateRow, ExperimentGrid, aggregate, best_of,
                              compare, percent_reduction, rows_to_csv, run_experiment)
from chattersim.channel import LossTrace
from chattersim.metrics import MetricsReport

SHORT = SessionConfig(session_len_ms=3000)


def row(protocol, stall, red=0.5, late=0.1, rtt=400, p=0.9, q=0.5):
    return AggregateRow(protocol, rtt, p, q, 30, stall, 0.01, red, 0.0, late, 0.0, 300.0, 0.15)


def test_single_cell_grid():
    grid = ExperimentGrid(protocols=("chatterbox",), rtts=(400,), channels=((0.9, 0.5),),
                          n_sessions=2, base_config=SHORT)
    [r] = run_experiment(grid)
    assert (r.protocol, r.rtt_ms, r.p, r.q, r.n) == ("chatterbox", 400, 0.9, 0.5, 2)


def test_six_protocol_layout_rows():
    grid = ExperimentGrid(protocols=("chatterbox", "tcp", "dup2", "dup3", "dup4", "dup5"),
                          rtts=(100, 400), channels=((0.9, 0.5),), n_sessions=1,
                          base_config=SHORT)
    rows = run_experiment(grid)
    assert len(rows) == 12
    assert [r.protocol for r in rows[:6]] == ["chatterbox", "tcp_like", "dup2", "dup3", "dup4",
                                              "dup5"]


def test_rerun_identical():
    grid = ExperimentGrid(protocols=("chatterbox", "tcp"), rtts=(200,), n_sessions=2,
                          base_config=SHORT)
    assert rows_to_csv(run_experiment(grid)) == rows_to_csv(run_experiment(grid))


def test_trace_grid_uses_trace_per_session():
    traces = (LossTrace((False,) * 10), LossTrace((True, False) * 5))
    grid = ExperimentGrid(protocols=("tcp",), rtts=(400,), n_sessions=2, traces=traces,
                          base_config=SessionConfig(n_tokens=3))
    [r] = run_experiment(grid)
    assert r.p is None and r.observed_loss_mean > 0
    assert rows_to_csv([r]).splitlines()[1].startswith("tcp_like,400,trace,trace,2,")


def test_empty_axis_rejected():
    with pytest.raises(ValueError):
        run_experiment(ExperimentGrid(protocols=()))


def test_aggregation_is_permutation_invariant():
    reports = [MetricsReport(s, 0.1 * s, 0.0, 100 + int(10 * s), 1000, 0.15)
               for s in (0.1, 0.4, 0.25, 0.9)]
    a = aggregate("x", 400, (0.9, 0.5), reports)
    b = aggregate("x", 400, (0.9, 0.5), reports[::-1])
    assert a.stall_ratio_mean == pytest.approx(b.stall_ratio_mean)
    assert a.stall_ratio_std == pytest.approx(b.stall_ratio_std)


def test_headline_reduction_arithmetic():
    [red_c, red_t] = compare([row("chatterbox", 0.058), row("tcp_like", 0.20)], "tcp")
    assert red_c.stall_pct == pytest.approx(71.0)
    assert red_t.stall_pct == 0.0


def test_zero_baseline_is_na():
    assert percent_reduction(0.0, 0.1) is None
    [r, _] = compare([row("chatterbox", 0.0), row("tcp_like", 0.0)])
    assert r.stall_pct is None


def test_missing_baseline():
    with pytest.raises(ValueError):
        compare([row("chatterbox", 0.1)])


def test_best_of_duplication():
    rows = [row("dup2", 0.3), row("dup5", 0.2), row("tcp_like", 0.5)]
    assert best_of(rows)[(400, 0.9, 0.5)].protocol == "dup5"


def test_csv_header():
    assert rows_to_csv([]).strip() == ",".join(CSV_COLUMNS)
