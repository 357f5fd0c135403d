import json

import pytest

from chattersim.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_smoke(capsys):
    code, out, _ = run(capsys, "run", "--protocol", "chatterbox", "--rtt", "400", "--seed", "7")
    assert code == 0
    assert "stall_ratio" in out


def test_run_three_token_trace(capsys, fixtures, tmp_path):
    out_json = tmp_path / "r.json"
    code, out, _ = run(capsys, "run", "--protocol", "tcp", "--trace",
                       str(fixtures / "three_tokens.csv"), "--tokens", "3", "--timeline",
                       "--out", str(out_json))
    assert code == 0
    assert "render_times: 1800 3200 3200" in out
    assert json.loads(out_json.read_text())["render_times"] == [1800, 3200, 3200]


def test_trace_run_requires_trace(capsys, fixtures):
    assert run(capsys, "trace-run", "--tokens", "3")[0] == 2
    code, out, _ = run(capsys, "trace-run", "--trace", str(fixtures / "three_tokens.csv"),
                       "--tokens", "3", "--timeline")
    assert code == 0 and "render_times: 400 400 400" in out


def test_invalid_config_exit_2(capsys):
    code, _, err = run(capsys, "run", "--rtt", "401")
    assert code == 2 and "rtt must be even" in err
    code, _, err = run(capsys, "run", "--p", "1.2", "--token-gap-ms", "0")
    assert code == 2 and "p out of [0,1]" in err and "token_gap_ms must be positive" in err


def test_unknown_flag_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--bogus"])
    assert exc.value.code == 2


def test_simulation_error_exit_1(capsys, tmp_path):
    trace = tmp_path / "short.csv"
    trace.write_text("seq,lost\n0,1\n")
    code, _, err = run(capsys, "run", "--trace", str(trace), "--tokens", "3")
    assert code == 1 and "trace exhausted" in err


def test_config_file_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("protocol = tcp\nrtt_ms = 200\nsession_len_ms = 3000\nseed = 5\n")
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    run(capsys, "run", "--config", str(cfg), "--out", str(a))
    run(capsys, "run", "--protocol", "tcp", "--rtt-ms", "200", "--session-len-ms", "3000",
        "--seed", "5", "--out", str(b))
    assert a.read_text() == b.read_text()
    c = tmp_path / "c.json"
    run(capsys, "run", "--config", str(cfg), "--rtt", "400", "--out", str(c))
    assert json.loads(c.read_text())["config"]["rtt_ms"] == 400


def test_seed_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("CHATTERSIM_SEED", "99")
    a = tmp_path / "a.json"
    run(capsys, "run", "--session-len-ms", "2000", "--out", str(a))
    assert json.loads(a.read_text())["config"]["seed"] == 99


@pytest.mark.parametrize("args, expected", [
    (["-G", "100", "-T", "10", "--rtt", "400", "-L", "200"], "holds: true (900 ≤ 1000)"),
    (["-G", "100", "-T", "10", "--rtt", "100", "-L", "0"], "holds: false"),
    (["-T", "1"], "holds: true"),
])
def test_inspect(capsys, args, expected):
    code, out, _ = run(capsys, "inspect", *args)
    assert code == 0 and out.startswith(expected)


def test_bench_and_plot(capsys, tmp_path):
    csv_path = tmp_path / "bench.csv"
    argv = ["bench", "--sessions", "1", "--rtts", "400", "--channels", "0.9:0.5",
            "--session-len-ms", "3000", "--out", str(csv_path)]
    code, out, _ = run(capsys, *argv)
    assert code == 0 and "reduction vs tcp_like" in out
    first = csv_path.read_bytes()
    assert len(first.decode().splitlines()) == 7
    run(capsys, *argv)
    assert csv_path.read_bytes() == first

    svg = tmp_path / "stall.svg"
    code, _, _ = run(capsys, "plot", str(csv_path), "--metric", "stall_ratio_mean",
                     "--out", str(svg))
    assert code == 0
    text = svg.read_text()
    assert text.count("<rect x=") == 6 + 6  # bars plus legend swatches
    svg2 = tmp_path / "stall2.svg"
    run(capsys, "plot", str(csv_path), "--out", str(svg2))
    assert svg2.read_bytes() == svg.read_bytes()

    assert run(capsys, "plot", str(csv_path), "--metric", "nope")[0] == 2


def test_plot_empty_csv(capsys, tmp_path):
    empty = tmp_path / "e.csv"
    empty.write_text("protocol,rtt_ms,p,q,n,stall_ratio_mean\n")
    assert run(capsys, "plot", str(empty))[0] == 2


def test_bench_trace_mode(capsys, fixtures, tmp_path):
    traces = [str(fixtures / "traces" / f"bursty_{k:02d}.csv") for k in range(2)]
    code, out, _ = run(capsys, "bench", "--sessions", "2", "--rtts", "400",
                       "--protocols", "chatterbox,tcp", "--traces", *traces,
                       "--out", str(tmp_path / "t.csv"))
    assert code == 0 and "trace" in out


def test_bench_bad_protocol(capsys, tmp_path):
    code, _, _ = run(capsys, "bench", "--protocols", "carrier-pigeon", "--out",
                     str(tmp_path / "x.csv"))
    assert code == 2
