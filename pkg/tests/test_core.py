import pytest
from hypothesis import given, strategies as st

from chattersim.core import (Ack, ConfigError, Packet, SessionConfig, config_from_mapping,
                             dump_config, load_config, overflow_condition, parse_config_text,
                             parse_protocol, validate_config)


def test_default_config_is_valid():
    cfg = validate_config(SessionConfig())
    assert cfg.token_count == 300
    assert cfg.one_way_ms == 200
    assert cfg.rto_base == 2 * 400 + 200


@pytest.mark.parametrize("changes, message", [
    (dict(token_gap_ms=0), "token_gap_ms must be positive"),
    (dict(p=1.2), "p out of [0,1]"),
    (dict(q=-0.1), "q out of [0,1]"),
    (dict(rtt_ms=401), "rtt must be even"),
    (dict(packet_token_capacity=0), "packet_token_capacity must be >= 1"),
    (dict(protocol="duplication", dup_factor=1), "dup_factor must be in {2,3,4,5}"),
    (dict(channel="trace"), "trace channel requires a trace path"),
])
def test_validation_messages(changes, message):
    with pytest.raises(ConfigError) as err:
        validate_config(SessionConfig(**changes))
    assert message in err.value.errors


def test_validation_reports_every_violation():
    with pytest.raises(ConfigError) as err:
        validate_config(SessionConfig(token_gap_ms=0, p=1.2, rtt_ms=3))
    assert len(err.value.errors) == 3


@pytest.mark.parametrize("name, expected", [
    ("tcp", ("tcp_like", None)),
    ("chatterbox", ("chatterbox", None)),
    ("dup3", ("duplication", 3)),
    ("duplication-5", ("duplication", 5)),
])
def test_parse_protocol(name, expected):
    assert parse_protocol(name) == expected


def test_protocol_alias_normalized():
    cfg = validate_config(SessionConfig(protocol="dup4"))
    assert (cfg.protocol, cfg.dup_factor, cfg.protocol_label) == ("duplication", 4, "dup4")


@given(proto=st.sampled_from(["tcp", "tcp_like", "chatterbox", "dup2", "dup5", "duplication"]),
       rtt=st.integers(1, 500).map(lambda x: 2 * x),
       p=st.floats(0, 1), q=st.floats(0, 1), gap=st.integers(1, 500))
def test_validate_is_idempotent(proto, rtt, p, q, gap):
    cfg = validate_config(SessionConfig(protocol=proto, rtt_ms=rtt, p=p, q=q, token_gap_ms=gap))
    assert validate_config(cfg) == cfg


def test_overflow_examples():
    d = overflow_condition(100, 10, 400, 200)
    assert (d.holds, d.lhs_ms, d.rhs_ms) == (True, 900, 1000)
    assert str(d) == "holds: true (900 ≤ 1000)"
    assert not overflow_condition(100, 10, 100, 0).holds
    assert overflow_condition(250, 1, 0, 0).holds


def test_overflow_rejects_bad_args():
    with pytest.raises(ValueError):
        overflow_condition(100, 0, 100, 0)


nonneg = st.integers(0, 5000)


@given(g=nonneg, t=st.integers(1, 50), rtt=nonneg, loss=nonneg, d=st.integers(0, 1000))
def test_overflow_monotone(g, t, rtt, loss, d):
    base = overflow_condition(g, t, rtt, loss).holds
    if base:
        assert overflow_condition(g, t, rtt + d, loss).holds
        assert overflow_condition(g, t, rtt, loss + d).holds
    else:
        assert not overflow_condition(g + d, t, rtt, loss).holds
        assert not overflow_condition(g, t + d, rtt, loss).holds


def test_ack_prefix_and_extras():
    ack = Ack.from_held(7, {0, 1, 2, 5, 9}, 300)
    assert (ack.prefix, ack.extras) == (3, (5, 9))
    assert ack.held_indices == {0, 1, 2, 5, 9}
    assert ack.max_held == 9
    assert ack.holds(1) and ack.holds(5) and not ack.holds(3)
    assert Ack.from_held(0, set(), 0).max_held == -1


def test_packet_invariants():
    with pytest.raises(ValueError):
        Packet(0, 0, (), "initial", 60)
    with pytest.raises(ValueError):
        Packet(0, 0, (1, 1), "initial", 76)


def test_config_file_round_trip(tmp_path):
    cfg = SessionConfig(protocol="tcp_like", rtt_ms=200, p=0.5, ack_path_lossy=True,
                        gen_times=(0, 50, 300))
    path = tmp_path / "session.cfg"
    path.write_text(dump_config(cfg))
    assert load_config(path) == cfg


def test_config_text_parsing():
    values = parse_config_text("# comment\nrtt-ms = 200\n\nprotocol = dup3  # inline\n")
    assert values == {"rtt-ms": "200", "protocol": "dup3"}
    cfg = validate_config(config_from_mapping(values))
    assert (cfg.rtt_ms, cfg.protocol_label) == (200, "dup3")
    with pytest.raises(ConfigError):
        config_from_mapping({"bogus": "1"})
