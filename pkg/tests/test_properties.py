import itertools

import pytest
from hypothesis import given, settings, strategies as st

from chattersim import SessionConfig, run_session

from invariants import (check_general, first_delivery_bound_violations, overflow_free,
                        prefix_carry_violations)

PATTERNS = list(itertools.product([False, True], repeat=10))


def run_pattern(pattern, **cfg):
    trace = list(pattern) + [False] * 200
    return run_session(SessionConfig(n_tokens=5, **cfg), trace=trace)


@pytest.mark.parametrize("proto", ["chatterbox", "tcp", "dup2"])
def test_exhaustive_general_invariants(proto):
    for pattern in PATTERNS:
        check_general(run_pattern(pattern, protocol=proto))


@pytest.mark.parametrize("capacity, rtt", [(10, 400), (10, 100), (3, 20), (4, 50), (5, 100)])
def test_exhaustive_prefix_carry(capacity, rtt):
    checked = 0
    for pattern in PATTERNS:
        r = run_pattern(pattern, packet_token_capacity=capacity, rtt_ms=rtt)
        assert all(p.kind != "retransmit" for p in r.packet_log)
        if capacity >= 5 or overflow_free(r):
            checked += 1
            assert not prefix_carry_violations(r), pattern
            assert not first_delivery_bound_violations(r), pattern
    assert checked > 0


def test_prefix_carry_checker_detects_overflow():
    # capacity 1 cannot carry anything but the new token
    r = run_pattern((True,) + (False,) * 9, packet_token_capacity=1)
    assert prefix_carry_violations(r)


def test_tcp_has_head_of_line_blocking():
    r = run_pattern((True,) + (False,) * 9, protocol="tcp")
    assert prefix_carry_violations(r)


@settings(max_examples=25, deadline=None)
@given(proto=st.sampled_from(["chatterbox", "tcp", "dup2", "dup4"]),
       seed=st.integers(0, 2**32), rtt=st.sampled_from([100, 200, 400]),
       pq=st.sampled_from([(0.9, 0.5), (0.5, 0.5), (0.9, 0.8)]),
       ack_lossy=st.booleans())
def test_random_sessions_keep_invariants(proto, seed, rtt, pq, ack_lossy):
    cfg = SessionConfig(protocol=proto, seed=seed, rtt_ms=rtt, p=pq[0], q=pq[1],
                        session_len_ms=6000, ack_path_lossy=ack_lossy)
    check_general(run_session(cfg))


@settings(max_examples=25, deadline=None)
@given(k=st.integers(2, 5),
       gaps=st.lists(st.integers(1, 400), min_size=1, max_size=40),
       rtt=st.integers(1, 400).map(lambda x: 2 * x))
def test_duplication_equals_base_when_lossless(k, gaps, rtt):
    times = tuple(itertools.accumulate([0] + gaps))
    base = run_session(SessionConfig(protocol="tcp", gen_times=times, rtt_ms=rtt, p=1.0))
    dup = run_session(SessionConfig(protocol=f"dup{k}", gen_times=times, rtt_ms=rtt, p=1.0))
    assert dup.render_times == base.render_times
    assert len(dup.packet_log) == k * len(base.packet_log)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32), proto=st.sampled_from(["chatterbox", "tcp", "dup3"]))
def test_determinism(seed, proto):
    cfg = SessionConfig(protocol=proto, seed=seed, session_len_ms=5000)
    assert run_session(cfg).to_json() == run_session(cfg).to_json()
