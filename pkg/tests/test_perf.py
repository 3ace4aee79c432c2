import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import threshold

from seap.perf import (
    GEO_ONE_WAY_MS,
    IntRange,
    bandwidth_model,
    cert_time_model,
    compute_threshold,
    latency_model,
    t_gs_for,
)


def test_threshold_examples():
    assert compute_threshold(2, 2) == 7
    assert compute_threshold(3, 3) == 10
    assert compute_threshold(0, 0) == 1
    with pytest.raises(ValueError):
        compute_threshold(-1, 0)


@given(st.integers(0, 1000), st.integers(0, 1000))
def test_threshold_property(a, b):
    assert compute_threshold(a, b) == threshold(a, b)


def test_t_gs_for():
    assert t_gs_for(20, 10) == 2
    assert t_gs_for(25, 14) == 3


def test_latency_ecc():
    seq = latency_model("ecc-p256-class", False)
    par = latency_model("ecc-p256-class", True)
    assert seq.total_sequential_ms.as_list() == [310, 620]
    assert par.total_parallel_ms.as_list() == [210, 420]
    assert seq.total_sequential_ms == seq.propagation_ms + seq.onboard_crypto_ms + seq.gs_verification_ms


@pytest.mark.parametrize("parallel", [False, True])
def test_latency_hybrid_in_published_band(parallel):
    total = latency_model("hybrid-ecc-falcon", parallel).total(parallel)
    assert 400 <= total.lo and total.hi <= 1200


def test_geo_latency_longer():
    leo = latency_model("ecc-p256-class").total_sequential_ms
    geo = latency_model("ecc-p256-class", one_way_ms=GEO_ONE_WAY_MS).total_sequential_ms
    assert geo.lo > leo.lo and geo.hi > leo.hi


def test_cert_time_columns():
    conservative = cert_time_model(2, 2, (1, 2))
    assert conservative.required_endorsements == 7
    assert conservative.orbits_to_completion.as_list() == [4, 7]
    assert conservative.wall_clock_hours == (6.33, 11.08)
    moderate = cert_time_model(3, 3, (2, 3))
    assert moderate.orbits_to_completion.as_list() == [4, 5]
    assert moderate.wall_clock_hours == (6.33, 7.92)
    geo = cert_time_model(2, 2, (7, 7))
    assert geo.orbits_to_completion.as_list() == [1, 1]
    with pytest.raises(ValueError):
        cert_time_model(1, 1, (0, 2))


def test_bandwidth_tables():
    ecc = bandwidth_model("ecc-p256-class")
    assert ecc.per_message == {"hello": 200, "hello-ack": 1500, "key-verify": 150}
    assert ecc.exchange_total == 1850
    assert 2000 <= ecc.certificate <= 3000
    assert ecc.kem_handshake == 1184 + 1088
    assert abs(bandwidth_model("falcon-only").exchange_total - 6500) <= 0.15 * 6500


def test_int_range():
    r = IntRange(1, 3)
    assert 2 in r and 4 not in r
    assert (r + IntRange(1, 1)).as_list() == [2, 4]
    assert r.scale(2).as_list() == [2, 6]
    assert r.mid == 2
    with pytest.raises(ValueError):
        IntRange(3, 1)
