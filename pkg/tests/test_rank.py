"""Rank-function representation: evaluation, sup/crossing queries,
w-intervals, job profiles, named policies, serialization."""

import math

import numpy as np
import pytest

from mg1soap.errors import DomainError, InvalidParameterError
from mg1soap.rank import (
    RankFunction,
    Tail,
    fb,
    fcfs,
    make_policy,
    sawtooth,
    spike,
    step,
)

INF = math.inf


def test_policy_values():
    assert fcfs().value(7.0) == 0.0
    assert fb().value(3.25) == 3.25
    s = step(2.0)
    assert s.value(5.0) == 2.0
    assert s.value(1.0) == 1.0
    sp = spike(2.0)
    assert sp.value(2.0) == 1.0
    assert sp.value(1.999) == 0.0
    assert sp.value(2.001) == 0.0


def test_make_policy_parsing():
    assert make_policy("fcfs").label == "fcfs"
    assert make_policy("step:2").value(5.0) == 2.0
    assert make_policy("spike(1.5)").value(1.5) == 1.0
    with pytest.raises(InvalidParameterError):
        make_policy("srpt")


def test_worst_age_examples():
    assert fcfs().worst_age() == 0.0
    assert fb().worst_age() == INF
    assert step(3.0).worst_age() == 3.0
    assert spike(2.0).worst_age() == 2.0
    # bounded-support identity: sup approached at x_max, never attained
    tri = RankFunction([0.0, 1.0], [0.0, 1.0])
    assert tri.x_max == 1.0
    assert tri.worst_age() == 1.0  # = x_max
    # decreasing rank on bounded support: max at 0
    dec = RankFunction([0.0, 1.0], [1.0, 0.0])
    assert dec.worst_age() == 0.0


def test_worst_age_asymptote():
    up = RankFunction([0.0], [1.0],
                      tail=Tail("asymptote", limit=2.0, amp=1.0, tau=1.0))
    assert up.worst_age() == INF
    assert up.global_sup() == 2.0
    down = RankFunction([0.0], [3.0],
                        tail=Tail("asymptote", limit=2.0, amp=-1.0, tau=1.0))
    assert down.worst_age() == 0.0
    assert down.global_sup() == 3.0


def test_sawtooth_values_and_jumps():
    r = sawtooth(2.0, 10.0)
    for a, v in [(0.0, 0.0), (1.5, 1.5), (2.0, 0.0), (3.9, 1.9), (4.0, 0.0)]:
        assert r.value(a) == pytest.approx(v, abs=1e-12)
    # jump-down left limits mean no attained max
    assert r.worst_age() == INF


def test_w_intervals_fb():
    got = fb().w_intervals(5.0)
    assert len(got.intervals) == 1
    assert got.intervals[0].b == 0.0
    assert got.intervals[0].c == 5.0
    assert not got.truncated


def test_w_intervals_step():
    got = step(2.0).w_intervals(1.0)
    assert len(got.intervals) == 1
    (iv,) = got.intervals
    assert (iv.b, iv.c) == (0.0, 1.0)


def test_w_intervals_sawtooth_vs_dense_grid():
    r = sawtooth(2.0, 40.0)
    w = 1.5
    got = r.w_intervals(w, horizon=6.5)
    expect = [(0.0, 1.5), (2.0, 3.5), (4.0, 5.5), (6.0, 7.5)]
    assert got.truncated  # more intervals beyond the horizon
    assert len(got.intervals) == len(expect)
    for iv, (b, c) in zip(got.intervals, expect):
        assert iv.b == pytest.approx(b, abs=1e-12)
        assert iv.c == pytest.approx(c, abs=1e-12)
    # dense-grid oracle, step 1e-4
    ages = np.arange(0.0, 7.0, 1e-4)
    below = np.array([r.value(float(a)) <= w for a in ages])
    switch = np.flatnonzero(np.diff(below.astype(int)))
    oracle_edges = ages[switch + 1]
    flat = []
    for iv in got.intervals:
        if iv.b > 0:
            flat.append(iv.b)
        if iv.c < 7.0:
            flat.append(iv.c)
    assert np.allclose(sorted(flat), oracle_edges, atol=2e-4)


def test_w_intervals_spike_splits():
    r = spike(2.0)
    got = r.w_intervals(0.5, horizon=100.0)
    assert got.c0 == 2.0
    assert got.intervals[0].b == 0.0
    assert got.intervals[0].c == 2.0
    assert got.intervals[1].b == 2.0
    assert got.intervals[1].c == INF
    # level above the spike: nothing ever exceeds it
    got = r.w_intervals(1.5)
    assert len(got.intervals) == 1
    assert got.intervals[0].c == INF


def test_job_profile_examples():
    p = fb().job_profile(3.0)
    assert p.w_x == 3.0
    assert p.y_x == pytest.approx(3.0, abs=1e-7)  # left-limit nudge
    assert p.z_x == 3.0

    p = step(2.0).job_profile(5.0)
    assert p.w_x == 2.0
    assert p.y_x == pytest.approx(2.0, abs=1e-7)
    assert p.z_x == INF  # rank never exceeds 2 again

    # constant rank: level just below -> 0, level at -> never exceeded
    const = RankFunction([0.0], [1.0], tail=Tail("linear", slope=0.0))
    p = const.job_profile(1.0)
    assert p.w_x == 1.0
    assert p.y_x == 0.0
    assert p.z_x == INF


def test_sup_on_and_worst_future_rank():
    r = sawtooth(2.0, 10.0)
    assert r.sup_on(0.0, 1.0) == pytest.approx(1.0)
    assert r.sup_on(0.0, 2.0) == pytest.approx(2.0)  # left limit at 2
    assert r.sup_on(2.5, 3.5) == pytest.approx(1.5)
    p = r.job_profile(3.0)
    assert p.worst_future_rank(r, 2.5) == pytest.approx(
        max(r.value(a) for a in np.arange(2.5, 3.0, 1e-5)), abs=1e-4)


def test_value_domain_errors():
    r = RankFunction([0.0, 1.0], [0.0, 1.0])
    with pytest.raises(DomainError):
        r.value(1.0)
    with pytest.raises(DomainError):
        r.value(-0.1)


def test_spec_text_round_trip():
    r = sawtooth(2.0, 7.0).with_spike(1.25, 9.5, label="custom-saw")
    text = r.to_spec_text()
    back = RankFunction.from_spec_text(text)
    assert back.label == "custom-saw"
    assert back.ages == r.ages
    assert back.left == r.left
    assert back.spikes == r.spikes
    assert back.tail == r.tail
    for a in np.linspace(0.0, 6.9, 37):
        assert back.value(float(a)) == r.value(float(a))


def test_from_spec_text_asymptote_round_trip():
    r = RankFunction([0.0, 1.0], [0.5, 1.0],
                     tail=Tail("asymptote", limit=2.0, amp=1.0, tau=0.7),
                     label="asym")
    back = RankFunction.from_spec_text(r.to_spec_text())
    for a in (0.0, 0.3, 1.0, 2.5, 40.0):
        assert back.value(a) == r.value(a)
