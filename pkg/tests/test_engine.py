"""Event-driven front tracking: collisions, snapshots, nonphysical control."""

import math

import numpy as np
import pytest

from ftbalance import (
    OutOfWindow,
    UnboundedSupport,
    advance,
    init_from_datum,
    initial_fronts,
    make_model,
)
from ftbalance.engine import Profile

from conftest import exact_burgers_riemann, l1_against_exact


def test_piecewise_constant_datum_passes_through():
    m = make_model("burgers")
    p = Profile(np.array([0.0, 1.0]), np.array([[0.1], [0.0], [0.05]]))
    assert init_from_datum(m, p, 0.05) is p


def test_sampling_respects_total_variation(rng):
    m = make_model("burgers")
    for _ in range(10):
        xs = np.sort(rng.uniform(-1, 1, 6))
        states = rng.uniform(-0.5, 0.5, (7, 1))
        p = Profile(xs, states)
        sampled = init_from_datum(m, lambda x, p=p: p(x), 0.08, support=(-1.5, 1.5))
        assert sampled.total_variation() <= p.total_variation() + 1e-12


def test_smooth_datum_requires_support():
    m = make_model("burgers")
    with pytest.raises(UnboundedSupport):
        init_from_datum(m, lambda x: np.array([math.tanh(x)]), 0.05)


def test_tanh_datum_tv_bound():
    m = make_model("burgers")
    p = init_from_datum(m, lambda x: np.array([math.tanh(x)]), 0.05,
                        support=(-8.0, 8.0))
    assert p.total_variation() <= 2.0 + 1e-9


def test_single_shock_straight_line():
    m = make_model("burgers")
    sol = advance(m, Profile(np.array([0.0]), np.array([[1.0], [0.0]])),
                  0.0, 1.0, 0.05)
    assert sol.events == []
    segs = sol.front_segments()
    assert len(segs) == 1
    seg = segs[0]
    assert abs(seg.x_start - 0.0) < 1e-15
    assert abs(seg.x_end - 0.5) < 1e-12


def test_constant_state_has_no_fronts():
    m = make_model("burgers")
    sol = advance(m, Profile(np.empty(0), np.array([[0.3]])), 0.0, 1.0, 0.05)
    assert sol.fronts == [] and sol.events == []


def test_snapshot_at_start_is_initial_profile():
    m = make_model("burgers")
    p = Profile(np.array([0.0, 0.1]), np.array([[1.0], [0.5], [0.0]]))
    sol = advance(m, p, 0.0, 1.0, 0.05)
    snap = sol.snapshot(0.0)
    assert np.allclose(snap.xs, p.xs)
    assert np.allclose(snap.states, p.states)
    with pytest.raises(OutOfWindow):
        sol.snapshot(1.5)


def test_two_shock_merge_event_and_snapshot():
    m = make_model("burgers")
    p = Profile(np.array([0.0, 0.1]), np.array([[1.0], [0.5], [0.0]]))
    sol = advance(m, p, 0.0, 1.0, 0.05)
    events = [ev for ev in sol.events if ev.kind == "interaction"]
    assert len(events) == 1
    ev = events[0]
    # speeds 0.75 and 0.25 from x = 0 and 0.1 meet at t = 0.2, x = 0.15
    assert abs(ev.t - 0.2) < 1e-12 and abs(ev.x - 0.15) < 1e-12
    assert len(ev.incoming) == 2
    snap = sol.snapshot(0.3)
    assert snap.xs.size == 1
    assert abs(snap.xs[0] - 0.2) < 1e-12  # 0.15 + 0.1 * 0.5
    assert np.allclose(snap.states, [[1.0], [0.0]])


def test_contacts_cross_unchanged():
    m = make_model("linear-diag")
    p = Profile(np.array([0.0, 0.2]),
                np.array([[0.0, 0.2], [0.0, 0.0], [0.1, 0.0]]))
    sol = advance(m, p, 0.0, 1.0, 0.05)
    events = [ev for ev in sol.events if ev.kind == "interaction"]
    assert len(events) == 1
    # speeds 2 and 1: fronts swap and keep their jumps
    snap = sol.snapshot(1.0)
    assert snap.xs.size == 2
    tv_before = p.total_variation()
    assert abs(snap.total_variation() - tv_before) < 1e-12


def test_every_event_has_exactly_two_incoming():
    m = make_model("elasticity")
    p = Profile(np.array([-0.2, 0.0, 0.15]),
                np.array([[1.0, 0.0], [1.02, 0.01], [0.99, -0.02], [1.0, 0.0]]))
    sol = advance(m, p, 0.0, 1.0, 0.02)
    for ev in sol.events:
        assert len(ev.incoming) == 2
        assert len(ev.incoming_ids) == 2


def test_nonphysical_strength_bounded_by_accuracy():
    m = make_model("elasticity")
    eps = 0.02
    p = Profile(np.array([-0.2, 0.0, 0.15]),
                np.array([[1.0, 0.0], [1.02, 0.01], [0.99, -0.02], [1.0, 0.0]]))
    sol = advance(m, p, 0.0, 1.0, eps)
    for t, strength in sol.np_series:
        assert strength <= eps + 1e-12
    for t in sol.sample_times():
        assert sol.np_strength(t) <= eps + 1e-12


def test_nonphysical_fronts_fastest():
    m = make_model("elasticity")
    p = Profile(np.array([-0.2, 0.0, 0.15]),
                np.array([[1.0, 0.0], [1.02, 0.01], [0.99, -0.02], [1.0, 0.0]]))
    sol = advance(m, p, 0.0, 1.0, 0.02)
    top = float(m.speed_fences[-1])
    for f in sol.fronts:
        if f.family == m.dimension:
            assert f.speed > top


def test_burgers_self_similar_accuracy():
    m = make_model("burgers")
    eps = 0.05
    sol = advance(m, Profile(np.array([0.0]), np.array([[0.0], [1.0]])),
                  0.0, 1.0, eps)
    snap = sol.snapshot(1.0)
    err = l1_against_exact(
        snap, lambda x: exact_burgers_riemann(0.0, 1.0, x), -0.5, 1.5
    )
    assert err <= 5 * eps


def test_determinism():
    m = make_model("elasticity")
    p = Profile(np.array([-0.2, 0.0, 0.15]),
                np.array([[1.0, 0.0], [1.02, 0.01], [0.99, -0.02], [1.0, 0.0]]))
    a = advance(m, p, 0.0, 1.0, 0.02)
    b = advance(m, p, 0.0, 1.0, 0.02)
    assert [(ev.t, ev.x) for ev in a.events] == [(ev.t, ev.x) for ev in b.events]
    sa, sb = a.snapshot(1.0), b.snapshot(1.0)
    assert np.array_equal(sa.xs, sb.xs) and np.array_equal(sa.states, sb.states)


def test_initial_fronts_cover_profile_jumps():
    m = make_model("burgers")
    p = Profile(np.array([0.0, 0.3]), np.array([[0.05], [0.0], [0.02]]))
    fronts = initial_fronts(m, p, 0.05)
    assert {round(f.x_start, 9) for f in fronts} == {0.0, 0.3}
