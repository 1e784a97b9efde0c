"""Elementary curves, Riemann fans, and Hugoniot classification."""

import math

import numpy as np
import pytest

from ftbalance import (
    CONTACT,
    JumpTooLarge,
    RAREFACTION,
    SHOCK,
    elementary_curve,
    eigen_decompose,
    hugoniot_classify,
    make_model,
    solve_riemann,
    wave_partition,
)

from conftest import brute_force_convex_envelope

SQRT2 = math.sqrt(2.0)


def test_burgers_shock_curve():
    m = make_model("burgers")
    fan = solve_riemann(m, [1.0], [0.0], 0.05)
    assert len(fan.waves) == 1
    w = fan.waves[0]
    assert w.kind == SHOCK
    assert abs(w.speed_left - 0.5) < 1e-9 and abs(w.speed_right - 0.5) < 1e-9
    assert abs(fan.sizes[0] + 1.0) < 1e-12


def test_burgers_rarefaction_split():
    eps = 0.05
    m = make_model("burgers")
    fan = solve_riemann(m, [0.0], [0.25], eps)
    assert all(w.kind == RAREFACTION for w in fan.waves)
    assert all(w.strength <= eps + 1e-12 for w in fan.waves)
    assert abs(sum(w.size for w in fan.waves) - 0.25) < 1e-9
    speeds = [w.speed for w in fan.waves]
    assert speeds == sorted(speeds)
    # each sub-front travels at the speed of its right endpoint
    for w in fan.waves:
        assert abs(w.speed - w.speed_right) < 1e-15


def test_trivial_fan_for_equal_states():
    m = make_model("elasticity")
    fan = solve_riemann(m, [1.0, 0.0], [1.0, 0.0], 0.05)
    assert np.allclose(fan.sizes, 0.0)
    assert fan.waves == []


def test_jump_cap_enforced():
    m = make_model("elasticity")
    with pytest.raises(JumpTooLarge):
        solve_riemann(m, [-2.0, -2.0], [2.0, 2.0], 0.05, jump_max=0.3)


def test_elasticity_round_trip_and_ordering():
    m = make_model("elasticity")
    uL = np.array([1.05, 0.02])
    uR = np.array([0.98, -0.04])
    fan = solve_riemann(m, uL, uR, 0.02)
    assert np.max(np.abs(fan.intermediate_states[-1] - uR)) < 1e-8
    speeds = [w.speed for w in fan.waves]
    assert speeds == sorted(speeds)
    # family-k speeds stay within the declared fences
    fences = m.speed_fences
    for w in fan.waves:
        assert fences[w.family] - 0.2 <= w.speed <= fences[w.family + 1] + 0.2


def test_curve_tangency_to_eigenvector():
    # T_k[u](s) = u + s r_k(u) + O(s^2)
    m = make_model("elasticity")
    u0 = np.array([1.0, 0.0])
    r1 = eigen_decompose(m, u0).r(1)
    errs = []
    for s in (0.08, 0.04, 0.02):
        curve = elementary_curve(m, 1, u0, s, accuracy=0.01)
        errs.append(np.linalg.norm(curve.end_state - (u0 + s * r1)) / s ** 2)
    assert max(errs) < 5.0  # second-order tangency: err/s^2 bounded


def test_pure_shock_has_flat_sigma():
    m = make_model("burgers")
    curve = elementary_curve(m, 0, [1.0], -1.0, accuracy=0.05)
    waves = wave_partition(curve, 0.05)
    assert len(waves) == 1 and waves[0].kind == SHOCK
    assert abs(waves[0].speed_left - waves[0].speed_right) < 1e-12


def test_contact_fan_for_linear_system():
    m = make_model("linear-diag")
    fan = solve_riemann(m, [0.2, 0.0], [0.0, 0.1], 0.05)
    assert all(w.kind == CONTACT for w in fan.waves)
    lams = sorted(m.params.get("speeds", [1.0, 2.0]))
    for w in fan.waves:
        assert abs(w.speed - lams[w.family]) < 1e-9


def _quintic_flux(u):
    return u ** 5 / 20.0 - u ** 3 / 3.0


def _oracle_partition(u_left, u_right):
    """Shock/rarefaction pattern of a scalar jump from the envelope oracle."""
    s = u_right - u_left
    tau = np.linspace(0.0, s, 601) if s >= 0 else np.linspace(s, 0.0, 601)
    u = u_left + (tau - (0.0 if s >= 0 else s) - (0.0 if s >= 0 else 0.0))
    u = u_left + tau - (0.0 if s >= 0 else 0.0)
    # reduced flux along the scalar curve u(tau) = u_left + tau (tau from 0)
    u = u_left + tau
    f = _quintic_flux(u) - _quintic_flux(u_left)
    f = f - f[0 if s >= 0 else -1]
    env = brute_force_convex_envelope(tau, f if s >= 0 else -f)
    env = env if s >= 0 else -env
    return tau, f, env


def test_quintic_figure1_partition_matches_envelope_oracle():
    # big negative jump 2.582 -> -2: a single shock chord spanning the three
    # inflection-manifold crossings, then a short rarefaction tail to -2
    m = make_model("quintic")
    u_left, s = 2.582, -4.582
    curve = elementary_curve(m, 0, [u_left], s, accuracy=0.02)
    waves = wave_partition(curve, 0.02)
    kinds = []
    for w in waves:
        if not kinds or kinds[-1] != w.kind:
            kinds.append(w.kind)
    assert kinds == [SHOCK, RAREFACTION]
    # shock speed and tangency endpoint against the brute-force oracle
    tau, f, env = _oracle_partition(u_left, u_left + s)
    touch = np.abs(env - f) < 1e-9
    tangency = u_left + tau[np.min(np.flatnonzero(~touch))]
    shock = waves[0]
    assert abs(shock.u_right[0] - tangency) < 2e-2
    chord = (f[-1] - np.interp(shock.u_right[0] - u_left, tau, f)) / (
        u_left - shock.u_right[0]
    )
    assert abs(shock.speed - chord) < 5e-3
    # the chord spans all three switch manifolds -sqrt2, 0, sqrt2
    assert shock.u_right[0] < -SQRT2 < SQRT2 < shock.u_left[0]


def test_quintic_figure2_partition_is_mirror():
    m = make_model("quintic")
    curve = elementary_curve(m, 0, [-2.582], 4.582, accuracy=0.02)
    waves = wave_partition(curve, 0.02)
    kinds = []
    for w in waves:
        if not kinds or kinds[-1] != w.kind:
            kinds.append(w.kind)
    assert kinds == [SHOCK, RAREFACTION]
    shock = waves[0]
    assert shock.u_left[0] < -SQRT2 < SQRT2 < shock.u_right[0]
    # odd flux: mirror of the Figure 1 shock speed
    fig1 = wave_partition(
        elementary_curve(m, 0, [2.582], -4.582, accuracy=0.02), 0.02
    )[0]
    assert abs(shock.speed - fig1.speed) < 1e-9


def test_scalar_envelope_matches_oracle_pointwise():
    m = make_model("quintic")
    for u_left, s in ((2.582, -4.582), (-2.582, 4.582), (1.2, -2.0)):
        curve = elementary_curve(m, 0, [u_left], s, accuracy=0.01)
        _, _, env = _oracle_partition(u_left, u_left + s)
        tau_o = np.linspace(min(0, s), max(0, s), 601)
        oracle_on_grid = np.interp(curve.tau, tau_o, env)
        assert np.max(np.abs(curve.envelope - oracle_on_grid)) < 1e-4


def test_hugoniot_burgers_classification():
    m = make_model("burgers")
    down = hugoniot_classify(m, 0, [0.0], -1.0)
    assert down.admissible and down.simple
    up = hugoniot_classify(m, 0, [0.0], 1.0)
    assert not up.admissible  # speeds violate the one-sided Liu inequality


def test_hugoniot_quintic_full_jump_not_admissible_as_single_shock():
    # the Figure 1 jump is a shock plus a rarefaction tail, so the single
    # discontinuity spanning it violates the one-sided speed condition
    m = make_model("quintic")
    rec = hugoniot_classify(m, 0, [2.582], -4.582)
    assert not rec.admissible


def _sextic_model():
    """Scalar flux with f(0)=f(1)=f(2)=f(3)=0: the classic composite wave."""
    from ftbalance.models import SystemModel

    def f(u):
        x = u[0]
        return np.array([-x ** 6 + 9 * x ** 5 - 31 * x ** 4 + 51 * x ** 3
                         - 40 * x ** 2 + 12 * x])

    def df(u):
        x = u[0]
        return np.array([[-6 * x ** 5 + 45 * x ** 4 - 124 * x ** 3
                          + 153 * x ** 2 - 80 * x + 12]])

    return SystemModel(name="sextic", dimension=1, flux=f, matrix=df,
                       box_lo=[-0.5], box_hi=[3.5], speed_fences=[-90.0, 90.0],
                       params={"jump_max": 6.0})


def test_hugoniot_sextic_composite_three_pieces():
    # wave 0 -> 3 travels at speed 0 and is the composition of the simple
    # waves [0,1], [1,2], [2,3]: admissible with equality, not simple
    m = _sextic_model()
    rec = hugoniot_classify(m, 0, [0.0], 3.0, steps=600)
    assert rec.admissible
    assert not rec.simple
    assert len(rec.breakpoints) == 4
    assert np.allclose(rec.breakpoints, [0.0, 1.0, 2.0, 3.0], atol=2e-2)
