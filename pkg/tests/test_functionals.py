"""Interaction amounts, Glimm functionals, measures, and region balances."""

import math

import numpy as np
import pytest

from ftbalance import (
    FrontRecord,
    NonTransversalEdge,
    StepConfig,
    advance,
    build_measures,
    cancellation_term,
    glimm_functionals,
    interaction_amount,
    make_model,
    region_balance,
    run,
)
from ftbalance.engine import Profile


def test_cross_family_amount_is_plain_product():
    m = make_model("elasticity")
    assert abs(interaction_amount(m, 0, 0.2, 1, 0.1) - 0.02) < 1e-15


def test_zero_size_amount_vanishes():
    m = make_model("burgers")
    assert interaction_amount(m, 0, 0.3, 0, 0.0, u_left=[0.5], accuracy=0.05) == 0.0


def test_burgers_shock_amount():
    # shocks 1 -> 0.5 (speed .75) and 0.5 -> 0 (speed .25):
    # I = |s' s''| |sigma' - sigma''| = 0.5 * 0.5 * 0.5
    m = make_model("burgers")
    amount = interaction_amount(m, 0, -0.5, 0, -0.5, u_left=[1.0], accuracy=0.01)
    assert abs(amount - 0.125) < 1e-3


def test_amount_symmetric_under_reflection():
    # the quintic flux is odd, so the mirrored shock pair (u -> -u, s -> -s)
    # charges exactly the same amount
    m = make_model("quintic")
    down = interaction_amount(m, 0, -0.5, 0, -0.5, u_left=[2.5], accuracy=0.01)
    up = interaction_amount(m, 0, 0.5, 0, 0.5, u_left=[-2.5], accuracy=0.01)
    assert down > 0.0
    assert abs(down - up) < 1e-9


def test_single_front_functionals():
    V, Q, Ups = glimm_functionals([FrontRecord(0.0, 0, -0.4)], c1=10.0)
    assert abs(V - 0.4) < 1e-15
    assert Q == 0.0
    assert abs(Ups - 0.4) < 1e-12


def test_burgers_pair_functionals():
    # two Burgers shocks: V = 1, same-family Q term = (1/4) * 0.25 * 0.5
    sig_hi = np.array([0.75, 0.75])
    sig_lo = np.array([0.25, 0.25])
    taus = np.array([0.0, 0.5])
    fronts = [
        FrontRecord(0.0, 0, -0.5, taus, sig_hi),
        FrontRecord(0.1, 0, -0.5, taus, sig_lo),
    ]
    V, Q, Ups = glimm_functionals(fronts, c1=10.0)
    assert abs(V - 1.0) < 1e-15
    assert abs(Q - 0.03125) < 1e-12
    assert abs(Ups - (1.0 + 10.0 * 0.03125)) < 1e-12


def test_cross_family_potential_counts_approaching_only():
    # the faster family on the left means the pair approaches and contributes;
    # the reverse order does not
    fast_left = [FrontRecord(0.0, 1, 0.2), FrontRecord(1.0, 0, 0.1)]
    slow_left = [FrontRecord(0.0, 0, 0.1), FrontRecord(1.0, 1, 0.2)]
    _, q1, _ = glimm_functionals(fast_left)
    _, q2, _ = glimm_functionals(slow_left)
    assert abs(q1 - 0.02) < 1e-15
    assert q2 == 0.0


def test_potential_translation_invariance(rng):
    fronts = [
        FrontRecord(float(x), int(f), float(s))
        for x, f, s in zip(rng.uniform(-1, 1, 8), rng.integers(0, 2, 8),
                           rng.uniform(-0.1, 0.1, 8))
    ]
    shifted = [FrontRecord(f.x + 3.7, f.family, f.size) for f in fronts]
    assert glimm_functionals(fronts) == glimm_functionals(shifted)


def test_cancellation_term_signs():
    assert cancellation_term(-0.3, -0.2) == 0.0       # same sign: no cancellation
    assert abs(cancellation_term(0.3, -0.2) - 0.4) < 1e-15


def _burgers_merge_solution():
    m = make_model("burgers")
    profile = Profile(np.array([0.0, 0.1]), np.array([[1.0], [0.5], [0.0]]))
    return m, advance(m, profile, 0.0, 1.0, 0.05)


def test_measures_of_burgers_merge():
    _, sol = _burgers_merge_solution()
    ledger = build_measures(sol)
    assert len(ledger.atoms) == 1
    atom = ledger.atoms[0]
    assert abs(atom.t - 0.2) < 1e-9 and abs(atom.x - 0.15) < 1e-9
    assert abs(atom.mu_i - 0.125) < 2e-3
    assert abs(atom.mu_ic - atom.mu_i) < 1e-15  # same sign: no cancellation
    assert 0.0 <= atom.mu_i <= atom.mu_ic


def test_empty_ledger_without_interactions():
    m = make_model("burgers")
    sol = advance(m, Profile(np.array([0.0]), np.array([[1.0], [0.0]])), 0.0, 1.0, 0.05)
    assert build_measures(sol).atoms == []


def test_cross_family_crossing_atom():
    m = make_model("linear-diag")
    profile = Profile(np.array([0.0, 0.2]),
                      np.array([[0.0, 0.2], [0.0, 0.0], [0.1, 0.0]]))
    sol = advance(m, profile, 0.0, 1.0, 0.05)
    ledger = build_measures(sol)
    assert len(ledger.atoms) == 1
    assert abs(ledger.atoms[0].mu_i - 0.02) < 1e-12
    assert abs(ledger.atoms[0].mu_ic - 0.02) < 1e-12


def test_upsilon_non_increasing_through_merge():
    _, sol = _burgers_merge_solution()
    ledger = build_measures(sol)
    ups = [row[3] for row in ledger.series]
    for a, b in zip(ups[:-1], ups[1:]):
        assert b <= a + 1e-12


def test_region_balance_single_shock():
    m = make_model("burgers")
    sol = advance(m, Profile(np.array([0.0]), np.array([[1.0], [0.0]])), 0.0, 1.0, 0.05)
    # shock x = t/2 enters the rectangle on the left edge, leaves on the right
    poly = [(0.2, 0.0), (0.2, 0.5), (0.6, 0.5), (0.6, 0.0)]
    bal = region_balance(sol, poly, 0)
    assert bal.w_in_neg == pytest.approx(1.0)
    assert bal.w_out_neg == pytest.approx(1.0)
    assert bal.fitted_c == 0.0
    assert bal.holds


def test_region_balance_merge_event():
    _, sol = _burgers_merge_solution()
    poly = [(0.1, -0.1), (0.1, 0.4), (0.35, 0.4), (0.35, -0.1)]
    bal = region_balance(sol, poly, 0)
    assert bal.holds
    # strengths add at the merge: 0.5 + 0.5 in, 1.0 out
    assert bal.w_in_neg == pytest.approx(1.0)
    assert bal.w_out_neg == pytest.approx(1.0)
    assert bal.fitted_c < 5.0


def test_region_balance_rejects_parallel_edge():
    m = make_model("burgers")
    sol = advance(m, Profile(np.array([0.0]), np.array([[1.0], [0.0]])), 0.0, 1.0, 0.05)
    # an edge lying exactly along the shock x = t/2
    poly = [(0.0, 0.0), (1.0, 0.5), (1.0, -0.5), (0.0, -0.5)]
    with pytest.raises(NonTransversalEdge):
        region_balance(sol, poly, 0)


def test_region_balance_source_update_scaling():
    m = make_model("linear-diag", {"damping": 1.0})
    datum = Profile(np.array([0.0]), np.array([[0.05, 0.0], [0.0, 0.0]]))
    rep = run(m, datum, StepConfig(accuracy=0.1, time_step=0.1, horizon=0.5))
    poly = [(0.05, -0.5), (0.05, 2.0), (0.15, 2.0), (0.15, -0.5)]
    bal = region_balance(rep, poly, 0)
    assert bal.holds
    # one -u update inside: strengths scale by (1 - tau)
    assert abs(bal.w_out_pos + bal.w_out_neg
               - (1 - 0.1) * (bal.w_in_pos + bal.w_in_neg)) < 1e-9
