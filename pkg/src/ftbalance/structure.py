"""Piecewise-genuinely-nonlinear geometry: switch manifolds, sub-discontinuities,
and their tracked curves through a run.

A family is piecewise genuinely nonlinear when grad(lambda_i) . r_i vanishes
on finitely many disjoint manifolds Z^1 < Z^2 < ... crossed transversally by
rarefaction curves.  Shock fronts crossing these manifolds split into indexed
sub-discontinuities; chains of strong sub-discontinuities across interaction
nodes form the (beta, i, j)-curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainEscape
from .models import SystemModel, eigen_decompose
from .riemann import SHOCK, elementary_curve, solve_riemann

GENUINELY_NONLINEAR = "GENUINELY_NONLINEAR"
LINEARLY_DEGENERATE = "LINEARLY_DEGENERATE"
PIECEWISE_GNL = "PIECEWISE_GNL"

_LD_TOL = 1e-10
_BISECT_TOL = 1e-10
_NODE_TOL = 1e-9


def gnl_indicator(model: SystemModel, family: int, u, step: float = 1e-6):
    """Directional derivative of lambda_i along r_i (central difference)."""
    u = np.asarray(u, dtype=float)
    eig = eigen_decompose(model, u)
    r = eig.r(family)
    h = step * (1.0 + float(np.linalg.norm(u)))
    lam_p = eigen_decompose(model, u + h * r).lambdas[family]
    lam_m = eigen_decompose(model, u - h * r).lambdas[family]
    return float((lam_p - lam_m) / (2 * h))


@dataclass
class GnlProfile:
    """Switch-manifold geometry of one family along a reference curve."""

    family: int
    classification: str
    base_state: np.ndarray
    left_coord: np.ndarray               # l_i(base), coordinate functional
    crossings: np.ndarray                # ascending parameters omega^1..omega^J
    crossing_states: np.ndarray
    sign_pattern: list                   # sign of the indicator between crossings

    def coordinate(self, u):
        """Position of a state in the reference-curve parameterization."""
        return float(self.left_coord @ (np.asarray(u, dtype=float) - self.base_state))

    def region_index(self, u):
        """m such that the state sits between Z^m and Z^{m+1} (Z^0 at -inf)."""
        return int(np.searchsorted(self.crossings, self.coordinate(u)))


def gnl_scan(
    model: SystemModel,
    family: int,
    base_state,
    span,
    samples: int = 400,
) -> GnlProfile:
    """Classify a characteristic field along its rarefaction curve."""
    base = np.asarray(base_state, dtype=float)
    lo, hi = float(span[0]), float(span[1])
    eig0 = eigen_decompose(model, base)
    left = eig0.l(family)

    def rhs(u):
        return eigen_decompose(model, u).r(family)

    h_base = (hi - lo) / samples

    def integrate_from(u0, t0, t1):
        """RK4 along u' = r_i from the state at t0 to the parameter t1."""
        n = max(1, int(math.ceil(abs(t1 - t0) / h_base - 1e-12)))
        h = (t1 - t0) / n
        u = np.asarray(u0, dtype=float).copy()
        for _ in range(n):
            k1 = rhs(u)
            k2 = rhs(u + 0.5 * h * k1)
            k3 = rhs(u + 0.5 * h * k2)
            k4 = rhs(u + h * k3)
            u = u + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not model.in_box(u):
                raise DomainEscape(f"{model.name}: rarefaction curve left the box")
        return u

    # one sweep each way from the base state, recording every sample node
    taus = np.linspace(lo, hi, samples + 1)
    node_state = {}
    u, prev = base, 0.0
    for t in taus[taus >= 0.0]:
        u = integrate_from(u, prev, t)
        node_state[float(t)] = u
        prev = t
    u, prev = base, 0.0
    for t in taus[taus < 0.0][::-1]:
        u = integrate_from(u, prev, t)
        node_state[float(t)] = u
        prev = t
    states = [node_state[float(t)] for t in taus]

    def integrate(target):
        """State at an arbitrary parameter, continued from the nearest node."""
        a = int(np.clip(np.searchsorted(taus, target) - 1, 0, samples))
        return integrate_from(states[a], taus[a], target)
    vals = np.array([gnl_indicator(model, family, u) for u in states])

    if np.max(np.abs(vals)) <= _LD_TOL:
        return GnlProfile(family, LINEARLY_DEGENERATE, base, left,
                          np.empty(0), np.empty((0, base.size)), [])

    crossings = []
    crossing_states = []
    for a in range(samples):
        va, vb = vals[a], vals[a + 1]
        if abs(va) <= _LD_TOL:
            # a sample sitting exactly on a manifold is itself the crossing
            if 0 < a and vals[a - 1] * vb < 0:
                crossings.append(taus[a])
                crossing_states.append(states[a])
            continue
        if va * vb >= 0:
            continue
        t_lo, t_hi = taus[a], taus[a + 1]
        f_lo = va
        while t_hi - t_lo > _BISECT_TOL:
            mid = 0.5 * (t_lo + t_hi)
            f_mid = gnl_indicator(model, family, integrate(mid))
            if f_lo * f_mid <= 0:
                t_hi = mid
            else:
                t_lo, f_lo = mid, f_mid
        root = 0.5 * (t_lo + t_hi)
        crossings.append(root)
        crossing_states.append(integrate(root))

    if not crossings:
        return GnlProfile(family, GENUINELY_NONLINEAR, base, left,
                          np.empty(0), np.empty((0, base.size)), [sign_of(vals[0])])

    pattern = [sign_of(vals[0])]
    for _ in crossings:
        pattern.append(-pattern[-1])
    return GnlProfile(
        family, PIECEWISE_GNL, base, left,
        np.asarray(crossings), np.asarray(crossing_states), pattern,
    )


def sign_of(v):
    return 1 if v > 0 else -1


# -- sub-discontinuities --------------------------------------------------


@dataclass
class SubDiscontinuity:
    """One indexed piece of a front crossing the switch manifolds."""

    family: int
    index: int                   # j of the window [tau^j, tau^{j+1}]
    tau_lo: float
    tau_hi: float
    strength: float              # tau^{j+1} - tau^j, signed like the front
    u_first: np.ndarray          # oriented per the parity convention
    u_second: np.ndarray
    parity_ok: bool              # satisfies the splitting parity rule


def _curve_state(curve, tau):
    """Linear interpolation of the stored curve states at parameter tau."""
    out = np.empty(curve.states.shape[1])
    for c in range(out.size):
        out[c] = np.interp(tau, curve.tau, curve.states[:, c])
    return out


def split_subdiscontinuities(model, curve, gnl: GnlProfile, keep_all=False):
    """Indexed sub-discontinuity windows of one elementary-curve jump.

    Emits windows obeying the parity rule (even j for s > 0, odd j for s < 0);
    `keep_all` also returns the complementary windows flagged parity_ok=False.
    """
    if gnl.classification != PIECEWISE_GNL:
        return []
    s = curve.size
    if abs(s) <= 1e-13:
        return []
    path = curve.path_indices()
    taus = curve.tau[path]
    vals = np.array([gnl_indicator(model, curve.family, curve.states[i]) for i in path])

    # crossing parameters along this front, in path order
    cross_taus = []
    for a in range(1, len(path) - 1):
        if abs(vals[a]) <= _LD_TOL and vals[a - 1] * vals[a + 1] < 0:
            cross_taus.append(taus[a])
    for a in range(len(path) - 1):
        if abs(vals[a]) <= _LD_TOL or abs(vals[a + 1]) <= _LD_TOL:
            continue
        if vals[a] * vals[a + 1] < 0:
            t_lo, t_hi = taus[a], taus[a + 1]
            f_lo = vals[a]
            for _ in range(60):
                if abs(t_hi - t_lo) <= _BISECT_TOL:
                    break
                mid = 0.5 * (t_lo + t_hi)
                f_mid = gnl_indicator(model, curve.family, _curve_state(curve, mid))
                if f_lo * f_mid <= 0:
                    t_hi = mid
                else:
                    t_lo, f_lo = mid, f_mid
            cross_taus.append(0.5 * (t_lo + t_hi))
    cross_taus.sort(reverse=(s < 0))

    m0 = gnl.region_index(curve.u_left)
    step = 1 if s > 0 else -1
    # state labels match the manifold index at each crossing: moving up from
    # region m0 meets Z^{m0+1} first, moving down meets Z^{m0} first
    labels = [(m0 + 1 + k if s > 0 else m0 - k) for k in range(len(cross_taus))]
    node_taus = [0.0] + cross_taus + [s]
    if labels:
        node_labels = [labels[0] - step] + labels + [labels[-1] + step]
    else:
        # no crossing: the whole jump lives in region m0
        node_labels = [m0 + (0 if s > 0 else 1), m0 + (1 if s > 0 else 0)]
    # drop duplicated endpoints when the jump starts/ends on a manifold
    cleaned = []
    for t, lab in zip(node_taus, node_labels):
        if cleaned and abs(t - cleaned[-1][0]) <= _BISECT_TOL:
            continue
        cleaned.append((t, lab))

    out = []
    for (t_a, lab_a), (t_b, lab_b) in zip(cleaned[:-1], cleaned[1:]):
        j = min(lab_a, lab_b)
        parity_ok = (s > 0 and j % 2 == 0) or (s < 0 and j % 2 == 1)
        if not parity_ok and not keep_all:
            continue
        u_a = _curve_state(curve, t_a)
        u_b = _curve_state(curve, t_b)
        lo_state, hi_state = (u_a, u_b) if lab_a == j else (u_b, u_a)
        # orientation: [u^j, u^{j+1}] for s > 0, [u^{j+1}, u^j] for s < 0
        first, second = (lo_state, hi_state) if s > 0 else (hi_state, lo_state)
        out.append(
            SubDiscontinuity(
                family=curve.family,
                index=j,
                tau_lo=min(t_a, t_b),
                tau_hi=max(t_a, t_b),
                strength=t_b - t_a,
                u_first=first,
                u_second=second,
                parity_ok=parity_ok,
            )
        )
    return out


# -- (beta, i, j) curves --------------------------------------------------


@dataclass
class SubDiscCurve:
    beta: float
    family: int
    index: int
    nodes: list                      # [(t, x), ...] strictly time-ordered
    strengths: list                  # per-segment |s_i^j|
    segment_ids: list
    maximal: bool = True
    leftmost: bool = True
    clause_even_for_positive: bool = False   # splitting-rule parity
    clause_odd_for_positive: bool = False    # curve-rule parity

    @property
    def peak_strength(self):
        return max(self.strengths) if self.strengths else 0.0


class _SubDiscCache:
    """Memoized (i, j)-window strengths of front segments."""

    def __init__(self, model, gnl, accuracy):
        self.model = model
        self.gnl = gnl
        self.accuracy = accuracy
        self._store = {}

    def windows(self, family, u_left, size):
        key = (family, round(float(size), 12),
               tuple(np.round(np.asarray(u_left, dtype=float), 12)))
        if key not in self._store:
            curve = elementary_curve(self.model, family, u_left, size,
                                     accuracy=self.accuracy)
            self._store[key] = split_subdiscontinuities(self.model, curve, self.gnl)
        return self._store[key]


def track_beta_curves(
    solution,
    beta: float,
    family: int,
    index: int,
    gnl: Optional[GnlProfile] = None,
    parity_filter: str = "any",
):
    """Maximal leftmost chains of strong (i, j) sub-discontinuities.

    Chains segments whose (family, index) window strength stays >= beta/4,
    keeps chains peaking >= beta, and resolves shared nodes by preferring the
    leftmost (smallest slope) continuation.  `parity_filter` may restrict the
    admitted parent-jump sign: "any", "even-positive" (splitting rule) or
    "odd-positive" (curve rule).
    """
    model = solution.model
    if gnl is None:
        lo, hi = model.box_lo[0], model.box_hi[0]
        gnl = gnl_scan(model, family, model.u_ref, (lo - model.u_ref[0],
                                                    hi - model.u_ref[0]))
    if gnl.classification != PIECEWISE_GNL:
        return []
    cache = _SubDiscCache(model, gnl, solution.accuracy)

    # qualifying segments: (t0, x0, t1, x1, |strength|, seg_id, front sign)
    segs = []
    fronts = {f.id: f for f in getattr(solution, "fronts", [])} or None
    for seg in solution.front_segments():
        if seg.family != family or seg.kind != SHOCK:
            continue
        front = fronts.get(seg.id) if fronts else None
        u_left = front.u_left if front is not None else None
        if u_left is None:
            continue
        for w in cache.windows(family, u_left, seg.size):
            if w.index != index or abs(w.strength) < beta / 4.0:
                continue
            sign = 1 if seg.size > 0 else -1
            if parity_filter == "even-positive" and not (
                (sign > 0) == (index % 2 == 0)
            ):
                continue
            if parity_filter == "odd-positive" and not (
                (sign > 0) == (index % 2 == 1)
            ):
                continue
            segs.append((seg.t_start, seg.x_start, seg.t_end, seg.x_end,
                         abs(w.strength), seg.id, sign))

    segs.sort(key=lambda r: (r[0], r[1]))
    used = set()
    curves = []
    for start in segs:
        if start[5] in used:
            continue
        chain = [start]
        used.add(start[5])
        while True:
            t1, x1 = chain[-1][2], chain[-1][3]
            nexts = [
                r for r in segs
                if r[5] not in used
                and abs(r[0] - t1) <= _NODE_TOL and abs(r[1] - x1) <= _NODE_TOL
            ]
            if not nexts:
                break
            # leftmost continuation: smallest slope keeps the line to the left
            nexts.sort(key=lambda r: (r[3] - r[1]) / max(r[2] - r[0], 1e-300))
            chain.append(nexts[0])
            used.add(nexts[0][5])
        strengths = [r[4] for r in chain]
        if max(strengths) < beta:
            for r in chain[1:]:
                used.discard(r[5])  # weak chains release their continuations
            continue
        nodes = [(chain[0][0], chain[0][1])] + [(r[2], r[3]) for r in chain]
        signs = {r[6] for r in chain}
        curves.append(
            SubDiscCurve(
                beta=beta,
                family=family,
                index=index,
                nodes=nodes,
                strengths=strengths,
                segment_ids=[r[5] for r in chain],
                clause_even_for_positive=any(
                    (sg > 0) == (index % 2 == 0) for sg in signs
                ),
                clause_odd_for_positive=any(
                    (sg > 0) == (index % 2 == 1) for sg in signs
                ),
            )
        )
    return curves


# -- chain merging --------------------------------------------------------


@dataclass
class ChainMergeReport:
    family: int
    residual: float
    cross_family_content: float      # rho: strength in the other families
    total_variation: float
    chain_sizes: np.ndarray          # per-jump sizes of the tracked family
    merged_sizes: np.ndarray         # per-family sizes of the single merged RP

    def bound(self, constant: float) -> float:
        exponent = min(constant * self.total_variation, 700.0)
        return (constant * math.exp(exponent)
                * (1.0 + self.total_variation) * self.cross_family_content)


def verify_chain_merge(model: SystemModel, family: int, states, accuracy=0.01):
    """Compare a chain of small jumps with the single merged Riemann problem.

    Returns the defect |sigma_i - sum_k s_i^k| + sum_{j != i} |sigma_j| where
    s^k are the per-jump sizes and sigma the merged sizes.
    """
    states = [np.asarray(u, dtype=float) for u in states]
    n = model.dimension
    chain = np.zeros(n)
    tv = 0.0
    for a, b in zip(states[:-1], states[1:]):
        fan = solve_riemann(model, a, b, accuracy)
        chain += fan.sizes
        tv += float(np.sum(np.abs(b - a)))
    merged = solve_riemann(model, states[0], states[-1], accuracy)
    rho = float(np.sum(np.abs(np.delete(chain, family))))
    residual = abs(merged.sizes[family] - chain[family]) + float(
        np.sum(np.abs(np.delete(merged.sizes, family)))
    )
    return ChainMergeReport(
        family=family,
        residual=residual,
        cross_family_content=max(rho, 1e-300),
        total_variation=tv,
        chain_sizes=chain,
        merged_sizes=merged.sizes,
    )


def fit_chain_constant(reports, hi: float = 1e6):
    """Smallest C with residual <= C e^{C TV} (1+TV) rho for every report."""

    def ok(c):
        return all(r.residual <= r.bound(c) + 1e-15 for r in reports)

    if not ok(hi):
        return math.inf
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi
