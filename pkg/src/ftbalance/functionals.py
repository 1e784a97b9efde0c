"""Wave-strength functionals, interaction amounts, measures, region balances.

The amount of interaction between two colliding fronts of the same family is
measured by how much the convex envelope of the merged reduced flux differs
from the envelopes of the two incoming pieces; across families it is the plain
strength product.  These amounts feed the atomic interaction measures and the
Glimm-type functionals V, Q and Upsilon = V + C1*Q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .envelope import SampledFunction, envelope as _envelope_of
from .errors import GridMismatch, NonTransversalEdge
from .riemann import elementary_curve

SIZE_TOL = 1e-12

# two colliding shocks must yield |s's''| times their speed gap; the raw
# envelope-difference integrals come out at exactly half of that
_SHOCK_CALIBRATION = 2.0


# -- amount of interaction ------------------------------------------------


def _reflect(tau, flux):
    """Mirror a reduced-flux graph through the origin (tau -> -tau, F -> -F)."""
    return -tau[::-1], -flux[::-1]


def _with_node(tau, flux, point):
    """Grid with `point` inserted as an exact node (values interpolated)."""
    if np.any(~np.isfinite(flux)):
        raise GridMismatch("reduced flux contains non-finite samples")
    if np.min(np.abs(tau - point)) <= 1e-14 * (1.0 + abs(point)):
        return tau, flux
    grid = np.sort(np.append(tau, point))
    return grid, np.interp(grid, tau, flux)


def _env_values(tau, flux, convex):
    res = _envelope_of(SampledFunction(tau, flux), convex=convex)
    return res.envelope


def _amount_same_family(tau1, f1, s1, tau2, f2, s2):
    """Envelope-difference integrals, reduced to the nonnegative-s1 cases."""
    if s1 < 0:
        # mirroring the whole picture swaps convex and concave envelopes
        tau1, f1 = _reflect(tau1, f1)
        tau2, f2 = _reflect(tau2, f2)
        s1, s2 = -s1, -s2

    if s2 >= 0:
        # head of the second curve appended to the first, one convex hull
        merged_tau = np.concatenate([tau1, s1 + tau2[1:]])
        merged_f = np.concatenate([f1, f1[-1] + f2[1:]])
        env_m = _env_values(merged_tau, merged_f, convex=True)
        env_1 = _env_values(tau1, f1, convex=True)
        env_2 = _env_values(tau2, f2, convex=True)
        n1 = tau1.size
        term1 = np.trapezoid(np.abs(env_1 - env_m[:n1]), tau1)
        tail = np.concatenate([env_m[n1 - 1 : n1], env_m[n1:]])
        term2 = np.trapezoid(np.abs(f1[-1] + env_2 - tail), tau2)
        return term1 + term2

    if s2 >= -s1:
        # partial cancellation, only the first curve matters
        cut = s1 + s2
        tau1, f1 = _with_node(tau1, f1, cut)
        k = int(np.searchsorted(tau1, cut - 1e-14))
        env_full = _env_values(tau1, f1, convex=True)
        left_t, left_f = tau1[: k + 1], f1[: k + 1]
        right_t, right_f = tau1[k:], f1[k:]
        term1 = 0.0
        if left_t.size >= 2:
            env_left = _env_values(left_t, left_f, convex=True)
            term1 = np.trapezoid(np.abs(env_full[: k + 1] - env_left), left_t)
        env_right = _env_values(right_t, right_f, convex=False)
        term2 = np.trapezoid(np.abs(env_full[k:] - env_right), right_t)
        return term1 + term2

    # the second wave overwhelms the first, only the second curve matters
    cut = -s1
    tau2, f2 = _with_node(tau2, f2, cut)
    k = int(np.searchsorted(tau2, cut - 1e-14))
    env_full = _env_values(tau2, f2, convex=False)
    left_t, left_f = tau2[: k + 1], f2[: k + 1]
    right_t, right_f = tau2[k:], f2[k:]
    term1 = 0.0
    if left_t.size >= 2:
        env_left = _env_values(left_t, left_f, convex=False)
        term1 = np.trapezoid(np.abs(env_full[: k + 1] - env_left), left_t)
    term2 = 0.0
    if right_t.size >= 2:
        env_right = _env_values(right_t, right_f, convex=True)
        term2 = np.trapezoid(np.abs(env_full[k:] - env_right), right_t)
    return term1 + term2


def interaction_amount(
    model,
    family_left: int,
    size_left: float,
    family_right: int,
    size_right: float,
    curve_left=None,
    curve_right=None,
    u_left=None,
    accuracy: Optional[float] = None,
):
    """Amount of interaction between a left and a right incoming front.

    Different families give the plain strength product; equal (physical)
    families compare convex/concave envelopes of the merged reduced flux.
    Nonphysical fronts use the product rule only.
    """
    s1, s2 = float(size_left), float(size_right)
    if abs(s1) <= SIZE_TOL or abs(s2) <= SIZE_TOL:
        return 0.0
    nonphysical = model.dimension
    if family_left != family_right or family_left == nonphysical:
        return abs(s1 * s2)

    k = family_left
    if curve_left is None:
        if u_left is None:
            raise ValueError("same-family amount needs curves or a left state")
        curve_left = elementary_curve(model, k, u_left, s1, accuracy=accuracy)
    if curve_right is None:
        curve_right = elementary_curve(
            model, k, curve_left.end_state, s2, accuracy=accuracy
        )
    raw = _amount_same_family(
        curve_left.tau if s1 >= 0 else curve_left.tau,
        curve_left.reduced_flux,
        s1,
        curve_right.tau,
        curve_right.reduced_flux,
        s2,
    )
    return _SHOCK_CALIBRATION * float(raw)


# -- Glimm functionals ----------------------------------------------------


@dataclass
class FrontRecord:
    """Minimal view of a front for functional evaluation."""

    x: float
    family: int
    size: float
    tau_profile: np.ndarray = None
    sigma_profile: np.ndarray = None
    kind: str = "SHOCK"

    def __post_init__(self):
        if self.tau_profile is None:
            self.tau_profile = np.array([0.0, abs(self.size)])
        if self.sigma_profile is None:
            self.sigma_profile = np.zeros(2)
        self.tau_profile = np.asarray(self.tau_profile, dtype=float)
        self.sigma_profile = np.asarray(self.sigma_profile, dtype=float)


def _pair_speed_integral(f1, f2):
    """Double trapezoid of |sigma'(tau') - sigma''(tau'')| on the tensor grid."""
    gap = np.abs(f1.sigma_profile[:, None] - f2.sigma_profile[None, :])
    inner = np.trapezoid(gap, f2.tau_profile, axis=1)
    return float(np.trapezoid(inner, f1.tau_profile))


def glimm_functionals(fronts, nonphysical_family=None, c1: float = 10.0):
    """Total strength V, interaction potential Q, and Upsilon = V + c1*Q.

    `fronts` is any iterable of records with x, family, size and sampled
    speed profiles; nonphysical fronts (family == nonphysical_family) count
    in V and in the cross-family sum but not in the same-family integrals.
    """
    fronts = list(fronts)
    V = sum(abs(f.size) for f in fronts)
    Q = 0.0
    for a in range(len(fronts)):
        for b in range(a + 1, len(fronts)):
            f1, f2 = fronts[a], fronts[b]
            if f1.family != f2.family:
                # approaching iff the faster family sits on the left
                lo, hi = (f1, f2) if f1.family < f2.family else (f2, f1)
                if hi.x < lo.x:
                    Q += abs(f1.size * f2.size)
            elif nonphysical_family is None or f1.family != nonphysical_family:
                Q += 0.25 * _pair_speed_integral(f1, f2)
    return V, Q, V + c1 * Q


# -- interaction measures -------------------------------------------------


@dataclass
class MeasureAtom:
    t: float
    x: float
    families: tuple
    sizes: tuple
    mu_i: float
    mu_ic: float


@dataclass
class InteractionLedger:
    """Atoms of the interaction / interaction-cancellation measures."""

    atoms: list = field(default_factory=list)
    series: list = field(default_factory=list)  # (t, V, Q, Upsilon) after events

    def mass(self, cancellation=False, region=None):
        total = 0.0
        for atom in self.atoms:
            if region is not None and not _point_in_polygon(atom.t, atom.x, region):
                continue
            total += atom.mu_ic if cancellation else atom.mu_i
        return total


def cancellation_term(size_left, size_right):
    return abs(size_left) + abs(size_right) - abs(size_left + size_right)


def build_measures(solution, c1: float = 10.0) -> InteractionLedger:
    """Atomic interaction measures plus the functional time series of a run."""
    ledger = InteractionLedger()
    nonph = solution.model.dimension
    for ev in solution.events:
        if ev.kind != "interaction":
            continue  # source updates carry no interaction atom
        (fam1, s1), (fam2, s2) = ev.incoming
        mu_i = ev.amount
        mu_ic = mu_i
        if fam1 == fam2 and fam1 != nonph:
            mu_ic += cancellation_term(s1, s2)
        ledger.atoms.append(
            MeasureAtom(ev.t, ev.x, (fam1, fam2), (s1, s2), mu_i, mu_ic)
        )
    for t in solution.sample_times():
        V, Q, Ups = glimm_functionals(
            solution.front_records(t), nonphysical_family=nonph, c1=c1
        )
        ledger.series.append((t, V, Q, Ups))
    return ledger


# -- region balances ------------------------------------------------------


def _point_in_polygon(t, x, polygon, slack=1e-9):
    """Even-odd test in the (t, x) plane, boundary counted as inside."""
    pts = np.asarray(polygon, dtype=float)
    n = pts.shape[0]
    inside = False
    for i in range(n):
        t1, x1 = pts[i]
        t2, x2 = pts[(i + 1) % n]
        # on-segment check with slack
        seg = np.hypot(t2 - t1, x2 - x1)
        if seg > 0:
            cross = abs((t - t1) * (x2 - x1) - (x - x1) * (t2 - t1)) / seg
            dot = ((t - t1) * (t2 - t1) + (x - x1) * (x2 - x1)) / seg**2
            if cross <= slack and -slack <= dot * seg <= seg + slack:
                return True
        if (x1 > x) != (x2 > x):
            t_cross = t1 + (x - x1) / (x2 - x1) * (t2 - t1)
            if t < t_cross:
                inside = not inside
    return inside


def _segment_crossings(p, q, polygon):
    """Crossing parameters of segment p->q with the polygon boundary."""
    pts = np.asarray(polygon, dtype=float)
    d = q - p
    hits = []
    for i in range(pts.shape[0]):
        a = pts[i]
        b = pts[(i + 1) % pts.shape[0]]
        e = b - a
        denom = d[0] * e[1] - d[1] * e[0]
        if abs(denom) <= 1e-14 * (1.0 + np.linalg.norm(d) * np.linalg.norm(e)):
            # parallel: transversality is violated only on actual overlap
            w = p - a
            off = abs(w[0] * e[1] - w[1] * e[0])
            if off <= 1e-12 * (1.0 + np.linalg.norm(e)):
                raise NonTransversalEdge("front segment parallel to a region edge")
            continue
        w = p - a
        s = (e[0] * w[1] - e[1] * w[0]) / denom
        r = (d[0] * w[1] - d[1] * w[0]) / denom
        if -1e-12 <= s <= 1 + 1e-12 and -1e-12 <= r <= 1 + 1e-12:
            hits.append(min(max(s, 0.0), 1.0))
    return sorted(hits)


@dataclass
class RegionBalance:
    polygon: np.ndarray
    family: int
    w_in_pos: float
    w_in_neg: float
    w_out_pos: float
    w_out_neg: float
    mu_ic_mass: float
    span_steps: float            # (k - h) in units of the time step
    time_step: float
    fitted_c: float

    @property
    def holds(self):
        return math.isfinite(self.fitted_c)


def _balance_holds(C, w_in, w_out, mu, span_tau):
    grow = math.exp(span_tau * C)
    return (
        (w_in - C * mu) / grow <= w_out + 1e-12
        and w_out <= grow * (w_in + C * mu) + 1e-12
    )


def region_balance(solution, polygon, family: int) -> RegionBalance:
    """Wave balance of one family across a polygonal region of the (t,x) plane."""
    polygon = np.asarray(polygon, dtype=float)
    tau = solution.time_step
    t_lo = float(np.min(polygon[:, 0]))
    t_hi = float(np.max(polygon[:, 0]))
    h = math.floor(t_lo / tau + 1e-9)
    k = math.ceil(t_hi / tau - 1e-9)
    span_tau = (k - h) * tau

    w = {("in", +1): 0.0, ("in", -1): 0.0, ("out", +1): 0.0, ("out", -1): 0.0}
    for seg in solution.front_segments():
        if seg.family != family:
            continue
        p = np.array([seg.t_start, seg.x_start])
        q = np.array([seg.t_end, seg.x_end])
        for s in _segment_crossings(p, q, polygon):
            eps = 1e-7
            before = p + (q - p) * max(s - eps, 0.0)
            after = p + (q - p) * min(s + eps, 1.0)
            was_in = _point_in_polygon(before[0], before[1], polygon, slack=0.0)
            now_in = _point_in_polygon(after[0], after[1], polygon, slack=0.0)
            if was_in == now_in:
                continue
            direction = "in" if now_in else "out"
            sign = +1 if seg.size > 0 else -1
            w[(direction, sign)] += abs(seg.size)

    ledger = getattr(solution, "ledger", None)
    if ledger is None:
        ledger = build_measures(solution)
    mu = ledger.mass(cancellation=True, region=polygon)

    def feasible(C):
        return _balance_holds(C, w[("in", +1)], w[("out", +1)], mu, span_tau) and \
            _balance_holds(C, w[("in", -1)], w[("out", -1)], mu, span_tau)

    if feasible(0.0):
        fitted = 0.0
    else:
        hi = 1.0
        while not feasible(hi) and hi < 1e8:
            hi *= 2.0
        if not feasible(hi):
            fitted = math.inf
        else:
            lo = 0.0
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if feasible(mid):
                    hi = mid
                else:
                    lo = mid
            fitted = hi

    return RegionBalance(
        polygon=polygon,
        family=family,
        w_in_pos=w[("in", +1)],
        w_in_neg=w[("in", -1)],
        w_out_pos=w[("out", +1)],
        w_out_neg=w[("out", -1)],
        mu_ic_mass=mu,
        span_steps=float(k - h),
        time_step=tau,
        fitted_c=fitted,
    )
