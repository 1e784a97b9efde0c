"""Event-driven front tracking of a piecewise-constant profile.

Fronts move at constant speed between binary interactions.  At each earliest
collision the two incoming fronts are replaced either by the full local
Riemann fan (accurate solver) or, when the amount of interaction is below the
threshold rho_np, by transmitted waves plus a nonphysical remainder front
travelling at the fixed supersonic speed of the model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import EventOverflow, OutOfWindow, UnboundedSupport
from .functionals import interaction_amount
from .models import SystemModel, eigen_decompose
from .riemann import (
    NONPHYSICAL,
    SHOCK,
    SIZE_TOL,
    elementary_curve,
    solve_riemann,
    wave_partition,
)

_TOL_EVENT = 1e-12
_QUANT_BITS = 40
_SPEED_NUDGE = 1e-9
# jumps below this multiple of the accuracy use first-order wave algebra:
# their O(size^2) error sits inside the scheme's interaction error budget
_MICRO_FRACTION = 1.0
MAX_EVENTS = 10_000_000


# -- profiles -------------------------------------------------------------


@dataclass
class Profile:
    """Piecewise-constant function: jump positions and the states between them."""

    xs: np.ndarray               # ascending jump positions, shape (J,)
    states: np.ndarray           # shape (J+1, N), states[j] holds left of xs[j]

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        if self.states.shape[0] != self.xs.size + 1:
            raise ValueError("need one more state than jump positions")
        if self.xs.size > 1 and not np.all(np.diff(self.xs) > 0):
            raise ValueError("jump positions must be strictly increasing")

    @property
    def dimension(self):
        return self.states.shape[1]

    def __call__(self, x):
        """State at x (right-continuous)."""
        j = int(np.searchsorted(self.xs, x, side="right"))
        return self.states[j]

    def total_variation(self):
        if self.xs.size == 0:
            return 0.0
        return float(np.sum(np.abs(np.diff(self.states, axis=0))))

    def l1_distance(self, other, lo=None, hi=None):
        """L1 distance to another profile over [lo, hi]."""
        cuts = np.unique(np.concatenate([self.xs, other.xs]))
        if lo is None:
            lo = cuts[0] - 1.0 if cuts.size else -1.0
        if hi is None:
            hi = cuts[-1] + 1.0 if cuts.size else 1.0
        cuts = np.concatenate([[lo], cuts[(cuts > lo) & (cuts < hi)], [hi]])
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            mid = 0.5 * (a + b)
            total += (b - a) * float(np.sum(np.abs(self(mid) - other(mid))))
        return total


def init_from_datum(model: SystemModel, datum, accuracy: float, support=None) -> Profile:
    """Piecewise-constant sampling of the initial datum on an accuracy grid."""
    if isinstance(datum, Profile):
        return datum
    if support is None:
        raise UnboundedSupport("datum needs a declared compact support (a, b)")
    a, b = float(support[0]), float(support[1])
    if not (math.isfinite(a) and math.isfinite(b) and b > a):
        raise UnboundedSupport(f"invalid support interval ({a}, {b})")
    cells = max(1, int(math.ceil((b - a) / accuracy)))
    edges = np.linspace(a, b, cells + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    # sampling at cell points keeps each value inside the cell's range, so the
    # sampled staircase cannot exceed the total variation of the datum
    values = np.array([np.asarray(datum(x), dtype=float) for x in mids])
    left = np.asarray(datum(a), dtype=float)
    right = np.asarray(datum(b), dtype=float)
    states = [left]
    xs = []
    grid = np.concatenate([[a], edges[1:]])
    for x, v in zip(grid, list(values) + [right]):
        if np.max(np.abs(v - states[-1])) > 1e-13:
            xs.append(x)
            states.append(v)
        # equal neighbours merge into one constant piece
    return Profile(np.asarray(xs), np.asarray(states))


# -- fronts and events ----------------------------------------------------


@dataclass
class Front:
    """One straight trajectory segment of a tracked discontinuity."""

    id: int
    family: int                  # model.dimension marks nonphysical fronts
    kind: str
    size: float
    u_left: np.ndarray
    u_right: np.ndarray
    speed: float
    t_start: float
    x_start: float
    t_end: float = math.nan
    x_end: float = math.nan
    tau_profile: np.ndarray = field(default_factory=lambda: np.zeros(2))
    sigma_profile: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def position(self, t):
        return self.x_start + self.speed * (t - self.t_start)


@dataclass
class Event:
    t: float
    x: float
    kind: str                    # "interaction" | "update" | "restart"
    incoming: list               # [(family, size), ...]
    outgoing: list
    incoming_ids: list
    outgoing_ids: list
    amount: float = 0.0


@dataclass
class TrackedSolution:
    """Front tracking over one time window [t0, t1]."""

    model: SystemModel
    accuracy: float
    t0: float
    t1: float
    initial: Profile
    fronts: list = field(default_factory=list)    # all closed segments
    active: list = field(default_factory=list)    # alive at t1, also in fronts
    events: list = field(default_factory=list)
    np_series: list = field(default_factory=list)  # (t, total NP strength)
    time_step: float = 0.0

    def __post_init__(self):
        if self.time_step == 0.0:
            self.time_step = self.t1 - self.t0

    def _alive(self, t):
        out = [
            f
            for f in self.fronts
            if f.t_start <= t and (t < f.t_end or (t == f.t_end == self.t1))
        ]
        out.sort(key=lambda f: (f.position(t), f.speed))
        return out

    def snapshot(self, t) -> Profile:
        if not (self.t0 <= t <= self.t1):
            raise OutOfWindow(f"t={t} outside [{self.t0}, {self.t1}]")
        alive = self._alive(t)
        if not alive:
            return Profile(np.empty(0), self.initial.states[:1].copy())
        xs = np.array([f.position(t) for f in alive])
        states = np.vstack([alive[0].u_left[None, :]] + [f.u_right[None, :] for f in alive])
        # fronts meeting exactly at t (e.g. a collision on the window end)
        # produce zero-width pieces; drop them, keeping the outer states
        keep_x = []
        keep_s = [0]
        for i, x in enumerate(xs):
            if keep_x and x - keep_x[-1] <= 1e-13:
                keep_s[-1] = i + 1     # replace the zero-width middle state
                continue
            keep_x.append(float(x))
            keep_s.append(i + 1)
        return Profile(np.asarray(keep_x), states[keep_s])

    def front_records(self, t):
        """Alive fronts as light records for the functional evaluators."""
        return [
            _Record(f.position(t), f.family, f.size, f.tau_profile, f.sigma_profile)
            for f in self._alive(t)
        ]

    def front_segments(self):
        return [
            _Segment(f.id, f.family, f.kind, f.size, f.t_start, f.x_start, f.t_end, f.x_end)
            for f in self.fronts
        ]

    def sample_times(self):
        times = [self.t0] + [ev.t for ev in self.events] + [self.t1]
        return sorted(set(times))

    def np_strength(self, t):
        nonph = self.model.dimension
        return sum(abs(f.size) for f in self._alive(t) if f.family == nonph)


@dataclass
class _Record:
    x: float
    family: int
    size: float
    tau_profile: np.ndarray
    sigma_profile: np.ndarray


@dataclass
class _Segment:
    id: int
    family: int
    kind: str
    size: float
    t_start: float
    x_start: float
    t_end: float
    x_end: float


# -- the event loop -------------------------------------------------------


class _Engine:
    def __init__(self, model, accuracy, t0, t1, rho_np=None, jump_max=None,
                 max_events=MAX_EVENTS):
        self.model = model
        self.eps = accuracy
        self.t0, self.t1 = t0, t1
        self.rho_np = accuracy**2 if rho_np is None else rho_np
        self.jump_max = jump_max
        self.max_events = max_events
        self.quantum = (t1 - t0) * 2.0**-_QUANT_BITS
        self.next_id = 0
        self.nonph = model.dimension
        self.np_speed = model.nonphysical_speed()
        # physical waves below this size are folded into the nonphysical
        # remainder; keeping them alive only churns the event queue
        self.size_min = 1e-3 * accuracy

    def _fresh_id(self):
        self.next_id += 1
        return self.next_id - 1

    def _coalesce(self, waves):
        """Merge same-family neighbours whose speeds agree to round-off.

        Near-degenerate fans split a tiny jump into slivers whose speeds
        carry ~1e-7 sampling noise; kept separate they collide immediately
        and churn the event loop without transporting anything.
        """
        merged = []
        for w in waves:
            if abs(w.size) <= SIZE_TOL:
                continue
            prev = merged[-1] if merged else None
            if (
                prev is not None
                and w.family == prev["family"]
                and abs(w.speed - prev["speed"]) <= 1e-4 * (1.0 + abs(w.speed))
                and abs(prev["size"] + w.size) <= self.eps
            ):
                if abs(w.size) > abs(prev["size"]):
                    prev["kind"] = w.kind
                total = abs(prev["size"]) + abs(w.size)
                prev["speed"] = (
                    prev["speed"] * abs(prev["size"]) + w.speed * abs(w.size)
                ) / total
                prev["size"] += w.size
                prev["u_right"] = w.u_right
                prev["tau_profile"] = np.array([0.0, prev["size"]])
                prev["sigma_profile"] = np.array([prev["speed"], prev["speed"]])
            else:
                merged.append(dict(
                    family=w.family, kind=w.kind, size=w.size,
                    u_left=w.u_left, u_right=w.u_right, speed=w.speed,
                    tau_profile=w.tau_profile, sigma_profile=w.sigma_profile,
                ))
        return merged

    def _fronts_from_waves(self, waves, t, x):
        out = []
        prev_speed = -math.inf
        for w in self._coalesce(waves):
            # fronts leaving one point must keep their left-to-right order;
            # round-off in near-degenerate fans can invert speeds, which
            # would trigger a zero-time self-collision of the fan
            speed = max(w["speed"], prev_speed)
            prev_speed = speed
            out.append(
                Front(
                    id=self._fresh_id(),
                    family=w["family"],
                    kind=w["kind"],
                    size=w["size"],
                    u_left=w["u_left"],
                    u_right=w["u_right"],
                    speed=speed,
                    t_start=t,
                    x_start=x,
                    tau_profile=w["tau_profile"],
                    sigma_profile=w["sigma_profile"],
                )
            )
        return out

    def _np_front(self, u_left, u_right, t, x):
        strength = float(np.linalg.norm(u_right - u_left))
        # remainders at the sliver scale are dropped outright: each one kept
        # alive costs an overtake cascade without moving the solution
        if strength <= self.size_min:
            return None
        return Front(
            id=self._fresh_id(),
            family=self.nonph,
            kind=NONPHYSICAL,
            size=strength,
            u_left=np.asarray(u_left, dtype=float),
            u_right=np.asarray(u_right, dtype=float),
            speed=self.np_speed,
            t_start=t,
            x_start=x,
            tau_profile=np.array([0.0, strength]),
            sigma_profile=np.array([self.np_speed, self.np_speed]),
        )

    def _close_fan(self, out, uL, uR, t, x):
        """Drop sliver waves and close the fan with a nonphysical remainder."""
        kept = [f for f in out if abs(f.size) > self.size_min]
        u_end = kept[-1].u_right if kept else np.asarray(uL, dtype=float)
        np_front = self._np_front(u_end, uR, t, x)
        if np_front is not None:
            kept.append(np_front)
        return kept

    def _micro_fronts(self, u_left, u_right, t, x):
        """First-order fan of a sub-accuracy jump via the frozen eigenbasis.

        For a jump of size delta the wave sizes and speeds are correct to
        O(delta^2), which is below the scheme accuracy whenever
        delta <= _MICRO_FRACTION * eps; this skips the full curve machinery
        that dominates the cost of micro interactions.
        """
        uL = np.asarray(u_left, dtype=float)
        uR = np.asarray(u_right, dtype=float)
        eig = eigen_decompose(self.model, 0.5 * (uL + uR))
        sizes = eig.left @ (uR - uL)
        out = []
        u = uL
        for k in range(self.model.dimension):
            if abs(sizes[k]) <= self.size_min:
                continue
            u_next = u + sizes[k] * eig.r(k)
            out.append(
                Front(
                    id=self._fresh_id(),
                    family=k,
                    kind=SHOCK,
                    size=float(sizes[k]),
                    u_left=u,
                    u_right=u_next,
                    speed=float(eig.lambdas[k]),
                    t_start=t,
                    x_start=x,
                    tau_profile=np.array([0.0, float(sizes[k])]),
                    sigma_profile=np.array([eig.lambdas[k], eig.lambdas[k]]),
                )
            )
            u = u_next
        return out

    def solve_point(self, u_left, u_right, t, x):
        """Accurate local Riemann fan as a list of fronts."""
        if (np.max(np.abs(np.asarray(u_right) - np.asarray(u_left)))
                <= _MICRO_FRACTION * self.eps):
            out = self._micro_fronts(u_left, u_right, t, x)
            return self._close_fan(out, u_left, u_right, t, x)
        fan = solve_riemann(self.model, u_left, u_right, self.eps, jump_max=self.jump_max)
        out = self._fronts_from_waves(fan.waves, t, x)
        return self._close_fan(out, u_left, u_right, t, x)

    def _transmit(self, family, u_left, size, t, x):
        """One front of the given family and size restarted from u_left.

        The simplified solver must keep the front count of transmitted waves:
        re-partitioning at every crossing would shed a new sliver each time,
        so a fan that splits under the new left state is collapsed back into
        a single front with the size-weighted speed.
        """
        if abs(size) <= _MICRO_FRACTION * self.eps:
            # micro wave: midpoint step along the eigenvector, O(size^2) exact
            uL = np.asarray(u_left, dtype=float)
            mid = uL + 0.5 * size * eigen_decompose(self.model, uL).r(family)
            eig = eigen_decompose(self.model, mid)
            u_right = uL + size * eig.r(family)
            return [Front(
                id=self._fresh_id(),
                family=family,
                kind=SHOCK,
                size=float(size),
                u_left=uL,
                u_right=u_right,
                speed=float(eig.lambdas[family]),
                t_start=t,
                x_start=x,
                tau_profile=np.array([0.0, float(size)]),
                sigma_profile=np.array([eig.lambdas[family], eig.lambdas[family]]),
            )]
        curve = elementary_curve(self.model, family, u_left, size,
                                 accuracy=self.eps)
        out = self._fronts_from_waves(wave_partition(curve, self.eps), t, x)
        if len(out) <= 1:
            return out
        total = sum(abs(f.size) for f in out)
        merged = replace(
            max(out, key=lambda f: abs(f.size)),
            size=sum(f.size for f in out),
            u_left=out[0].u_left,
            u_right=out[-1].u_right,
            speed=sum(f.speed * abs(f.size) for f in out) / total,
            tau_profile=np.array([0.0, sum(f.size for f in out)]),
            sigma_profile=np.array([0.0, 0.0]),
        )
        merged.sigma_profile[:] = merged.speed
        return [merged]

    def _simplified(self, left: Front, right: Front, t, x):
        """Transmitted waves plus a nonphysical remainder."""
        uL, uR = left.u_left, right.u_right
        out = []
        if left.family == self.nonph:
            # nonphysical overtakes a physical front: re-emit the physical
            # wave from the new left state, push the mismatch into the NP front
            out += self._transmit(right.family, uL, right.size, t, x)
        elif left.family == right.family:
            curve = elementary_curve(self.model, left.family, uL,
                                     left.size + right.size, accuracy=self.eps)
            out += self._fronts_from_waves(wave_partition(curve, self.eps), t, x)
        else:
            # crossing fronts swap order: slower family first from the left
            lo, hi = (right, left) if right.family < left.family else (left, right)
            out += self._transmit(lo.family, uL, lo.size, t, x)
            u_mid = out[-1].u_right if out else uL
            out += self._transmit(hi.family, u_mid, hi.size, t, x)
        return self._close_fan(out, uL, uR, t, x)

    def _amount(self, left: Front, right: Front):
        curves = {}
        if left.family == right.family and left.family != self.nonph:
            curves["curve_left"] = elementary_curve(
                self.model, left.family, left.u_left, left.size, accuracy=self.eps
            )
            curves["curve_right"] = elementary_curve(
                self.model, right.family, curves["curve_left"].end_state,
                right.size, accuracy=self.eps,
            )
        return interaction_amount(
            self.model, left.family, left.size, right.family, right.size, **curves
        )

    def run(self, profile: Profile, fronts=None) -> TrackedSolution:
        sol = TrackedSolution(
            model=self.model, accuracy=self.eps, t0=self.t0, t1=self.t1,
            initial=profile,
        )
        if fronts is not None:
            # continuation of an earlier window: keep the front structure
            # instead of re-splitting every jump of the profile
            active = [replace(f, id=self._fresh_id(),
                              x_start=f.position(self.t0), t_start=self.t0)
                      for f in fronts]
        else:
            active = []
            for j, xj in enumerate(profile.xs):
                active += self.solve_point(profile.states[j], profile.states[j + 1],
                                           self.t0, float(xj))
        t_cur = self.t0
        sol.np_series.append((t_cur, sum(abs(f.size) for f in active
                                         if f.family == self.nonph)))

        nudges = 0
        while True:
            if len(sol.events) >= self.max_events:
                raise EventOverflow(f"more than {self.max_events} events in one window")
            hit = self._next_collision(active, t_cur)
            if hit is None:
                break
            t_hit, x_hit, i = hit
            others = self._coincident(active, t_cur, t_hit, x_hit, i)
            # a zero-time collision cannot be separated by a speed nudge, and
            # repeated nudging can cycle; in both cases fall through and
            # process the best pair as a binary interaction
            if others and t_hit > t_cur and nudges < 64:
                # force binary interactions by nudging the rightmost party;
                # the shift must exceed the float spacing of the speed to
                # take effect at all
                rightmost = max(others + [i + 1])
                speed = active[rightmost].speed
                active[rightmost] = replace(
                    active[rightmost],
                    speed=speed + _SPEED_NUDGE * (1.0 + abs(speed)),
                )
                nudges += 1
                continue
            nudges = 0
            left, right = active[i], active[i + 1]
            for f, xf in ((left, x_hit), (right, x_hit)):
                f.t_end, f.x_end = t_hit, xf
                sol.fronts.append(f)
            amount = self._amount(left, right)
            if (amount >= self.rho_np
                    and left.family != self.nonph and right.family != self.nonph):
                try:
                    outgoing = self.solve_point(left.u_left, right.u_right, t_hit, x_hit)
                except Exception:
                    outgoing = self._simplified(left, right, t_hit, x_hit)
            else:
                outgoing = self._simplified(left, right, t_hit, x_hit)
            active[i : i + 2] = outgoing
            sol.events.append(
                Event(
                    t=t_hit,
                    x=x_hit,
                    kind="interaction",
                    incoming=[(left.family, left.size), (right.family, right.size)],
                    outgoing=[(f.family, f.size) for f in outgoing],
                    incoming_ids=[left.id, right.id],
                    outgoing_ids=[f.id for f in outgoing],
                    amount=amount,
                )
            )
            t_cur = t_hit
            sol.np_series.append(
                (t_cur, sum(abs(f.size) for f in active if f.family == self.nonph))
            )

        for f in active:
            f.t_end = self.t1
            f.x_end = f.position(self.t1)
            sol.fronts.append(f)
        sol.active = list(active)
        return sol

    def _pair_time(self, left: Front, right: Front, t_cur):
        dv = left.speed - right.speed
        if dv <= 0:
            return None
        gap = right.position(t_cur) - left.position(t_cur)
        t_hit = t_cur + gap / dv
        # quantized event times give a reproducible processing order
        t_hit = self.t0 + round((t_hit - self.t0) / self.quantum) * self.quantum
        t_hit = max(t_hit, t_cur)
        if t_hit > self.t1:
            return None
        return t_hit

    def _next_collision(self, active, t_cur):
        best = None
        for i in range(len(active) - 1):
            t_hit = self._pair_time(active[i], active[i + 1], t_cur)
            if t_hit is None:
                continue
            x_hit = active[i].position(t_cur) + active[i].speed * (t_hit - t_cur)
            key = (t_hit, x_hit)
            if best is None or key < best[:2]:
                best = (t_hit, x_hit, i)
        return best

    def _coincident(self, active, t_cur, t_hit, x_hit, i):
        """Indices of extra fronts passing through the same event point."""
        extra = []
        for j, f in enumerate(active):
            if j in (i, i + 1):
                continue
            xj = f.position(t_cur) + f.speed * (t_hit - t_cur)
            if abs(xj - x_hit) <= _TOL_EVENT:
                extra.append(j)
        return extra


def initial_fronts(model: SystemModel, profile: Profile, accuracy: float,
                   t0: float = 0.0, jump_max=None):
    """Fronts emitted by solving the Riemann problem at every jump of a profile."""
    eng = _Engine(model, accuracy, t0, t0 + 1.0, jump_max=jump_max)
    fronts = []
    for j, xj in enumerate(profile.xs):
        fronts += eng.solve_point(profile.states[j], profile.states[j + 1], t0, float(xj))
    return fronts


def advance(
    model: SystemModel,
    profile: Profile,
    t0: float,
    t1: float,
    accuracy: float,
    rho_np: Optional[float] = None,
    jump_max: Optional[float] = None,
    max_events: int = MAX_EVENTS,
    fronts=None,
) -> TrackedSolution:
    """Track the profile over [t0, t1] with accuracy parameter epsilon.

    When `fronts` is given the window continues those fronts instead of
    re-solving the Riemann problem at every jump of the profile.
    """
    if t1 <= t0:
        raise OutOfWindow(f"empty time window [{t0}, {t1}]")
    eng = _Engine(model, accuracy, t0, t1, rho_np=rho_np, jump_max=jump_max,
                  max_events=max_events)
    return eng.run(profile, fronts=fronts)
