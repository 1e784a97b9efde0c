"""Fractional-step solver: front-tracking windows alternating with source steps.

Each window of length tau tracks the homogeneous system; at the window end the
source is applied as an explicit Euler update of every constant state, using
the cell-averaged source on an accuracy-width grid.  Re-solving the Riemann
problems of the updated profile at the next window start implicitly restarts
all nonphysical fronts.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .engine import Event, Profile, TrackedSolution, _Record, advance, init_from_datum, initial_fronts
from .errors import ConstraintError, DomainEscape, OutOfWindow, TVBlowup
from .functionals import glimm_functionals
from .models import SystemModel, eigen_decompose

_JUMP_SKIP = 1e-14
_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass
class StepConfig:
    """Discretization parameters of one fractional-step run."""

    accuracy: float              # epsilon: wave-size / cell-width parameter
    time_step: float             # tau: source-step length, 0 < tau <= epsilon
    horizon: float = 1.0
    c1: float = 10.0             # weight of Q inside Upsilon
    delta_bar: float = 0.1       # smallness fence on the initial functional
    delta_fence: float = 0.5     # hard ceiling on Upsilon during the run
    rho_np: Optional[float] = None
    jump_max: Optional[float] = None
    max_events: int = 10_000_000
    support: Optional[tuple] = None

    def __post_init__(self):
        if not (0 < self.time_step <= self.accuracy):
            raise ConstraintError(
                f"need 0 < tau <= epsilon, got tau={self.time_step}, "
                f"epsilon={self.accuracy}"
            )
        if self.horizon <= 0:
            raise ConstraintError("horizon must be positive")


def discretize_source(model: SystemModel, accuracy: float) -> Callable:
    """Cell-averaged source: g averaged in x over each accuracy-width cell."""
    if model.source is None:
        return lambda t, x, u: np.zeros(model.dimension)

    def g_nu(t, x, u):
        j = math.floor(x / accuracy)
        lo = j * accuracy
        mid = lo + 0.5 * accuracy
        half = 0.5 * accuracy
        total = np.zeros(model.dimension)
        for node, weight in zip(_GAUSS_NODES, _GAUSS_WEIGHTS):
            total += weight * model.source_at(t, mid + half * node, u)
        return 0.5 * total  # weights sum to 2 on [-1, 1]

    return g_nu


def _source_depends_on_x(model: SystemModel) -> bool:
    if model.source is None:
        return False
    u = model.u_ref
    probes = [model.source_at(0.0, x, u) for x in (0.13, 0.57, -1.29)]
    return any(np.max(np.abs(p - probes[0])) > 1e-13 for p in probes[1:])


def apply_source_step(
    model: SystemModel,
    profile: Profile,
    g_nu: Callable,
    t: float,
    tau: float,
    accuracy: float,
) -> Profile:
    """Explicit Euler update u -> u + tau*g_nu on every constancy interval."""
    if model.source is None:
        return profile

    if _source_depends_on_x(model) and profile.xs.size:
        # tile the jump region with source cells so g_nu is constant per piece
        lo = math.floor(profile.xs[0] / accuracy) * accuracy - accuracy
        hi = math.ceil(profile.xs[-1] / accuracy) * accuracy + accuracy
        edges = np.arange(lo, hi + 0.5 * accuracy, accuracy)
        cuts = np.unique(np.concatenate([profile.xs, edges]))
    else:
        cuts = profile.xs

    xs = []
    states = []
    prev = None
    # pieces: (-inf, cuts[0]), [cuts[0], cuts[1]), ...; evaluate g at the
    # left endpoint of each piece (any in-cell point gives the same average)
    sample_points = ([cuts[0] - accuracy] if cuts.size else [0.0]) + list(cuts)
    for j, xq in enumerate(sample_points):
        u = profile(xq + 1e-13) if j else profile(xq)
        v = u + tau * g_nu(t, xq, u)
        if not model.in_box(v):
            raise DomainEscape(f"{model.name}: source step left the box at x={xq}")
        if prev is not None:
            if np.max(np.abs(v - prev)) > _JUMP_SKIP:
                xs.append(cuts[j - 1])
                states.append(v)
            else:
                v = prev  # drop sub-threshold jumps entirely
        else:
            states.append(v)
        prev = v
    return Profile(np.asarray(xs), np.asarray(states))


@dataclass
class RunReport:
    """Full fractional-step run with functional time series.

    Exposes the same front/event protocol as a single TrackedSolution so the
    functional and region-balance tools work across window boundaries.
    """

    model: SystemModel
    config: StepConfig
    windows: list = field(default_factory=list)       # TrackedSolution per step
    series: dict = field(default_factory=dict)        # t, tv, v, q, upsilon
    update_deltas: list = field(default_factory=list)  # (t, |dTV|, |dUpsilon|)
    fitted_growth: float = 0.0                        # C_G = max |dUpsilon|/tau
    wall_seconds: float = 0.0
    ledger = None

    @property
    def accuracy(self):
        return self.config.accuracy

    @property
    def time_step(self):
        return self.config.time_step

    @property
    def events(self):
        out = []
        for w in self.windows:
            out.extend(w.events)
        return out

    def front_segments(self):
        out = []
        for w in self.windows:
            out.extend(w.front_segments())
        return out

    @property
    def fronts(self):
        out = []
        for w in self.windows:
            out.extend(w.fronts)
        return out

    def sample_times(self):
        times = set()
        for w in self.windows:
            times.update(w.sample_times())
        return sorted(times)

    def _window_at(self, t):
        for w in self.windows:
            if w.t0 <= t < w.t1:
                return w
        if self.windows and t == self.windows[-1].t1:
            return self.windows[-1]
        raise OutOfWindow(f"t={t} outside the solved horizon")

    def front_records(self, t):
        return self._window_at(t).front_records(t)

    def snapshot(self, t) -> Profile:
        return self._window_at(t).snapshot(t)

    @property
    def final_profile(self):
        return self.windows[-1].snapshot(self.windows[-1].t1)


def _functionals_of(fronts, t, nonph, c1):
    records = [_Record(f.position(t), f.family, f.size, f.tau_profile, f.sigma_profile)
               for f in fronts]
    return glimm_functionals(records, nonphysical_family=nonph, c1=c1)


def _carry_fronts(model, fronts, g_nu, t1, tau, eps, jump_max):
    """Source-updated continuations of the fronts alive at a window end.

    Re-solving the Riemann problem at every jump after each source step
    multiplies sliver fronts window over window; instead every front
    survives with its states moved by the explicit Euler update and its
    size re-read from the updated jump.
    """
    from .engine import _Engine

    eng = _Engine(model, eps, t1, t1 + tau, jump_max=jump_max)
    size_min = 1e-3 * eps
    out = []
    for f in sorted(fronts, key=lambda f: f.position(t1)):
        x = float(f.position(t1))
        uL = f.u_left + tau * g_nu(t1, x - 1e-9, f.u_left)
        uR = f.u_right + tau * g_nu(t1, x + 1e-9, f.u_right)
        for u in (uL, uR):
            if not model.in_box(u):
                raise DomainEscape(
                    f"{model.name}: source step left the box at x={x}"
                )
        if f.family == model.dimension:
            size = float(np.linalg.norm(uR - uL))
            if size <= size_min:
                continue
            out.append(replace(f, u_left=uL, u_right=uR, size=size,
                               t_start=t1, x_start=x))
            continue
        eig = eigen_decompose(model, 0.5 * (uL + uR))
        size = float(eig.l(f.family) @ (uR - uL))
        if abs(size) <= size_min:
            continue
        nf = eng._transmit(f.family, uL, size, t1, x)[0]
        out.append(replace(nf, kind=f.kind))
    return out


def _profile_from_fronts(fronts, t, fallback: Profile) -> Profile:
    """Piecewise-constant profile spanned by a sorted front list."""
    if not fronts:
        return fallback
    xs = np.array([f.position(t) for f in fronts])
    states = np.vstack([fronts[0].u_left[None, :]]
                       + [f.u_right[None, :] for f in fronts])
    # fronts meeting at t leave zero-width pieces; keep the outer states
    keep_x = []
    keep_s = [0]
    for i, x in enumerate(xs):
        if keep_x and x - keep_x[-1] <= 1e-13:
            keep_s[-1] = i + 1
            continue
        keep_x.append(float(x))
        keep_s.append(i + 1)
    return Profile(np.asarray(keep_x), states[keep_s])


def run(model: SystemModel, datum, cfg: StepConfig) -> RunReport:
    """Alternate front tracking over tau-windows with source updates."""
    start = time.perf_counter()
    profile = init_from_datum(model, datum, cfg.accuracy, support=cfg.support)
    if profile.total_variation() > cfg.delta_bar:
        raise TVBlowup(
            f"initial total variation {profile.total_variation():.3g} exceeds "
            f"the smallness fence {cfg.delta_bar}"
        )
    g_nu = discretize_source(model, cfg.accuracy)
    nonph = model.dimension
    report = RunReport(model=model, config=cfg)
    series = {"t": [], "tv": [], "v": [], "q": [], "upsilon": []}

    def record_point(t, profile_now, fronts):
        V, Q, Ups = glimm_functionals(
            [ _Record(f.position(t), f.family, f.size, f.tau_profile, f.sigma_profile)
              for f in fronts ],
            nonphysical_family=nonph, c1=cfg.c1,
        )
        series["t"].append(t)
        series["tv"].append(profile_now.total_variation())
        series["v"].append(V)
        series["q"].append(Q)
        series["upsilon"].append(Ups)
        return Ups

    t = 0.0
    ups0 = None
    n_steps = int(round(cfg.horizon / cfg.time_step))
    t_grid = [min(i * cfg.time_step, cfg.horizon) for i in range(n_steps + 1)]
    if t_grid[-1] < cfg.horizon:
        t_grid.append(cfg.horizon)

    carried = None
    for t0, t1 in zip(t_grid[:-1], t_grid[1:]):
        sol = advance(model, profile, t0, t1, cfg.accuracy, rho_np=cfg.rho_np,
                      jump_max=cfg.jump_max, max_events=cfg.max_events,
                      fronts=carried)
        sol.time_step = cfg.time_step
        report.windows.append(sol)
        if ups0 is None:
            ups0 = record_point(t0, profile, sol._alive(t0))
        profile = sol.snapshot(t1)
        ups_before = record_point(t1, profile, sol._alive(t1))
        tv_before = profile.total_variation()
        if model.source is not None:
            carried = _carry_fronts(model, sol.active, g_nu, t1,
                                    cfg.time_step, cfg.accuracy, cfg.jump_max)
            profile = _profile_from_fronts(
                carried, t1,
                apply_source_step(model, profile, g_nu, t1, cfg.time_step,
                                  cfg.accuracy),
            )
            ups_after = record_point(t1, profile, carried)
            report.update_deltas.append(
                (t1, abs(profile.total_variation() - tv_before),
                 abs(ups_after - ups_before))
            )
            sol.events.append(Event(t=t1, x=math.nan, kind="update",
                                    incoming=[], outgoing=[],
                                    incoming_ids=[], outgoing_ids=[]))
            ups_now = ups_after
        else:
            carried = list(sol.active)
            ups_now = ups_before
        if ups_now > cfg.delta_fence:
            raise TVBlowup(
                f"Upsilon = {ups_now:.3g} crossed the fence {cfg.delta_fence} "
                f"at t = {t1}"
            )

    report.series = {k: np.asarray(v) for k, v in series.items()}
    if report.update_deltas:
        report.fitted_growth = max(d[2] for d in report.update_deltas) / cfg.time_step
    report.wall_seconds = time.perf_counter() - start
    return report


def convergence_study(model, datum, levels, horizon, sample_times=None, **cfg_kwargs):
    """Pairwise L1 distances between runs at successive refinement levels.

    `levels` is a sequence of (epsilon, tau) pairs, finest last; returns a
    dict with the reports, the distance table and the decay ratios.
    """
    if sample_times is None:
        sample_times = [horizon]
    reports = [
        run(model, datum, StepConfig(accuracy=e, time_step=tau, horizon=horizon,
                                     **cfg_kwargs))
        for e, tau in levels
    ]
    distances = []
    for a, b in zip(reports[:-1], reports[1:]):
        distances.append([
            a.snapshot(t).l1_distance(b.snapshot(t)) for t in sample_times
        ])
    distances = np.asarray(distances)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = distances[:-1] / distances[1:] if len(distances) > 1 else np.empty((0,))
    return {
        "levels": list(levels),
        "sample_times": list(sample_times),
        "reports": reports,
        "distances": distances,
        "ratios": np.asarray(ratios),
    }
