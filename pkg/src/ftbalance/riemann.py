"""Elementary curves, wave fans, Riemann solver, Hugoniot classification.

The elementary curve of a family is the fixed point of the integral system
whose flux component is the running integral of the characteristic speed along
the curve; its convex (or concave, for negative sizes) envelope encodes the
shock/rarefaction partition.  The center-manifold direction field is closed at
zeroth order with the frozen eigenvector field r_k(u), which is exact for
scalar equations and perturbs wave curves at third order in strength.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .envelope import CONTACT as _ENV_CONTACT, SampledFunction, envelope as _envelope_of
from .errors import (
    ComplexEigenvalue,
    ContinuationFailure,
    DomainEscape,
    HyperbolicityLoss,
    JumpTooLarge,
    NewtonDivergence,
    NoConvergence,
)
from .models import SystemModel, eigen_decompose

SHOCK = "SHOCK"
RAREFACTION = "RAREFACTION"
CONTACT = "CONTACT"
NONPHYSICAL = "NONPHYSICAL"

SIZE_TOL = 1e-12
_SIGMA_FLAT_TOL = 1e-9


def _family_field_along(model, states, k):
    """lambda_k and oriented unit r_k at each row of states (batched)."""
    n = model.dimension
    A = np.empty((states.shape[0], n, n))
    for i, u in enumerate(states):
        if not model.in_box(u):
            raise DomainEscape(f"{model.name}: curve state {u} left the box")
        A[i] = model.matrix_at(u)
    w, V = np.linalg.eig(A)
    if np.max(np.abs(w.imag)) > 1e-9:
        raise ComplexEigenvalue(f"{model.name}: complex eigenvalue along curve")
    order = np.argsort(w.real, axis=1, kind="stable")
    lam_all = np.take_along_axis(w.real, order, axis=1)
    if n > 1 and np.min(np.diff(lam_all, axis=1)) < model.hyperbolicity_gap:
        raise HyperbolicityLoss(f"{model.name}: eigenvalue gap collapsed along curve")
    idx = order[:, k]
    r = V.real[np.arange(states.shape[0]), :, idx]
    r = r / np.linalg.norm(r, axis=1, keepdims=True)
    ref = model._reference_right()[:, k]
    flip = (r @ ref) < 0.0
    r[flip] = -r[flip]
    return lam_all[:, k], r


@dataclass
class ElementaryCurveSolution:
    """Fixed point of the elementary-curve integral system for one family.

    All arrays live on the ascending parameter grid ``tau``; the left state
    sits at parameter 0 (first node for size > 0, last node for size < 0).
    """

    family: int
    u_left: np.ndarray
    size: float
    tau: np.ndarray              # ascending grid covering [0,s] or [s,0]
    states: np.ndarray           # shape (m+1, N)
    reduced_flux: np.ndarray     # running speed integral from parameter 0
    envelope: np.ndarray
    shock_layer: np.ndarray      # reduced flux minus envelope
    sigma: np.ndarray            # envelope derivative at the nodes
    contact: np.ndarray          # True where envelope touches the flux
    sweeps: int = 0

    @property
    def zero_index(self):
        return 0 if self.size >= 0 else self.tau.size - 1

    @property
    def end_state(self):
        return self.states[-1] if self.size >= 0 else self.states[0]

    def path_indices(self):
        """Grid indices ordered from the left state to the end state."""
        if self.size >= 0:
            return np.arange(self.tau.size)
        return np.arange(self.tau.size - 1, -1, -1)


def _grid_size(size, accuracy, h_curve):
    if h_curve is None:
        h_curve = min(accuracy / 8.0, abs(size) / 64.0) if accuracy else abs(size) / 64.0
    m = int(math.ceil(abs(size) / max(h_curve, 1e-300)))
    return min(max(m, 32), 2048)


def _integral_from_zero(values, tau, zero_index):
    """Trapezoid integral of values(tau) from tau=0 to every node."""
    dt = np.diff(tau)
    if values.ndim == 1:
        inc = 0.5 * dt * (values[1:] + values[:-1])
    else:
        inc = 0.5 * dt[:, None] * (values[1:] + values[:-1])
    cum = np.concatenate([np.zeros_like(values[:1]), np.cumsum(inc, axis=0)])
    return cum - cum[zero_index]


def elementary_curve(
    model: SystemModel,
    family: int,
    u_left,
    size: float,
    accuracy: Optional[float] = None,
    h_curve: Optional[float] = None,
    tol_fp: float = 1e-11,
    max_iter: int = 200,
) -> ElementaryCurveSolution:
    """Picard iteration for the elementary curve of the given family."""
    u_left = np.asarray(u_left, dtype=float)
    model.require_in_box(u_left, "left state")
    s = float(size)
    m = _grid_size(s, accuracy, h_curve)
    tau = np.linspace(0.0, s, m + 1) if s >= 0 else np.linspace(s, 0.0, m + 1)
    zero = 0 if s >= 0 else m

    eig0 = eigen_decompose(model, u_left)
    r0 = eig0.r(family)
    states = u_left[None, :] + (tau - tau[zero])[:, None] * r0[None, :]

    lam = None
    for sweep in range(1, max_iter + 1):
        lam, r = _family_field_along(model, states, family)
        new_states = u_left[None, :] + _integral_from_zero(r, tau, zero)
        delta = float(np.max(np.abs(new_states - states)))
        states = new_states
        if delta < tol_fp:
            break
    else:
        raise NoConvergence(
            f"{model.name}: elementary curve (family {family}, s={s}) "
            f"did not converge in {max_iter} sweeps"
        )

    lam, _ = _family_field_along(model, states, family)
    flux = _integral_from_zero(lam, tau, zero)
    res = _envelope_of(
        SampledFunction(tau, flux), convex=(s >= 0)
    )
    env = res.envelope
    contact = np.zeros(m + 1, dtype=bool)
    for label, i, j in res.intervals:
        if label == _ENV_CONTACT:
            contact[i : j + 1] = True

    slopes = np.diff(env) / np.diff(tau)
    sigma = np.empty(m + 1)
    sigma[0] = slopes[0]
    sigma[-1] = slopes[-1]
    sigma[1:-1] = 0.5 * (slopes[:-1] + slopes[1:])

    return ElementaryCurveSolution(
        family=family,
        u_left=u_left,
        size=s,
        tau=tau,
        states=states,
        reduced_flux=flux,
        envelope=env,
        shock_layer=flux - env,
        sigma=sigma,
        contact=contact,
        sweeps=sweep,
    )


@dataclass
class ElementaryWave:
    """One fan component: shock, rarefaction sub-front, or contact."""

    family: int
    kind: str
    size: float                  # signed parameter length
    u_left: np.ndarray
    u_right: np.ndarray
    speed_left: float
    speed_right: float
    tau_profile: np.ndarray = field(default_factory=lambda: np.zeros(2))
    sigma_profile: np.ndarray = field(default_factory=lambda: np.zeros(2))

    @property
    def speed(self):
        """Travel speed assigned to the front (right endpoint of the fan piece)."""
        return self.speed_right

    @property
    def strength(self):
        return abs(self.size)


def _make_wave(curve, kind, lo, hi, speed_lo, speed_hi):
    """Build a wave from ascending grid indices [lo, hi] in path order."""
    s_pos = curve.size >= 0
    near, far = (lo, hi) if s_pos else (hi, lo)
    size = curve.tau[far] - curve.tau[near]
    u_l, u_r = curve.states[near], curve.states[far]
    if kind == SHOCK or kind == CONTACT:
        tau_prof = np.array([0.0, abs(size)])
        sig_prof = np.array([speed_lo, speed_lo])
        sl = sr = speed_lo
    else:
        idx = np.arange(lo, hi + 1) if s_pos else np.arange(hi, lo - 1, -1)
        tau_prof = np.abs(curve.tau[idx] - curve.tau[idx[0]])
        sig_prof = curve.sigma[idx]
        sl, sr = float(sig_prof[0]), float(sig_prof[-1])
    return ElementaryWave(
        family=curve.family,
        kind=kind,
        size=float(size),
        u_left=u_l.copy(),
        u_right=u_r.copy(),
        speed_left=float(sl),
        speed_right=float(sr),
        tau_profile=tau_prof,
        sigma_profile=sig_prof,
    )


def wave_partition(curve: ElementaryCurveSolution, accuracy: float) -> list:
    """Split an elementary curve into fan components ordered by speed."""
    m = curve.tau.size - 1
    contact = curve.contact
    slopes = np.diff(curve.envelope) / np.diff(curve.tau)
    contacts = np.flatnonzero(contact)
    waves = []

    # regions between consecutive contact nodes: a jump over >1 cell is a
    # shock chord; runs of single smooth cells form rarefaction/contact fans
    regions = []  # (kind_hint, lo, hi) ascending-index windows
    run_start = None
    for a, b in zip(contacts[:-1], contacts[1:]):
        if b > a + 1:
            if run_start is not None:
                regions.append(("SMOOTH", run_start, a))
                run_start = None
            regions.append((SHOCK, int(a), int(b)))
        else:
            if run_start is None:
                run_start = int(a)
    if run_start is not None:
        regions.append(("SMOOTH", run_start, int(contacts[-1])))

    for kind, lo, hi in regions:
        if curve.tau[hi] - curve.tau[lo] <= SIZE_TOL:
            continue
        if kind == SHOCK:
            speed = (curve.envelope[hi] - curve.envelope[lo]) / (curve.tau[hi] - curve.tau[lo])
            waves.append(_make_wave(curve, SHOCK, lo, hi, speed, speed))
            continue
        seg = slopes[lo:hi]
        spread = float(np.max(seg) - np.min(seg))
        if spread <= _SIGMA_FLAT_TOL * (1.0 + float(np.max(np.abs(seg)))):
            speed = float(np.mean(seg))
            waves.append(_make_wave(curve, CONTACT, lo, hi, speed, speed))
            continue
        # rarefaction: split into sub-fronts of parameter length <= accuracy;
        # sizing in whole grid cells keeps every rounded piece under the cap
        cell = float(curve.tau[1] - curve.tau[0])
        max_cells = max(1, int(math.floor(accuracy / cell + 1e-9)))
        pieces = max(1, int(math.ceil((hi - lo) / max_cells - 1e-12)))
        cuts = np.linspace(lo, hi, pieces + 1).round().astype(int)
        cuts = np.unique(cuts)
        for a, b in zip(cuts[:-1], cuts[1:]):
            if curve.tau[b] - curve.tau[a] <= SIZE_TOL:
                continue
            waves.append(_make_wave(curve, RAREFACTION, int(a), int(b), 0.0, 0.0))

    if curve.size < 0:
        waves.reverse()
    return waves


@dataclass
class WaveFan:
    """Solution of one Riemann problem: waves in spatial order."""

    u_left: np.ndarray
    u_right: np.ndarray
    sizes: np.ndarray                      # per-family total sizes
    intermediate_states: list              # omega_0 .. omega_N
    waves: list                            # ElementaryWave, speeds nondecreasing
    curves: dict = field(default_factory=dict)  # family -> ElementaryCurveSolution

    @property
    def residual(self):
        end = self.intermediate_states[-1]
        return float(np.linalg.norm(end - self.u_right))


def _compose(model, u_left, sizes, accuracy, h_curve, keep_curves=False):
    w = np.asarray(u_left, dtype=float)
    states = [w.copy()]
    curves = {}
    for k in range(model.dimension):
        s = float(sizes[k])
        if abs(s) > SIZE_TOL:
            curve = elementary_curve(model, k, w, s, accuracy=accuracy, h_curve=h_curve)
            w = curve.end_state.copy()
            if keep_curves:
                curves[k] = curve
        states.append(w.copy())
    return w, states, curves


def solve_riemann(
    model: SystemModel,
    u_left,
    u_right,
    accuracy: float,
    jump_max: Optional[float] = None,
    tol_rp: float = 1e-9,
    max_newton: int = 60,
    h_curve: Optional[float] = None,
) -> WaveFan:
    """Wave sizes from the composite elementary-curve map by damped Newton."""
    u_left = np.asarray(u_left, dtype=float)
    u_right = np.asarray(u_right, dtype=float)
    model.require_in_box(u_left, "left state")
    model.require_in_box(u_right, "right state")
    if jump_max is None:
        jump_max = model.params.get("jump_max", 0.3)
    gap = float(np.linalg.norm(u_right - u_left))
    if gap > jump_max:
        raise JumpTooLarge(f"|uR - uL| = {gap:.3g} exceeds jump_max = {jump_max}")
    n = model.dimension

    if gap <= SIZE_TOL:
        return WaveFan(
            u_left=u_left,
            u_right=u_right,
            sizes=np.zeros(n),
            intermediate_states=[u_left.copy()] * (n + 1),
            waves=[],
        )

    if n == 1:
        sizes = np.array([u_right[0] - u_left[0]])
    else:
        mid = 0.5 * (u_left + u_right)
        eig = eigen_decompose(model, mid)
        sizes = eig.left @ (u_right - u_left)
        res_vec = _compose(model, u_left, sizes, accuracy, h_curve)[0] - u_right
        res = np.linalg.norm(res_vec)
        it = 0
        while res > tol_rp:
            if it >= max_newton:
                raise NewtonDivergence(f"Riemann Newton stalled at |res| = {res:.3e}")
            it += 1
            J = np.empty((n, n))
            step = 1e-7 * (1.0 + float(np.max(np.abs(sizes))))
            for j in range(n):
                pert = sizes.copy()
                pert[j] += step
                J[:, j] = (_compose(model, u_left, pert, accuracy, h_curve)[0] - u_right - res_vec) / step
            try:
                ds = np.linalg.solve(J, -res_vec)
            except np.linalg.LinAlgError as exc:
                raise NewtonDivergence("singular Riemann Jacobian") from exc
            lam = 1.0
            for _ in range(30):
                trial = sizes + lam * ds
                trial_vec = _compose(model, u_left, trial, accuracy, h_curve)[0] - u_right
                trial_res = np.linalg.norm(trial_vec)
                if trial_res < res:
                    sizes, res_vec, res = trial, trial_vec, trial_res
                    break
                lam *= 0.5
            else:
                raise NewtonDivergence(f"damping exhausted at |res| = {res:.3e}")

    _, inter, curves = _compose(model, u_left, sizes, accuracy, h_curve, keep_curves=True)
    waves = []
    for k in sorted(curves):
        waves.extend(wave_partition(curves[k], accuracy))
    return WaveFan(
        u_left=u_left,
        u_right=u_right,
        sizes=sizes,
        intermediate_states=inter,
        waves=waves,
        curves=curves,
    )


# -- Hugoniot curves ------------------------------------------------------


@dataclass
class HugoniotRecord:
    family: int
    base_state: np.ndarray
    size: float
    params: np.ndarray           # arc parameters from 0 to s
    states: np.ndarray           # curve points
    speeds: np.ndarray
    admissible: bool
    simple: bool
    breakpoints: np.ndarray      # composition parameters s_0 < ... < s_{l+1}


def hugoniot_classify(
    model: SystemModel,
    family: int,
    u_minus,
    size: float,
    steps: int = 200,
    tol: float = 1e-10,
) -> HugoniotRecord:
    """Hugoniot curve by arc continuation plus the one-sided speed test."""
    if not model.conservative:
        raise ContinuationFailure("Hugoniot curves need a conservative-mode model")
    u_minus = np.asarray(u_minus, dtype=float)
    model.require_in_box(u_minus, "base state")
    n = model.dimension
    f0 = np.asarray(model.flux(u_minus), dtype=float)
    eig0 = eigen_decompose(model, u_minus)
    lam0 = float(eig0.lambdas[family])
    l_i = eig0.l(family)
    r_i = eig0.r(family)

    params = np.linspace(0.0, float(size), steps + 1)
    states = np.empty((steps + 1, n))
    speeds = np.empty(steps + 1)
    states[0] = u_minus
    speeds[0] = lam0

    S = u_minus.copy()
    sigma = lam0
    for j in range(1, steps + 1):
        target = params[j]
        ds = params[j] - params[j - 1]
        S = S + ds * r_i
        for it in range(60):
            dS = S - u_minus
            res = np.concatenate(
                [sigma * dS - (np.asarray(model.flux(S), dtype=float) - f0),
                 [float(l_i @ dS) - target]]
            )
            if np.linalg.norm(res) <= tol:
                break
            A = model.matrix_at(S)
            J = np.zeros((n + 1, n + 1))
            J[:n, :n] = sigma * np.eye(n) - A
            J[:n, n] = dS
            J[n, :n] = l_i
            try:
                delta = np.linalg.solve(J, -res)
            except np.linalg.LinAlgError as exc:
                raise ContinuationFailure(f"singular continuation step at s={target}") from exc
            S = S + delta[:n]
            sigma = sigma + delta[n]
        else:
            raise ContinuationFailure(f"no convergence at s={target}")
        states[j] = S
        speeds[j] = sigma

    sigma_end = speeds[-1]
    scale = 1.0 + float(np.max(np.abs(speeds)))
    admissible = bool(np.all(speeds >= sigma_end - 1e-8 * scale))
    interior = speeds[1:-1]
    simple = admissible and bool(np.all(interior > sigma_end + 1e-8 * scale))
    touching = np.flatnonzero(np.abs(speeds - sigma_end) <= 1e-7 * scale)
    # collapse contiguous runs of touching samples to single breakpoints
    bps = []
    for idx in touching:
        if not bps or idx > bps[-1][-1] + 1:
            bps.append([idx])
        else:
            bps[-1].append(idx)
    breaks = [params[run[0]] if run[0] == 0 else params[run[-1]] if run[-1] == len(params) - 1
              else params[run[len(run) // 2]] for run in bps]
    # the parameter endpoints 0 and s always delimit the composition
    for endpoint in (0.0, float(size)):
        if not any(abs(b - endpoint) <= 1e-12 for b in breaks):
            breaks.append(endpoint)
    breaks.sort()
    return HugoniotRecord(
        family=family,
        base_state=u_minus,
        size=float(size),
        params=params,
        states=states,
        speeds=speeds,
        admissible=admissible,
        simple=simple,
        breakpoints=np.asarray(breaks),
    )
