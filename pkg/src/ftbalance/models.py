"""Systems of balance laws: eigen-structure, model gallery, diagnostics.

A system is described either by a flux F (conservative mode, the matrix is the
Jacobian DF) or directly by a matrix evaluator A(u).  All states live in a
declared admissible box; every operation rejects states outside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    ComplexEigenvalue,
    DomainEscape,
    HyperbolicityLoss,
    NotEquilibrium,
    SingularEigenbasis,
)

_FD_SCALE = 1e-6
_BOX_SLACK = 1e-9


def _fd_jacobian(fn, u, scale=_FD_SCALE):
    """Central finite-difference Jacobian with step scale*(1+|u|)."""
    u = np.asarray(u, dtype=float)
    h = scale * (1.0 + float(np.linalg.norm(u)))
    n = u.size
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        cols.append((np.asarray(fn(u + e), dtype=float) - np.asarray(fn(u - e), dtype=float)) / (2 * h))
    return np.column_stack(cols)


@dataclass(frozen=True)
class EigenStructure:
    """Ordered eigenvalues with unit right eigenvectors and the dual basis."""

    lambdas: np.ndarray      # shape (N,), increasing
    right: np.ndarray        # shape (N, N), columns r_k, |r_k| = 1
    left: np.ndarray         # shape (N, N), rows l_k, <l_h, r_k> = delta_hk

    def r(self, k):
        return self.right[:, k]

    def l(self, k):
        return self.left[k, :]


@dataclass
class SystemModel:
    """Strictly hyperbolic system u_t + A(u) u_x = g(t, x, u) on a state box."""

    name: str
    dimension: int
    flux: Optional[Callable] = None          # F: R^N -> R^N (conservative mode)
    matrix: Optional[Callable] = None        # A: R^N -> R^{N x N}
    source: Optional[Callable] = None        # g(t, x, u) -> R^N
    source_lipschitz: float = 0.0            # declared Lipschitz constant of g
    source_x_bound: Optional[Callable] = None  # integrable bound alpha(x) on |g_x|
    box_lo: np.ndarray = field(default_factory=lambda: np.array([-1.0]))
    box_hi: np.ndarray = field(default_factory=lambda: np.array([1.0]))
    speed_fences: Optional[np.ndarray] = None  # hat-lambda_0 < ... < hat-lambda_N
    hyperbolicity_gap: float = 1e-6
    u_ref: Optional[np.ndarray] = None       # orientation / diagnostics reference
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.flux is None and self.matrix is None:
            raise ValueError("model needs a flux or a matrix evaluator")
        self.box_lo = np.asarray(self.box_lo, dtype=float)
        self.box_hi = np.asarray(self.box_hi, dtype=float)
        if self.u_ref is None:
            self.u_ref = 0.5 * (self.box_lo + self.box_hi)
        self.u_ref = np.asarray(self.u_ref, dtype=float)
        if self.speed_fences is not None:
            self.speed_fences = np.asarray(self.speed_fences, dtype=float)
        self._ref_right = None

    # -- geometry ---------------------------------------------------------

    @property
    def conservative(self):
        return self.flux is not None

    def in_box(self, u, slack=_BOX_SLACK):
        u = np.asarray(u, dtype=float)
        return bool(np.all(u >= self.box_lo - slack) and np.all(u <= self.box_hi + slack))

    def require_in_box(self, u, what="state"):
        if not self.in_box(u):
            raise DomainEscape(f"{self.name}: {what} {np.asarray(u)} outside admissible box")

    def matrix_at(self, u):
        u = np.asarray(u, dtype=float)
        if self.matrix is not None:
            return np.asarray(self.matrix(u), dtype=float)
        return _fd_jacobian(self.flux, u)

    def source_at(self, t, x, u):
        if self.source is None:
            return np.zeros(self.dimension)
        return np.asarray(self.source(t, x, u), dtype=float)

    def nonphysical_speed(self):
        """Fixed speed strictly above every characteristic speed."""
        if self.speed_fences is not None:
            return float(self.speed_fences[-1]) + 1.0
        raise ValueError(f"{self.name}: speed fences not declared")

    def _reference_right(self):
        if self._ref_right is None:
            A = self.matrix_at(self.u_ref)
            lam, R = self._raw_eig(A)
            # fix sign: largest-magnitude component of each r_k positive
            for k in range(self.dimension):
                col = R[:, k]
                if col[int(np.argmax(np.abs(col)))] < 0:
                    R[:, k] = -col
            self._ref_right = R
        return self._ref_right

    def _raw_eig(self, A):
        w, V = np.linalg.eig(A)
        if np.max(np.abs(w.imag)) > 1e-9:
            raise ComplexEigenvalue(f"{self.name}: eigenvalues {w} not real")
        order = np.argsort(w.real, kind="stable")
        lam = w.real[order]
        R = V.real[:, order]
        R = R / np.linalg.norm(R, axis=0, keepdims=True)
        return lam, R


def eigen_decompose(model: SystemModel, u) -> EigenStructure:
    """Eigenvalues and oriented unit eigenvector bases of A(u)."""
    u = np.asarray(u, dtype=float)
    model.require_in_box(u)
    lam, R = model._raw_eig(model.matrix_at(u))
    if model.dimension > 1 and np.min(np.diff(lam)) < model.hyperbolicity_gap:
        raise HyperbolicityLoss(
            f"{model.name}: eigenvalue gap {np.min(np.diff(lam)):.3e} below "
            f"{model.hyperbolicity_gap:.3e} at u={u}"
        )
    ref = model._reference_right()
    for k in range(model.dimension):
        if float(R[:, k] @ ref[:, k]) < 0.0:
            R[:, k] = -R[:, k]
    try:
        L = np.linalg.inv(R)
    except np.linalg.LinAlgError as exc:
        raise SingularEigenbasis(f"{model.name}: eigenbasis singular at u={u}") from exc
    return EigenStructure(lambdas=lam, right=R, left=L)


# -- diagnostics ----------------------------------------------------------


@dataclass
class DominanceReport:
    G: np.ndarray
    margin: float
    weak: bool


@dataclass
class ShizutaKawashimaReport:
    residuals: np.ndarray
    passes: bool


@dataclass
class EntropyDissipationReport:
    a: float                 # largest dissipation coefficient; 0 on failure, inf if vacuous
    samples: int
    radius: float


def _source_jacobian(model, u0):
    return _fd_jacobian(lambda u: model.source_at(0.0, 0.0, u), u0)


def check_diagonal_dominance(model: SystemModel, u0=None) -> DominanceReport:
    """G = R^{-1} D_u g R at the reference state and its dominance margin."""
    if u0 is None:
        u0 = model.u_ref
    eig = eigen_decompose(model, u0)
    if np.linalg.cond(eig.right) > 1e8:
        raise SingularEigenbasis(f"{model.name}: R({u0}) too ill conditioned")
    Dg = _source_jacobian(model, u0)
    G = eig.left @ Dg @ eig.right
    rowsums = np.array(
        [G[i, i] + np.sum(np.abs(G[i, :])) - abs(G[i, i]) for i in range(model.dimension)]
    )
    margin = -float(np.max(rowsums))
    return DominanceReport(G=G, margin=margin, weak=abs(margin) <= 1e-9)


def check_shizuta_kawashima(model: SystemModel, u0) -> ShizutaKawashimaReport:
    """Per-family residuals |D_u g(u0) r_i(u0)| at an equilibrium u0."""
    u0 = np.asarray(u0, dtype=float)
    g0 = model.source_at(0.0, 0.0, u0)
    if np.linalg.norm(g0) > 1e-10:
        raise NotEquilibrium(f"{model.name}: |g(u0)| = {np.linalg.norm(g0):.3e}")
    eig = eigen_decompose(model, u0)
    Dg = _source_jacobian(model, u0)
    residuals = np.array(
        [np.linalg.norm(Dg @ eig.r(i)) for i in range(model.dimension)]
    )
    return ShizutaKawashimaReport(residuals=residuals, passes=bool(np.all(residuals > 1e-8)))


def check_entropy_dissipation(
    model: SystemModel, entropy_gradient, u0, radius, points_per_axis=9
) -> EntropyDissipationReport:
    """Largest a >= 0 with D-eta(u).(g(u)-g(u0)) <= -a |g(u)-g(u0)|^2 near u0."""
    u0 = np.asarray(u0, dtype=float)
    g0 = model.source_at(0.0, 0.0, u0)
    n = model.dimension
    axes = [np.linspace(-radius, radius, points_per_axis)] * n
    mesh = np.meshgrid(*axes, indexing="ij")
    offsets = np.stack([m.ravel() for m in mesh], axis=-1)
    best = math.inf
    used = 0
    for off in offsets:
        if np.linalg.norm(off) > radius:
            continue
        u = u0 + off
        if not model.in_box(u):
            continue
        dg = model.source_at(0.0, 0.0, u) - g0
        nrm2 = float(dg @ dg)
        if nrm2 <= 1e-24:
            continue
        used += 1
        ratio = -float(np.asarray(entropy_gradient(u), dtype=float) @ dg) / nrm2
        best = min(best, ratio)
    if used == 0:
        return EntropyDissipationReport(a=math.inf, samples=0, radius=radius)
    return EntropyDissipationReport(a=max(best, 0.0), samples=used, radius=radius)


# -- model gallery --------------------------------------------------------


def _make_burgers(params):
    params = {"jump_max": 6.0, **params}
    return SystemModel(
        name="burgers",
        dimension=1,
        flux=lambda u: np.array([0.5 * u[0] ** 2]),
        matrix=lambda u: np.array([[u[0]]]),
        box_lo=[-3.0],
        box_hi=[3.0],
        speed_fences=[-3.5, 3.5],
        u_ref=[0.0],
        params=params,
    )


def _make_quintic(params):
    params = {"jump_max": 6.0, **params}
    def fprime(v):
        return v ** 4 / 4.0 - v ** 2

    return SystemModel(
        name="quintic",
        dimension=1,
        flux=lambda u: np.array([u[0] ** 5 / 20.0 - u[0] ** 3 / 3.0]),
        matrix=lambda u: np.array([[fprime(u[0])]]),
        box_lo=[-3.0],
        box_hi=[3.0],
        speed_fences=[-1.5, 12.0],
        u_ref=[0.0],
        params=params,
    )


def _make_scalar_poly(params):
    params = {"jump_max": 6.0, **params}
    coeffs = np.asarray(params.get("coeffs", [0.0, 0.0, 0.5]), dtype=float)  # ascending powers
    lo = float(params.get("box_lo", -3.0))
    hi = float(params.get("box_hi", 3.0))
    poly = np.polynomial.Polynomial(coeffs)
    dpoly = poly.deriv()
    grid = np.linspace(lo, hi, 257)
    speeds = dpoly(grid)
    return SystemModel(
        name="scalar-poly",
        dimension=1,
        flux=lambda u: np.array([poly(u[0])]),
        matrix=lambda u: np.array([[dpoly(u[0])]]),
        box_lo=[lo],
        box_hi=[hi],
        speed_fences=[float(np.min(speeds)) - 0.5, float(np.max(speeds)) + 0.5],
        u_ref=[0.0],
        params=params,
    )


def _make_linear_diag(params):
    params = {"jump_max": 6.0, **params}
    speeds = np.asarray(params.get("speeds", [1.0, 2.0]), dtype=float)
    damping = float(params.get("damping", 0.0))
    n = speeds.size
    A = np.diag(speeds)
    fences = np.concatenate(([speeds[0] - 0.5], 0.5 * (speeds[1:] + speeds[:-1]), [speeds[-1] + 0.5]))
    return SystemModel(
        name="linear-diag",
        dimension=n,
        flux=lambda u, A=A: A @ u,
        matrix=lambda u, A=A: A,
        source=(lambda t, x, u, d=damping: -d * np.asarray(u, dtype=float)) if damping else None,
        source_lipschitz=damping,
        box_lo=-3.0 * np.ones(n),
        box_hi=3.0 * np.ones(n),
        speed_fences=fences,
        u_ref=np.zeros(n),
        params=params,
    )


def _make_elasticity(params):
    """Strain/velocity system v_t - u_x = 0, u_t - stress(v)_x = -damping*u.

    Default cubic stress v + v^3/3 has stress'' = 2v, vanishing at v = 0, so
    both families are piecewise genuinely nonlinear with one switch manifold.
    """
    damping = float(params.get("damping", 1.0))

    def stress(v):
        return v + v ** 3 / 3.0

    def stress_prime(v):
        return 1.0 + v * v

    def flux(u):
        return np.array([-u[1], -stress(u[0])])

    def matrix(u):
        return np.array([[0.0, -1.0], [-stress_prime(u[0]), 0.0]])

    def source(t, x, u, d=damping):
        return np.array([0.0, -d * u[1]])

    vmax = 2.5
    cmax = math.sqrt(stress_prime(vmax))
    return SystemModel(
        name="elasticity",
        dimension=2,
        flux=flux,
        matrix=matrix,
        source=source if damping else None,
        source_lipschitz=damping,
        box_lo=[-vmax, -2.5],
        box_hi=[vmax, 2.5],
        speed_fences=[-cmax - 0.5, 0.0, cmax + 0.5],
        u_ref=[1.0, 0.0],
        hyperbolicity_gap=1.0,
        params=params,
    )


def _make_cattaneo(params):
    """Heat-pulse system in conserved variables (e, Q), temperature th = e^{1/4}."""
    rho = float(params.get("rho", 1.0))
    Ac = float(params.get("A", 1.0))
    Bc = float(params.get("B", 1.0))
    n_exp = float(params.get("n", 2.0))
    gamma = float(params.get("gamma", 1.0))

    def theta(e):
        return e ** 0.25

    def second_sound(th):
        return 1.0 / math.sqrt(Ac + Bc * th ** n_exp)

    def eprime(th):
        return 4.0 * th ** 3

    def nu_prime(th):
        return second_sound(th) * math.sqrt(eprime(th)) / th

    def inv_alpha(th):
        # 1/alpha = rho * th * U * sqrt(e')
        return rho * th * second_sound(th) * math.sqrt(eprime(th))

    def conductivity(th):
        alpha = 1.0 / inv_alpha(th)
        return math.sqrt(eprime(th) * nu_prime(th) / alpha) * second_sound(th)

    def relax_rate(th):
        # nu' / (alpha k)
        alpha = 1.0 / inv_alpha(th)
        return nu_prime(th) / (alpha * conductivity(th))

    def matrix(u):
        # flux is F(e, Q) = (Q / (rho alpha(th)), nu(th)) with th = th(e)
        e, Q = float(u[0]), float(u[1])
        th = theta(e)
        dth_de = 0.25 * e ** (-0.75)
        h = 1e-6 * (1.0 + abs(th))
        dinva_dth = (inv_alpha(th + h) - inv_alpha(th - h)) / (2 * h)
        return np.array(
            [
                [Q * dinva_dth * dth_de / rho, inv_alpha(th) / rho],
                [nu_prime(th) * dth_de, 0.0],
            ]
        )

    def source(t, x, u):
        e, Q = float(u[0]), float(u[1])
        return np.array([0.0, -relax_rate(theta(e)) * Q])

    model = SystemModel(
        name="cattaneo",
        dimension=2,
        matrix=matrix,
        source=source,
        source_lipschitz=2.0,
        box_lo=[0.3, -0.6],
        box_hi=[2.5, 0.6],
        speed_fences=None,
        u_ref=[1.0, 0.0],
        hyperbolicity_gap=1e-3,
        params=dict(params, gamma=gamma),
    )
    # fences from a coarse box sweep with margin
    lams = []
    for e in np.linspace(0.3, 2.5, 23):
        for Q in np.linspace(-0.6, 0.6, 13):
            w = np.linalg.eigvals(matrix([e, Q]))
            lams.append(np.sort(w.real))
    lams = np.array(lams)
    model.speed_fences = np.array(
        [lams[:, 0].min() - 0.2, 0.0, lams[:, 1].max() + 0.2]
    )
    model.params["entropy_gradient"] = lambda u: np.array(
        [-rho * u[0] ** (-0.25), u[1] / gamma]
    )
    # scalar relaxation coefficient nu'/(alpha k) as a function of temperature;
    # the coupling condition reduces to this being nonzero
    model.params["relaxation_coefficient"] = relax_rate
    return model


_REGISTRY = {
    "burgers": _make_burgers,
    "quintic": _make_quintic,
    "scalar-poly": _make_scalar_poly,
    "linear-diag": _make_linear_diag,
    "elasticity": _make_elasticity,
    "cattaneo": _make_cattaneo,
}


def model_names():
    return sorted(_REGISTRY)


def make_model(name: str, params: Optional[dict] = None) -> SystemModel:
    if name not in _REGISTRY:
        raise KeyError(f"unknown model {name!r}; known: {', '.join(model_names())}")
    return _REGISTRY[name](dict(params or {}))
