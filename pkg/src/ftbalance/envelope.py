"""Convex/concave envelopes of sampled one-dimensional functions.

The lower convex envelope of sampled data is the greatest convex minorant of
the point set, computed with an Andrew monotone-chain hull.  The upper concave
envelope is obtained by negation, which makes the duality
``conc(f) == -conv(-f)`` exact.  The hull sweep is the innermost kernel of the
whole solver (it runs once per Picard sweep of every elementary-curve solve),
so it lives in a compiled extension with a pure-Python fallback selected at
import; set FTBALANCE_PURE_PYTHON=1 to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyWindow

if os.environ.get("FTBALANCE_PURE_PYTHON"):
    from . import _envelope_fallback as _kernel
else:
    try:
        from . import _envelope_kernel as _kernel  # type: ignore[no-redef]
    except ImportError:
        from . import _envelope_fallback as _kernel  # type: ignore[no-redef]

BACKEND = _kernel.BACKEND

CONTACT = "CONTACT"
GAP = "GAP"


@dataclass(frozen=True)
class SampledFunction:
    """Function values on a strictly increasing parameter grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise ValueError("grid and values must be matching 1-d arrays")
        if grid.size < 2:
            raise ValueError("need at least two samples")
        if not np.all(np.diff(grid) > 0):
            raise ValueError("grid must be strictly increasing")
        if not (np.all(np.isfinite(grid)) and np.all(np.isfinite(values))):
            raise ValueError("grid and values must be finite")


@dataclass
class EnvelopeResult:
    """Envelope values plus the contact/gap partition of the window."""

    grid: np.ndarray
    values: np.ndarray          # input samples restricted to the window
    envelope: np.ndarray
    intervals: list = field(default_factory=list)  # (label, i_start, i_end) index ranges, inclusive
    convex: bool = True

    def interval_bounds(self):
        return [(label, self.grid[i], self.grid[j]) for label, i, j in self.intervals]


def _contact_tolerance(values):
    return 1e-10 * (1.0 + float(np.max(np.abs(values))))


def _window_slice(grid, a, b):
    lo = int(np.searchsorted(grid, a - 1e-14, side="left"))
    hi = int(np.searchsorted(grid, b + 1e-14, side="right"))
    if hi - lo < 2:
        raise EmptyWindow(f"fewer than 2 grid points in [{a}, {b}]")
    return lo, hi


def _partition(contact_flags):
    """Maximal runs of equal labels as (label, i_start, i_end) inclusive."""
    intervals = []
    n = len(contact_flags)
    start = 0
    for i in range(1, n + 1):
        if i == n or contact_flags[i] != contact_flags[start]:
            label = CONTACT if contact_flags[start] else GAP
            intervals.append((label, start, i - 1))
            start = i
    return intervals


def convex_envelope(f: SampledFunction, a=None, b=None) -> EnvelopeResult:
    """Discrete greatest convex minorant of f on the grid points in [a, b]."""
    grid, values = f.grid, f.values
    if a is None:
        a = grid[0]
    if b is None:
        b = grid[-1]
    lo, hi = _window_slice(grid, a, b)
    x = grid[lo:hi]
    y = values[lo:hi]

    env_list, _hull = _kernel.lower_hull_envelope(
        np.ascontiguousarray(x), np.ascontiguousarray(y)
    )
    env = np.asarray(env_list, dtype=float)

    # snap near-contact points onto the data; this makes the envelope
    # idempotent bitwise and doubles as contact detection, merging contact
    # intervals separated by sub-tolerance gaps
    tol = _contact_tolerance(y)
    contact = np.abs(env - y) <= tol
    env = np.where(contact, y, env)

    return EnvelopeResult(
        grid=x, values=y, envelope=env, intervals=_partition(contact), convex=True
    )


def concave_envelope(f: SampledFunction, a=None, b=None) -> EnvelopeResult:
    """Upper concave envelope, computed as the negated convex envelope of -f."""
    res = convex_envelope(SampledFunction(f.grid, -f.values), a, b)
    return EnvelopeResult(
        grid=res.grid,
        values=-res.values,
        envelope=-res.envelope,
        intervals=res.intervals,
        convex=False,
    )


def envelope(f: SampledFunction, a=None, b=None, convex=True) -> EnvelopeResult:
    return convex_envelope(f, a, b) if convex else concave_envelope(f, a, b)
