"""Shared oracles for the test suite, independent of the library internals."""

import numpy as np
import pytest


def brute_force_convex_envelope(x, y, grid=None):
    """Lower convex envelope by chord minimization over all node pairs.

    O(n^2 m) reference oracle: the envelope value at a point is the minimum
    over all chords (including degenerate ones) of the interpolated value.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if grid is None:
        grid = x
    out = np.interp(grid, x, y)
    n = x.size
    for a in range(n):
        for b in range(a + 1, n):
            inside = (grid >= x[a]) & (grid <= x[b])
            if not np.any(inside):
                continue
            lam = (grid[inside] - x[a]) / (x[b] - x[a])
            chord = (1 - lam) * y[a] + lam * y[b]
            out[inside] = np.minimum(out[inside], chord)
    return out


def exact_burgers_riemann(u_left, u_right, x_over_t):
    """Entropy solution of the Burgers Riemann problem at the ray x/t."""
    if u_left > u_right:           # shock at the Rankine-Hugoniot speed
        sigma = 0.5 * (u_left + u_right)
        return u_left if x_over_t < sigma else u_right
    if x_over_t <= u_left:         # rarefaction fan
        return u_left
    if x_over_t >= u_right:
        return u_right
    return x_over_t


def l1_against_exact(profile, exact, lo, hi, points=20001):
    xs = np.linspace(lo, hi, points)
    vals = np.array([float(profile(x)[0]) for x in xs])
    ref = np.array([exact(x) for x in xs])
    return float(np.trapezoid(np.abs(vals - ref), xs))


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
