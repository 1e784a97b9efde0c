"""Pure-Python lower-hull kernel, import fallback for the compiled extension.

Keep the arithmetic here operation-for-operation identical to
``_envelope_kernel.pyx`` so both backends return bitwise-equal envelopes.
"""


def lower_hull_envelope(x, y):
    """Greatest convex minorant of the points (x[i], y[i]) on the grid x.

    Returns (env, hull) where env is a list of envelope values on the grid
    and hull is the list of grid indices of the hull vertices.
    """
    n = len(x)
    hull = [0]
    for i in range(1, n):
        while len(hull) >= 2:
            j = hull[-1]
            k = hull[-2]
            # drop j when it lies on or above the segment k -> i
            if (y[j] - y[k]) * (x[i] - x[k]) >= (y[i] - y[k]) * (x[j] - x[k]):
                hull.pop()
            else:
                break
        hull.append(i)

    env = [0.0] * n
    for seg in range(len(hull) - 1):
        a = hull[seg]
        b = hull[seg + 1]
        ya = y[a]
        slope = (y[b] - ya) / (x[b] - x[a])
        env[a] = ya
        for i in range(a + 1, b):
            v = ya + slope * (x[i] - x[a])
            # interpolation must stay a minorant despite rounding
            if v > y[i]:
                v = y[i]
            env[i] = v
    env[hull[-1]] = y[hull[-1]]
    return env, hull


BACKEND = "python"
