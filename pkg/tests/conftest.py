"""Shared test helpers: independent oracles kept free of library code."""

import math


def w_bisect(x: float, branch: str) -> float:
    """Bisection solve of w * exp(w) = x, independent of the library.

    branch "principal": root in [-1, inf), where w*exp(w) is increasing.
    branch "lower": root in (-inf, -1], where w*exp(w) is decreasing.
    Interval narrowed to 1e-13 absolute width.
    """
    g = lambda w: w * math.exp(w) - x
    if branch == "principal":
        lo = -1.0
        hi = max(2.0, math.log(max(x, 1.0)) + 2.0)
        increasing = True
    elif branch == "lower":
        lo, hi = -800.0, -1.0
        increasing = False
    else:
        raise ValueError(branch)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if (gm < 0) == increasing:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    return 0.5 * (lo + hi)


def bisect_root(fn, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Generic bisection for a sign change of fn on [lo, hi]."""
    flo = fn(lo)
    if flo == 0:
        return lo
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)
