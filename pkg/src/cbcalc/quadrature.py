"""Shared quadrature helpers.

Fixed Gauss segments for smooth integrands over short log-spaced intervals,
and extrapolated improper integrals built from dyadic windows.  The window
extrapolation (Aitken on the partial-sum sequence over doubling cutoffs)
doubles as a divergence detector for the classification integrals.
"""

import numpy as np
from scipy.integrate import quad

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def gauss_segment(f, a, b):
    """24-point Gauss-Legendre of a smooth scalar function on [a, b].

    Effectively exact for integrands that are analytic over the segment;
    used for the short (sub-decade) panels of the phi cache.
    """
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid + half * _GL_NODES
    vals = np.array([f(xi) for xi in x])
    return half * float(np.dot(_GL_WEIGHTS, vals))


def adaptive_segment(f, a, b, rel_tol=1e-12):
    """scipy QAGS on a finite segment, absolute floor scaled to the result."""
    val, _ = quad(f, a, b, epsabs=0.0, epsrel=max(rel_tol, 1e-13), limit=300)
    return val


class DivergentIntegralError(ArithmeticError):
    """Raised when an improper integral fails to converge numerically."""


def tail_integral(f, a, rel_tol=1e-11, max_windows=200, window_factor=2.0):
    """integral of f over [a, +inf) by doubling windows with Aitken extrapolation.

    Returns (value, True) when the window increments decay geometrically and
    the extrapolated sum settles to rel_tol, or (partial, False) when the
    increments do not decay (divergent or too-heavy tail).
    """
    partial = 0.0
    lo = a
    incs = []
    best = None
    for _ in range(max_windows):
        hi = lo * window_factor
        inc, _ = quad(f, lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)
        partial += inc
        incs.append(inc)
        lo = hi
        if len(incs) >= 2 and incs[-2] > 0.0:
            ratio = incs[-1] / incs[-2]
            if ratio >= 0.999:
                return partial, False
            # geometric extrapolation of the remaining tail
            est = partial + incs[-1] * ratio / (1.0 - ratio)
            if best is not None and abs(est - best) <= rel_tol * max(abs(est), 1e-300):
                return est, True
            best = est
        if incs[-1] <= rel_tol * max(abs(partial), 1e-300):
            return partial, True
    return (best if best is not None else partial), False


def head_integral(f, b, rel_tol=1e-11, max_windows=200):
    """integral of f over (0, b] by halving windows toward 0, same contract."""
    partial = 0.0
    hi = b
    incs = []
    best = None
    for _ in range(max_windows):
        lo = hi / 2.0
        inc, _ = quad(f, lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)
        partial += inc
        incs.append(inc)
        hi = lo
        if len(incs) >= 2 and incs[-2] > 0.0:
            ratio = incs[-1] / incs[-2]
            if ratio >= 0.999:
                return partial, False
            est = partial + incs[-1] * ratio / (1.0 - ratio)
            if best is not None and abs(est - best) <= rel_tol * max(abs(est), 1e-300):
                return est, True
            best = est
        if incs[-1] <= rel_tol * max(abs(partial), 1e-300):
            return partial, True
    return (best if best is not None else partial), False
