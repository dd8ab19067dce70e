"""Shared numerics: adaptive Simpson quadrature and vectorized monotone inversion."""

from __future__ import annotations

from typing import Callable

import numpy as np


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 60,
) -> float:
    """Adaptive Simpson quadrature of ``f`` over [a, b].

    Intervals are split until the local Richardson estimate drops below the
    budgeted tolerance, and the final estimate includes the Richardson
    correction. ``f`` must be finite on [a, b].
    """
    if not b > a:
        raise ValueError("integration bounds must satisfy a < b")

    def simpson(lo: float, flo: float, hi: float, fhi: float, fmid: float) -> float:
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    m = 0.5 * (a + b)
    fa, fm, fb = float(f(a)), float(f(m)), float(f(b))
    whole = simpson(a, fa, b, fb, fm)
    stack = [(a, m, b, fa, fm, fb, whole, float(tol), 0)]
    total = 0.0
    while stack:
        lo, mid, hi, flo, fmid, fhi, coarse, budget, depth = stack.pop()
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm = float(f(lm))
        frm = float(f(rm))
        left = simpson(lo, flo, mid, fmid, flm)
        right = simpson(mid, fmid, hi, fhi, frm)
        err = left + right - coarse
        if depth >= max_depth or abs(err) <= 15.0 * budget:
            total += left + right + err / 15.0
        else:
            half = 0.5 * budget
            stack.append((lo, lm, mid, flo, flm, fmid, left, half, depth + 1))
            stack.append((mid, rm, hi, fmid, frm, fhi, right, half, depth + 1))
    return total


def invert_monotone(
    f: Callable[[np.ndarray], np.ndarray],
    targets: np.ndarray,
    lo,
    hi,
    tol: float = 1e-13,
    fprime: Callable[[np.ndarray], np.ndarray] | None = None,
    x0: np.ndarray | None = None,
    max_iter: int = 200,
) -> np.ndarray:
    """Solve ``f(x) = target`` lane-wise for a nondecreasing vectorized ``f``.

    ``lo``/``hi`` bracket each root (scalars or arrays). Newton steps, when a
    derivative is supplied, are accepted only inside the shrinking bisection
    bracket, so flat spots of ``f`` cannot stall convergence. Returns ``x``
    with ``|f(x) - target| <= tol`` in every lane.
    """
    t = np.atleast_1d(np.asarray(targets, dtype=float))
    lo_a = np.broadcast_to(np.asarray(lo, dtype=float), t.shape).copy()
    hi_a = np.broadcast_to(np.asarray(hi, dtype=float), t.shape).copy()
    if x0 is None:
        x = 0.5 * (lo_a + hi_a)
    else:
        x = np.clip(np.broadcast_to(np.asarray(x0, dtype=float), t.shape).copy(), lo_a, hi_a)

    res = np.asarray(f(x)) - t
    idx = np.nonzero(np.abs(res) > tol)[0]
    for _ in range(max_iter):
        if idx.size == 0:
            break
        xi = x[idx]
        ri = res[idx]
        above = ri > 0.0
        hi_a[idx[above]] = xi[above]
        lo_a[idx[~above]] = xi[~above]
        mid = 0.5 * (lo_a[idx] + hi_a[idx])
        if fprime is not None:
            fp = np.asarray(fprime(xi), dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                xn = xi - ri / fp
            bad = ~np.isfinite(xn) | (xn <= lo_a[idx]) | (xn >= hi_a[idx]) | (fp <= 0.0)
            xn = np.where(bad, mid, xn)
        else:
            xn = mid
        x[idx] = xn
        res[idx] = np.asarray(f(xn)) - t[idx]
        idx = idx[np.abs(res[idx]) > tol]
    if idx.size:
        worst = float(np.max(np.abs(res[idx])))
        raise ArithmeticError(f"monotone inversion failed to reach tol={tol} (worst residual {worst:.3e})")
    return x if np.ndim(targets) else x[0]
