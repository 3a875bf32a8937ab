"""One-dimensional numerical primitives.

Everything here is deterministic: bisection uses the midpoint rule, scans
use equispaced grids, and minimisation refines the best grid cell with a
golden-section search. Functions passed in may be scalar or numpy
vectorised; grids are evaluated in one call when the function accepts an
array and element by element otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, EmptyIntervalError, NoBracketError, NonFiniteError

__all__ = [
    "Bracket",
    "Tolerances",
    "DEFAULT_TOL",
    "sample",
    "bisect",
    "golden_section",
    "minimize_scalar",
    "integrate",
    "sup_abs",
]

RealFn = Callable[[float], float]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class Tolerances:
    abs_tol: float = 1e-12
    grid_n: int = 4096
    max_iter: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.grid_n < 2:
            raise ValueError("grid_n must be at least 2")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")


DEFAULT_TOL = Tolerances()


def sample(h: RealFn, xs: np.ndarray) -> np.ndarray:
    """Evaluate ``h`` on the array ``xs``, vectorised when ``h`` allows it."""
    xs = np.asarray(xs, dtype=float)
    try:
        with np.errstate(all="ignore"):
            out = np.asarray(h(xs), dtype=float)
    except (TypeError, ValueError):
        out = None
    if out is None or out.shape != xs.shape:
        if out is not None and out.ndim == 0:
            out = np.full(xs.shape, float(out))
        else:
            out = np.array([float(h(float(x))) for x in xs.ravel()]).reshape(xs.shape)
    return out


def _check_finite(xs: np.ndarray, hs: np.ndarray) -> None:
    bad = ~np.isfinite(hs)
    if bad.any():
        k = int(np.argmax(bad))
        raise NonFiniteError(float(xs.ravel()[k]), float(hs.ravel()[k]))


def _as_bracket(bracket) -> Bracket:
    if isinstance(bracket, Bracket):
        return bracket
    lo, hi = bracket
    return Bracket(float(lo), float(hi))


def bisect(h: RealFn, bracket: Bracket | tuple[float, float], tol: Tolerances = DEFAULT_TOL) -> float:
    """Midpoint bisection for a root of ``h`` inside ``bracket``.

    Requires a sign change across the bracket, or an exact zero at one of
    its endpoints (which is then returned as is). Of the final bracket's
    endpoints and midpoint, the one with the smallest ``|h|`` is returned.
    """
    br = _as_bracket(bracket)
    lo, hi = br.lo, br.hi
    hlo, hhi = float(h(lo)), float(h(hi))
    if not (math.isfinite(hlo) and math.isfinite(hhi)):
        raise NonFiniteError(lo if not math.isfinite(hlo) else hi, hlo if not math.isfinite(hlo) else hhi)
    if hlo == 0.0:
        return lo
    if hhi == 0.0:
        return hi
    if (hlo > 0) == (hhi > 0):
        raise NoBracketError(f"no bracket: h({lo})={hlo:.3e}, h({hi})={hhi:.3e} share a sign")
    for _ in range(tol.max_iter):
        if hi - lo <= tol.abs_tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # interval cannot shrink further in double precision
        hm = float(h(mid))
        if hm == 0.0:
            return mid
        if (hm > 0) == (hlo > 0):
            lo, hlo = mid, hm
        else:
            hi, hhi = mid, hm
    else:
        if hi - lo > tol.abs_tol:
            raise ConvergenceError("bisection exceeded max_iter", 0.5 * (lo + hi))
    mid = 0.5 * (lo + hi)
    candidates = [(abs(hlo), lo), (abs(hhi), hi), (abs(float(h(mid))), mid)]
    return min(candidates)[1]


def golden_section(h: RealFn, lo: float, hi: float, tol: Tolerances = DEFAULT_TOL) -> tuple[float, float]:
    """Golden-section search for a local minimum of ``h`` on [lo, hi]."""
    a, b = float(lo), float(hi)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    hc, hd = float(h(c)), float(h(d))
    for _ in range(tol.max_iter):
        if b - a <= tol.abs_tol:
            break
        if hc <= hd:
            b, d, hd = d, c, hc
            c = b - _INV_PHI * (b - a)
            hc = float(h(c))
        else:
            a, c, hc = c, d, hd
            d = a + _INV_PHI * (b - a)
            hd = float(h(d))
    x = 0.5 * (a + b)
    hx = float(h(x))
    best = min((hx, x), (hc, c), (hd, d))
    return best[1], best[0]


def minimize_scalar(h: RealFn, lo: float, hi: float, tol: Tolerances = DEFAULT_TOL) -> tuple[float, float]:
    """Global minimum of ``h`` on [lo, hi] up to grid resolution.

    A scan over ``tol.grid_n`` equispaced points locates the best cell,
    then golden-section search narrows it to ``tol.abs_tol``. A function
    with several minima closer together than the grid spacing may be
    resolved to the wrong one; raise ``grid_n`` in that case.
    """
    if lo > hi:
        raise EmptyIntervalError(f"empty interval [{lo}, {hi}]")
    if lo == hi:
        return float(lo), float(h(lo))
    xs = np.linspace(lo, hi, tol.grid_n)
    hs = sample(h, xs)
    if np.isnan(hs).any():
        k = int(np.argmax(np.isnan(hs)))
        raise NonFiniteError(float(xs[k]), float(hs[k]))
    k = int(np.argmin(hs))
    best_x, best_h = float(xs[k]), float(hs[k])
    if not math.isfinite(best_h):
        return best_x, best_h
    a = float(xs[max(k - 1, 0)])
    b = float(xs[min(k + 1, len(xs) - 1)])
    x, hx = golden_section(h, a, b, tol)
    if hx < best_h:
        return x, hx
    return best_x, best_h


def _simpson(fa: float, fm: float, fb: float, a: float, b: float) -> float:
    return (b - a) * (fa + 4.0 * fm + fb) / 6.0


def integrate(h: RealFn, lo: float, hi: float, tol: Tolerances = DEFAULT_TOL, max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature with Richardson extrapolation.

    Each panel is halved until the two half-panel estimates agree with the
    whole-panel estimate to 15x the panel's share of ``tol.abs_tol``.
    """
    if lo == hi:
        return 0.0
    sign = 1.0
    if lo > hi:
        lo, hi, sign = hi, lo, -1.0

    def ev(x: float) -> float:
        v = float(h(x))
        if not math.isfinite(v):
            raise NonFiniteError(x, v)
        return v

    a, b = float(lo), float(hi)
    fa, fb, fm = ev(a), ev(b), ev(0.5 * (a + b))
    whole = _simpson(fa, fm, fb, a, b)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol.abs_tol, 0)]
    while stack:
        a, b, fa, fm, fb, whole, eps, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = ev(lm), ev(rm)
        left = _simpson(fa, flm, fm, a, m)
        right = _simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth >= max_depth or (depth >= 3 and abs(delta) <= 15.0 * eps):
            total += left + right + delta / 15.0
        else:
            stack.append((m, b, fm, frm, fb, right, 0.5 * eps, depth + 1))
            stack.append((a, m, fa, flm, fm, left, 0.5 * eps, depth + 1))
    return sign * total


def sup_abs(
    h: RealFn,
    lo: float = 0.0,
    hi: float = 1.0,
    tol: Tolerances = DEFAULT_TOL,
    exact: float | None = None,
) -> float:
    """Estimate ``sup |h|`` over [lo, hi].

    When ``exact`` is given it is returned unchanged. Otherwise |h| is
    scanned on ``grid_n + 1`` points and the best point is refined locally;
    the estimate is a value actually attained, so it never exceeds the
    true supremum.
    """
    if exact is not None:
        return float(exact)
    if lo == hi:
        return abs(float(h(lo)))
    xs = np.linspace(lo, hi, tol.grid_n + 1)
    hs = np.abs(sample(h, xs))
    _check_finite(xs, hs)
    k = int(np.argmax(hs))
    best = float(hs[k])
    a = float(xs[max(k - 1, 0)])
    b = float(xs[min(k + 1, len(xs) - 1)])
    _, neg = golden_section(lambda x: -abs(float(h(x))), a, b, tol)
    return max(best, -neg)
