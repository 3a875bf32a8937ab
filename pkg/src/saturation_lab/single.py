"""Potential-function analysis of the uncoupled recursion.

The potential is

    U(x; eps) = int_0^x (z - f(g(z); eps)) g'(z) dz
              = x g(x) - G(x) - F(g(x); eps),

and is always evaluated through the closed form on the second line.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NoEpsilonRootError, NoPositiveGapError
from .numerics import (
    DEFAULT_TOL,
    Tolerances,
    bisect,
    golden_section,
    minimize_scalar,
    sample,
    sup_abs,
)
from .system import ScalarSystem, check_domain

log = logging.getLogger(__name__)

__all__ = [
    "StationaryPoint",
    "StationaryPointSet",
    "GapInfo",
    "GapRow",
    "ThresholdReport",
    "PotentialCurve",
    "potential",
    "potential_derivative",
    "fixed_points",
    "epsilon_root",
    "epsilon_roots",
    "single_threshold",
    "min_unstable_fp",
    "energy_gap",
    "energy_gap_info",
    "potential_threshold",
    "hessian_bound",
    "min_width",
    "threshold_report",
    "potential_curve",
]

_EPS_TOL = 1e-6  # bisection width for the potential threshold


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def _U(sys: ScalarSystem, x, eps):
    gx = sys.g(x)
    return x * gx - sys.G(x) - sys.F(gx, eps)


def _h(sys: ScalarSystem, x, eps):
    return x - sys.f(sys.g(x), eps)


def potential(sys: ScalarSystem, x, eps):
    check_domain(x=x, eps=eps)
    return _scalar(_U(sys, np.asarray(x, dtype=float), eps))


def potential_derivative(sys: ScalarSystem, x, eps):
    """dU/dx = (x - f(g(x); eps)) g'(x)."""
    check_domain(x=x, eps=eps)
    x = np.asarray(x, dtype=float)
    return _scalar(_h(sys, x, eps) * sys.dg(x))


# ------------------------------------------------------------- fixed points


@dataclass(frozen=True)
class StationaryPoint:
    x: float
    U: float
    kind: str  # "zero", "unstable" or "stable"
    degenerate: bool = False


@dataclass
class StationaryPointSet:
    eps: float
    points: list[StationaryPoint] = field(default_factory=list)

    def nonzero(self) -> list[StationaryPoint]:
        return [p for p in self.points if p.kind != "zero"]

    @property
    def xs(self) -> list[float]:
        return [p.x for p in self.points]


@dataclass(frozen=True)
class _Root:
    x: float
    left: int  # sign of h just below the root
    right: int  # sign of h just above the root
    degenerate: bool = False


def _scan_roots(hfun, tol: Tolerances, first_only: bool = False) -> list[_Root]:
    """Roots of ``hfun`` on (0, 1] by grid scan, bisection and tangency refinement.

    Sign changes between neighbouring grid points are bisected. A grid
    local minimum with a positive value (or local maximum with a negative
    one) is refined by golden section; if the refined extremum reaches
    zero the function touches or crosses zero inside that cell.
    The first cell [0, x_1] is skipped because h(0) = 0 always.
    """
    n = tol.grid_n
    xs = np.linspace(0.0, 1.0, n + 1)
    hs = sample(hfun, xs)
    s = np.sign(hs)
    roots: list[_Root] = []

    def sgn(v: float) -> int:
        return 1 if v > 0 else (-1 if v < 0 else 0)

    k = 1
    while k <= n:
        if first_only and roots:
            break
        if s[k] == 0:
            left = int(s[k - 1]) if k > 1 else 0
            right = int(s[k + 1]) if k < n else 0
            roots.append(_Root(float(xs[k]), left, right, degenerate=(left == right and left != 0)))
            k += 1
            continue
        if k >= 2 and s[k - 1] != 0 and s[k - 1] != s[k]:
            r = bisect(hfun, (float(xs[k - 1]), float(xs[k])), tol)
            roots.append(_Root(r, int(s[k - 1]), int(s[k])))
            k += 1
            continue
        # tangency inside the cells around grid point k
        if 1 <= k < n and s[k - 1] == s[k] == s[k + 1]:
            sign = s[k]
            is_ext = sign * hs[k] <= sign * hs[k - 1] and sign * hs[k] <= sign * hs[k + 1]
            if is_ext:
                a, b = float(xs[k - 1]), float(xs[k + 1])
                xm, vm = golden_section(lambda x: sign * float(hfun(x)), a, b, tol)
                if vm <= 0.0:
                    if vm == 0.0 or abs(vm) <= tol.abs_tol * 1e-3:
                        roots.append(_Root(xm, int(sign), int(sign), degenerate=True))
                    else:
                        r1 = bisect(hfun, (a, xm), tol)
                        r2 = bisect(hfun, (xm, b), tol)
                        roots.append(_Root(r1, int(sign), int(-sign)))
                        roots.append(_Root(r2, int(-sign), int(sign)))
        k += 1
    roots.sort(key=lambda r: r.x)
    return roots


def _kind(root: _Root) -> str:
    if root.left > 0 and root.right <= 0:
        return "unstable"
    if root.left < 0 and root.right >= 0:
        return "stable"
    if root.left == 0 and root.right > 0:
        return "stable"
    if root.left == 0 and root.right < 0:
        return "unstable"
    # tangency (double root): the merging unstable/stable pair
    return "unstable"


def fixed_points(sys: ScalarSystem, eps: float, tol: Tolerances = DEFAULT_TOL) -> StationaryPointSet:
    """All fixed points of x <- f(g(x); eps) on [0, 1], classified.

    A root where h(x) = x - f(g(x); eps) goes from positive to negative
    (in increasing x) is unstable, negative to positive is stable. Double
    roots are reported as unstable with ``degenerate=True``.
    """
    check_domain(eps=eps)
    hfun = lambda x: _h(sys, x, eps)
    pts = [StationaryPoint(0.0, 0.0, "zero")]
    for r in _scan_roots(hfun, tol):
        pts.append(StationaryPoint(r.x, float(_U(sys, r.x, eps)), _kind(r), r.degenerate))
    return StationaryPointSet(eps=float(eps), points=pts)


# --------------------------------------------------------------- thresholds


def epsilon_roots(sys: ScalarSystem, x, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Vectorised eps-roots; ``inf`` where x - f(g(x); eps) = 0 has no root in [0, 1]."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if sys.eps_of_x is not None:
        with np.errstate(all="ignore"):
            out = np.asarray(sys.eps_of_x(x), dtype=float) * np.ones_like(x)
        return np.where((out <= 1.0 + 1e-12) & (x > 0), np.minimum(out, 1.0), np.inf)
    gx = sys.g(x)
    valid = (x > 0) & (sys.f(gx, 1.0) >= x)
    lo = np.zeros_like(x)
    hi = np.ones_like(x)
    # h is decreasing in eps; keep h(lo) > 0 >= h(hi)
    for _ in range(tol.max_iter):
        if np.all(hi - lo <= tol.abs_tol):
            break
        mid = 0.5 * (lo + hi)
        pos = (x - sys.f(gx, mid)) > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    return np.where(valid, 0.5 * (lo + hi), np.inf)


def epsilon_root(sys: ScalarSystem, x: float, tol: Tolerances = DEFAULT_TOL) -> float:
    """The unique eps with x = f(g(x); eps), for 0 < x <= f(g(x); 1)."""
    check_domain(x=x)
    e = float(epsilon_roots(sys, x, tol)[0])
    if not math.isfinite(e):
        raise NoEpsilonRootError(f"no eps-root at x={x!r}: f(g(x); 1) < x")
    return e


def single_threshold(sys: ScalarSystem, tol: Tolerances = DEFAULT_TOL) -> float:
    """BP-style threshold: the infimum over x in (0, 1] of the eps-root.

    The scan starts at sqrt(abs_tol) rather than 0, where eps(x) is 0/0.
    """
    lo = math.sqrt(tol.abs_tol)
    _, val = minimize_scalar(lambda x: epsilon_roots(sys, x, tol) if np.ndim(x) else float(epsilon_roots(sys, x, tol)[0]), lo, 1.0, tol)
    return min(1.0, float(val))


def min_unstable_fp(sys: ScalarSystem, eps: float, tol: Tolerances = DEFAULT_TOL) -> float:
    """u(eps): the first x > 0 where x - f(g(x); eps) reaches zero, or 1 if none."""
    check_domain(eps=eps)
    hfun = lambda x: _h(sys, x, eps)
    x1 = 1.0 / tol.grid_n
    if float(hfun(x1)) <= 0.0:
        tiny = math.sqrt(tol.abs_tol)
        if float(hfun(tiny)) <= 0.0:
            return 0.0
        return bisect(hfun, (tiny, x1), tol)
    roots = _scan_roots(hfun, tol, first_only=True)
    return roots[0].x if roots else 1.0


@dataclass(frozen=True)
class GapInfo:
    eps: float
    u: float
    argmin: float
    gap: float
    no_unstable_fp: bool  # u(eps) = 1: eps is at or below the single-system threshold


def energy_gap_info(sys: ScalarSystem, eps: float, tol: Tolerances = DEFAULT_TOL) -> GapInfo:
    u = min_unstable_fp(sys, eps, tol)
    xm, val = minimize_scalar(lambda x: _U(sys, x, eps), u, 1.0, tol)
    if u >= 1.0:
        log.debug("eps=%g has no unstable fixed point; gap is U(1; eps)", eps)
    return GapInfo(float(eps), u, xm, float(val), u >= 1.0)


def energy_gap(sys: ScalarSystem, eps: float, tol: Tolerances = DEFAULT_TOL) -> float:
    """min of U(x; eps) over [u(eps), 1]."""
    return energy_gap_info(sys, eps, tol).gap


def potential_threshold(sys: ScalarSystem, tol: Tolerances = DEFAULT_TOL, eps_s: float | None = None) -> float:
    """Largest eps with u(eps) > 0 and a non-negative energy gap.

    The feasible set is an interval because U decreases in eps, so it is
    located by bisection on [eps_s*, 1] to a width of 1e-6. If the gap is
    still non-negative at eps = 1 the result is 1.0 (logged).
    """
    if eps_s is None:
        eps_s = single_threshold(sys, tol)

    def ok(eps: float) -> bool:
        info = energy_gap_info(sys, eps, tol)
        return info.u > 0 and info.gap >= 0.0

    if ok(1.0):
        log.warning("%s: energy gap non-negative up to eps=1; potential threshold set to 1", sys.name)
        return 1.0
    lo, hi = eps_s, 1.0
    if not ok(lo):
        return lo
    while hi - lo > _EPS_TOL:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _sup_df_estimate(sys: ScalarSystem, tol: Tolerances) -> float:
    n = min(tol.grid_n, 512)
    xs = np.linspace(0.0, 1.0, n + 1)
    vals = np.abs(np.asarray(sys.df_dx(xs[None, :], xs[:, None]), dtype=float) * np.ones((n + 1, n + 1)))
    i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
    e = float(xs[i])
    return max(float(vals[i, j]), sup_abs(lambda x: sys.df_dx(x, e), 0.0, 1.0, tol))


def hessian_bound(sys: ScalarSystem, tol: Tolerances = DEFAULT_TOL) -> float:
    """K = ||g'|| + ||g'||^2 ||f'|| + ||g''||, sup-norms over [0, 1].

    ``||f'||`` is taken over both arguments. Closed-form sups on the
    system are used when present, grid estimates otherwise.
    """
    dg = sup_abs(sys.dg, 0.0, 1.0, tol, exact=sys.sup_dg)
    d2g = sup_abs(sys.d2g, 0.0, 1.0, tol, exact=sys.sup_d2g)
    df = sys.sup_df if sys.sup_df is not None else _sup_df_estimate(sys, tol)
    return dg + dg * dg * df + d2g


def min_width(sys: ScalarSystem, eps: float, tol: Tolerances = DEFAULT_TOL, K: float | None = None) -> int:
    """Smallest integer coupling width strictly above K / gap(eps)."""
    gap = energy_gap(sys, eps, tol)
    if not gap > 0:
        raise NoPositiveGapError(f"no positive gap at eps={eps!r} (gap={gap:.3e})")
    if K is None:
        K = hessian_bound(sys, tol)
    return math.floor(K / gap) + 1


@dataclass(frozen=True)
class GapRow:
    eps: float
    u: float
    gap: float
    w_min: int | None


@dataclass
class ThresholdReport:
    system: str
    eps_s_star: float
    eps_star: float
    K: float
    gap_at: list[GapRow] = field(default_factory=list)

    @property
    def eps_star_capped(self) -> bool:
        return self.eps_star >= 1.0


def threshold_report(sys: ScalarSystem, eps_values: Sequence[float] = (), tol: Tolerances = DEFAULT_TOL) -> ThresholdReport:
    eps_s = single_threshold(sys, tol)
    eps_star = potential_threshold(sys, tol, eps_s=eps_s)
    K = hessian_bound(sys, tol)
    rows = []
    for e in eps_values:
        info = energy_gap_info(sys, e, tol)
        w = math.floor(K / info.gap) + 1 if info.gap > 0 else None
        rows.append(GapRow(float(e), info.u, info.gap, w))
    return ThresholdReport(sys.name, eps_s, eps_star, K, rows)


@dataclass
class PotentialCurve:
    system: str
    x: np.ndarray
    eps: list[float]
    U: np.ndarray  # shape (len(eps), len(x))
    stationary: list[StationaryPointSet]


def potential_curve(
    sys: ScalarSystem, eps_list: Sequence[float], x_grid_n: int = 512, tol: Tolerances = DEFAULT_TOL
) -> PotentialCurve:
    """Tabulate U(x; eps) on a uniform grid of ``x_grid_n + 1`` points, with stationary points."""
    check_domain(eps=list(eps_list))
    xs = np.linspace(0.0, 1.0, x_grid_n + 1)
    U = np.vstack([np.asarray(_U(sys, xs, e), dtype=float) * np.ones_like(xs) for e in eps_list]) if len(eps_list) else np.empty((0, xs.size))
    sps = [fixed_points(sys, e, tol) for e in eps_list]
    return PotentialCurve(sys.name, xs, [float(e) for e in eps_list], U, sps)
