"""Scalar admissible systems and the uncoupled recursion x <- f(g(x); eps)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .numerics import DEFAULT_TOL, Tolerances

__all__ = [
    "ScalarSystem",
    "Violation",
    "AdmissibilityReport",
    "check_domain",
    "recursion_step",
    "iterate_to_fixed_point",
    "check_admissible",
]

Fn2 = Callable[[np.ndarray, np.ndarray], np.ndarray]
Fn1 = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ScalarSystem:
    """The pair (f, g) with the derivatives and antiderivatives the analysis needs.

    All callables must accept numpy arrays and broadcast ``f(x, eps)`` over
    both arguments. ``F(x, eps)`` is the integral of ``f`` in its first
    argument from 0 and ``G`` the integral of ``g``. The optional ``sup_*``
    values are closed-form sup-norms over [0, 1] (over [0, 1]^2 for
    ``sup_df``); ``eps_of_x`` is a closed-form eps-root, returning ``inf``
    where it does not exist.
    """

    name: str
    f: Fn2
    df_dx: Fn2
    F: Fn2
    g: Fn1
    dg: Fn1
    d2g: Fn1
    G: Fn1
    sup_df: Optional[float] = None
    sup_dg: Optional[float] = None
    sup_d2g: Optional[float] = None
    eps_of_x: Optional[Fn1] = field(default=None, compare=False)

    def step(self, x, eps):
        return self.f(self.g(x), eps)


def check_domain(**values) -> None:
    for name, v in values.items():
        a = np.asarray(v, dtype=float)
        if not np.all((a >= 0.0) & (a <= 1.0)):
            raise DomainError(f"{name}={v!r} outside [0, 1]")


def recursion_step(sys: ScalarSystem, x, eps):
    """One step of the uncoupled recursion, ``f(g(x); eps)``."""
    check_domain(x=x, eps=eps)
    out = sys.step(x, eps)
    return float(out) if np.ndim(out) == 0 else out


def iterate_to_fixed_point(
    sys: ScalarSystem, x0: float, eps: float, tol: Tolerances = DEFAULT_TOL
) -> tuple[float, int]:
    """Iterate from ``x0`` until successive iterates differ by at most ``abs_tol``.

    Stops after ``1000 * max_iter`` steps regardless; the last iterate is
    returned together with the number of steps taken.
    """
    check_domain(x0=x0, eps=eps)
    x = float(x0)
    cap = tol.max_iter * 1000
    it = 0
    while it < cap:
        nxt = float(sys.step(x, eps))
        it += 1
        done = abs(nxt - x) <= tol.abs_tol
        x = nxt
        if done:
            break
    return x, it


@dataclass(frozen=True)
class Violation:
    name: str
    point: tuple
    value: float


@dataclass
class AdmissibilityReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def names(self) -> list[str]:
        return [v.name for v in self.violations]

    def __str__(self) -> str:
        if self.passed:
            return "admissible"
        lines = [f"{v.name} fails at {v.point}: {v.value:.6g}" for v in self.violations]
        return "\n".join(lines)


# relative step used by the strict-monotonicity audit; see check_admissible
_STRICT_REL = 1e-12
_FD_STEP = 1e-4
_FD_RTOL = 1e-6
_FD_POINTS = 65


class _Auditor:
    def __init__(self):
        self.worst: dict[str, Violation] = {}

    def flag(self, name: str, bad: np.ndarray, score: np.ndarray, coords: tuple[np.ndarray, ...]):
        """Record the worst witness among entries where ``bad`` is set."""
        if not np.any(bad):
            return
        s = np.where(bad, score, -np.inf)
        k = np.unravel_index(int(np.argmax(s)), s.shape)
        point = tuple(float(np.broadcast_to(c, s.shape)[k]) for c in coords)
        v = Violation(name, point, float(score[k]))
        prev = self.worst.get(name)
        if prev is None or v.value > prev.value:
            self.worst[name] = v


def _fd(fn, x, *args):
    """Five-point central difference in the first argument."""
    h = _FD_STEP
    return (-fn(x + 2 * h, *args) + 8 * fn(x + h, *args) - 8 * fn(x - h, *args) + fn(x - 2 * h, *args)) / (12 * h)


def _fd_mismatch(exact, approx):
    return np.abs(exact - approx) / np.maximum(1.0, np.abs(exact))


def check_admissible(sys: ScalarSystem, tol: Tolerances = DEFAULT_TOL) -> AdmissibilityReport:
    """Numerically audit the admissibility conditions of ``sys``.

    The boundary, range and monotonicity conditions are checked on the
    ``(grid_n + 1)^2`` lattice over [0, 1]^2. Strictness is tested as a
    relative increase of at least 1e-12 between neighbouring lattice
    points with both coordinates in (0, 1]. Derivatives and
    antiderivatives are compared with five-point differences on a coarser
    65-point sub-lattice of the interior.
    """
    aud = _Auditor()
    n = tol.grid_n
    xs = np.linspace(0.0, 1.0, n + 1)

    with np.errstate(all="ignore"):
        # g on its own
        gx = np.asarray(sys.g(xs), dtype=float) * np.ones_like(xs)
        g0 = float(gx[0])
        if g0 != 0.0:
            aud.flag("g(0)=0", np.array([True]), np.array([abs(g0)]), (np.array([0.0]),))
        aud.flag("g range", (gx < 0) | (gx > 1) | ~np.isfinite(gx), np.abs(gx - np.clip(gx, 0, 1)), (xs,))
        dgx = np.asarray(sys.dg(xs[1:-1]), dtype=float) * np.ones(n - 1)
        aud.flag("g'>0", ~(dgx > 0), -dgx, (xs[1:-1],))

        # f on the lattice, in row blocks of eps to bound memory
        f_x0 = np.asarray(sys.f(0.0, xs), dtype=float) * np.ones_like(xs)
        aud.flag("f(0;eps)=0", f_x0 != 0, np.abs(f_x0), (np.zeros_like(xs), xs))
        f_e0 = np.asarray(sys.f(xs, 0.0), dtype=float) * np.ones_like(xs)
        aud.flag("f(x;0)=0", f_e0 != 0, np.abs(f_e0), (xs, np.zeros_like(xs)))

        block = max(1, 2**22 // (n + 1))
        prev_last_row = None
        prev_eps = 0.0
        for start in range(0, n + 1, block):
            eps = xs[start : start + block][:, None]
            vals = np.asarray(sys.f(xs[None, :], eps), dtype=float) * np.ones((eps.shape[0], n + 1))
            X = np.broadcast_to(xs[None, :], vals.shape)
            E = np.broadcast_to(eps, vals.shape)
            aud.flag("f range", (vals < 0) | (vals > 1) | ~np.isfinite(vals), np.abs(vals - np.clip(vals, 0, 1)), (X, E))
            # increasing in x over x in (0, 1], for rows with eps > 0
            up = vals[:, 2:]
            dx = up - vals[:, 1:-1]
            bad = ~(dx > _STRICT_REL * np.abs(up)) & (eps > 0)
            aud.flag("f increasing in x", bad, -dx, (X[:, 2:], E[:, 2:]))
            # increasing in eps, including across block boundaries
            stacked = vals if prev_last_row is None else np.vstack([prev_last_row, vals])
            e_st = eps[:, 0] if prev_last_row is None else np.concatenate([[prev_eps], eps[:, 0]])
            hi = stacked[1:, 1:]
            de = hi - stacked[:-1, 1:]
            rows_ok = (e_st[:-1] > 0)[:, None]
            bad = ~(de > _STRICT_REL * np.abs(hi)) & rows_ok
            aud.flag(
                "f increasing in eps",
                bad,
                -de,
                (np.broadcast_to(xs[None, 1:], de.shape), np.broadcast_to(e_st[1:, None], de.shape)),
            )
            prev_last_row = vals[-1:, :]
            prev_eps = float(eps[-1, 0])

        # derivative and antiderivative consistency
        h = _FD_STEP
        pts = np.linspace(2 * h, 1.0 - 2 * h, _FD_POINTS)
        P, E = np.meshgrid(pts, pts, indexing="ij")
        fd = _fd(sys.f, P, E)
        ex = np.asarray(sys.df_dx(P, E), dtype=float) * np.ones_like(P)
        m = _fd_mismatch(ex, fd)
        aud.flag("df/dx consistency", m > _FD_RTOL, m, (P, E))
        fd = _fd(sys.F, P, E)
        ex = np.asarray(sys.f(P, E), dtype=float) * np.ones_like(P)
        m = _fd_mismatch(ex, fd)
        aud.flag("dF/dx=f", m > _FD_RTOL, m, (P, E))
        F0 = np.asarray(sys.F(0.0, pts), dtype=float) * np.ones_like(pts)
        aud.flag("F(0;eps)=0", F0 != 0, np.abs(F0), (np.zeros_like(pts), pts))

        for name, fn, der in (("dg consistency", sys.g, sys.dg), ("d2g consistency", sys.dg, sys.d2g), ("dG/dx=g", sys.G, sys.g)):
            fd = _fd(lambda x: np.asarray(fn(x), dtype=float), pts)
            ex = np.asarray(der(pts), dtype=float) * np.ones_like(pts)
            m = _fd_mismatch(ex, fd)
            aud.flag(name, m > _FD_RTOL, m, (pts,))
        G0 = float(np.asarray(sys.G(np.array([0.0])), dtype=float).ravel()[0])
        if G0 != 0.0:
            aud.flag("G(0)=0", np.array([True]), np.array([abs(G0)]), (np.array([0.0]),))

    return AdmissibilityReport(violations=list(aud.worst.values()))
