"""Concrete scalar systems: LDPC on the BEC, GLDPC with bounded-distance
BCH component decoding, and LDPC over ISI channels with erasure noise.
"""
from __future__ import annotations

import logging
import math
from functools import lru_cache
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import Polynomial

from .errors import AdmissibilityError, NoBracketError
from .numerics import DEFAULT_TOL, Tolerances, bisect, integrate, sample, sup_abs
from .system import ScalarSystem

log = logging.getLogger(__name__)

__all__ = [
    "DegreeDistribution",
    "GldpcParams",
    "IsiChannel",
    "ldpc_bec",
    "ldpc_eps_of_x",
    "ldpc_trial_entropy",
    "maxwell_threshold",
    "gldpc",
    "gldpc_trial_entropy",
    "gldpc_root",
    "gldpc_threshold",
    "memoryless_channel",
    "linear_channel",
    "BUILTIN_CHANNELS",
    "isi_erasure",
]


def _poly_sup_abs(p: Polynomial) -> float:
    """sup |p| over [0, 1] from the endpoints and the real critical points."""
    cands = [0.0, 1.0]
    d = p.deriv()
    if d.degree() > 0 and np.any(d.coef):
        for r in d.roots():
            if abs(r.imag) < 1e-12 and 0.0 <= r.real <= 1.0:
                cands.append(float(r.real))
    return max(abs(float(p(c))) for c in cands)


@dataclass(frozen=True)
class DegreeDistribution:
    """Edge-perspective degree distributions; ``lam[k]`` is the coefficient of x^k."""

    lam: tuple[float, ...]
    rho: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lam", tuple(float(c) for c in self.lam))
        object.__setattr__(self, "rho", tuple(float(c) for c in self.rho))
        for name, coef in (("lambda", self.lam), ("rho", self.rho)):
            if not coef:
                raise ValueError(f"{name} has no coefficients")
            if any(c < 0 for c in coef):
                raise ValueError(f"{name} has a negative coefficient")
            if abs(sum(coef) - 1.0) > 1e-12:
                raise ValueError(f"{name}(1) = {sum(coef)!r}, expected 1")

    @classmethod
    def regular(cls, dv: int, dc: int) -> "DegreeDistribution":
        if dv < 2 or dc < 2:
            raise ValueError("regular ensembles need dv >= 2 and dc >= 2")
        lam = [0.0] * (dv - 1) + [1.0]
        rho = [0.0] * (dc - 1) + [1.0]
        return cls(tuple(lam), tuple(rho))

    @property
    def lam_poly(self) -> Polynomial:
        return Polynomial(self.lam)

    @property
    def rho_poly(self) -> Polynomial:
        return Polynomial(self.rho)

    @property
    def lam_integral(self) -> float:
        """int_0^1 lambda, i.e. 1 / L'(1)."""
        return float(self.lam_poly.integ()(1.0))

    @property
    def Lprime1(self) -> float:
        return 1.0 / self.lam_integral

    def L(self, x):
        """Node-perspective variable distribution L(x) = int_0^x lambda / int_0^1 lambda."""
        return self.lam_poly.integ()(x) / self.lam_integral

    def label(self) -> str:
        dv = [k + 1 for k, c in enumerate(self.lam) if c > 0]
        dc = [k + 1 for k, c in enumerate(self.rho) if c > 0]
        if len(dv) == 1 and len(dc) == 1:
            return f"({dv[0]},{dc[0]})"
        return f"lambda={list(self.lam)},rho={list(self.rho)}"


def _check_through_origin(dd: DegreeDistribution) -> None:
    if dd.lam[0] != 0.0:
        raise AdmissibilityError(f"not admissible: lambda(0) = {dd.lam[0]} must be 0")


def _check_g_parts(dd: DegreeDistribution):
    rho = dd.rho_poly
    drho, d2rho, R = rho.deriv(), rho.deriv(2), rho.integ()
    R1 = float(R(1.0))

    def g(x):
        return 1.0 - rho(1.0 - np.asarray(x, dtype=float))

    def dg(x):
        return drho(1.0 - np.asarray(x, dtype=float))

    def d2g(x):
        return -d2rho(1.0 - np.asarray(x, dtype=float))

    def G(x):
        x = np.asarray(x, dtype=float)
        return x - R1 + R(1.0 - x)

    sup_dg = _poly_sup_abs(drho)
    sup_d2g = _poly_sup_abs(d2rho)
    return g, dg, d2g, G, sup_dg, sup_d2g


def ldpc_eps_of_x(dd: DegreeDistribution) -> Callable:
    lam = dd.lam_poly
    rho = dd.rho_poly

    def eps_of_x(x):
        x = np.asarray(x, dtype=float)
        den = lam(1.0 - rho(1.0 - x))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(den > 0, x / np.where(den > 0, den, 1.0), np.inf)
        return out

    return eps_of_x


@lru_cache(maxsize=64)
def ldpc_bec(dd: DegreeDistribution) -> ScalarSystem:
    """Density evolution of LDPC(lambda, rho) on the BEC: f = eps*lambda(x), g = 1 - rho(1-x)."""
    _check_through_origin(dd)
    lam = dd.lam_poly
    dlam, Lam = lam.deriv(), lam.integ()
    g, dg, d2g, G, sup_dg, sup_d2g = _check_g_parts(dd)
    return ScalarSystem(
        name=f"ldpc{dd.label()}",
        f=lambda x, eps: eps * lam(x),
        df_dx=lambda x, eps: eps * dlam(x),
        F=lambda x, eps: eps * Lam(x),
        g=g,
        dg=dg,
        d2g=d2g,
        G=G,
        sup_df=_poly_sup_abs(dlam),
        sup_dg=sup_dg,
        sup_d2g=sup_d2g,
        eps_of_x=ldpc_eps_of_x(dd),
    )


def _potential_unchecked(sys: ScalarSystem, x, eps):
    gx = sys.g(x)
    return x * gx - sys.G(x) - sys.F(gx, eps)


def ldpc_trial_entropy(dd: DegreeDistribution, x):
    """Trial entropy P(x) of LDPC(lambda, rho) on the BEC.

    Uses P(x) = -L'(1) U(x; eps(x)): at eps = eps(x) the term that depends
    on the channel parameter in the potential vanishes, leaving P alone.
    """
    sys = ldpc_bec(dd)
    x = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        e = sys.eps_of_x(x)
        out = np.where(x == 0.0, 0.0, -dd.Lprime1 * _potential_unchecked(sys, x, np.where(x == 0.0, 0.0, e)))
    if np.any((x != 0.0) & ~np.isfinite(out)):
        raise ValueError("eps(x) undefined at some requested x")
    return float(out) if out.ndim == 0 else out


def _sign_change_roots(h: Callable, lo: float, hi: float, n: int, tol: Tolerances) -> list[float]:
    xs = np.linspace(lo, hi, n + 1)
    hs = sample(h, xs)
    roots = []
    for k in range(n + 1):
        if hs[k] == 0.0:
            roots.append(float(xs[k]))
        elif k > 0 and hs[k - 1] != 0.0 and (hs[k - 1] > 0) != (hs[k] > 0):
            roots.append(bisect(h, (float(xs[k - 1]), float(xs[k])), tol))
    return roots


def maxwell_threshold(dd: DegreeDistribution, tol: Tolerances = DEFAULT_TOL) -> float:
    """Smallest eps(x) over the positive roots of the trial entropy.

    Returns 1.0 (and logs it) when P has no root in (0, 1].
    """
    eps_of_x = ldpc_eps_of_x(dd)
    roots = _sign_change_roots(lambda x: ldpc_trial_entropy(dd, x), math.sqrt(tol.abs_tol), 1.0, tol.grid_n, tol)
    vals = [float(eps_of_x(r)) for r in roots]
    vals = [v for v in vals if math.isfinite(v)]
    if not vals:
        log.warning("trial entropy of %s has no root in (0, 1]; Maxwell threshold set to 1", dd.label())
        return 1.0
    return min(1.0, min(vals))


# --------------------------------------------------------------------- GLDPC


@dataclass(frozen=True)
class GldpcParams:
    n: int
    t: int

    def __post_init__(self):
        if self.n < 5:
            raise ValueError(f"block length n={self.n} too small for 2 <= t <= (n-1)//2")
        if not 2 <= self.t <= (self.n - 1) // 2:
            raise ValueError(f"need 2 <= t <= {(self.n - 1) // 2} for n={self.n}, got t={self.t}")


def _binom_terms(m: int, ks: range, x: np.ndarray) -> np.ndarray:
    """C(m, k) x^k (1-x)^(m-k) for k in ``ks``, shape (len(ks),) + x.shape."""
    x = np.asarray(x, dtype=float)
    ks_arr = np.array(list(ks), dtype=float).reshape((-1,) + (1,) * x.ndim)
    coef = np.array([math.comb(m, k) for k in ks], dtype=float).reshape(ks_arr.shape)
    with np.errstate(invalid="ignore"):
        return coef * np.power(x, ks_arr) * np.power(1.0 - x, m - ks_arr)


def _sum_terms(terms: np.ndarray) -> np.ndarray:
    # add smallest terms first so the dominant ones absorb the rest last
    order = np.argsort(terms, axis=0)
    return np.take_along_axis(terms, order, axis=0).sum(axis=0)


@lru_cache(maxsize=64)
def gldpc(p: GldpcParams, tol: Tolerances = DEFAULT_TOL) -> ScalarSystem:
    """GLDPC with degree-2 bits and t-erasure-correcting BCH(n) checks.

    ``g`` is the binomial tail P(Bin(n-1, x) >= t). Its integral has the
    all-positive form (1/n) sum_{j>t} (j-t) C(n,j) x^j (1-x)^(n-j).
    """
    n, t = p.n, p.t
    m = n - 1
    ks_g = range(t, m + 1)
    ks_G = range(t + 1, n + 1)
    wG = np.array([j - t for j in ks_G], dtype=float)
    c1 = m * math.comb(m - 1, t - 1)

    def g(x):
        # rounding can push the full tail a few ulps past 1
        return np.minimum(_sum_terms(_binom_terms(m, ks_g, x)), 1.0)

    def dg(x):
        x = np.asarray(x, dtype=float)
        return c1 * x ** (t - 1) * (1.0 - x) ** (m - t)

    def d2g(x):
        x = np.asarray(x, dtype=float)
        return c1 * x ** (t - 2) * (1.0 - x) ** (m - t - 1) * ((t - 1) * (1.0 - x) - (m - t) * x)

    def G(x):
        terms = _binom_terms(n, ks_G, x)
        terms = terms * wG.reshape((-1,) + (1,) * (terms.ndim - 1))
        return _sum_terms(terms) / n

    def eps_of_x(x):
        x = np.asarray(x, dtype=float)
        gx = g(x)
        # below 1e-12 the quotient is 0/0 territory; report "no root" instead
        ok = (x > 1e-12) & (gx > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(ok, x / np.where(ok, gx, 1.0), np.inf)

    mode = (t - 1) / (m - 1)
    sup_dg = float(dg(mode))
    sup_d2g = sup_abs(d2g, 0.0, 1.0, tol)
    return ScalarSystem(
        name=f"gldpc(n={n},t={t})",
        f=lambda x, eps: eps * np.asarray(x, dtype=float),
        df_dx=lambda x, eps: eps * np.ones_like(np.asarray(x, dtype=float)),
        F=lambda x, eps: 0.5 * eps * np.asarray(x, dtype=float) ** 2,
        g=g,
        dg=dg,
        d2g=d2g,
        G=G,
        sup_df=1.0,
        sup_dg=sup_dg,
        sup_d2g=sup_d2g,
        eps_of_x=eps_of_x,
    )


def gldpc_trial_entropy(p: GldpcParams, x):
    """P(x) = -x g(x) + 2 G(x)."""
    sys = gldpc(p)
    x = np.asarray(x, dtype=float)
    out = -x * sys.g(x) + 2.0 * sys.G(x)
    return float(out) if np.ndim(out) == 0 else out


def gldpc_root(p: GldpcParams, tol: Tolerances = DEFAULT_TOL, lo: float = 1e-6) -> float:
    """The positive root of the GLDPC trial entropy on (lo, 1]."""
    roots = _sign_change_roots(lambda x: gldpc_trial_entropy(p, x), lo, 1.0, tol.grid_n, tol)
    if not roots:
        raise NoBracketError(f"trial entropy of gldpc(n={p.n},t={p.t}) has no root in ({lo}, 1]")
    if len(roots) > 1:
        log.warning("trial entropy of gldpc(n=%d,t=%d) has %d roots; using the first", p.n, p.t, len(roots))
    return roots[0]


def gldpc_threshold(p: GldpcParams, tol: Tolerances = DEFAULT_TOL) -> float:
    """eps-root of the trial-entropy root, x/g(x) at x = x_bar."""
    xbar = gldpc_root(p, tol)
    sys = gldpc(p, tol)
    return float(xbar / sys.g(xbar))


# ----------------------------------------------------------------------- ISI


@dataclass(frozen=True)
class IsiChannel:
    """Channel detector map psi(t; eps) with optional closed forms.

    ``Psi`` is the integral of ``psi`` in ``t`` from 0 and ``dpsi_dt`` its
    derivative; when absent they fall back to quadrature and central
    differences respectively.
    """

    name: str
    psi: Callable
    Psi: Optional[Callable] = None
    dpsi_dt: Optional[Callable] = None

    def Psi_eval(self, t, eps, tol: Tolerances = DEFAULT_TOL):
        if self.Psi is not None:
            return self.Psi(t, eps)
        t, eps = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(eps, dtype=float))
        out = np.empty(t.shape)
        for idx in np.ndindex(t.shape):
            e = float(eps[idx])
            out[idx] = integrate(lambda y: float(self.psi(y, e)), 0.0, float(t[idx]), Tolerances(abs_tol=1e-13))
        return out if out.ndim else float(out)

    def dpsi_eval(self, t, eps):
        if self.dpsi_dt is not None:
            return self.dpsi_dt(t, eps)
        h = 1e-6
        t = np.asarray(t, dtype=float)
        lo = np.clip(t - h, 0.0, 1.0)
        hi = np.clip(t + h, 0.0, 1.0)
        return (self.psi(hi, eps) - self.psi(lo, eps)) / (hi - lo)


def memoryless_channel() -> IsiChannel:
    return IsiChannel(
        name="memoryless",
        psi=lambda t, eps: eps * np.ones_like(np.asarray(t, dtype=float)),
        Psi=lambda t, eps: eps * np.asarray(t, dtype=float),
        dpsi_dt=lambda t, eps: 0.0 * eps * np.asarray(t, dtype=float),
    )


def linear_channel() -> IsiChannel:
    return IsiChannel(
        name="linear",
        psi=lambda t, eps: eps * np.asarray(t, dtype=float),
        Psi=lambda t, eps: 0.5 * eps * np.asarray(t, dtype=float) ** 2,
        dpsi_dt=lambda t, eps: eps * np.ones_like(np.asarray(t, dtype=float)),
    )


BUILTIN_CHANNELS = {"memoryless": memoryless_channel, "linear": linear_channel}


def _audit_channel(ch: IsiChannel, n: int = 64) -> None:
    ts = np.linspace(0.0, 1.0, n + 1)
    T, E = np.meshgrid(ts, ts, indexing="ij")
    v = np.asarray(ch.psi(T, E), dtype=float) * np.ones_like(T)
    problems = []
    if np.any((v < 0) | (v > 1) | ~np.isfinite(v)):
        problems.append("psi outside [0, 1]")
    if np.any(np.diff(v, axis=0) < 0):
        problems.append("psi decreasing in t")
    if np.any(np.diff(v, axis=1) < 0):
        problems.append("psi decreasing in eps")
    if np.any(v[:, 0] != 0):
        problems.append("psi(t; 0) != 0")
    if problems:
        raise AdmissibilityError(f"channel {ch.name!r} not admissible: " + ", ".join(problems))


def isi_erasure(dd: DegreeDistribution, ch: IsiChannel, tol: Tolerances = DEFAULT_TOL) -> ScalarSystem:
    """Joint LDPC/channel decoding: f(x; eps) = psi(L(x); eps) lambda(x), g = 1 - rho(1-x).

    Substituting t = L(x) gives F(x; eps) = Psi(L(x); eps) / L'(1).
    """
    _check_through_origin(dd)
    _audit_channel(ch)
    lam = dd.lam_poly
    dlam = lam.deriv()
    lam_int = dd.lam_integral
    g, dg, d2g, G, sup_dg, sup_d2g = _check_g_parts(dd)

    def f(x, eps):
        x = np.asarray(x, dtype=float)
        return ch.psi(dd.L(x), eps) * lam(x)

    def df_dx(x, eps):
        x = np.asarray(x, dtype=float)
        Lx = dd.L(x)
        return ch.dpsi_eval(Lx, eps) * lam(x) / lam_int * lam(x) + ch.psi(Lx, eps) * dlam(x)

    def F(x, eps):
        return lam_int * ch.Psi_eval(dd.L(np.asarray(x, dtype=float)), eps, tol)

    return ScalarSystem(
        name=f"isi-{ch.name}{dd.label()}",
        f=f,
        df_dx=df_dx,
        F=F,
        g=g,
        dg=dg,
        d2g=d2g,
        G=G,
        sup_dg=sup_dg,
        sup_d2g=sup_d2g,
    )
