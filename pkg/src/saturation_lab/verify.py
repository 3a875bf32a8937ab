"""Registry of numerical property checks run by ``saturation-lab verify``.

Each check returns the largest violation it observed and the bound that
violation must stay under. Randomised checks draw from a generator seeded
by ``VerifyContext.seed`` so reports are reproducible.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coupled import (
    CoupledState,
    CouplingMatrix,
    SCRunResult,
    coupled_hessian_norm,
    one_sided_extension,
    sc_run_basic,
    sc_run_one_sided,
    sc_step_basic,
    sc_step_double_sum,
    shift_energy_check,
    shift_norms,
)
from .models import (
    DegreeDistribution,
    GldpcParams,
    gldpc,
    gldpc_threshold,
    gldpc_trial_entropy,
    isi_erasure,
    ldpc_bec,
    maxwell_threshold,
    memoryless_channel,
)
from .numerics import DEFAULT_TOL, Tolerances
from .single import (
    _U,
    _h,
    _scan_roots,
    energy_gap,
    fixed_points,
    hessian_bound,
    min_width,
    potential_threshold,
    single_threshold,
)
from .system import ScalarSystem

log = logging.getLogger(__name__)

__all__ = [
    "CheckResult",
    "VerifyContext",
    "CHECKS",
    "run_checks",
    "structured_state",
    "window_averaged_vector",
    "monotone_run_violation",
    "domination_violation",
]


@dataclass
class VerifyContext:
    seed: int = 0
    trials: int | None = None  # None: each check's own default
    corrupt_matrix: bool = False
    tol: Tolerances = DEFAULT_TOL

    def rng(self, salt: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])

    def n_trials(self, default: int) -> int:
        return default if self.trials is None else self.trials


@dataclass
class CheckResult:
    name: str
    description: str
    max_violation: float
    bound: float
    detail: str = ""
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return math.isfinite(self.max_violation) and self.max_violation <= self.bound

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name:<15} max violation {self.max_violation:.3e} (bound {self.bound:.0e})  {self.description}"


def ldpc36() -> ScalarSystem:
    return ldpc_bec(DegreeDistribution.regular(3, 6))


def gldpc153() -> ScalarSystem:
    return gldpc(GldpcParams(15, 3))


# ------------------------------------------------------------ state builders


def structured_state(rng: np.random.Generator, L: int, w: int, monotone: bool = True) -> CoupledState:
    """A random one-sided state with w leading zeros and a flat tail of 2w+1 entries.

    Entries between are uniform on [0, c] where c is the tail value, sorted
    when ``monotone`` is set.
    """
    M = CouplingMatrix("one_sided", L, w)
    n = M.cols
    k0 = M.i0 - M.first_index
    c = rng.uniform(0.0, 1.0)
    mid = rng.uniform(0.0, c, size=k0 - w)
    if monotone:
        mid.sort()
    v = np.concatenate([np.zeros(w), mid, np.full(n - k0, c)])
    return CoupledState(v, M.first_index, "one_sided")


def window_averaged_vector(rng: np.random.Generator, n: int, w: int) -> np.ndarray:
    """Trailing w-window averages of a sorted uniform [0, 1] sequence.

    The sequence is zero before its first entry, so x_1 = z_1 / w and the
    result is non-decreasing.
    """
    z = np.concatenate((np.zeros(w - 1), np.sort(rng.uniform(0.0, 1.0, size=n))))
    c = np.concatenate(([0.0], np.cumsum(z)))
    return (c[w:] - c[:-w]) / w


# ------------------------------------------------------- run-level measures


def monotone_run_violation(res: SCRunResult) -> float:
    """Largest per-step increase of any entry, or of the max-entry trace."""
    trace = np.asarray(res.max_entry_trace)
    up = float(np.max(np.diff(trace))) if trace.size > 1 else 0.0
    return max(res.max_increase, up, 0.0)


def domination_violation(basic: SCRunResult, one: SCRunResult, L: int, w: int) -> float:
    """How far the one-sided fixed point falls below the basic one on the basic chain."""
    pos = basic.fixed_point.positions
    ext = one_sided_extension(one.fixed_point, w, pos)
    return max(0.0, float(np.max(basic.fixed_point.values - ext)))


def nondecreasing_violation(res: SCRunResult) -> float:
    d = np.diff(res.fixed_point.values)
    return max(0.0, float(-d.min())) if d.size else 0.0


# -------------------------------------------------------------------- checks


def _fd5(fn, x, h):
    return (-fn(x + 2 * h) + 8 * fn(x + h) - 8 * fn(x - h) + fn(x - 2 * h)) / (12 * h)


def check_potential(ctx: VerifyContext) -> CheckResult:
    """Potential is non-increasing in eps, and its stationary points on (0, 1) are the fixed points."""
    n = 512
    worst = 0.0
    notes = []
    scan_tol = Tolerances(ctx.tol.abs_tol, n, ctx.tol.max_iter)
    for sys in (ldpc36(), gldpc153()):
        xs = np.linspace(0.0, 1.0, n)
        es = np.linspace(0.0, 1.0, n)
        U = np.asarray(_U(sys, xs[None, :], es[:, None]), dtype=float)
        mono = float(np.max(np.diff(U, axis=0)))
        h = 2e-4
        xi = np.linspace(2 * h, 1 - 2 * h, n)
        fd = np.vstack([_fd5(lambda z: _U(sys, z, e), xi, h) for e in es])
        exact = _h(sys, xi[None, :], es[:, None]) * sys.dg(xi)[None, :]
        deriv = float(np.max(np.abs(fd - exact)))
        fp_stat = 0.0  # |U'| at fixed points
        stat_fp = 0.0  # |x - f(g(x))| at stationary points of U inside (0, 1)
        for e in es:
            for p in fixed_points(sys, float(e), scan_tol).nonzero():
                if p.x < 1.0:
                    fp_stat = max(fp_stat, abs(float(_h(sys, p.x, e) * sys.dg(p.x))))
            dU = lambda z, e=e: _h(sys, z, e) * sys.dg(z)
            for r in _scan_roots(dU, scan_tol):
                if r.x < 1.0 - 1.0 / 64 and not r.degenerate:
                    stat_fp = max(stat_fp, abs(float(_h(sys, r.x, e))))
        worst = max(worst, max(mono, 0.0), deriv, fp_stat, stat_fp)
        notes.append(f"{sys.name}: mono {max(mono, 0):.1e}, dU {deriv:.1e}, fp->stat {fp_stat:.1e}, stat->fp {stat_fp:.1e}")
    return CheckResult("potential", "U non-increasing in eps; fixed points = stationary points", worst, 1e-8, "; ".join(notes))


def check_monotone(ctx: VerifyContext) -> CheckResult:
    """Monotone convergence from all-ones, one-sided domination, non-decreasing one-sided limit."""
    sys = ldpc36()
    L, w = 16, 3
    mono = dom = nd = 0.0
    for eps in (0.40, 0.47, 0.50, 0.55, 0.70):
        b = sc_run_basic(sys, L, w, eps, ctx.tol)
        o = sc_run_one_sided(sys, L, w, eps, ctx.tol)
        mono = max(mono, monotone_run_violation(b), monotone_run_violation(o))
        dom = max(dom, domination_violation(b, o, L, w))
        nd = max(nd, nondecreasing_violation(o))
    return CheckResult(
        "monotone",
        "runs decrease entry-wise; one-sided limit dominates and is non-decreasing",
        max(mono, dom, nd),
        1e-12,
        f"step increase {mono:.1e}, domination {dom:.1e}, non-decreasing {nd:.1e}",
    )


def check_shift_norms(ctx: VerifyContext) -> CheckResult:
    rng = ctx.rng(3)
    worst = 0.0
    for _ in range(ctx.n_trials(1000)):
        w = int(rng.choice([2, 3, 5, 8]))
        n = int(rng.integers(1, 257))
        x = window_averaged_vector(rng, n, w)
        sup, one = shift_norms(x)
        worst = max(worst, sup - 1.0 / w, abs(one - x[-1]))
    return CheckResult("shift-norms", "||Sx-x||_inf <= 1/w and ||Sx-x||_1 = x_n", max(worst, 0.0), 1e-12)


def _coupled_states(ctx: VerifyContext, salt: int):
    """Yield (system, matrix, state, eps) over both systems and the (L, w) grid."""
    rng = ctx.rng(salt)
    n = ctx.n_trials(100)
    for sys in (ldpc36(), gldpc153()):
        for L in (8, 16):
            for w in (2, 3, 5):
                weight = 1.0 / (w - 0.5) if ctx.corrupt_matrix else None
                M = CouplingMatrix("one_sided", L, w, weight)
                for k in range(n):
                    st = structured_state(rng, L, w, monotone=(k % 2 == 0))
                    yield sys, M, st, float(rng.uniform(0.0, 1.0))


def check_shift_energy(ctx: VerifyContext) -> CheckResult:
    worst = 0.0
    count = 0
    for sys, M, st, eps in _coupled_states(ctx, 4):
        d, s = shift_energy_check(sys, st, eps, M)
        worst = max(worst, abs(d - s))
        count += 1
    return CheckResult(
        "shift-energy", "U(Sx) - U(x) = -U(x_i0) on structured states", worst, 1e-9, f"{count} states"
    )


def check_hessian(ctx: VerifyContext) -> CheckResult:
    worst = -math.inf
    Ks = {}
    for sys, M, st, eps in _coupled_states(ctx, 4):
        K = Ks.setdefault(sys.name, hessian_bound(sys, ctx.tol))
        worst = max(worst, coupled_hessian_norm(sys, st, eps, M) - K)
    detail = ", ".join(f"K[{k}]={v:.6g}" for k, v in Ks.items())
    return CheckResult("hessian", "coupled Hessian inf-norm <= K, independent of L and w", max(worst, 0.0), 1e-9, detail)


def check_theorem(ctx: VerifyContext) -> CheckResult:
    sys = ldpc36()
    eps = 0.45
    w = min_width(sys, eps, ctx.tol)
    L = 2 * w
    b = sc_run_basic(sys, L, w, eps, ctx.tol)
    o = sc_run_one_sided(sys, L, w, eps, ctx.tol)
    worst = max(b.fixed_point.max(), o.fixed_point.max())
    return CheckResult(
        "theorem",
        f"eps={eps} below threshold, w=w_min={w}, L={L}: both chains decode",
        worst,
        1e-8,
        f"basic {b.iterations} iterations, one-sided {o.iterations}",
    )


def check_maxwell(ctx: VerifyContext) -> CheckResult:
    worst = 0.0
    notes = []
    for dv, dc in ((3, 5), (3, 6), (4, 8)):
        dd = DegreeDistribution.regular(dv, dc)
        pt = potential_threshold(ldpc_bec(dd), ctx.tol)
        mx = maxwell_threshold(dd, ctx.tol)
        worst = max(worst, abs(pt - mx))
        notes.append(f"{dd.label()}: {pt:.6f}/{mx:.6f}")
    return CheckResult("maxwell", "potential threshold equals Maxwell threshold (LDPC)", worst, 1e-5, "; ".join(notes))


GLDPC_UNIQUENESS = ((7, 2), (7, 3), (15, 2), (15, 3), (15, 7), (31, 4))
GLDPC_THRESHOLD = ((7, 2), (15, 3), (31, 4))


def p_sign_changes(p: GldpcParams, delta: float = 1e-6, n: int = 10_000) -> int:
    xs = np.linspace(delta, 1.0, n)
    s = np.sign(gldpc_trial_entropy(p, xs))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def check_gldpc(ctx: VerifyContext) -> CheckResult:
    bad = 0
    for n, t in GLDPC_UNIQUENESS:
        if p_sign_changes(GldpcParams(n, t)) != 1:
            bad += 1
    worst = 0.0
    notes = []
    for n, t in GLDPC_THRESHOLD:
        p = GldpcParams(n, t)
        a = gldpc_threshold(p, ctx.tol)
        b = potential_threshold(gldpc(p), ctx.tol)
        worst = max(worst, abs(a - b))
        notes.append(f"({n},{t}): {a:.6f}/{b:.6f}")
    viol = math.inf if bad else worst
    return CheckResult(
        "gldpc-root",
        "trial entropy has one sign change; its root gives the potential threshold",
        viol,
        1e-5,
        f"{bad} systems without a unique root; " + "; ".join(notes),
    )


def check_dual_form(ctx: VerifyContext) -> CheckResult:
    rng = ctx.rng(12)
    sys = ldpc36()
    worst = 0.0
    for _ in range(ctx.n_trials(20)):
        L = int(rng.integers(1, 9))
        w = int(rng.integers(1, 6))
        M = CouplingMatrix("basic", L, w)
        st = CoupledState(rng.uniform(0.0, 1.0, M.cols), M.first_index)
        eps = float(rng.uniform(0.0, 1.0))
        a = sc_step_basic(sys, st, eps, M).values
        b = sc_step_double_sum(sys, st, eps, L, w).values
        worst = max(worst, float(np.abs(a - b).max()))
    return CheckResult("dual-form", "matrix and double-sum forms of the coupled step agree", worst, 1e-12)


def check_isi(ctx: VerifyContext) -> CheckResult:
    dd = DegreeDistribution.regular(3, 6)
    a = ldpc_bec(dd)
    b = isi_erasure(dd, memoryless_channel(), ctx.tol)
    xs = np.linspace(0.0, 1.0, 257)
    es = np.linspace(0.0, 1.0, 33)
    diffs = [float(np.max(np.abs(_U(a, xs[None, :], es[:, None]) - _U(b, xs[None, :], es[:, None]))))]
    diffs.append(abs(single_threshold(a, ctx.tol) - single_threshold(b, ctx.tol)))
    diffs.append(abs(potential_threshold(a, ctx.tol) - potential_threshold(b, ctx.tol)))
    diffs.append(abs(energy_gap(a, 0.45, ctx.tol) - energy_gap(b, 0.45, ctx.tol)))
    diffs.append(abs(hessian_bound(a, ctx.tol) - hessian_bound(b, ctx.tol)))
    fa, fb = fixed_points(a, 0.45, ctx.tol).xs, fixed_points(b, 0.45, ctx.tol).xs
    diffs.append(float(np.max(np.abs(np.subtract(fa, fb)))) if len(fa) == len(fb) else math.inf)
    for eps in (0.45, 0.55):
        for run in (sc_run_basic, sc_run_one_sided):
            ra = run(a, 16, 3, eps, ctx.tol)
            rb = run(b, 16, 3, eps, ctx.tol)
            diffs.append(float(np.abs(ra.fixed_point.values - rb.fixed_point.values).max()))
    return CheckResult("isi-reduction", "memoryless ISI channel reproduces the plain LDPC system", max(diffs), 1e-8)


CHECKS: dict[str, Callable[[VerifyContext], CheckResult]] = {
    "potential": check_potential,
    "monotone": check_monotone,
    "shift-norms": check_shift_norms,
    "shift-energy": check_shift_energy,
    "hessian": check_hessian,
    "theorem": check_theorem,
    "maxwell": check_maxwell,
    "gldpc-root": check_gldpc,
    "dual-form": check_dual_form,
    "isi-reduction": check_isi,
}


def run_checks(names: list[str] | None, ctx: VerifyContext) -> list[CheckResult]:
    out = []
    for name in names or list(CHECKS):
        t0 = time.perf_counter()
        res = CHECKS[name](ctx)
        res.seconds = time.perf_counter() - t0
        log.info("%s", res.line())
        out.append(res)
    return out
