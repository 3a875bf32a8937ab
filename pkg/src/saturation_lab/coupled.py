"""Spatially-coupled recursions, their potential, and the shift lemmas.

Positions follow the integer labels used for coupled chains: the basic
system lives on {-L, ..., L+w-1} with f-nodes at {-L, ..., L}; the
one-sided system lives on {-L-w, ..., 2w+i0} with i0 = (w-1)//2. A
``CoupledState`` stores the label of its first entry so that all position
arithmetic goes through one offset.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, PreconditionError
from .numerics import DEFAULT_TOL, Tolerances
from .system import ScalarSystem, check_domain

log = logging.getLogger(__name__)

__all__ = [
    "CouplingMatrix",
    "CoupledState",
    "SCRunResult",
    "ZERO_THRESHOLD",
    "build_basic_matrix",
    "build_one_sided_matrix",
    "basic_initial_state",
    "one_sided_initial_state",
    "sc_step_basic",
    "sc_step_double_sum",
    "sc_run_basic",
    "sc_step_one_sided",
    "sc_run_one_sided",
    "one_sided_extension",
    "coupled_potential",
    "coupled_gradient",
    "coupled_hessian",
    "coupled_hessian_norm",
    "shift",
    "shift_norms",
    "shift_energy_check",
    "is_shift_structured",
    "empirical_sc_threshold",
]

ZERO_THRESHOLD = 1e-8
SC_MAX_ITER = 10**6


@dataclass(frozen=True)
class CouplingMatrix:
    """Banded averaging matrix stored as a band descriptor.

    Row r has the value ``weight`` (1/w unless overridden) in columns
    r, ..., min(r+w-1, cols-1). For ``kind="basic"`` this is the
    (2L+1) x (2L+w) matrix and no row is truncated; for
    ``kind="one_sided"`` it is square of side L+3w+i0+1 and the last w-1
    rows lose entries at the right edge, the final row keeping a single one.
    """

    kind: str
    L: int
    w: int
    weight: float | None = None

    def __post_init__(self):
        if self.kind not in ("basic", "one_sided"):
            raise ValueError(f"unknown coupling kind {self.kind!r}")
        if self.L < 1:
            raise ValueError("L must be >= 1")
        if self.w < 1:
            raise ValueError("w must be >= 1")

    @property
    def i0(self) -> int:
        return (self.w - 1) // 2

    @property
    def value(self) -> float:
        return 1.0 / self.w if self.weight is None else self.weight

    @property
    def rows(self) -> int:
        if self.kind == "basic":
            return 2 * self.L + 1
        return self.L + 3 * self.w + self.i0 + 1

    @property
    def cols(self) -> int:
        if self.kind == "basic":
            return 2 * self.L + self.w
        return self.rows

    @property
    def first_index(self) -> int:
        """Position label of column 0 (and of row 0)."""
        return -self.L if self.kind == "basic" else -self.L - self.w

    def positions(self) -> np.ndarray:
        return np.arange(self.first_index, self.first_index + self.cols)

    def row_sums(self) -> np.ndarray:
        r = np.arange(self.rows)
        return self.value * (np.minimum(r + self.w, self.cols) - r)

    def dense(self) -> np.ndarray:
        A = np.zeros((self.rows, self.cols))
        for r in range(self.rows):
            A[r, r : min(r + self.w, self.cols)] = self.value
        return A

    def apply(self, v: np.ndarray) -> np.ndarray:
        """A v, via prefix sums in O(cols)."""
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.cols:
            raise DimensionError(f"vector of length {v.shape[-1]} for {self.rows}x{self.cols} matrix")
        c = np.concatenate(([0.0], np.cumsum(v)))
        r = np.arange(self.rows)
        return self.value * (c[np.minimum(r + self.w, self.cols)] - c[r])

    def apply_T(self, u: np.ndarray) -> np.ndarray:
        """A^T u, via prefix sums in O(cols)."""
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != self.rows:
            raise DimensionError(f"vector of length {u.shape[-1]} for transpose of {self.rows}x{self.cols} matrix")
        c = np.concatenate(([0.0], np.cumsum(u)))
        j = np.arange(self.cols)
        hi = np.minimum(j, self.rows - 1) + 1
        lo = np.maximum(j - self.w + 1, 0)
        return self.value * (c[hi] - c[np.minimum(lo, hi)])


def _build(kind: str, L: int, w: int) -> CouplingMatrix:
    if L < 1:
        raise ValueError("L must be >= 1")
    if w < 1:
        raise ValueError(f"coupling width w={w} must be >= 1")
    if w == 1:
        warnings.warn("w=1 couples nothing: the chain is 2L+1 independent copies of the scalar system", stacklevel=3)
    return CouplingMatrix(kind, L, w)


def build_basic_matrix(L: int, w: int) -> CouplingMatrix:
    return _build("basic", L, w)


def build_one_sided_matrix(L: int, w: int) -> CouplingMatrix:
    return _build("one_sided", L, w)


@dataclass
class CoupledState:
    values: np.ndarray
    first_index: int
    kind: str = "basic"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return self.values.size

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.first_index, self.first_index + len(self))

    def at(self, position: int) -> float:
        return float(self.values[position - self.first_index])

    def max(self) -> float:
        return float(self.values.max()) if len(self) else 0.0


def basic_initial_state(matrix: CouplingMatrix) -> CoupledState:
    return CoupledState(np.ones(matrix.cols), matrix.first_index, "basic")


def one_sided_initial_state(matrix: CouplingMatrix) -> CoupledState:
    v = np.ones(matrix.cols)
    v[: matrix.w] = 0.0  # positions -L-w, ..., -L-1
    return CoupledState(v, matrix.first_index, "one_sided")


def _check_dims(state: CoupledState, matrix: CouplingMatrix) -> None:
    if len(state) != matrix.cols or state.first_index != matrix.first_index:
        raise DimensionError(
            f"state of length {len(state)} at {state.first_index} does not match "
            f"{matrix.kind} matrix ({matrix.cols} columns at {matrix.first_index})"
        )


def _update(sys: ScalarSystem, x: np.ndarray, eps: float, matrix: CouplingMatrix) -> np.ndarray:
    a = np.clip(matrix.apply(sys.g(x)), 0.0, 1.0)
    return np.clip(matrix.apply_T(sys.f(a, eps)), 0.0, 1.0)


def sc_step_basic(sys: ScalarSystem, state: CoupledState, eps: float, matrix: CouplingMatrix) -> CoupledState:
    """One step of x <- A2^T f(A2 g(x); eps) for the basic chain.

    Only the 2L+1 f-nodes in {-L, ..., L} exist, which is exactly the
    convention that eps is 0 outside that set.
    """
    _check_dims(state, matrix)
    check_domain(eps=eps)
    return CoupledState(_update(sys, state.values, eps, matrix), state.first_index, "basic")


def sc_step_double_sum(sys: ScalarSystem, state: CoupledState, eps: float, L: int, w: int) -> CoupledState:
    """The basic step written as the explicit double sum over window offsets.

    x_i <- (1/w) sum_k f((1/w) sum_j g(x_{i+j-k}); eps_{i-k}), with
    eps_m = eps for m in {-L, ..., L} and 0 elsewhere, and x_i = 0 for i
    outside {-L, ..., L+w-1}. Plain loops; meant as a cross-check.
    """
    n = 2 * L + w
    if len(state) != n or state.first_index != -L:
        raise DimensionError(f"state does not match basic chain with L={L}, w={w}")
    x = state.values

    def xval(i: int) -> float:
        k = i + L
        return float(x[k]) if 0 <= k < n else 0.0

    out = np.empty(n)
    for idx in range(n):
        i = idx - L
        acc = 0.0
        for k in range(w):
            m = i - k
            e = eps if -L <= m <= L else 0.0
            inner = sum(float(sys.g(xval(i + j - k))) for j in range(w)) / w
            acc += float(sys.f(min(max(inner, 0.0), 1.0), e))
        out[idx] = acc / w
    return CoupledState(out, -L, "basic")


def sc_step_one_sided(sys: ScalarSystem, state: CoupledState, eps: float, matrix: CouplingMatrix) -> CoupledState:
    """One step of x <- A^T f(A g(x); eps), then the boundary conditions.

    Every row of A carries the channel parameter. After the update,
    x_i is set to x_{i0} for i >= i0 and to 0 for i < -L.
    """
    _check_dims(state, matrix)
    check_domain(eps=eps)
    new = _update(sys, state.values, eps, matrix)
    _enforce_one_sided(new, matrix)
    return CoupledState(new, state.first_index, "one_sided")


def _enforce_one_sided(v: np.ndarray, matrix: CouplingMatrix) -> None:
    k0 = matrix.i0 - matrix.first_index
    v[k0 + 1 :] = v[k0]
    v[: matrix.w] = 0.0


@dataclass
class SCRunResult:
    fixed_point: CoupledState
    iterations: int
    converged_to_zero: bool
    max_entry_trace: list[float] = field(default_factory=list)
    hit_cap: bool = False
    max_increase: float = 0.0  # largest single-step increase of any entry


def _run(step, sys, matrix, state, eps, tol, max_iter) -> SCRunResult:
    x = state.values.copy()
    trace = [float(x.max())]
    worst_up = -math.inf
    it = 0
    hit_cap = True
    while it < max_iter:
        new = step(x)
        it += 1
        diff = new - x
        worst_up = max(worst_up, float(diff.max()))
        x = new
        trace.append(float(x.max()))
        if float(np.abs(diff).max()) <= tol.abs_tol:
            hit_cap = False
            break
    if hit_cap:
        log.info("%s run hit the %d-iteration cap at eps=%g", matrix.kind, max_iter, eps)
    fp = CoupledState(x, state.first_index, state.kind)
    return SCRunResult(fp, it, fp.max() <= ZERO_THRESHOLD, trace, hit_cap, max(worst_up, 0.0))


def sc_run_basic(
    sys: ScalarSystem, L: int, w: int, eps: float, tol: Tolerances = DEFAULT_TOL, max_iter: int = SC_MAX_ITER
) -> SCRunResult:
    """Iterate the basic chain from all-ones until the sup-norm change is at most ``abs_tol``."""
    check_domain(eps=eps)
    A = CouplingMatrix("basic", L, w)
    return _run(lambda x: _update(sys, x, eps, A), sys, A, basic_initial_state(A), eps, tol, max_iter)


def sc_run_one_sided(
    sys: ScalarSystem, L: int, w: int, eps: float, tol: Tolerances = DEFAULT_TOL, max_iter: int = SC_MAX_ITER
) -> SCRunResult:
    check_domain(eps=eps)
    A = CouplingMatrix("one_sided", L, w)

    def step(x):
        new = _update(sys, x, eps, A)
        _enforce_one_sided(new, A)
        return new

    return _run(step, sys, A, one_sided_initial_state(A), eps, tol, max_iter)


def one_sided_extension(state: CoupledState, w: int, positions: np.ndarray) -> np.ndarray:
    """Values of a one-sided state at arbitrary positions >= its first index.

    Positions beyond i0 take the floating boundary value x_{i0}.
    """
    i0 = (w - 1) // 2
    pos = np.minimum(np.asarray(positions), i0)
    if np.any(pos < state.first_index):
        raise ValueError("position left of the one-sided chain")
    return state.values[pos - state.first_index]


# ---------------------------------------------------------------- potential


def coupled_potential(sys: ScalarSystem, state: CoupledState, eps: float, matrix: CouplingMatrix) -> float:
    """U(x; eps) = g(x).x - sum G(x_i) - sum_r F([A g(x)]_r; eps)."""
    _check_dims(state, matrix)
    x = state.values
    gx = sys.g(x)
    a = matrix.apply(gx)
    return float(np.dot(gx, x) - np.sum(sys.G(x)) - np.sum(sys.F(a, eps)))


def coupled_gradient(sys: ScalarSystem, state: CoupledState, eps: float, matrix: CouplingMatrix) -> np.ndarray:
    """Gradient g'(x_i) (x_i - [A^T f(A g(x); eps)]_i)."""
    _check_dims(state, matrix)
    x = state.values
    a = matrix.apply(sys.g(x))
    return sys.dg(x) * (x - matrix.apply_T(sys.f(a, eps)))


def coupled_hessian(sys: ScalarSystem, state: CoupledState, eps: float, matrix: CouplingMatrix) -> np.ndarray:
    """Dense Hessian of the coupled potential.

    diag(g'(x)) - (A diag g'(x))^T diag f'(A g(x)) (A diag g'(x))
    + diag(g''(x) (x - A^T f(A g(x)))).
    """
    _check_dims(state, matrix)
    x = state.values
    A = matrix.dense()
    dgx = np.asarray(sys.dg(x), dtype=float) * np.ones_like(x)
    a = A @ sys.g(x)
    B = A * dgx[None, :]
    fprime = np.asarray(sys.df_dx(a, eps), dtype=float) * np.ones_like(a)
    resid = x - A.T @ sys.f(a, eps)
    H = np.diag(dgx) - B.T @ (fprime[:, None] * B)
    H[np.diag_indices_from(H)] += np.asarray(sys.d2g(x), dtype=float) * resid
    return H


def coupled_hessian_norm(sys: ScalarSystem, state: CoupledState, eps: float, matrix: CouplingMatrix) -> float:
    """Induced infinity-norm (max absolute row sum) of the Hessian."""
    H = coupled_hessian(sys, state, eps, matrix)
    return float(np.abs(H).sum(axis=1).max())


# -------------------------------------------------------------------- shift


def shift(state: CoupledState) -> CoupledState:
    """Right shift by one position with a zero entering on the left."""
    v = np.empty_like(state.values)
    if v.size:
        v[0] = 0.0
        v[1:] = state.values[:-1]
    return CoupledState(v, state.first_index, state.kind)


def shift_norms(values: np.ndarray) -> tuple[float, float]:
    """(||Sx - x||_inf, ||Sx - x||_1) for a plain vector."""
    x = np.asarray(values, dtype=float)
    d = np.concatenate(([0.0], x[:-1])) - x
    return float(np.abs(d).max()), float(np.abs(d).sum())


def is_shift_structured(state: CoupledState, matrix: CouplingMatrix) -> bool:
    """First w entries zero and last 2w+1 entries equal to the value at i0."""
    if len(state) != matrix.cols or state.first_index != matrix.first_index:
        return False
    v = state.values
    w = matrix.w
    tail = v[-(2 * w + 1) :]
    return bool(np.all(v[:w] == 0.0) and np.all(tail == state.at(matrix.i0)))


def shift_energy_check(
    sys: ScalarSystem, state: CoupledState, eps: float, matrix: CouplingMatrix
) -> tuple[float, float]:
    """Both sides of U(Sx; eps) - U(x; eps) = -U(x_{i0}; eps)."""
    if matrix.kind != "one_sided" or not is_shift_structured(state, matrix):
        raise PreconditionError("shift identity precondition: need a one-sided state with w leading zeros and a flat tail of 2w+1 entries")
    delta = coupled_potential(sys, shift(state), eps, matrix) - coupled_potential(sys, state, eps, matrix)
    c = state.at(matrix.i0)
    gc = sys.g(c)
    single = float(c * gc - sys.G(c) - sys.F(gc, eps))
    return delta, -single


# -------------------------------------------------------------- experiment


def empirical_sc_threshold(
    sys: ScalarSystem,
    L: int,
    w: int,
    tol: Tolerances = DEFAULT_TOL,
    eps_tol: float = 1e-4,
    lo: float = 0.0,
    hi: float = 1.0,
    max_iter: int = SC_MAX_ITER,
    runs: list | None = None,
) -> float:
    """Bisect eps on whether the basic chain decodes to the zero vector.

    A run that hits the iteration cap counts as not decoded. Each run's
    (eps, result) pair is appended to ``runs`` when a list is given.
    """
    while hi - lo > eps_tol:
        mid = 0.5 * (lo + hi)
        res = sc_run_basic(sys, L, w, mid, tol, max_iter)
        if runs is not None:
            runs.append((mid, res))
        if res.converged_to_zero:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
