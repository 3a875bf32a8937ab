import numpy as np
import pytest

from saturation_lab.errors import DomainError
from saturation_lab.models import DegreeDistribution, GldpcParams, gldpc, ldpc_bec
from saturation_lab.numerics import Tolerances
from saturation_lab.single import fixed_points
from saturation_lab.system import ScalarSystem, check_admissible, iterate_to_fixed_point, recursion_step

FAST = Tolerances(grid_n=512)


@pytest.fixture(scope="module")
def s36():
    return ldpc_bec(DegreeDistribution.regular(3, 6))


def test_recursion_step_examples(s36):
    assert recursion_step(s36, 0.0, 0.5) == 0.0
    assert recursion_step(s36, 1.0, 1.0) == 1.0
    assert abs(recursion_step(s36, 0.5, 0.5) - 0.5 * (1 - 0.5**5) ** 2) <= 1e-15
    assert abs(recursion_step(s36, 0.5, 0.5) - 0.46923828125) <= 1e-12


@pytest.mark.parametrize("x,eps", [(-0.1, 0.5), (1.1, 0.5), (0.5, -1e-9), (0.5, 2.0)])
def test_recursion_step_domain(s36, x, eps):
    with pytest.raises(DomainError):
        recursion_step(s36, x, eps)


def test_iterate_examples(s36):
    x, _ = iterate_to_fixed_point(s36, 1.0, 0.40)
    assert abs(x) <= 1e-10
    x, _ = iterate_to_fixed_point(s36, 1.0, 0.45)
    largest = max(p.x for p in fixed_points(s36, 0.45).points)
    assert abs(x - largest) <= 1e-9
    assert iterate_to_fixed_point(s36, 0.0, 0.7) == (0.0, 1)


def test_admissible_builtin_systems(s36):
    assert check_admissible(s36).passed
    assert check_admissible(gldpc(GldpcParams(15, 3))).passed


def _poly_system(**over):
    base = dict(
        name="test",
        f=lambda x, e: e * np.asarray(x) ** 2,
        df_dx=lambda x, e: 2 * e * np.asarray(x),
        F=lambda x, e: e * np.asarray(x) ** 3 / 3,
        g=lambda x: np.asarray(x, dtype=float),
        dg=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        d2g=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        G=lambda x: np.asarray(x) ** 2 / 2,
    )
    base.update(over)
    return ScalarSystem(**base)


def test_admissible_detects_constant_g():
    sys = _poly_system(
        g=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        dg=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        G=lambda x: np.asarray(x, dtype=float),
    )
    names = check_admissible(sys, FAST).names()
    assert "g(0)=0" in names and "g'>0" in names


def test_admissible_detects_wrong_derivatives():
    sys = _poly_system(df_dx=lambda x, e: e * np.asarray(x), G=lambda x: np.asarray(x) ** 2)
    names = check_admissible(sys, FAST).names()
    assert "df/dx consistency" in names and "dG/dx=g" in names


def test_admissible_detects_non_monotone_f():
    sys = _poly_system(
        f=lambda x, e: e * np.asarray(x) * (1 - np.asarray(x)),
        df_dx=lambda x, e: e * (1 - 2 * np.asarray(x)),
        F=lambda x, e: e * (np.asarray(x) ** 2 / 2 - np.asarray(x) ** 3 / 3),
    )
    report = check_admissible(sys, FAST)
    assert "f increasing in x" in report.names()
    assert "fails" in str(report)


def test_admissible_report_text(s36):
    assert str(check_admissible(s36, FAST)) == "admissible"
