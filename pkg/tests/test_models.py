
import mpmath as mp
import numpy as np
import pytest
import scipy.integrate
import scipy.stats

from saturation_lab.errors import AdmissibilityError
from saturation_lab.models import (
    DegreeDistribution,
    GldpcParams,
    IsiChannel,
    gldpc,
    gldpc_root,
    gldpc_threshold,
    gldpc_trial_entropy,
    isi_erasure,
    ldpc_bec,
    ldpc_trial_entropy,
    linear_channel,
    maxwell_threshold,
    memoryless_channel,
)
from saturation_lab.numerics import Tolerances
from saturation_lab.single import potential, potential_threshold, single_threshold
from saturation_lab.system import check_admissible
from saturation_lab.verify import GLDPC_UNIQUENESS, p_sign_changes

DD36 = DegreeDistribution.regular(3, 6)


def test_degree_distribution_validation():
    with pytest.raises(ValueError):
        DegreeDistribution((0.0, 0.5), (0.0, 1.0))
    with pytest.raises(ValueError):
        DegreeDistribution((0.0, 1.5, -0.5), (0.0, 1.0))
    assert DD36.Lprime1 == pytest.approx(3.0, abs=1e-15)
    assert DD36.label() == "(3,6)"


def test_ldpc_examples():
    s = ldpc_bec(DD36)
    assert float(s.g(0.5)) == 0.96875
    lin = ldpc_bec(DegreeDistribution((0.0, 1.0), (0.0, 1.0)))
    xs = np.linspace(0, 1, 11)
    assert np.allclose(lin.g(xs), xs, atol=1e-15)
    assert np.allclose(lin.f(xs, 0.3), 0.3 * xs, atol=1e-15)
    with pytest.raises(AdmissibilityError, match="not admissible"):
        ldpc_bec(DegreeDistribution((0.5, 0.5), (0.0, 1.0)))


def test_ldpc_sups_36():
    s = ldpc_bec(DD36)
    assert (s.sup_dg, s.sup_d2g, s.sup_df) == (5.0, 20.0, 2.0)


def test_trial_entropy_zero_and_maxwell_point():
    assert ldpc_trial_entropy(DD36, 0.0) == 0.0
    eps_max = maxwell_threshold(DD36)
    xs = np.linspace(0.3, 0.6, 30001)
    e = xs / (1 - (1 - xs) ** 5) ** 2
    x_max = xs[np.argmin(np.abs(e - eps_max) + (xs < 0.35))]
    assert abs(ldpc_trial_entropy(DD36, float(x_max))) <= 1e-4


def test_trial_entropy_against_quadrature():
    # P(x) = int_0^x L(g(z)) eps'(z) dz with L(y) = y^3, eps(z) = z / g(z)^2
    g = lambda z: 1 - (1 - z) ** 5
    dg = lambda z: 5 * (1 - z) ** 4
    deps = lambda z: (g(z) - 2 * z * dg(z)) / g(z) ** 3
    ref, _ = scipy.integrate.quad(lambda z: g(z) ** 3 * deps(z), 1e-12, 0.6, epsabs=1e-14, epsrel=1e-13, limit=200)
    assert abs(ldpc_trial_entropy(DD36, 0.6) - ref) <= 1e-8


def test_maxwell_examples():
    assert abs(maxwell_threshold(DD36) - 0.4881) <= 5e-4
    assert abs(maxwell_threshold(DegreeDistribution((0.0, 1.0), (0.0, 1.0))) - 1.0) <= 1e-9
    dd48 = DegreeDistribution.regular(4, 8)
    assert abs(maxwell_threshold(dd48) - potential_threshold(ldpc_bec(dd48))) <= 1e-5


@pytest.mark.parametrize("dv,dc", [(3, 5), (3, 6), (4, 8)])
def test_maxwell_equals_potential_threshold(dv, dc):
    dd = DegreeDistribution.regular(dv, dc)
    assert abs(maxwell_threshold(dd) - potential_threshold(ldpc_bec(dd))) <= 1e-5


def test_gldpc_params_validation():
    GldpcParams(7, 3)
    for n, t in ((7, 4), (7, 1), (4, 2)):
        with pytest.raises(ValueError):
            GldpcParams(n, t)


def test_gldpc_examples(golden):
    s = gldpc(GldpcParams(15, 3))
    assert float(s.g(0.0)) == 0.0 and float(s.g(1.0)) == 1.0
    ref = scipy.stats.binom.sf(2, 14, 0.2)
    assert abs(float(s.g(0.2)) - ref) <= 1e-14
    assert float(s.f(0.3, 0.5)) == 0.15
    for entry in golden["gldpc"]:
        sysm = gldpc(GldpcParams(entry["n"], entry["t"]))
        for x, v in entry["g_at"].items():
            assert abs(float(sysm.g(float(x))) - v) <= 1e-13
        for x, v in entry["G_at"].items():
            assert abs(float(sysm.G(float(x))) - v) <= 1e-13


@pytest.mark.parametrize("n,t", [(15, 3), (31, 4), (63, 5)])
def test_gldpc_g_high_precision(n, t):
    mp.mp.dps = 30
    rng = np.random.default_rng(n)
    s = gldpc(GldpcParams(n, t))
    xs = rng.uniform(0, 1, 1000)
    ref = np.array([float(mp.betainc(t, n - t, 0, x, regularized=True)) for x in xs])
    assert np.max(np.abs(s.g(xs) - ref)) <= 1e-12


def test_gldpc_trial_entropy_shape():
    p = GldpcParams(15, 3)
    assert gldpc_trial_entropy(p, 0.0) == 0.0
    xs = np.linspace(1e-4, 0.05, 200)
    assert np.all(gldpc_trial_entropy(p, xs) < 0)


@pytest.mark.parametrize("n,t", GLDPC_UNIQUENESS)
def test_gldpc_root_unique(n, t):
    assert p_sign_changes(GldpcParams(n, t)) == 1


def test_gldpc_threshold(golden):
    for entry in golden["gldpc"]:
        p = GldpcParams(entry["n"], entry["t"])
        assert abs(gldpc_root(p) - entry["x_bar"]) <= 1e-9
        assert abs(gldpc_threshold(p) - entry["eps_bar"]) <= 1e-9
        assert abs(single_threshold(gldpc(p)) - entry["eps_s_star"]) <= 1e-9
    assert abs(gldpc_threshold(GldpcParams(15, 3)) - potential_threshold(gldpc(GldpcParams(15, 3)))) <= 1e-5
    assert 0 < gldpc_threshold(GldpcParams(7, 2)) < 1


ALL_SYSTEMS = [
    ("ldpc(3,5)", lambda: ldpc_bec(DegreeDistribution.regular(3, 5))),
    ("ldpc(3,6)", lambda: ldpc_bec(DD36)),
    ("ldpc(4,8)", lambda: ldpc_bec(DegreeDistribution.regular(4, 8))),
    ("ldpc irregular", lambda: ldpc_bec(DegreeDistribution((0, 0.4, 0.6), (0, 0, 0, 0, 0.5, 0.5)))),
    ("isi memoryless", lambda: isi_erasure(DD36, memoryless_channel())),
    ("isi linear", lambda: isi_erasure(DD36, linear_channel())),
] + [(f"gldpc{nt}", (lambda nt=nt: gldpc(GldpcParams(*nt)))) for nt in GLDPC_UNIQUENESS]


@pytest.mark.parametrize("name,make", ALL_SYSTEMS, ids=[n for n, _ in ALL_SYSTEMS])
def test_constructed_systems_admissible(name, make):
    report = check_admissible(make())
    assert report.passed, str(report)


def test_isi_memoryless_reduction():
    a = ldpc_bec(DD36)
    b = isi_erasure(DD36, memoryless_channel())
    xs = np.linspace(0, 1, 101)
    for e in np.linspace(0, 1, 11):
        assert np.max(np.abs(potential(a, xs, e) - potential(b, xs, e))) <= 1e-12
    assert abs(single_threshold(a) - single_threshold(b)) <= 1e-8
    assert abs(potential_threshold(a) - potential_threshold(b)) <= 1e-8


def test_isi_memoryless_cross_form():
    # U = (1/L'(1)) [(eps(x) - eps) L(g(x)) - P(x)] for psi = eps
    b = isi_erasure(DD36, memoryless_channel())
    for x in np.linspace(0.05, 1.0, 20):
        gx = 1 - (1 - x) ** 5
        ex = x / gx**2
        for e in (0.2, 0.45, 0.7):
            alt = ((ex - e) * gx**3 - ldpc_trial_entropy(DD36, x)) / 3.0
            assert abs(potential(b, x, e) - alt) <= 1e-12


def test_isi_linear_form():
    b = isi_erasure(DD36, linear_channel())
    xs = np.linspace(0, 1, 21)
    assert np.allclose(b.f(xs, 0.7), 0.7 * xs**3 * xs**2, atol=1e-15)


def test_isi_quadrature_fallback():
    quad = IsiChannel("square", psi=lambda t, e: e * np.asarray(t, dtype=float) ** 2)
    exact = IsiChannel(
        "square",
        psi=lambda t, e: e * np.asarray(t, dtype=float) ** 2,
        Psi=lambda t, e: e * np.asarray(t, dtype=float) ** 3 / 3,
        dpsi_dt=lambda t, e: 2 * e * np.asarray(t, dtype=float),
    )
    a = isi_erasure(DD36, quad, Tolerances(grid_n=256))
    b = isi_erasure(DD36, exact)
    xs = np.linspace(0.05, 0.95, 9)
    assert np.max(np.abs(a.F(xs, 0.6) - b.F(xs, 0.6))) <= 1e-12
    assert np.max(np.abs(a.df_dx(xs, 0.6) - b.df_dx(xs, 0.6))) <= 1e-8


def test_isi_rejects_bad_channel():
    bad = IsiChannel("bad", psi=lambda t, e: 1 - e * np.asarray(t, dtype=float))
    with pytest.raises(AdmissibilityError):
        isi_erasure(DD36, bad)
