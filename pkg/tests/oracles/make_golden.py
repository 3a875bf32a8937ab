"""Independent reference values, written to tests/golden/*.json.

Nothing here imports the package. Binomial tails and their integrals come
from mpmath's incomplete beta function at 40 digits. Roots are located
by a sign scan followed by mpmath bisection, and the potential threshold
is solved as the 2x2 system {x = f(g(x)), U(x) = 0} with mpmath.findroot.

Run from the repository root:  python tests/oracles/make_golden.py
"""
from __future__ import annotations

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 40
OUT = Path(__file__).resolve().parent.parent / "golden"


def bisect(h, a, b, width=mp.mpf("1e-30")):
    ha = h(a)
    while b - a > width:
        m = (a + b) / 2
        hm = h(m)
        if (hm > 0) == (ha > 0):
            a, ha = m, hm
        else:
            b = m
    return (a + b) / 2


def sign_roots(h, lo, hi, n):
    xs = [lo + (hi - lo) * k / n for k in range(n + 1)]
    hs = [h(x) for x in xs]
    return [bisect(h, xs[k], xs[k + 1]) for k in range(n) if (hs[k] > 0) != (hs[k + 1] > 0) and hs[k] != 0]


# ----------------------------------------------------------------- GLDPC


def gldpc_funcs(n, t):
    m = n - 1

    def g(x):
        return mp.betainc(t, m - t + 1, 0, x, regularized=True)

    def G(x):
        # int_0^x sum_e C(m,e) z^e (1-z)^(m-e) dz, term by term
        return mp.fsum(mp.binomial(m, e) * mp.betainc(e + 1, m - e + 1, 0, x) for e in range(t, m + 1))

    return g, G


def gldpc_golden(n, t):
    g, G = gldpc_funcs(n, t)
    P = lambda x: -x * g(x) + 2 * G(x)
    roots = sign_roots(P, mp.mpf("1e-6"), mp.mpf(1), 2000)
    assert len(roots) == 1, (n, t, roots)
    xbar = roots[0]
    eps_bar = xbar / g(xbar)
    # potential threshold from the tangency system
    U = lambda x, e: x * g(x) - G(x) - e * g(x) ** 2 / 2
    h = lambda x, e: x - e * g(x)
    x0 = xbar
    xs, es = mp.findroot(lambda x, e: (h(x, e), U(x, e)), (x0, eps_bar))
    grid = [mp.mpf(k) / 400 for k in range(1, 401)]
    start = min(grid, key=lambda x: x / g(x))
    eps_s = mp.findroot(lambda x: mp.diff(lambda z: z / g(z), x), start)
    eps_s_val = eps_s / g(eps_s)
    return {
        "n": n,
        "t": t,
        "x_bar": float(xbar),
        "eps_bar": float(eps_bar),
        "eps_s_star": float(eps_s_val),
        "eps_star": float(es),
        "x_star": float(xs),
        "g_at": {str(x): float(g(mp.mpf(x))) for x in ("0.1", "0.2", "0.5", "0.9")},
        "G_at": {str(x): float(G(mp.mpf(x))) for x in ("0.1", "0.2", "0.5", "0.9")},
    }


# ------------------------------------------------------------- (3,6) LDPC


def ldpc36_golden(eps_gap=mp.mpf("0.45")):
    g = lambda x: 1 - (1 - x) ** 5
    G = lambda x: x - mp.mpf(1) / 6 + (1 - x) ** 6 / 6
    U = lambda x, e: x * g(x) - G(x) - e * g(x) ** 3 / 3
    h = lambda x, e: x - e * g(x) ** 2
    epsx = lambda x: x / g(x) ** 2
    xs_s = mp.findroot(lambda x: mp.diff(epsx, x), mp.mpf("0.26"))
    eps_s = epsx(xs_s)
    # potential threshold: stable fixed point with zero potential
    x_st, eps_star = mp.findroot(lambda x, e: (h(x, e), U(x, e)), (mp.mpf("0.43"), mp.mpf("0.488")))
    # energy gap at eps_gap: u = smallest positive root of h, gap = min of U over [u, 1]
    e = eps_gap
    roots = sign_roots(lambda x: h(x, e), mp.mpf("1e-6"), mp.mpf(1), 4000)
    u = roots[0]
    cands = [U(r, e) for r in roots] + [U(mp.mpf(1), e)]
    gap = min(cands)
    K = 75  # sup|g'| = 5, sup|g''| = 20, sup|d/dx eps x^2| = 2
    return {
        "eps_s_star": float(eps_s),
        "eps_star": float(eps_star),
        "x_at_eps_star": float(x_st),
        "gap_eps": float(e),
        "u": float(u),
        "gap": float(gap),
        "w_min": int(mp.floor(K / gap)) + 1,
    }


def main():
    OUT.mkdir(exist_ok=True)
    gl = [gldpc_golden(n, t) for n, t in ((7, 2), (15, 3), (31, 4))]
    (OUT / "gldpc.json").write_text(json.dumps(gl, indent=2) + "\n")
    (OUT / "ldpc36.json").write_text(json.dumps(ldpc36_golden(), indent=2) + "\n")


if __name__ == "__main__":
    main()
