#!/usr/bin/env python3
"""Reference values for the test suites, computed independently of the C++ code.

Writes tests/data/oracles.json. Needs mpmath, numpy and scipy. The C++ tests
only read the frozen JSON; rerun this after changing a reference case.
"""
import json
import pathlib

import mpmath as mp
import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize_scalar

mp.mp.dps = 40
OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data" / "oracles.json"


def f_comb(x, i, tau, alphas):
    v = mp.expm1(tau * x[i] / (tau + x[i]))
    for j, xj in enumerate(x):
        if j != i:
            v += mp.power(xj, alphas[j])
    return v


def pucci_plus_exact(m, lo, hi):
    ev = mp.eigsy(mp.matrix(m))[0]
    return sum(hi * e if e > 0 else lo * e for e in ev)


def pucci_cases():
    rng = np.random.default_rng(20240601)
    cases = []
    for dim, lo, hi in [(2, 1, 2), (3, 1, 2), (3, 0.5, 3), (3, 2, 3), (3, 1, 1)]:
        a = rng.uniform(-2, 2, (dim, dim))
        m = ((a + a.T) / 2).round(6)
        mp_m = [[mp.mpf(float(v)) for v in row] for row in m]
        plus = pucci_plus_exact(mp_m, lo, hi)
        minus = -pucci_plus_exact([[-v for v in row] for row in mp_m], lo, hi)
        cases.append({"lambda": lo, "Lambda": hi, "matrix": m.tolist(),
                      "plus": float(plus), "minus": float(minus)})
    return cases


def eigen_shooting(lo, hi, N, R):
    """mu_1^+ for -M+ on B_R by shooting on the radial ODE (phi decreasing)."""
    def rhs(r, y, mu):
        phi, dphi = y
        g = -mu * phi - lo * (N - 1) * dphi / r
        return [dphi, g / hi if g >= 0 else g / lo]

    def end_value(mu):
        r0 = 1e-6
        c = -mu / (N * lo)
        sol = solve_ivp(rhs, (r0, R), [1 + c * r0 * r0 / 2, c * r0], args=(mu,),
                        rtol=1e-12, atol=1e-14, method="DOP853")
        return sol.y[0, -1]

    lo_mu = 0.5
    while end_value(lo_mu + 0.5) > 0:
        lo_mu += 0.5
    return brentq(end_value, lo_mu, lo_mu + 0.5, xtol=1e-13)


def A_scan(lo, hi, N, R):
    nm = hi / lo * (N - 1) + 1
    npl = lo / hi * (N - 1) + 1
    g = lambda e: nm * R ** (npl - 1) / (e ** nm * (R - e))
    res = minimize_scalar(g, bounds=(1e-9, R - 1e-9), method="bounded", options={"xatol": 1e-13})
    return {"lambda": lo, "Lambda": hi, "N": N, "R": R, "eps_star": res.x, "A": res.fun}


def sqrt_fixed_point():
    """u'' + u'/r = -sqrt(u), u'(0) = 0, u(1) = 0 (n=1, lambda=Lambda=1, N=2, mu=1); shooting on u(0)."""
    def end_value(c):
        r0 = 1e-6
        sol = solve_ivp(lambda r, y: [y[1], -np.sqrt(max(y[0], 0.0)) - y[1] / r], (r0, 1.0),
                        [c - np.sqrt(c) * r0 * r0 / 4, -np.sqrt(c) * r0 / 2],
                        rtol=1e-12, atol=1e-15, method="DOP853")
        return sol.y[0, -1]

    return brentq(end_value, 1e-3, 1.0, xtol=1e-14)


def expression_cases():
    x = [mp.mpf("0.75"), mp.mpf("2.5"), mp.mpf("1.25")]
    u1, u2, u3 = x
    table = [
        ("u1 + u2 * u3", u1 + u2 * u3),
        ("(u1 + u2) * u3", (u1 + u2) * u3),
        ("u1 - u2 - u3", u1 - u2 - u3),
        ("u1 / u2 / u3", u1 / u2 / u3),
        ("-u1 * -u2", u1 * u2),
        ("--u3", u3),
        ("exp(u1) - 1 + pow(u2, 0.5)", mp.exp(u1) - 1 + mp.sqrt(u2)),
        ("exp(20 * u1 / (20 + u1)) - 1 + pow(u2, 0.5)", mp.exp(20 * u1 / (20 + u1)) - 1 + mp.sqrt(u2)),
        ("pow(u2, u1)", mp.power(u2, u1)),
        ("pow(pow(u3, 2), 0.25)", mp.power(u3 ** 2, mp.mpf("0.25"))),
        ("1e-3 * u1 + 2.5E2", mp.mpf("1e-3") * u1 + 250),
        ("u1 * (u2 - (u3 - 1)) / 4", u1 * (u2 - (u3 - 1)) / 4),
        ("exp(-u2)", mp.exp(-u2)),
        ("0.5", mp.mpf("0.5")),
        ("pow(u1 + u2 + u3, 1.5) - u1", mp.power(u1 + u2 + u3, mp.mpf("1.5")) - u1),
    ]
    return {"point": [float(v) for v in x],
            "cases": [{"text": t, "value": float(v)} for t, v in table]}


def main():
    tau, al = mp.mpf(20), [mp.mpf("0.5"), mp.mpf("0.5")]
    e1 = mp.mpf(1) / 4
    f11 = f_comb([mp.mpf(1), mp.mpf(1)], 0, tau, al)
    f2020 = f_comb([mp.mpf(20), mp.mpf(20)], 0, tau, al)
    A = mp.mpf("13.5")
    tau1 = f_comb([mp.mpf(1), mp.mpf(1)], 0, mp.mpf(1), al)
    tau1_b = f_comb([mp.mpf(20), mp.mpf(20)], 0, mp.mpf(1), al)
    j01 = mp.besseljzero(0, 1)

    out = {
        "pucci": pucci_cases(),
        "combustion": {
            "f1_20_20": float(f2020),
            "f1_1_1": float(f11),
            "f1_at_0.3_2": float(f_comb([mp.mpf("0.3"), mp.mpf(2)], 0, tau, al)),
            "f2_at_0.3_2": float(f_comb([mp.mpf("0.3"), mp.mpf(2)], 1, tau, al)),
        },
        "thresholds": {
            "mu_star": float(1 / (e1 * f11)),
            "mu_lower_proof": float(A * 20 / f2020),
            "mu_lower_A": float(A * 20 / f2020),
            "tau1_mu_star": float(1 / (e1 * tau1)),
            "tau1_mu_lower_proof": float(A * 20 / tau1_b),
        },
        "j01_squared": float(j01 ** 2),
        "eigen_1_2_N2": eigen_shooting(1.0, 2.0, 2, 1.0),
        "eigen_1_1_N2": eigen_shooting(1.0, 1.0, 2, 1.0),
        "A": [A_scan(1, 1, 2, 1.0), A_scan(1, 2, 2, 1.0), A_scan(1, 1, 2, 2.0), A_scan(2, 3, 3, 1.0)],
        "sqrt_fixed_point_center": sqrt_fixed_point(),
        "m_mu_sqrt_mu_0.1": float((mp.mpf("0.1") / j01 ** 2) ** 2),
        "expressions": expression_cases(),
    }
    OUT.write_text(json.dumps(out, indent=2) + "\n")
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
