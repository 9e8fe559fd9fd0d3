#!/usr/bin/env python3
"""Regenerate the high-precision fixtures for the spectral density rho.

Standalone on purpose: everything here goes through mpmath at 50 digits,
with none of the package's own quadrature involved, so the fixtures are
an independent oracle for the fast double-precision implementation.

Run from the repository root:

    python3 scripts/gen_rho_fixtures.py
"""

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 50

OUT = Path(__file__).resolve().parent.parent / "src" / "hres" / "data" / "rho_fixtures.json"

# double precision targets; the oracle itself is far tighter
ERROR_BOUND = 1e-30


def rho_exact(n: int, mu) -> mp.mpf:
    mu = mp.mpf(mu)
    front = mp.pi ** (-(n + 1)) / (2 ** n * mp.factorial(n))

    def integrand(x):
        if x == 0:
            core = mp.mpf(1)
        else:
            core = (x / mp.sinh(x)) ** n
        return mp.e ** (-mu * x) * core

    # split at the scale where sinh turns exponential; quadosc-free since
    # the integrand is positive and decays like e^{-(n-|mu|)|x|}
    val = mp.quad(integrand, [-mp.inf, -1, 0, 1, mp.inf])
    return front * val


def main():
    cases = []
    for n in (1, 2, 3, 4):
        mus = [0.0, 0.3, -0.3, 0.7, n / 2.0, 0.9 * n - 0.05]
        for mu in mus:
            if abs(mu) >= n:
                continue
            v = rho_exact(n, mp.mpf(repr(mu)))
            cases.append({
                "n": n,
                "mu": mu,
                "value": float(v),
                "value_str": mp.nstr(v, 36),
                "error_bound": ERROR_BOUND,
            })
    payload = {
        "generator": "scripts/gen_rho_fixtures.py",
        "dps": mp.mp.dps,
        "definition": "pi^-(n+1)/(2^n n!) * integral over R of e^(-mu*x) (x/sinh x)^n dx",
        "cases": cases,
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(payload, indent=2) + "\n")
    print(f"wrote {len(cases)} cases to {OUT}")
    # spot checks with closed forms
    q = rho_exact(1, 0)
    print("rho(1,0) =", mp.nstr(q, 20), " (exact 1/4)")
    assert abs(q - mp.mpf(1) / 4) < mp.mpf(10) ** -40


if __name__ == "__main__":
    main()
