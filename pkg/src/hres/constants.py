"""Universal spectral constants from the one-dimensional density rho.

rho(n, mu) integrates e^(-mu*x) (x/sinh x)^n over the line, normalized by
pi^-(n+1)/(2^n n!); it exists exactly for |mu| < n.  Every other constant
here is a finite binomial combination of rho values: the gamma family for
contact Laplacians, the alpha and beta families for the CR pair, the beta_n
special value, and the length-element constant c_n built from it.  A
high-precision fixtures file generated by scripts/gen_rho_fixtures.py
pins the quadrature down independently.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from scipy import integrate

from .errors import DomainError, NumericalError, PreconditionError

__all__ = [
    "rho",
    "RhoTable",
    "gamma_nk",
    "alpha_nkpq",
    "beta_nkpq",
    "beta_n",
    "length_element_constant",
    "normalization_ratio",
    "load_rho_fixtures",
    "verify_rho_fixtures",
]


def _integrand(x: float, n: int, mu: float) -> float:
    # e^(-mu x) (x/sinh x)^n, assembled in log form on the tails where
    # sinh overflows; near 0 the removable singularity is expanded
    ax = abs(x)
    if ax < 1e-4:
        x2 = x * x
        base = 1.0 - x2 / 6.0 + 7.0 * x2 * x2 / 360.0
        return math.exp(-mu * x) * base ** n
    expo = -mu * x + n * (
        math.log(2.0 * ax) - ax - math.log1p(-math.exp(-2.0 * ax))
    )
    if expo < -745.0:
        return 0.0
    return math.exp(expo)


def _tail_cutoff(n: int, rate: float) -> float:
    # smallest X with exponent -rate*X + n*log(2X) below -45 (tail < 1e-19)
    x = 45.0 / rate
    for _ in range(3):
        x = (45.0 + n * math.log(2.0 * x)) / rate
    return x


@lru_cache(maxsize=4096)
def _rho_cached(n: int, mu: float) -> float:
    front = math.pi ** (-(n + 1)) / (2 ** n * math.factorial(n))

    def f(x):
        return _integrand(x, n, mu)

    # decay rates differ per side; the side fighting the e^{-mu x} factor
    # is the slow one and sets how far the truncated interval must reach
    x_right = _tail_cutoff(n, n + mu)
    x_left = _tail_cutoff(n, n - mu)
    total = 0.0
    err = 0.0
    for a, b in ((-x_left, -1.0), (-1.0, 1.0), (1.0, x_right)):
        v, e = integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-12, limit=400)
        total += v
        err += e
    if err * front > 1e-10:
        raise NumericalError(
            f"rho({n}, {mu}) quadrature error {err * front:.2e} exceeds the budget"
        )
    return front * total


def rho(n: int, mu: float) -> float:
    """Spectral density value; diverges (and errors) for |mu| >= n."""
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    mu = float(mu)
    if not abs(mu) < n:
        raise DomainError(f"rho({n}, {mu}) diverges: need |mu| < {n}")
    return _rho_cached(int(n), mu)


@dataclass
class RhoTable:
    """Per-n memo of rho evaluations, safe for concurrent readers."""

    n: int
    cache: dict[float, float] = field(default_factory=dict)

    def value(self, mu: float) -> float:
        mu = float(mu)
        hit = self.cache.get(mu)
        if hit is None:
            hit = rho(self.n, mu)
            self.cache[mu] = hit
        return hit


def _binom(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def _rho_term(n: int, arg: int, label: str) -> float:
    if not abs(arg) < n:
        raise DomainError(
            f"{label} needs rho({n}, {arg}), outside the domain |mu| < {n}"
        )
    return rho(n, arg)


def gamma_nk(n: int, k: int) -> float:
    """Contact-Laplacian constant: sum over p+q=k of 2^n C(n,p)C(n,q)rho(p-q)."""
    if n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    if not 0 <= k <= 2 * n:
        raise DomainError(f"need 0 <= k <= {2 * n}, got k={k}")
    if k == n:
        raise PreconditionError(
            "k = n makes the principal symbol non-invertible; the constant "
            "is undefined there"
        )
    total = 0.0
    for p in range(max(0, k - n), min(k, n) + 1):
        q = k - p
        c = 2 ** n * _binom(n, p) * _binom(n, q)
        if c == 0:
            continue
        total += c * _rho_term(n, p - q, f"gamma term (p={p}, q={q})")
    return total


def alpha_nkpq(n: int, kappa: int, p: int, q: int) -> float:
    """CR scalar-Laplacian constant for the (p, q)-form bidegree."""
    if n < 1 or not 0 <= kappa <= n:
        raise DomainError(f"need 1 <= n and 0 <= kappa <= n, got n={n}, kappa={kappa}")
    if not (0 <= p <= n and 0 <= q <= n):
        raise DomainError(f"need 0 <= p, q <= {n}, got p={p}, q={q}")
    if q == kappa or q == n - kappa:
        raise PreconditionError(
            f"q = {q} hits the non-invertible bidegrees {{kappa, n-kappa}} = "
            f"{{{kappa}, {n - kappa}}}"
        )
    total = 0.0
    for k in range(max(0, q - kappa), min(q, n - kappa) + 1):
        c = 0.5 * _binom(n, p) * _binom(n - kappa, k) * _binom(kappa, q - k)
        if c == 0.0:
            continue
        arg = n - 2 * (kappa - q + 2 * k)
        total += c * _rho_term(n, arg, f"alpha term (k={k})")
    return total


def beta_nkpq(n: int, kappa: int, p: int, q: int) -> float:
    """CR Kohn-Laplacian constant for the (p, q)-form bidegree."""
    if n < 1 or not 0 <= kappa <= n:
        raise DomainError(f"need 1 <= n and 0 <= kappa <= n, got n={n}, kappa={kappa}")
    if not (0 <= p <= n and 0 <= q <= n):
        raise DomainError(f"need 0 <= p, q <= {n}, got p={p}, q={q}")
    if (p, q) in {(kappa, n - kappa), (n - kappa, kappa)}:
        raise PreconditionError(
            f"(p, q) = ({p}, {q}) hits the non-invertible bidegrees for "
            f"kappa = {kappa}"
        )
    total = 0.0
    for el in range(max(0, p - kappa), min(p, n - kappa) + 1):
        cl = _binom(n - kappa, el) * _binom(kappa, p - el)
        if cl == 0:
            continue
        for k in range(max(0, q - kappa), min(q, n - kappa) + 1):
            ck = _binom(n - kappa, k) * _binom(kappa, q - k)
            if ck == 0:
                continue
            arg = 2 * (q - p) + 4 * (el - k)
            total += 2 ** n * cl * ck * _rho_term(
                n, arg, f"beta term (l={el}, k={k})"
            )
    return total


def beta_n(n: int) -> float:
    """The function-bidegree special value beta(n, 0, 0, 0) = 2^n rho(0)."""
    return beta_nkpq(n, 0, 0, 0)


def length_element_constant(n: int) -> float:
    """c_n = ((2n+2)/beta_n)^(1/(2n+2)), the length-element normalization."""
    if n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    return ((2 * n + 2) / beta_n(n)) ** (1.0 / (2 * n + 2))


def normalization_ratio(n: int, gamma0_heat: float) -> float:
    """Cross-check ratio c_n^(2n+2) * gamma0_heat / (4(n+1)).

    Reported, never asserted equal to 1: the two normalizations it
    compares disagree by a convention factor (1/16 at n = 1) that the
    source material leaves unresolved, and all downstream values anchor
    to the heat-trace side.
    """
    cn = length_element_constant(n)
    return cn ** (2 * n + 2) * gamma0_heat / (4.0 * (n + 1))


def load_rho_fixtures() -> dict:
    """Parsed fixtures payload from the packaged data file."""
    path = resources.files("hres").joinpath("data/rho_fixtures.json")
    return json.loads(path.read_text())


def verify_rho_fixtures(abs_tol: float = 1e-10) -> list[dict]:
    """Compare rho against every fixture case; returns one record each."""
    out = []
    for case in load_rho_fixtures()["cases"]:
        got = rho(case["n"], case["mu"])
        tol = abs_tol + case["error_bound"] + 1e-12 * abs(case["value"])
        out.append({
            "n": case["n"],
            "mu": case["mu"],
            "expected": case["value"],
            "got": got,
            "abs_err": abs(got - case["value"]),
            "tol": tol,
            "ok": abs(got - case["value"]) <= tol,
        })
    return out
