"""Heat-trace coefficients and their zeta, Weyl, and index dictionary.

Small-time heat traces of hypoelliptic operators expand in powers
t^{(j-Q)/m} plus optional t^k log t terms.  Everything spectral follows
from the coefficients by exact arithmetic: pole residues and regular
values of the zeta function, the leading Weyl eigenvalue growth, and the
supertrace index aggregate.  This module extracts coefficients from a
trace function by least squares on a geometric grid, applies the
dictionary, and offers an independent Mellin route to the top residue
for cross-checking.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from .errors import ConfigurationError, DomainError, NumericalError, PreconditionError

__all__ = [
    "HeatExpansion",
    "SingularityKind",
    "ZetaSingularity",
    "SpectrumSample",
    "heat_to_zeta",
    "zeta_res_to_ncres",
    "synthesize_trace",
    "fit_heat_samples",
    "extract_heat",
    "mellin_top_residue",
    "weyl_nu0",
    "weyl_fit",
    "index_value",
    "load_spectrum",
    "load_trace_samples",
    "heat_model",
    "HEAT_MODELS",
]


@dataclass
class HeatExpansion:
    """Integrated heat coefficients of an order-m operator, Q = d + 2.

    a_coeffs[j] multiplies t^{(j-Q)/m}; b_coeffs[k] (k >= 1) multiplies
    t^k log t.  A missing key means unknown, not zero, except that the
    differential flag certifies every odd a and every b as exactly zero.
    """

    m: int
    Q: int
    a_coeffs: dict[int, float]
    b_coeffs: dict[int, float] = field(default_factory=dict)
    dim_ker: int = 0
    differential: bool = False
    fit_residual: Optional[float] = None

    def __post_init__(self):
        if self.m < 1 or self.Q < 1:
            raise DomainError("need operator order m >= 1 and Q >= 1")
        if self.dim_ker < 0:
            raise DomainError("kernel dimension cannot be negative")
        for j in self.a_coeffs:
            if j < 0:
                raise DomainError(f"a-coefficient index {j} out of range")
        for k, v in self.b_coeffs.items():
            if k < 1:
                raise DomainError(f"log-coefficient index {k} out of range")
            if self.differential and v != 0.0:
                raise DomainError("differential operators have no log terms")
        if self.differential:
            for j, v in self.a_coeffs.items():
                if j % 2 == 1 and v != 0.0:
                    raise DomainError(
                        f"differential operators have a_{j} = 0, got {v}"
                    )

    def a(self, j: int) -> Optional[float]:
        if j in self.a_coeffs:
            return self.a_coeffs[j]
        if self.differential and j % 2 == 1:
            return 0.0
        return None

    def b(self, k: int) -> Optional[float]:
        if k in self.b_coeffs:
            return self.b_coeffs[k]
        if self.differential:
            return 0.0
        return None


class SingularityKind(Enum):
    SIMPLE_POLE = "SimplePole"
    REGULAR_VALUE = "RegularValue"


@dataclass(frozen=True)
class ZetaSingularity:
    """One point of the zeta function's singularity structure.

    amount is the residue for a pole and the value for a regular point;
    None records that the needed heat coefficient was not supplied.
    """

    location: Fraction
    kind: SingularityKind
    amount: Optional[float]

    @property
    def known(self) -> bool:
        return self.amount is not None


def heat_to_zeta(h: HeatExpansion, floor: float = 0.0) -> list[ZetaSingularity]:
    """Zeta singularity structure at every s = (Q-j)/m down to floor.

    Poles off the nonpositive integers carry residue a_j/Gamma(s); at
    s = -k the log coefficient b_k sources the pole and a_{Q+mk} the
    regular part, with the kernel dimension subtracted at s = 0 only.
    """
    out = []
    j = 0
    while True:
        sigma = Fraction(h.Q - j, h.m)
        if sigma < Fraction(floor).limit_denominator(10 ** 9):
            break
        if sigma > 0 or sigma.denominator != 1:
            aj = h.a(j)
            amount = None if aj is None else aj / math.gamma(float(sigma))
            out.append(ZetaSingularity(sigma, SingularityKind.SIMPLE_POLE, amount))
        else:
            k = -int(sigma)
            if k == 0:
                aq = h.a(h.Q)
                amount = None if aq is None else aq - h.dim_ker
                out.append(
                    ZetaSingularity(sigma, SingularityKind.REGULAR_VALUE, amount)
                )
            else:
                bk = h.b(k)
                if bk is None or bk != 0.0:
                    amount = None if bk is None else (-1.0) ** (k + 1) * math.factorial(k) * bk
                    out.append(
                        ZetaSingularity(sigma, SingularityKind.SIMPLE_POLE, amount)
                    )
                else:
                    aj = h.a(j)
                    amount = None if aj is None else (-1.0) ** k * math.factorial(k) * aj
                    out.append(
                        ZetaSingularity(sigma, SingularityKind.REGULAR_VALUE, amount)
                    )
        j += 1
    return out


def zeta_res_to_ncres(residue_at_sigma: float, m: int) -> float:
    """Invert Res zeta = m * Res P^{-sigma}."""
    if int(m) != m or m < 1:
        raise DomainError(f"operator order must be a positive integer, got {m}")
    return residue_at_sigma / m


def synthesize_trace(h: HeatExpansion) -> Callable[[np.ndarray], np.ndarray]:
    """Trace function built from the coefficients, for t in (0, 1)."""
    a_items = sorted(h.a_coeffs.items())
    b_items = sorted(h.b_coeffs.items())

    def trace(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for j, aj in a_items:
            out = out + aj * t ** ((j - h.Q) / h.m)
        if b_items:
            lt = np.log(t)
            for k, bk in b_items:
                out = out + bk * t ** k * lt
        return out

    return trace


def _design_matrix(ts: np.ndarray, m: int, Q: int, depth: int,
                   log_depth: int) -> tuple[np.ndarray, list[tuple[str, int]]]:
    cols, labels = [], []
    for j in range(depth + 1):
        cols.append(ts ** ((j - Q) / m))
        labels.append(("a", j))
    lt = np.log(ts)
    for k in range(1, log_depth + 1):
        cols.append(ts ** k * lt)
        labels.append(("b", k))
    return np.stack(cols, axis=-1), labels


def fit_heat_samples(ts: Sequence[float], values: Sequence[float], m: int, Q: int,
                     depth: int = 6, log_depth: int = 0,
                     dim_ker: int = 0) -> HeatExpansion:
    """Least-squares heat coefficients from tabulated (t, trace) samples.

    The rows are weighted by 1/|trace| so every decade of t counts
    equally; the trace spans many orders of magnitude on a geometric
    grid and an unweighted fit would spend all of its residual budget
    on the smallest times.
    """
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    if ts.ndim != 1 or ts.shape != values.shape:
        raise DomainError("need matching 1-d sample arrays")
    if np.any(ts <= 0.0) or np.any(ts[1:] <= ts[:-1]):
        raise DomainError("sample times must be positive and increasing")
    if not np.all(np.isfinite(values)):
        raise DomainError("trace samples must be finite")
    if depth > 6:
        raise DomainError("coefficient depth beyond 6 is not supported")
    A, labels = _design_matrix(ts, m, Q, depth, log_depth)
    if A.shape[0] < A.shape[1]:
        raise DomainError("fewer samples than coefficients")
    w = 1.0 / np.maximum(np.abs(values), 1e-300)
    Aw = A * w[:, None]
    yw = values * w
    scale = np.linalg.norm(Aw, axis=0)
    if np.any(scale == 0.0):
        raise NumericalError("degenerate design column")
    coef, _, rank, _ = np.linalg.lstsq(Aw / scale, yw, rcond=None)
    if rank < A.shape[1]:
        raise NumericalError("rank-deficient heat design matrix")
    coef = coef / scale
    resid = Aw @ coef - yw
    a_coeffs = {j: float(c) for (kind, j), c in zip(labels, coef) if kind == "a"}
    b_coeffs = {k: float(c) for (kind, k), c in zip(labels, coef) if kind == "b"}
    return HeatExpansion(
        m=m, Q=Q, a_coeffs=a_coeffs, b_coeffs=b_coeffs, dim_ker=dim_ker,
        fit_residual=float(np.sqrt(np.mean(resid ** 2))),
    )


def extract_heat(trace_fn: Callable[[float], float], m: int, Q: int,
                 depth: int = 6, t_min: float = 1e-3, t_max: float = 1e-1,
                 points_per_decade: int = 40, log_depth: int = 0,
                 dim_ker: int = 0) -> HeatExpansion:
    """Heat coefficients of a trace function on a geometric t-grid."""
    if not (0.0 < t_min < t_max):
        raise DomainError("need 0 < t_min < t_max")
    decades = math.log10(t_max / t_min)
    n = max(int(round(points_per_decade * decades)) + 1, depth + 2)
    ts = np.geomspace(t_min, t_max, n)
    values = np.array([float(trace_fn(t)) for t in ts])
    return fit_heat_samples(ts, values, m, Q, depth=depth, log_depth=log_depth,
                            dim_ker=dim_ker)


def mellin_top_residue(trace_fn: Callable[[float], float], m: int,
                       Q: int) -> float:
    """Residue of zeta at its top pole s = Q/m, straight from the trace.

    Independent of extract_heat: computes M(s) = int_0^1 t^{s-1} trace dt
    just right of the pole, where eps*M(Q/m + eps) extends analytically to
    eps = 0 with value a_0, then divides by Gamma(Q/m).  Substituting
    t = v^m makes the integrand's expansion polynomial in v so the
    endpoint weight v^{m*eps - 1} carries the entire singularity.
    """
    sigma0 = Q / m

    def g(v):
        # v = 0 would send t^(-Q/m) overflowing inside trace_fn; the
        # combination v^Q * trace(v^m) has a finite limit there
        v = max(v, 1e-9)
        return m * v ** Q * float(trace_fn(v ** m))

    eps_nodes = np.arange(1, 8) * 0.05
    F = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for eps in eps_nodes:
            val, err = integrate.quad(g, 0.0, 1.0, weight="alg",
                                      wvar=(m * eps - 1.0, 0.0),
                                      epsabs=1e-12, epsrel=1e-11, limit=200)
            F.append(eps * val)
    coef = np.polynomial.polynomial.polyfit(eps_nodes, np.array(F), 6)
    a0 = float(coef[0])
    return a0 / math.gamma(sigma0)


def weyl_nu0(res_critical: float, Q: int) -> float:
    """nu0 = Res P^{-Q/m} / Q, the eigenvalue counting constant."""
    if Q < 1:
        raise DomainError("Q must be a positive integer")
    return res_critical / Q


@dataclass(frozen=True)
class SpectrumSample:
    """Ascending positive eigenvalue list with the operator's m and Q."""

    eigenvalues: tuple[float, ...]
    m: int
    Q: int

    def __post_init__(self):
        ev = self.eigenvalues
        if any(x <= 0.0 for x in ev):
            raise DomainError("eigenvalues must be positive")
        if any(b < a for a, b in zip(ev, ev[1:])):
            raise DomainError("eigenvalues must be ascending")

    def __len__(self):
        return len(self.eigenvalues)


def weyl_fit(s: SpectrumSample) -> tuple[float, float]:
    """(nu0_hat, exponent_hat) from log-log regression on the top half.

    lambda_k ~ (k/nu0)^(m/Q) linearizes to log lambda = e*(log k - log nu0)
    with e the growth exponent; the bottom half is dropped since Weyl
    asymptotics only bind the tail.
    """
    n = len(s)
    if n < 100:
        raise PreconditionError(f"need at least 100 eigenvalues, got {n}")
    lam = np.asarray(s.eigenvalues, dtype=float)
    k = np.arange(1, n + 1, dtype=float)
    half = n // 2
    x = np.log(k[half:])
    y = np.log(lam[half:])
    exponent, intercept = np.polynomial.polynomial.polyfit(x, y, 1)[::-1]
    if exponent <= 0.0:
        raise NumericalError("eigenvalue growth exponent came out nonpositive")
    nu0 = math.exp(-intercept / exponent)
    return nu0, float(exponent)


def index_value(plus_density_integral: float,
                minus_density_integral: float) -> float:
    """Supertrace index aggregate; integrality is never asserted."""
    return plus_density_integral - minus_density_integral


def load_spectrum(path, m: int, Q: int) -> SpectrumSample:
    """Eigenvalues from a text file, one per line, # starts a comment."""
    vals = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            vals.append(float(line))
        except ValueError:
            raise ConfigurationError(f"bad eigenvalue line: {raw!r}") from None
    return SpectrumSample(tuple(vals), m, Q)


def load_trace_samples(path) -> tuple[np.ndarray, np.ndarray]:
    """(ts, values) from a CSV of t,value rows, ready for fit_heat_samples.

    # starts a comment; one header line is tolerated if its fields are
    not numeric.  Numeric validity of the grid is the fitter's contract,
    not the loader's.
    """
    ts, vals = [], []
    seen_data = False
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 2:
            raise ConfigurationError(f"expected two columns t,value: {raw!r}")
        try:
            t, v = float(fields[0]), float(fields[1])
        except ValueError:
            if not seen_data:
                seen_data = True
                continue
            raise ConfigurationError(f"bad trace row: {raw!r}") from None
        seen_data = True
        ts.append(t)
        vals.append(v)
    if not ts:
        raise ConfigurationError(f"no trace samples in {path}")
    return np.asarray(ts, dtype=float), np.asarray(vals, dtype=float)


def _s3_sublaplacian_trace(t):
    t = np.asarray(t, dtype=float)
    return np.exp(t) * np.pi ** 2 / (16.0 * t ** 2)


HEAT_MODELS: dict[str, Callable] = {
    "s3-sublaplacian": _s3_sublaplacian_trace,
}


def heat_model(name: str) -> Callable:
    try:
        return HEAT_MODELS[name]
    except KeyError:
        known = ", ".join(sorted(HEAT_MODELS))
        raise ConfigurationError(f"unknown heat model {name!r} (have: {known})") from None
