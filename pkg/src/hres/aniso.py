"""Anisotropic dilation geometry on R^(d+1).

Coordinates split as xi = (xi_0, xi_1, ..., xi_d).  The dilations weight the
first coordinate twice as much as the rest,

    t.xi = (t^2 xi_0, t xi_1, ..., t xi_d),

so the pseudo-norm |xi| = (xi_0^2 + sum_j xi_j^4)^(1/4) is 1-homogeneous and
the homogeneous dimension is Q = d + 2.  The surface measure on the unit
pseudo-sphere is the contraction iota_E dxi of the volume form with the
scaling field E = 2 xi_0 d_0 + sum_j xi_j d_j; its defining property is the
shell identity

    int_{|xi|=1} g iota_E dxi = int_{1<=|xi|<=e} g(|xi|^-1 . xi) |xi|^-Q dxi.

Two independent evaluators are provided: a chart rule transported from the
Euclidean sphere (fast, the default) and a literal Cartesian quadrature of
the shell identity (slow, kept as the cross-check oracle).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad

from .errors import DomainError, NumericalError, PreconditionError

__all__ = [
    "GradedSpace",
    "WeightedMultiIndex",
    "SpherePoint",
    "QuadResult",
    "dilate",
    "pseudo_norm",
    "normalize",
    "scaling_field",
    "sphere_integral",
    "polar_integral",
    "weighted_indices",
]


# --------------------------------------------------------------------------
# domain types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GradedSpace:
    """R^(d+1) with dilation weights (2, 1, ..., 1) and Q = d + 2."""

    d: int

    def __post_init__(self):
        if not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise DomainError(f"need d >= 1, got d={self.d!r}")

    @property
    def weights(self) -> tuple[int, ...]:
        return (2,) + (1,) * self.d

    @property
    def q(self) -> int:
        """Homogeneous dimension."""
        return self.d + 2

    @property
    def ncoords(self) -> int:
        return self.d + 1

    @classmethod
    def heisenberg(cls, n: int) -> "GradedSpace":
        """The space underlying a (2n+1)-dimensional Heisenberg-type manifold."""
        if n < 1:
            raise DomainError(f"need n >= 1, got {n}")
        return cls(d=2 * n)


@dataclass(frozen=True)
class WeightedMultiIndex:
    """Multi-index alpha with weighted order <alpha> = 2 alpha_0 + sum_j alpha_j."""

    alpha: tuple[int, ...]
    bracket: int = field(default=-1)

    def __post_init__(self):
        alpha = tuple(int(a) for a in self.alpha)
        if any(a < 0 for a in alpha):
            raise DomainError(f"negative entry in multi-index {alpha}")
        object.__setattr__(self, "alpha", alpha)
        computed = 2 * alpha[0] + sum(alpha[1:])
        if self.bracket >= 0 and self.bracket != computed:
            raise DomainError(
                f"stored bracket {self.bracket} != recomputed {computed} for {alpha}"
            )
        object.__setattr__(self, "bracket", computed)

    @property
    def order(self) -> int:
        """Unweighted order |alpha|."""
        return sum(self.alpha)

    def factorial(self) -> float:
        out = 1.0
        for a in self.alpha:
            out *= math.factorial(a)
        return out

    def monomial(self, xi: np.ndarray) -> np.ndarray:
        """xi^alpha, batched over the leading axes of xi."""
        xi = np.asarray(xi, dtype=float)
        out = np.ones(xi.shape[:-1])
        for i, a in enumerate(self.alpha):
            if a:
                out = out * xi[..., i] ** a
        return out


def weighted_indices(ncoords: int, max_bracket: int) -> list[WeightedMultiIndex]:
    """All multi-indices on `ncoords` coordinates with <alpha> <= max_bracket."""
    out: list[WeightedMultiIndex] = []

    def rec(prefix: tuple[int, ...], budget: int, pos: int):
        if pos == ncoords:
            out.append(WeightedMultiIndex(prefix))
            return
        w = 2 if pos == 0 else 1
        for a in range(budget // w + 1):
            rec(prefix + (a,), budget - w * a, pos + 1)

    if max_bracket >= 0:
        rec((), max_bracket, 0)
    out.sort(key=lambda mi: (mi.bracket, mi.alpha))
    return out


@dataclass(frozen=True)
class SpherePoint:
    """A point certified to lie on the unit pseudo-sphere."""

    xi: tuple[float, ...]

    def __post_init__(self):
        space = GradedSpace(len(self.xi) - 1)
        r = pseudo_norm(space, np.asarray(self.xi, dtype=float))
        if abs(r - 1.0) > 1e-12:
            raise DomainError(f"|xi| = {r!r} is not 1 within 1e-12")

    def __array__(self, dtype=None):
        return np.asarray(self.xi, dtype=dtype or float)

    @classmethod
    def from_ray(cls, space: GradedSpace, xi: Sequence[float]) -> "SpherePoint":
        xi = np.asarray(xi, dtype=float)
        r = pseudo_norm(space, xi)
        if r == 0.0:
            raise DomainError("cannot project the origin to the sphere")
        return cls(tuple(dilate(space, 1.0 / r, xi)))


@dataclass(frozen=True)
class QuadResult:
    """A numerical value together with its error estimate."""

    value: complex
    error: float
    info: str = ""

    def __float__(self) -> float:
        v = complex(self.value)
        if abs(v.imag) > 1e-9 * (1.0 + abs(v.real)):
            raise ValueError(f"value {v} has a non-negligible imaginary part")
        return v.real

    def __complex__(self) -> complex:
        return complex(self.value)


# --------------------------------------------------------------------------
# dilations and the pseudo-norm
# --------------------------------------------------------------------------

def dilate(space: GradedSpace, t: float, xi: np.ndarray) -> np.ndarray:
    """Apply the anisotropic dilation t.xi = (t^2 xi_0, t xi_1, ...)."""
    t = float(t)
    if not t > 0.0:
        raise DomainError(f"dilation parameter must be positive, got {t}")
    xi = np.asarray(xi, dtype=None)
    if xi.shape[-1] != space.ncoords:
        raise DomainError(f"expected {space.ncoords} coordinates, got shape {xi.shape}")
    out = xi * t
    out[..., 0] *= t
    return out


def pseudo_norm(space: GradedSpace, xi: np.ndarray) -> np.ndarray | float:
    """Koranyi-type pseudo-norm (xi_0^2 + sum xi_j^4)^(1/4), batched.

    Rescales by the largest entry first so that large inputs do not
    overflow in the fourth powers.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != space.ncoords:
        raise DomainError(f"expected {space.ncoords} coordinates, got shape {xi.shape}")
    scale = np.maximum(np.sqrt(np.abs(xi[..., 0])), np.max(np.abs(xi[..., 1:]), axis=-1))
    safe = np.where(scale > 0.0, scale, 1.0)
    # divide twice: safe**2 itself can overflow when safe is near 1e200
    s0 = xi[..., 0] / safe / safe
    srest = xi[..., 1:] / safe[..., None]
    r = safe * (s0**2 + np.sum(srest**4, axis=-1)) ** 0.25
    r = np.where(scale > 0.0, r, 0.0)
    return float(r) if r.ndim == 0 else r


def normalize(space: GradedSpace, xi: np.ndarray) -> np.ndarray:
    """Project onto the unit pseudo-sphere along the dilation orbit."""
    xi = np.asarray(xi, dtype=float)
    r = np.asarray(pseudo_norm(space, xi))
    if np.any(r == 0.0):
        raise DomainError("cannot normalize the origin")
    out = xi / r[..., None]
    out[..., 0] /= r
    return out


def scaling_field(space: GradedSpace, xi: np.ndarray) -> np.ndarray:
    """The anisotropic Euler field E(xi) = (2 xi_0, xi_1, ..., xi_d)."""
    xi = np.asarray(xi, dtype=float)
    out = xi.copy()
    out[..., 0] *= 2.0
    return out


def _call_batch(g: Callable, pts: np.ndarray) -> np.ndarray:
    """Evaluate a user callback on an (N, d+1) block, falling back to a loop."""
    try:
        out = np.asarray(g(pts))
        if out.shape == pts.shape[:1]:
            return out
    except Exception:
        pass
    return np.asarray([g(p) for p in pts])


# --------------------------------------------------------------------------
# chart quadrature rule on the pseudo-sphere
# --------------------------------------------------------------------------

def _euclid_angles(d: int, level: int) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Per-axis nodes/weights for hyperspherical angles on S^d."""
    nodes, wts = [], []
    n_polar = 8 * 2**level
    n_azim = 16 * 2**level
    for _ in range(d - 1):
        x, w = leggauss(n_polar)
        nodes.append(0.5 * math.pi * (x + 1.0))
        wts.append(0.5 * math.pi * w)
    # the azimuthal axis is periodic; a uniform rule is spectrally accurate
    nodes.append(np.arange(n_azim) * (2.0 * math.pi / n_azim))
    wts.append(np.full(n_azim, 2.0 * math.pi / n_azim))
    return nodes, wts


def _euclid_embed(thetas: np.ndarray) -> np.ndarray:
    """Hyperspherical angles (N, d) -> points on the Euclidean S^d (N, d+1)."""
    n, d = thetas.shape
    u = np.empty((n, d + 1))
    sin_prod = np.ones(n)
    for i in range(d):
        u[:, i] = sin_prod * np.cos(thetas[:, i])
        sin_prod = sin_prod * np.sin(thetas[:, i])
    u[:, d] = sin_prod
    return u


@lru_cache(maxsize=32)
def _sphere_rule(d: int, level: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for int_{|xi|=1} g iota_E dxi on the pseudo-sphere.

    The Euclidean sphere S^d is pushed to the pseudo-sphere along dilation
    orbits, omega(u) = |u|^-1 . u; the measure density is the determinant
    det[E(omega), d omega / d theta] with the Jacobian taken by central
    differences (the map has no convenient closed-form derivative).
    """
    space = GradedSpace(d)
    axes, axw = _euclid_angles(d, level)
    grids = np.meshgrid(*axes, indexing="ij")
    thetas = np.stack([g.ravel() for g in grids], axis=-1)
    wgrids = np.meshgrid(*axw, indexing="ij")
    angle_w = np.ones(thetas.shape[0])
    for w in wgrids:
        angle_w *= w.ravel()

    def chart(th):
        return normalize(space, _euclid_embed(th))

    pts = chart(thetas)
    h = 6.0e-6
    cols = []
    for i in range(d):
        up = thetas.copy()
        up[:, i] += h
        dn = thetas.copy()
        dn[:, i] -= h
        cols.append((chart(up) - chart(dn)) / (2.0 * h))
    mat = np.empty((thetas.shape[0], d + 1, d + 1))
    mat[:, :, 0] = scaling_field(space, pts)
    for i, c in enumerate(cols):
        mat[:, :, i + 1] = c
    dens = np.linalg.det(mat)
    if dens.sum() < 0.0:
        dens = -dens
    if np.any(dens < -1e-10 * np.max(np.abs(dens))):
        raise NumericalError("sphere chart produced an orientation flip")
    w = np.clip(dens, 0.0, None) * angle_w
    return pts, w


def sphere_integral(
    space: GradedSpace,
    g: Callable,
    *,
    method: str = "chart",
    rel_tol: float = 1e-9,
    abs_tol: float = 0.0,
    min_level: int = 1,
    max_level: int = 5,
) -> QuadResult:
    """Integrate g over the unit pseudo-sphere against iota_E dxi.

    method="chart" refines the transported Euclidean-sphere rule until two
    successive levels agree; method="shell" integrates the shell identity
    by nested adaptive Cartesian quadrature (slow; the independent oracle).
    """
    if method == "shell":
        return _shell_integral(space, g, rel_tol=max(rel_tol, 1e-8))
    if method != "chart":
        raise PreconditionError(f"unknown method {method!r}")
    prev = None
    last_delta = float("nan")
    for level in range(min_level, max_level + 1):
        pts, w = _sphere_rule(space.d, level)
        vals = _call_batch(g, pts)
        cur = np.sum(w * vals)
        mass = float(np.sum(np.abs(w * vals)))
        if prev is not None:
            last_delta = abs(cur - prev)
            # the mass floor keeps cancelling (odd) integrands from chasing
            # an unreachable relative target; its size is the accuracy of
            # the finite-difference Jacobian inside the chart weights
            tol = max(abs_tol, rel_tol * abs(cur), 5e-12 * mass, 1e-15)
            if last_delta <= tol:
                return QuadResult(complex(cur) if np.iscomplexobj(vals) else float(cur),
                                  float(last_delta) + 1e-12 * mass,
                                  info=f"chart level {level}")
        prev = cur
    raise NumericalError(
        f"sphere_integral did not converge by level {max_level} "
        f"(last delta {last_delta:.3e})"
    )


@lru_cache(maxsize=8)
def _gl01(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def _panel_grid(npanels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights on [0, 1]."""
    xs, ws = _gl01(order)
    edges = np.linspace(0.0, 1.0, npanels + 1)
    widths = np.diff(edges)
    t = (edges[:-1, None] + widths[:, None] * xs[None, :]).ravel()
    w = (widths[:, None] * ws[None, :]).ravel()
    return t, w


def _shell_inner(space: GradedSpace, g: Callable, rest: np.ndarray,
                 rel_tol: float) -> np.ndarray:
    """Innermost xi_0 integral of the shell identity, batched over `rest` rows.

    For fixed (xi_1, ..., xi_d) the range is lo <= |xi_0| <= hi with
    lo = sqrt(max(1-u, 0)), hi = sqrt(e^4 - u), u = sum xi_j^4; both signs of
    xi_0 are summed.  The pseudo-norm stays in [1, e] there, so the integrand
    is analytic and panel-doubled Gauss rules converge fast.
    """
    e4 = math.e**4
    q = space.q
    u = np.sum(rest**4, axis=-1)
    act = u < e4
    out_shape = rest.shape[0]
    if not np.any(act):
        return np.zeros(out_shape)
    lo = np.sqrt(np.clip(1.0 - u[act], 0.0, None))
    hi = np.sqrt(e4 - u[act])
    rest_a = rest[act]
    span = hi - lo
    prev = None
    for npan in (2, 4, 8, 16, 32):
        t, wt = _panel_grid(npan, 24)
        x0 = lo[:, None] + span[:, None] * t[None, :]
        wx = span[:, None] * wt[None, :]
        nr, nm = x0.shape
        pts = np.empty((2, nr, nm, space.ncoords))
        pts[..., 0] = x0
        pts[1, ..., 0] = -x0
        pts[..., 1:] = rest_a[None, :, None, :]
        flat = pts.reshape(-1, space.ncoords)
        r = pseudo_norm(space, flat)
        vals = _call_batch(g, normalize(space, flat)) * r ** (-q)
        cur = np.sum(vals.reshape(2, nr, nm) * wx[None, :, :], axis=(0, 2))
        if prev is not None:
            scale = np.max(np.abs(cur)) + 1e-300
            if np.max(np.abs(cur - prev)) <= max(rel_tol * scale, 1e-16):
                break
        prev = cur
    else:
        raise NumericalError("shell inner quadrature did not converge")
    out = np.zeros(out_shape, dtype=cur.dtype)
    out[act] = cur
    return out


def _cusp_piece(space: GradedSpace, g: Callable, rest_of, a: float, b: float,
                rel_tol: float) -> float:
    """int_a^b F(x) dx where F has at worst square-root cusps at the ends.

    F(x) is the batched inner integral with `rest_of(x)` supplying the full
    row of outer coordinates.  The substitution x = a + (b-a) sin^2(pi tau/2)
    turns endpoint square roots into analytic functions of tau.
    """
    if b <= a:
        return 0.0
    prev = None
    for npan in (2, 4, 8, 16, 32, 64):
        tau, wt = _panel_grid(npan, 16)
        s = 0.5 * (1.0 - np.cos(math.pi * tau))
        ds = 0.5 * math.pi * np.sin(math.pi * tau)
        x = a + (b - a) * s
        w = (b - a) * ds * wt
        F = _shell_inner(space, g, rest_of(x), rel_tol / 4.0)
        cur = float(np.sum(F * w))
        if prev is not None and abs(cur - prev) <= max(rel_tol * abs(cur), 1e-16):
            return cur
        prev = cur
    raise NumericalError("shell outer quadrature did not converge")


def _shell_integral(space: GradedSpace, g: Callable, *, rel_tol: float) -> QuadResult:
    """Cartesian quadrature of int_{1<=|xi|<=e} g(|xi|^-1.xi) |xi|^-Q dxi.

    Kept deliberately independent of the chart rule: no transported sphere
    nodes, no finite-difference Jacobians, just iterated one-dimensional
    quadrature in the flat coordinates.  Practical for d <= 2, which covers
    the cross-check against the chart evaluator.
    """
    if space.d > 2:
        raise PreconditionError("shell oracle is only practical for d <= 2")
    e1 = math.e

    if space.d == 1:
        def rest_of(x: np.ndarray) -> np.ndarray:
            return x[:, None]

        val = sum(
            _cusp_piece(space, g, rest_of, a, b, rel_tol)
            for a, b in ((-e1, -1.0), (-1.0, 1.0), (1.0, e1))
        )
        return QuadResult(val, abs(val) * rel_tol * 4.0, info="shell oracle")

    e4 = math.e**4

    def line(x2: float) -> float:
        # x1-integral at fixed x2; square-root cusps sit on the curves
        # x1^4 + x2^4 = 1 (inner radius) and = e^4 (outer radius, F = 0 beyond)
        def rest_of(x: np.ndarray) -> np.ndarray:
            return np.stack([x, np.full_like(x, x2)], axis=-1)

        cap = (e4 - x2**4) ** 0.25
        if abs(x2) < 1.0:
            c = (1.0 - x2**4) ** 0.25
            cuts = (-cap, -c, c, cap)
        else:
            cuts = (-cap, cap)
        return sum(
            _cusp_piece(space, g, rest_of, a, b, rel_tol / 2.0)
            for a, b in zip(cuts[:-1], cuts[1:])
        )

    val, err = quad(line, -e1, e1, epsabs=1e-12, epsrel=rel_tol,
                    limit=300, points=[-1.0, 1.0])
    return QuadResult(val, err + abs(val) * rel_tol * 2.0, info="shell oracle")


# --------------------------------------------------------------------------
# polar (radial x sphere) integration
# --------------------------------------------------------------------------

def _converged_level(space: GradedSpace, f: Callable, r_probe: float,
                     rel_tol: float, max_level: int = 5) -> tuple[int, float]:
    prev = None
    for level in range(1, max_level + 1):
        pts, w = _sphere_rule(space.d, level)
        vals = _call_batch(f, dilate(space, r_probe, pts))
        cur = np.sum(w * vals)
        if prev is not None:
            scale = abs(cur) + 1e-300
            if abs(cur - prev) <= max(rel_tol * scale, 1e-16):
                return level, abs(cur - prev) / scale
        prev = cur
    return max_level, abs(cur - prev) / (abs(cur) + 1e-300)


def _quad_c(fn: Callable, a: float, b: float, **kw) -> tuple[complex, float]:
    """scipy quad with complex-integrand support (two real passes).

    Roundoff-limited integrands (Taylor-subtracted differences near their
    noise floor) trip QUADPACK's roundoff warning routinely; the returned
    error estimate already reflects it, so the warning is silenced.
    """
    from scipy.integrate import IntegrationWarning

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        mid = fn(0.5 * (a + b) if math.isfinite(b) else a + 1.0)
        if isinstance(mid, complex) or np.iscomplexobj(mid):
            vr, er = quad(lambda x: fn(x).real, a, b, **kw)
            vi, ei = quad(lambda x: fn(x).imag, a, b, **kw)
            return complex(vr, vi), er + ei
        v, e = quad(fn, a, b, **kw)
        return v, e


def polar_integral(
    space: GradedSpace,
    f: Callable,
    r_min: float,
    r_max: float,
    *,
    rel_tol: float = 1e-9,
    sphere_level: int | None = None,
) -> QuadResult:
    """int over {r_min <= |xi| <= r_max} of f, via the polar factorization.

    Writes the integral as int r^(Q-1) S_f(r) dr with S_f(r) the sphere
    integral of f(r.omega) on a fixed rule; the tail of an infinite range is
    folded by r -> 1/r.  The whole integral is evaluated on two consecutive
    sphere refinement levels and their difference enters the error estimate,
    so the reported error covers the angular discretization too.
    """
    if not (0.0 <= r_min < r_max):
        raise DomainError(f"need 0 <= r_min < r_max, got ({r_min}, {r_max})")
    probe = 1.0 if (r_min < 1.0 < r_max) else math.sqrt(max(r_min, 1e-6) * min(r_max, 1e6))
    if sphere_level is None:
        sphere_level, _ = _converged_level(space, f, probe, rel_tol)
    levels = [sphere_level] if sphere_level >= 6 else [sphere_level, sphere_level + 1]
    qm1 = space.q - 1

    def run(level: int) -> tuple[complex, float]:
        pts, w = _sphere_rule(space.d, level)

        def radial(r: float):
            vals = _call_batch(f, dilate(space, r, pts))
            out = np.sum(w * vals) * r**qm1
            return complex(out) if np.iscomplexobj(vals) else float(out)

        total = 0.0 + 0.0j
        err = 0.0
        lo_end = (max(1.0, 2.0 * r_min) if r_min > 0 else 1.0) if math.isinf(r_max) else r_max
        if r_min < lo_end:
            v, e = _quad_c(radial, r_min, lo_end, epsabs=1e-13, epsrel=rel_tol, limit=300)
            total += v
            err += e
        if math.isinf(r_max):
            s0 = 1.0 / lo_end

            def folded(s: float):
                return radial(1.0 / s) / s**2

            probes = [abs(folded(s0 * 10.0**-k)) for k in (2, 4, 6)]
            if any(not math.isfinite(p) for p in probes) or probes[2] > 10.0 * probes[0] + 1e-250:
                raise DomainError("integrand does not decay along the infinite tail")
            v, e = _quad_c(folded, 0.0, s0, epsabs=1e-13, epsrel=rel_tol, limit=300)
            total += v
            err += e
        return total, err

    vals = [run(lv) for lv in levels]
    total, err = vals[-1]
    if len(vals) == 2:
        err += abs(vals[1][0] - vals[0][0])
    if abs(total.imag) == 0.0:
        total = total.real
    return QuadResult(total, err, info=f"sphere level {levels[-1]}")
