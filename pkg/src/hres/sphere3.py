"""Pseudohermitian geometry of the standard odd sphere.

The unit sphere in complex (n+1)-space carries the contact form
theta = (i/2) sum z_j dzbar_j, which in real coordinates restricts to
(1/2) sum (x dy - y dx).  This module integrates wedge densities
dtheta^n ^ theta over the sphere through a two-chart stereographic
atlas with a smooth partition of unity, and layers on top of that the
heat-coefficient bookkeeping: lower-dimensional volumes, the
three-dimensional area functional, and the inversion that reads the
universal heat constants off integrated coefficients.

Everything here is exact-geometry plus quadrature; no operator theory.
The atlas covers the sphere minus two antipodal points (measure zero),
and each chart integrand is smooth with compact support inside its
box, so tensor Gauss-Legendre converges super-algebraically.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError, PreconditionError

__all__ = [
    "Chart",
    "ContactModel",
    "HeatGammaRegistry",
    "S3_HEAT_GAMMAS",
    "area_dim3",
    "area_factor",
    "contact_integral",
    "contact_model",
    "contact_volume",
    "gamma_from_heat",
    "load_contact_model",
    "lower_volume",
]


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= -1/4, 1 for t >= 1/4, s(t)+s(-t) = 1."""
    t = np.asarray(t, dtype=float)
    up = np.zeros_like(t)
    dn = np.zeros_like(t)
    pos = t > -0.25
    neg = t < 0.25
    up[pos] = np.exp(-1.0 / (t[pos] + 0.25))
    dn[neg] = np.exp(-1.0 / (0.25 - t[neg]))
    return up / (up + dn)


@dataclass(frozen=True)
class Chart:
    """Stereographic parametrization of the unit sphere minus one pole.

    Points u in R^(ambient_dim - 1) map to the sphere; `axis` is the
    ambient coordinate of the pole and `side` its sign.  `orientation`
    multiplies the pulled-back density so the two charts of an atlas
    induce one global orientation (antipodal stereographic transition
    maps are orientation-reversing in odd chart dimension).
    """

    ambient_dim: int
    axis: int
    side: int
    orientation: float

    def __post_init__(self):
        if not 0 <= self.axis < self.ambient_dim:
            raise DomainError("chart pole axis outside the ambient space")
        if self.side not in (-1, 1):
            raise DomainError("chart pole side must be +1 or -1")

    @property
    def dim(self) -> int:
        return self.ambient_dim - 1

    def _perp(self) -> list[int]:
        return [i for i in range(self.ambient_dim) if i != self.axis]

    def embed(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        r2 = np.sum(u * u, axis=1)
        s = 1.0 + r2
        x = np.empty((u.shape[0], self.ambient_dim))
        x[:, self._perp()] = 2.0 * u / s[:, None]
        x[:, self.axis] = self.side * (r2 - 1.0) / s
        return x

    def jacobian(self, u: np.ndarray) -> np.ndarray:
        """d(embed)/du, shape (npts, ambient_dim, dim)."""
        u = np.asarray(u, dtype=float)
        npts, dim = u.shape
        s = 1.0 + np.sum(u * u, axis=1)
        jac = np.zeros((npts, self.ambient_dim, dim))
        outer = u[:, :, None] * u[:, None, :]
        perp_block = (
            2.0 * np.eye(dim)[None, :, :] / s[:, None, None]
            - 4.0 * outer / (s * s)[:, None, None]
        )
        jac[:, self._perp(), :] = perp_block
        jac[:, self.axis, :] = 4.0 * self.side * u / (s * s)[:, None]
        return jac


@dataclass(frozen=True)
class ContactModel:
    """A sphere with a contact form and its scalar curvature.

    `theta_form` maps ambient points (npts, 2n+2) to the covector
    components of theta in ambient coordinates; restriction to the
    sphere happens through the chart pullback.  `dtheta_form`, when
    given, returns the antisymmetric matrix W with
    W[j, k] = d_j theta_k - d_k theta_j; otherwise the exterior
    derivative is taken by Richardson-extrapolated central
    differences, which needs theta_form defined slightly off the
    sphere.
    """

    name: str
    n: int
    theta_form: Callable[[np.ndarray], np.ndarray]
    scalar_curvature: Callable[[np.ndarray], np.ndarray]
    known_volume: float | None = None
    dtheta_form: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")

    @property
    def dim(self) -> int:
        return 2 * self.n + 1


@dataclass(frozen=True)
class HeatGammaRegistry:
    """Universal heat-coefficient constants for the rank-n model."""

    n: int
    gamma0: float
    gamma1_prime: float

    def __post_init__(self):
        if self.gamma0 <= 0.0 or self.gamma1_prime <= 0.0:
            raise DomainError("heat constants must be positive")


def _numeric_dtheta(theta, x: np.ndarray, h: float = 1e-4) -> np.ndarray:
    npts, amb = x.shape
    grads = np.zeros((npts, amb, amb))
    for j in range(amb):
        step = np.zeros(amb)
        step[j] = 1.0
        # two step sizes, Richardson-combined to O(h^4)
        for hh, wgt in ((h, -1.0 / 3.0), (h / 2.0, 4.0 / 3.0)):
            diff = (theta(x + hh * step) - theta(x - hh * step)) / (2.0 * hh)
            grads[:, j, :] += wgt * diff
    return grads - np.swapaxes(grads, 1, 2)


def _pfaffian(b: np.ndarray) -> np.ndarray:
    """Pfaffian of a batch (npts, 2k, 2k) of antisymmetric matrices."""
    size = b.shape[1]
    if size == 0:
        return np.ones(b.shape[0])
    if size == 2:
        return b[:, 0, 1]
    total = np.zeros(b.shape[0])
    for j in range(1, size):
        keep = [i for i in range(size) if i not in (0, j)]
        minor = b[:, keep, :][:, :, keep]
        total += (-1.0) ** (j + 1) * b[:, 0, j] * _pfaffian(minor)
    return total


def _wedge_density(model: ContactModel, chart: Chart, u: np.ndarray) -> np.ndarray:
    """(dtheta^n ^ theta)(chart basis) at each chart point."""
    x = chart.embed(u)
    jac = chart.jacobian(u)
    theta = np.asarray(model.theta_form(x), dtype=float)
    if model.dtheta_form is not None:
        w = np.asarray(model.dtheta_form(x), dtype=float)
        if w.ndim == 2:
            w = np.broadcast_to(w, (x.shape[0],) + w.shape)
    else:
        w = _numeric_dtheta(model.theta_form, x)
    pulled_two = np.einsum("nia,nij,njb->nab", jac, w, jac)
    pulled_one = np.einsum("ni,nia->na", theta, jac)
    dim = chart.dim
    aug = np.zeros((u.shape[0], dim + 1, dim + 1))
    aug[:, 0, 1:] = pulled_one
    aug[:, 1:, 0] = -pulled_one
    aug[:, 1:, 1:] = pulled_two
    return chart.orientation * math.factorial(model.n) * _pfaffian(aug)


# Chart weight sigma((1-|u|^2)/(1+|u|^2)) vanishes for |u| >= sqrt(5/3),
# so this half-width keeps the integrand compactly supported inside.
_BOX = 1.32


def _atlas(model: ContactModel, name: str) -> tuple[Chart, Chart]:
    amb = model.dim + 1
    if name == "standard":
        axis = amb - 1
    elif name == "rotated":
        axis = 0
    else:
        raise ConfigurationError(
            f"unknown atlas {name!r}: choose 'standard' or 'rotated'"
        )
    return (Chart(amb, axis, 1, 1.0), Chart(amb, axis, -1, -1.0))


def _chart_weight(chart: Chart, x: np.ndarray) -> np.ndarray:
    """Partition-of-unity weight of one chart at ambient sphere points.

    Vanishes smoothly before the chart's pole: the exact complement of
    the opposite chart's weight, so the pair sums to 1 identically.
    """
    return _smooth_step(-chart.side * x[:, chart.axis])


def _sample_lattice(dim: int) -> np.ndarray:
    axis_pts = np.linspace(-1.1, 1.1, 5)
    grids = np.meshgrid(*([axis_pts] * dim), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    return pts[np.sum(pts * pts, axis=1) <= 1.6]


def _orientation_sign(model: ContactModel, charts: Sequence[Chart]) -> float:
    """Checks the contact condition at sample points, returns the sign
    that makes the wedge density positive, and validates the partition
    of unity."""
    samples = _sample_lattice(charts[0].dim)
    signs = []
    for chart in charts:
        x = chart.embed(samples)
        total = sum(_chart_weight(c, x) for c in charts)
        if np.max(np.abs(total - 1.0)) > 1e-12:
            raise ConfigurationError(
                "chart weights do not sum to 1: overlapping double-count"
            )
        dens = _wedge_density(model, chart, samples)
        scale = np.max(np.abs(dens))
        if scale == 0.0 or np.min(np.abs(dens)) < 1e-10 * scale:
            raise DomainError(
                f"{model.name}: wedge form dtheta^n ^ theta vanishes at a "
                "sample point; not a contact structure"
            )
        signs.append(np.sign(dens))
    flat = np.concatenate(signs)
    if np.any(flat != flat[0]):
        raise DomainError(
            f"{model.name}: wedge form changes sign across the sphere; "
            "no consistent orientation"
        )
    return float(flat[0])


def contact_integral(
    model: ContactModel,
    weight: Callable[[np.ndarray], np.ndarray] | None = None,
    atlas: str = "standard",
    nodes: int | None = None,
    threads: int = 1,
) -> float:
    """Integral of weight(x) dtheta^n ^ theta over the sphere.

    Orientation is normalized so the bare wedge density is positive;
    the weight's own sign passes through untouched.  `nodes` is the
    Gauss-Legendre count per axis; the default resolves the standard
    three-sphere volume past 1e-9 relative.  `threads` splits the
    outermost quadrature axis into slabs; partial sums are reduced in
    slab order, so results do not depend on the thread count.
    """
    charts = _atlas(model, atlas)
    sign = _orientation_sign(model, charts)
    dim = charts[0].dim
    if nodes is None:
        nodes = 80 if dim == 3 else 28
    if nodes < 4:
        raise DomainError("need at least 4 quadrature nodes per axis")
    gl_x, gl_w = np.polynomial.legendre.leggauss(nodes)
    gl_x = gl_x * _BOX
    gl_w = gl_w * _BOX

    lower_grids = np.meshgrid(*([gl_x] * (dim - 1)), indexing="ij")
    lower_pts = np.stack([g.ravel() for g in lower_grids], axis=1)
    lower_w = np.ones(lower_pts.shape[0])
    for g in np.meshgrid(*([gl_w] * (dim - 1)), indexing="ij"):
        lower_w = lower_w * g.ravel()

    def slab(chart: Chart, i: int) -> float:
        u = np.empty((lower_pts.shape[0], dim))
        u[:, 0] = gl_x[i]
        u[:, 1:] = lower_pts
        x = chart.embed(u)
        vals = _wedge_density(model, chart, u) * _chart_weight(chart, x)
        if weight is not None:
            vals = vals * np.asarray(weight(x), dtype=float)
        return float(gl_w[i] * np.dot(vals, lower_w))

    tasks = [(chart, i) for chart in charts for i in range(nodes)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(lambda t: slab(*t), tasks))
    else:
        partials = [slab(*t) for t in tasks]
    return sign * math.fsum(partials)


def contact_volume(
    model: ContactModel,
    atlas: str = "standard",
    nodes: int | None = None,
    threads: int = 1,
) -> float:
    """The contact volume integral dtheta^n ^ theta, positive by
    orientation convention."""
    return contact_integral(model, None, atlas, nodes, threads)


def _length_scale(reg: HeatGammaRegistry) -> float:
    # (c_n)^(2n+2) = 4(n+1)/gamma0, the heat-side normalization
    return (4.0 * (reg.n + 1) / reg.gamma0) ** (1.0 / (2 * reg.n + 2))


def lower_volume(
    reg: HeatGammaRegistry,
    model: ContactModel,
    k: int,
    threads: int = 1,
) -> float:
    """k-dimensional volume from the heat constants.

    Odd k gives exactly 0.  Even k in [2, 2n+2] uses
    (c_n)^k / (4(n+1)) / Gamma(k/2) times the integrated coefficient:
    the constant gamma0 at the top dimension, gamma1' times the scalar
    curvature at k = 2n.  Intermediate even k for n >= 2 would need
    universal constants nobody has evaluated, so they are refused
    rather than guessed.
    """
    if int(k) != k:
        raise DomainError(f"dimension k must be an integer, got {k}")
    if reg.n != model.n:
        raise DomainError(
            f"registry rank {reg.n} does not match model rank {model.n}"
        )
    if k % 2 == 1:
        return 0.0
    n = model.n
    if not 2 <= k <= 2 * n + 2:
        raise DomainError(f"k must lie in [2, {2 * n + 2}], got {k}")
    c = _length_scale(reg)
    front = c**k / (4.0 * (n + 1)) / math.gamma(k / 2.0)
    if k == 2 * n + 2:
        coeff = reg.gamma0 * contact_integral(model, threads=threads)
    elif k == 2 * n:
        coeff = reg.gamma1_prime * contact_integral(
            model, model.scalar_curvature, threads=threads
        )
    else:
        raise ConfigurationError(
            f"unknown universal constant for k={k}, n={n}: only the top "
            "and curvature coefficients are available"
        )
    return front * coeff


def area_factor(reg: HeatGammaRegistry) -> float:
    """The universal area coefficient gamma1' / sqrt(8 gamma0)."""
    return reg.gamma1_prime / math.sqrt(8.0 * reg.gamma0)


def area_dim3(model: ContactModel, threads: int = 1) -> float:
    """Area of a 3-dimensional model: (1/(32 sqrt 2)) integral of
    R dtheta ^ theta."""
    if model.dim != 3:
        raise PreconditionError(
            f"area needs dim = 3, got dim = {model.dim} ({model.name})"
        )
    integral = contact_integral(model, model.scalar_curvature, threads=threads)
    return integral / (32.0 * math.sqrt(2.0))


def gamma_from_heat(
    a0: float,
    a2: float,
    model: ContactModel,
    threads: int = 1,
) -> tuple[float, float]:
    """Invert A0 = gamma0 * integral(dtheta^n ^ theta) and
    A2 = gamma1' * integral(R dtheta^n ^ theta)."""
    vol = contact_integral(model, threads=threads)
    curv = contact_integral(model, model.scalar_curvature, threads=threads)
    if vol == 0.0 or curv == 0.0:
        raise DomainError(
            f"{model.name}: vanishing coefficient integral, "
            "heat constants are not determined"
        )
    return a0 / vol, a2 / curv


def _standard_theta(x: np.ndarray) -> np.ndarray:
    """theta = (1/2) sum (x dy - y dx) over consecutive (x, y) pairs."""
    out = np.empty_like(x)
    out[:, 0::2] = -0.5 * x[:, 1::2]
    out[:, 1::2] = 0.5 * x[:, 0::2]
    return out


def _standard_dtheta(x: np.ndarray) -> np.ndarray:
    amb = x.shape[1]
    w = np.zeros((amb, amb))
    for j in range(0, amb, 2):
        w[j, j + 1] = 1.0
        w[j + 1, j] = -1.0
    return np.broadcast_to(w, (x.shape[0], amb, amb))


def _constant_curvature(value: float):
    def curv(x: np.ndarray) -> np.ndarray:
        return np.full(x.shape[0], value)

    return curv


def _standard_s3() -> ContactModel:
    return ContactModel(
        name="s3-standard",
        n=1,
        theta_form=_standard_theta,
        scalar_curvature=_constant_curvature(4.0),
        known_volume=math.pi**2,
        dtheta_form=_standard_dtheta,
    )


_MODEL_BUILDERS: dict[str, Callable[[], ContactModel]] = {
    "s3-standard": _standard_s3,
}

S3_HEAT_GAMMAS = HeatGammaRegistry(n=1, gamma0=1.0 / 16.0, gamma1_prime=1.0 / 64.0)


def contact_model(name: str) -> ContactModel:
    try:
        return _MODEL_BUILDERS[name]()
    except KeyError:
        known = ", ".join(sorted(_MODEL_BUILDERS))
        raise ConfigurationError(
            f"unknown contact model {name!r}: known models are {known}"
        ) from None


_FORM_CALLBACKS = {
    "pairwise-rotation": (_standard_theta, _standard_dtheta),
}


def load_contact_model(path: str | Path) -> ContactModel:
    """Build a model from a JSON chart specification.

    The file names a built-in form callback and gives the scalar
    curvature either as a number or as a callback name; arbitrary code
    is never loaded.
    """
    try:
        spec = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read model file {path}: {exc}") from exc
    try:
        name = spec["name"]
        n = int(spec["n"])
        theta_name = spec["theta"]
        curv_spec = spec["scalar_curvature"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad model file {path}: {exc}") from exc
    if theta_name not in _FORM_CALLBACKS:
        known = ", ".join(sorted(_FORM_CALLBACKS))
        raise ConfigurationError(
            f"unknown form callback {theta_name!r}: known callbacks are {known}"
        )
    theta, dtheta = _FORM_CALLBACKS[theta_name]
    if isinstance(curv_spec, (int, float)):
        curvature = _constant_curvature(float(curv_spec))
    else:
        raise ConfigurationError(
            "scalar_curvature must be a number in a model file"
        )
    return ContactModel(
        name=str(name),
        n=n,
        theta_form=theta,
        scalar_curvature=curvature,
        known_volume=spec.get("known_volume"),
        dtheta_form=dtheta,
    )
