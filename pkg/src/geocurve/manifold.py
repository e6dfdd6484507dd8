"""Two-dimensional Riemannian backends: hyperbolic half-plane and Euclidean plane.

Points live in a global chart (x, y).  The hyperbolic backend is the Poincaré
upper half-plane with metric ds^2 = (dx^2 + dy^2)/y^2, constant sectional
curvature -1, and closed forms for the exponential map, the logarithm map and
parallel transport built from Moebius transformations.  The Euclidean backend
is the flat plane and serves as a cross-validation oracle.

All geometric kernels are vectorized: points and tangent vectors are numpy
arrays of shape (..., 2) and every operation broadcasts over leading axes.
A thin object layer (:class:`ManifoldPoint`, :class:`TangentVector`) wraps the
kernels for scalar use and input validation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PairingError

# Below this height the half-plane chart is considered numerically degenerate.
MIN_Y = 1e-12
# Relative threshold separating vertical-segment geodesics from semicircles.
# The Moebius coefficients blow up as the circle radius goes to infinity.
VERTICAL_TOL = 1e-10

_BASE_MATCH_TOL = 1e-12


def as_complex(v):
    """View an (..., 2) component array as complex numbers."""
    v = np.asarray(v, dtype=float)
    return v[..., 0] + 1j * v[..., 1]


def from_complex(z):
    """Inverse of :func:`as_complex`."""
    z = np.asarray(z)
    return np.stack([z.real, z.imag], axis=-1)


def _moebius_from_center_radius(x_center, radius):
    """Coefficients (a, b, c, d), normalized with d = 1, of the Moebius map
    sending the vertical axis onto the semicircle of given center and radius.

    ``b = x_center - radius`` and ``a = (x_center + radius)/(2 radius)`` are
    evaluated through ``x_center^2 - radius^2`` on the side where the direct
    difference would cancel catastrophically.
    """
    x_center = np.asarray(x_center, dtype=float)
    radius = np.asarray(radius, dtype=float)
    ssum_direct = x_center + radius
    diff_direct = x_center - radius
    s = (x_center - radius) * (x_center + radius)  # == x_center^2 - radius^2
    pos = x_center >= 0
    safe_sum = np.where(pos, ssum_direct, 1.0)
    safe_diff = np.where(pos, 1.0, diff_direct)
    b = np.where(pos, s / safe_sum, diff_direct)
    ssum = np.where(pos, ssum_direct, s / safe_diff)
    a = ssum / (2.0 * radius)
    c = 1.0 / (2.0 * radius)
    d = np.ones_like(a)
    return a, b, c, d


def _preimage_height(a, c, x, y):
    """Height ybar > 0 of the preimage i*ybar of (x, y) under the Moebius map.

    Uses the inverse transformation (d z - b)/(-c z + a); the preimage of a
    point on the geodesic semicircle is purely imaginary and its height
    simplifies to y / ((a - c x)^2 + (c y)^2).
    """
    return y / ((a - c * x) ** 2 + (c * y) ** 2)


class Manifold:
    """Interface shared by the two chart backends.

    ``xy`` arguments are point arrays of shape (..., 2); ``u``/``v`` are
    tangent component arrays of the same shape, anchored at ``xy``.
    """

    name = "abstract"
    curvature_constant = 0.0

    def validate(self, xy):
        raise NotImplementedError

    def inner(self, xy, u, v):
        raise NotImplementedError

    def norm(self, xy, u):
        return np.sqrt(self.inner(xy, u, v=u))

    def exp(self, xy, u):
        raise NotImplementedError

    def log(self, xy0, xy1):
        raise NotImplementedError

    def transport_factor(self, xy0, xy1):
        """Complex factor applying geodesic parallel transport xy0 -> xy1.

        Parallel transport in a 2-dimensional conformal chart is a
        scaling-rotation, hence a complex multiplication; factors along a
        composite path multiply together.
        """
        raise NotImplementedError

    def transport(self, xy0, xy1, u):
        """Parallel transport of ``u`` along the geodesic from xy0 to xy1."""
        return from_complex(self.transport_factor(xy0, xy1) * as_complex(u))

    def curvature(self, xy, x, y, z):
        """Riemann curvature tensor R(x, y)z at the points ``xy``.

        Both backends have constant sectional curvature K, for which
        R(X, Y)Z = K (<Y, Z> X - <X, Z> Y).
        """
        k = self.curvature_constant
        if k == 0.0:
            return np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y), np.shape(z)))
        return k * (self.inner(xy, y, z)[..., None] * x - self.inner(xy, x, z)[..., None] * y)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name!r}>"


class EuclideanPlane(Manifold):
    """Flat plane, the K = 0 oracle backend."""

    name = "euclidean"
    curvature_constant = 0.0

    def validate(self, xy):
        xy = np.asarray(xy, dtype=float)
        if xy.shape[-1] != 2:
            raise DomainError("points must have two chart coordinates")
        if not np.all(np.isfinite(xy)):
            raise DomainError("point coordinates must be finite")
        return xy

    def inner(self, xy, u, v):
        return np.sum(np.asarray(u, dtype=float) * np.asarray(v, dtype=float), axis=-1)

    def exp(self, xy, u):
        return np.asarray(xy, dtype=float) + np.asarray(u, dtype=float)

    def log(self, xy0, xy1):
        return np.asarray(xy1, dtype=float) - np.asarray(xy0, dtype=float)

    def transport_factor(self, xy0, xy1):
        shape = np.broadcast_shapes(np.shape(xy0)[:-1], np.shape(xy1)[:-1])
        return np.ones(shape, dtype=complex)


class HyperbolicHalfPlane(Manifold):
    """Upper half-plane y > 0 with metric ds^2 = (dx^2 + dy^2)/y^2, K = -1."""

    name = "hyperbolic"
    curvature_constant = -1.0

    def validate(self, xy):
        xy = np.asarray(xy, dtype=float)
        if xy.shape[-1] != 2:
            raise DomainError("points must have two chart coordinates")
        if not np.all(np.isfinite(xy)):
            raise DomainError("point coordinates must be finite")
        if np.any(xy[..., 1] < MIN_Y):
            raise DomainError(
                f"half-plane points need y >= {MIN_Y:g}; got min y = {xy[..., 1].min():g}"
            )
        return xy

    def inner(self, xy, u, v):
        xy = np.asarray(xy, dtype=float)
        num = np.sum(np.asarray(u, dtype=float) * np.asarray(v, dtype=float), axis=-1)
        return num / xy[..., 1] ** 2

    def exp(self, xy, u):
        xy = np.asarray(xy, dtype=float)
        u = np.asarray(u, dtype=float)
        xy, u = np.broadcast_arrays(xy, u)
        flat_xy = xy.reshape(-1, 2).astype(float)
        flat_u = u.reshape(-1, 2).astype(float)
        out = flat_xy.copy()

        x, y = flat_xy[:, 0], flat_xy[:, 1]
        dx, dy = flat_u[:, 0], flat_u[:, 1]
        unorm = np.hypot(dx, dy)
        moving = unorm > 0.0
        vertical = moving & (np.abs(dx) < VERTICAL_TOL * unorm)
        circle = moving & ~vertical

        if np.any(vertical):
            i = vertical
            out[i, 1] = y[i] * np.exp(dy[i] / y[i])

        if np.any(circle):
            i = circle
            xi, yi, dxi, dyi = x[i], y[i], dx[i], dy[i]
            x_center = xi + yi * dyi / dxi
            radius = yi * unorm[i] / np.abs(dxi)
            a, b, c, d = _moebius_from_center_radius(x_center, radius)
            yb0 = _preimage_height(a, c, xi, yi)
            den0 = d * d + c * c * yb0 * yb0
            dyb0 = dxi * den0 * den0 / (2.0 * c * d * yb0)
            with np.errstate(over="ignore", invalid="ignore"):
                yb1 = yb0 * np.exp(dyb0 / yb0)
                den1 = d * d + c * c * yb1 * yb1
                out[i, 0] = (b * d + a * c * yb1 * yb1) / den1
                out[i, 1] = yb1 / den1

        if not np.all(np.isfinite(out)) or np.any(out[:, 1] < MIN_Y):
            raise DomainError("hyperbolic exponential left the numerically admissible chart")
        return out.reshape(xy.shape)

    def log(self, xy0, xy1):
        xy0 = np.asarray(xy0, dtype=float)
        xy1 = np.asarray(xy1, dtype=float)
        xy0, xy1 = np.broadcast_arrays(xy0, xy1)
        p = xy0.reshape(-1, 2).astype(float)
        q = xy1.reshape(-1, 2).astype(float)
        out = np.zeros_like(p)

        x0, y0 = p[:, 0], p[:, 1]
        x1, y1 = q[:, 0], q[:, 1]
        vertical = np.abs(x1 - x0) < VERTICAL_TOL
        circle = ~vertical

        if np.any(vertical):
            i = vertical
            out[i, 1] = y0[i] * np.log(y1[i] / y0[i])

        if np.any(circle):
            i = circle
            a, b, c, d, yb0, yb1 = self._connecting_moebius(x0[i], y0[i], x1[i], y1[i])
            kk = np.log(yb1 / yb0)
            den = (d * d + c * c * yb0 * yb0) ** 2
            out[i, 0] = 2.0 * c * d * kk * yb0 * yb0 / den
            out[i, 1] = kk * yb0 * (d * d - c * c * yb0 * yb0) / den

        return out.reshape(xy0.shape)

    def transport_factor(self, xy0, xy1):
        xy0 = np.asarray(xy0, dtype=float)
        xy1 = np.asarray(xy1, dtype=float)
        xy0, xy1 = np.broadcast_arrays(xy0, xy1)
        p = xy0.reshape(-1, 2).astype(float)
        q = xy1.reshape(-1, 2).astype(float)
        x0, y0 = p[:, 0], p[:, 1]
        x1, y1 = q[:, 0], q[:, 1]

        theta = np.zeros(len(p))
        circle = np.abs(x1 - x0) >= VERTICAL_TOL
        if np.any(circle):
            i = circle
            a, b, c, d, yb0, yb1 = self._connecting_moebius(x0[i], y0[i], x1[i], y1[i])
            theta[i] = 2.0 * (np.arctan2(c * yb1, d) - np.arctan2(c * yb0, d))

        factor = (y1 / y0) * np.exp(-1j * theta)
        return factor.reshape(xy0.shape[:-1])

    @staticmethod
    def _connecting_moebius(x0, y0, x1, y1):
        """Moebius data of the semicircle geodesic through two points with
        x0 != x1: coefficients plus both preimage heights."""
        x_center = 0.5 * (x0 + x1) + (y1 - y0) * (y1 + y0) / (2.0 * (x1 - x0))
        radius = np.hypot(x0 - x_center, y0)
        a, b, c, d = _moebius_from_center_radius(x_center, radius)
        yb0 = _preimage_height(a, c, x0, y0)
        yb1 = _preimage_height(a, c, x1, y1)
        return a, b, c, d, yb0, yb1


EUCLIDEAN = EuclideanPlane()
HYPERBOLIC = HyperbolicHalfPlane()

_MANIFOLDS = {m.name: m for m in (EUCLIDEAN, HYPERBOLIC)}


def get_manifold(name):
    """Look a backend up by its tag ('hyperbolic' or 'euclidean')."""
    if isinstance(name, Manifold):
        return name
    try:
        return _MANIFOLDS[name]
    except KeyError:
        raise DomainError(
            f"unknown manifold {name!r}; available: {sorted(_MANIFOLDS)}"
        ) from None


@dataclass(frozen=True)
class ManifoldPoint:
    """A chart point on one of the backends.

    The hyperbolic backend requires y >= 1e-12 strictly; both require finite
    coordinates.  Instances are immutable.
    """

    x: float
    y: float
    manifold: Manifold = HYPERBOLIC

    def __post_init__(self):
        object.__setattr__(self, "manifold", get_manifold(self.manifold))
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        self.manifold.validate(np.array([self.x, self.y]))

    @property
    def manifold_id(self) -> str:
        return self.manifold.name

    @property
    def xy(self):
        return np.array([self.x, self.y])

    def same_place(self, other, tol=_BASE_MATCH_TOL):
        return (
            self.manifold is other.manifold
            and abs(self.x - other.x) <= tol
            and abs(self.y - other.y) <= tol
        )


@dataclass(frozen=True)
class TangentVector:
    """A tangent vector (dx, dy) anchored at a :class:`ManifoldPoint`."""

    base: ManifoldPoint
    dx: float
    dy: float

    def __post_init__(self):
        object.__setattr__(self, "dx", float(self.dx))
        object.__setattr__(self, "dy", float(self.dy))
        if not (np.isfinite(self.dx) and np.isfinite(self.dy)):
            raise DomainError("tangent components must be finite")

    @property
    def components(self):
        return np.array([self.dx, self.dy])

    def norm(self) -> float:
        m = self.base.manifold
        return float(m.norm(self.base.xy, self.components))


@dataclass(frozen=True)
class MoebiusCoefficients:
    """Coefficients of the normalized (d = 1) Moebius map carrying the
    vertical axis onto a geodesic semicircle, with its center and radius."""

    a: float
    b: float
    c: float
    d: float
    x_center: float
    radius: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > 1e-12:
            raise DomainError(f"Moebius determinant must be 1, got {det!r}")
        if not self.radius > 0.0:
            raise DomainError("semicircle radius must be positive")

    @classmethod
    def from_center_radius(cls, x_center, radius):
        if not radius > 0.0:
            raise DomainError("semicircle radius must be positive")
        a, b, c, d = _moebius_from_center_radius(float(x_center), float(radius))
        return cls(float(a), float(b), float(c), float(d), float(x_center), float(radius))

    @classmethod
    def through(cls, p: ManifoldPoint, q: ManifoldPoint):
        """Moebius data of the semicircle through two non-vertically-aligned
        half-plane points."""
        if abs(p.x - q.x) < VERTICAL_TOL:
            raise DomainError("vertically aligned points lie on a segment, not a semicircle")
        x_center = 0.5 * (p.x + q.x) + (q.y - p.y) * (q.y + p.y) / (2.0 * (q.x - p.x))
        radius = float(np.hypot(p.x - x_center, p.y))
        return cls.from_center_radius(x_center, radius)

    def apply(self, ybar):
        """Image (x, y) of the axis point i*ybar."""
        den = self.d ** 2 + self.c ** 2 * ybar ** 2
        return (self.b * self.d + self.a * self.c * ybar ** 2) / den, ybar / den

    def preimage_height(self, p: ManifoldPoint) -> float:
        return float(_preimage_height(self.a, self.c, p.x, p.y))


def _require_same_base(*vectors: TangentVector):
    first = vectors[0]
    for v in vectors[1:]:
        if not first.base.same_place(v.base):
            raise PairingError(
                "tangent vectors are anchored at different base points: "
                f"{first.base} vs {v.base}"
            )


def metric_inner(u: TangentVector, v: TangentVector) -> float:
    """Riemannian inner product <u, v> at their shared base point."""
    _require_same_base(u, v)
    m = u.base.manifold
    return float(m.inner(u.base.xy, u.components, v.components))


def exp_point(u: TangentVector) -> ManifoldPoint:
    """Endpoint gamma(1) of the geodesic with gamma(0) = u.base, gamma'(0) = u."""
    m = u.base.manifold
    xy = m.exp(u.base.xy, u.components)
    return ManifoldPoint(xy[0], xy[1], m)


def log_point(p: ManifoldPoint, q: ManifoldPoint) -> TangentVector:
    """Initial speed of the unit-time geodesic from p to q: exp(log(p, q)) = q."""
    if p.manifold is not q.manifold:
        raise PairingError(f"points live on different backends: {p.manifold_id} vs {q.manifold_id}")
    u = p.manifold.log(p.xy, q.xy)
    return TangentVector(p, u[0], u[1])


def parallel_transport(u: TangentVector, dest: ManifoldPoint) -> TangentVector:
    """Parallel transport of u along the unique geodesic from u.base to dest."""
    if u.base.manifold is not dest.manifold:
        raise PairingError("cannot transport between different backends")
    m = u.base.manifold
    w = m.transport(u.base.xy, dest.xy, u.components)
    return TangentVector(dest, w[0], w[1])


def curvature_tensor(x: TangentVector, y: TangentVector, z: TangentVector) -> TangentVector:
    """Riemann tensor R(x, y)z at the shared base point."""
    _require_same_base(x, y, z)
    m = x.base.manifold
    w = m.curvature(x.base.xy, x.components, y.components, z.components)
    return TangentVector(x.base, w[0], w[1])


def curvature_derivative(
    j: TangentVector, x: TangentVector, y: TangentVector, z: TangentVector
) -> TangentVector:
    """Covariant derivative (nabla_j R)(x, y)z.

    Both backends are locally symmetric (flat or constant curvature), so this
    vanishes identically; the operation exists so algorithms can spell out the
    full Jacobi equations.
    """
    _require_same_base(j, x, y, z)
    return TangentVector(j.base, 0.0, 0.0)


def gaussian_to_halfplane(mean: float, sigma: float) -> ManifoldPoint:
    """Map a univariate Gaussian N(mean, sigma^2) to the half-plane point
    (mean/sqrt(2), sigma), under which the Fisher-Rao geometry of Gaussians
    becomes the hyperbolic metric."""
    if not sigma > 0.0:
        raise DomainError(f"standard deviation must be positive, got {sigma!r}")
    return ManifoldPoint(mean / np.sqrt(2.0), sigma, HYPERBOLIC)


def disk_to_halfplane(z: complex) -> ManifoldPoint:
    """Cayley map w = i(1 - z)/(1 + z) from the open unit disk onto the
    half-plane.  The disk center goes to i; real z go to the vertical axis."""
    z = complex(z)
    if abs(z) >= 1.0:
        raise DomainError(f"point must lie strictly inside the unit disk, got |z| = {abs(z):g}")
    w = 1j * (1.0 - z) / (1.0 + z)
    return ManifoldPoint(w.real, w.imag, HYPERBOLIC)
