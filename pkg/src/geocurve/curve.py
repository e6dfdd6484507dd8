"""Discrete curves and the covariant calculus along them.

A curve is sampled at n uniform parameters t_j = j/(n-1).  Derivatives in t
use forward differences built from the backend log map and parallel
transport, with a backward fallback at the last node, so every operation
returns fields with the full n nodes.  Integrals over t use the trapezoid
rule, matching the O(1/n) accuracy of the transport composition.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, ImmersionError, PairingError
from .manifold import ManifoldPoint, TangentVector, as_complex, from_complex, get_manifold

# Node speeds at or below this norm violate the immersion requirement; the
# square-root-velocity framework degenerates when the velocity reaches zero.
IMMERSION_TOL = 1e-8

DEFAULT_SAMPLES = 50


def trapz(values, dx, axis=-1):
    """Trapezoid rule with uniform spacing along ``axis``."""
    values = np.asarray(values, dtype=float)
    first = np.take(values, 0, axis=axis)
    last = np.take(values, -1, axis=axis)
    return dx * (values.sum(axis=axis) - 0.5 * (first + last))


class DiscreteCurve:
    """n >= 3 samples of an immersed curve, all on one backend.

    The sample array is frozen after validation; derived per-segment
    transport factors are cached lazily.
    """

    def __init__(self, manifold, points):
        self.manifold = get_manifold(manifold)
        if isinstance(points, (list, tuple)) and points and isinstance(points[0], ManifoldPoint):
            for p in points:
                if p.manifold is not self.manifold:
                    raise PairingError("curve points must share one backend")
            xy = np.array([[p.x, p.y] for p in points], dtype=float)
        else:
            xy = np.array(points, dtype=float)
        if xy.ndim != 2 or xy.shape[1] != 2:
            raise DomainError(f"curve samples must form an (n, 2) array, got {xy.shape}")
        if len(xy) < 3:
            raise DomainError(f"a discrete curve needs at least 3 samples, got {len(xy)}")
        self.manifold.validate(xy)
        speeds = self._segment_speeds(self.manifold, xy)
        slow = np.flatnonzero(~(speeds > IMMERSION_TOL))
        if slow.size:
            j = int(slow[0])
            raise ImmersionError(
                f"immersion violated: node speed {speeds[j]:.3e} <= {IMMERSION_TOL:g} "
                f"at node {j}",
                node=j,
            )
        xy.setflags(write=False)
        self.xy = xy
        self._fwd_factors = None
        self._bwd_factors = None

    @staticmethod
    def _segment_speeds(manifold, xy):
        n = len(xy)
        logs = manifold.log(xy[:-1], xy[1:])
        return (n - 1) * manifold.norm(xy[:-1], logs)

    @classmethod
    def from_function(cls, manifold, fn, n=DEFAULT_SAMPLES):
        """Sample a callable t -> (x, y) on the uniform grid."""
        ts = np.linspace(0.0, 1.0, n)
        return cls(manifold, np.array([fn(t) for t in ts], dtype=float))

    @property
    def n(self) -> int:
        return len(self.xy)

    @property
    def grid(self):
        return np.linspace(0.0, 1.0, self.n)

    @property
    def dt(self) -> float:
        return 1.0 / (self.n - 1)

    def point(self, j) -> ManifoldPoint:
        return ManifoldPoint(self.xy[j, 0], self.xy[j, 1], self.manifold)

    @property
    def points(self):
        return [self.point(j) for j in range(self.n)]

    @property
    def origin(self) -> ManifoldPoint:
        return self.point(0)

    def segment_factors(self, backward=False):
        """Complex parallel-transport factors of the curve's segments:
        index j carries node j -> j+1 (or j+1 -> j when ``backward``)."""
        if backward:
            if self._bwd_factors is None:
                f = self.manifold.transport_factor(self.xy[1:], self.xy[:-1])
                f.setflags(write=False)
                self._bwd_factors = f
            return self._bwd_factors
        if self._fwd_factors is None:
            f = self.manifold.transport_factor(self.xy[:-1], self.xy[1:])
            f.setflags(write=False)
            self._fwd_factors = f
        return self._fwd_factors

    def transport_field_to_origin(self, components):
        """Transport vectors anchored nodewise along the curve down to node 0
        by composing the exact per-segment factors; returns (..., n) complex."""
        z = as_complex(components)
        cum = np.concatenate(([1.0 + 0.0j], np.cumprod(self.segment_factors(backward=True))))
        return z * cum

    def anchors(self, other: DiscreteCurve) -> bool:
        return self.manifold is other.manifold and np.array_equal(self.xy, other.xy)

    def __eq__(self, other):
        return isinstance(other, DiscreteCurve) and self.anchors(other)

    def __hash__(self):
        return hash((self.manifold.name, self.xy.tobytes()))

    def __repr__(self):
        return f"DiscreteCurve({self.manifold.name}, n={self.n})"


class CurveTangent:
    """A tangent field along a :class:`DiscreteCurve`: one vector per node."""

    def __init__(self, base: DiscreteCurve, vectors):
        self.base = base
        if isinstance(vectors, (list, tuple)) and vectors and isinstance(vectors[0], TangentVector):
            comp = np.empty((len(vectors), 2))
            for j, v in enumerate(vectors):
                if not v.base.same_place(base.point(j)):
                    raise PairingError(f"vector {j} is not anchored at curve node {j}")
                comp[j] = (v.dx, v.dy)
        else:
            comp = np.array(vectors, dtype=float)
        if comp.shape != (base.n, 2):
            raise DomainError(
                f"field shape {comp.shape} does not match the curve's {(base.n, 2)}"
            )
        if not np.all(np.isfinite(comp)):
            raise DomainError("tangent field components must be finite")
        comp.setflags(write=False)
        self.components = comp

    @classmethod
    def zero(cls, base: DiscreteCurve):
        return cls(base, np.zeros((base.n, 2)))

    @property
    def n(self) -> int:
        return self.base.n

    def vector(self, j) -> TangentVector:
        return TangentVector(self.base.point(j), *self.components[j])

    @property
    def vectors(self):
        return [self.vector(j) for j in range(self.n)]

    def norms(self):
        """Pointwise metric norms, shape (n,)."""
        return self.base.manifold.norm(self.base.xy, self.components)

    def l2_norm(self) -> float:
        """L2 norm over t of the pointwise metric norms."""
        return float(np.sqrt(trapz(self.norms() ** 2, self.base.dt)))

    def _check_mate(self, other):
        if not (self.base is other.base or self.base.anchors(other.base)):
            raise PairingError("tangent fields are anchored on different curves")

    def __add__(self, other):
        self._check_mate(other)
        return CurveTangent(self.base, self.components + other.components)

    def __sub__(self, other):
        self._check_mate(other)
        return CurveTangent(self.base, self.components - other.components)

    def __neg__(self):
        return CurveTangent(self.base, -self.components)

    def __mul__(self, scalar):
        return CurveTangent(self.base, float(scalar) * self.components)

    __rmul__ = __mul__

    def __repr__(self):
        return f"CurveTangent(n={self.n}, {self.base.manifold.name})"


def finite_velocity(c: DiscreteCurve) -> CurveTangent:
    """Velocity field c'(t_j) from log-map differences: forward at interior
    nodes, backward at the last one."""
    m, xy, n = c.manifold, c.xy, c.n
    ct = np.empty((n, 2))
    ct[:-1] = (n - 1) * m.log(xy[:-1], xy[1:])
    ct[-1] = -(n - 1) * m.log(xy[-1], xy[-2])
    return CurveTangent(c, ct)


def covariant_derivative_along(c: DiscreteCurve, w: CurveTangent) -> CurveTangent:
    """Covariant t-derivative of a field along the curve, via transported
    differences: (n-1) * (w_{j+1} pulled back to node j  -  w_j)."""
    if not (w.base is c or w.base.anchors(c)):
        raise PairingError("field is not anchored on the given curve")
    n = c.n
    z = as_complex(w.components)
    out = np.empty(n, dtype=complex)
    out[:-1] = (n - 1) * (c.segment_factors(backward=True) * z[1:] - z[:-1])
    out[-1] = (n - 1) * (z[-1] - c.segment_factors()[-1] * z[-2])
    return CurveTangent(c, from_complex(out))


def srv_transform(c: DiscreteCurve) -> CurveTangent:
    """Square-root-velocity field q = c' / sqrt(||c'||), metric norms."""
    ct = finite_velocity(c)
    f = ct.norms()
    return CurveTangent(c, ct.components / np.sqrt(f)[:, None])


def srv_reconstruct(origin: ManifoldPoint, q) -> DiscreteCurve:
    """Integrate a square-root-velocity field back into a curve from a given
    origin, stepping nodewise with the backend exponential: c' = ||q|| q.

    ``q`` may be a :class:`CurveTangent` or a plain (n, 2) component array;
    components are read in the chart at the current reconstruction point.
    """
    comp = q.components if isinstance(q, CurveTangent) else np.asarray(q, dtype=float)
    if comp.ndim != 2 or comp.shape[1] != 2 or len(comp) < 3:
        raise DomainError("need an (n, 2) field with n >= 3 to reconstruct a curve")
    m = origin.manifold
    n = len(comp)
    dt = 1.0 / (n - 1)
    xy = np.empty((n, 2))
    xy[0] = origin.xy
    for j in range(n - 1):
        speed_sq = m.inner(xy[j], comp[j], comp[j])
        if not speed_sq > IMMERSION_TOL:
            raise ImmersionError(
                f"degenerate square-root-velocity node {j}: ||q||^2 = {speed_sq:.3e}",
                node=j,
            )
        xy[j + 1] = m.exp(xy[j], dt * np.sqrt(speed_sq) * comp[j])
    return DiscreteCurve(m, xy)


def tangential_split(c: DiscreteCurve, w: CurveTangent):
    """Split a field into components parallel and normal to the curve's unit
    speed vector; returns (tangential, normal) with exact sum."""
    if not (w.base is c or w.base.anchors(c)):
        raise PairingError("field is not anchored on the given curve")
    ct = finite_velocity(c)
    f = ct.norms()
    v = ct.components / f[:, None]
    coeff = c.manifold.inner(c.xy, w.components, v)
    tang = coeff[:, None] * v
    return CurveTangent(c, tang), CurveTangent(c, w.components - tang)


def metric_G(c: DiscreteCurve, h: CurveTangent, k: CurveTangent) -> float:
    """First-order Sobolev metric: origin term plus the arc-length integral of
    the normal and (quarter-weighted) tangential covariant derivatives.

    G(h, k) = <h(0), k(0)> + int( <D h^N, D k^N> + 1/4 <D h^T, D k^T> ) dl
    with D the covariant derivative in arc length and dl = ||c'|| dt.
    """
    for w in (h, k):
        if not (w.base is c or w.base.anchors(c)):
            raise PairingError("field is not anchored on the given curve")
    m, xy = c.manifold, c.xy
    ct = finite_velocity(c)
    f = ct.norms()
    v = ct.components / f[:, None]
    dh = covariant_derivative_along(c, h).components / f[:, None]
    dk = covariant_derivative_along(c, k).components / f[:, None]
    dh_t = m.inner(xy, dh, v)
    dk_t = m.inner(xy, dk, v)
    dh_n = dh - dh_t[:, None] * v
    dk_n = dk - dk_t[:, None] * v
    integrand = (m.inner(xy, dh_n, dk_n) + 0.25 * dh_t * dk_t) * f
    origin = m.inner(xy[0], h.components[0], k.components[0])
    return float(origin + trapz(integrand, c.dt))


def pointwise_l2_log(c0: DiscreteCurve, c1: DiscreteCurve) -> CurveTangent:
    """Nodewise log map between two same-grid curves; the L2-metric logarithm."""
    _check_same_grid(c0, c1)
    return CurveTangent(c0, c0.manifold.log(c0.xy, c1.xy))


def pointwise_l2_exp(c: DiscreteCurve, w: CurveTangent) -> DiscreteCurve:
    """Nodewise exponential of a field; the L2-metric exponential."""
    if not (w.base is c or w.base.anchors(c)):
        raise PairingError("field is not anchored on the given curve")
    return DiscreteCurve(c.manifold, c.manifold.exp(c.xy, w.components))


def nodewise_distances(c0: DiscreteCurve, c1: DiscreteCurve):
    """Backend geodesic distance per node, shape (n,)."""
    _check_same_grid(c0, c1)
    logs = c0.manifold.log(c0.xy, c1.xy)
    return c0.manifold.norm(c0.xy, logs)


def _check_same_grid(c0, c1):
    if c0.manifold is not c1.manifold:
        raise PairingError("curves live on different backends")
    if c0.n != c1.n:
        raise DomainError(f"curves have different sample counts: {c0.n} vs {c1.n}")
