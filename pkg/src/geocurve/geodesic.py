"""Geodesics in the space of curves: exponential map, energy, holonomy.

A path of curves c(s, .) is propagated with explicit Euler steps of size
eps = 1/m.  At each s the first-order state (velocity, its covariant
s-derivative through the t-derivative swap, the square-root-velocity field q
and its s-derivative) is rebuilt by finite differences; the second-order
state solves the geodesic equations

    nabla_s c_s(s, 0) = -r(s, 0),
    nabla_s nabla_s q = -||q|| (r + r^T),
    r(s, t) = int_t^1 [ R(q, nabla_s q) c_s ]^{tau, t} dtau,

and integrates nabla_s c_s along t with transported trapezoid sums.  All
t-integrals exploit that parallel transport along a fixed discrete curve is
multiplication by a complex factor, so composed transports are cumulative
products.  Transports always follow the pre-update curve (the explicit Euler
reading of the step).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .curve import CurveTangent, DiscreteCurve, finite_velocity, metric_G, trapz
from .errors import DomainError, ImmersionError, PropagationError
from .manifold import TangentVector, as_complex, from_complex

DEFAULT_STEPS = 20
REPORT_STEPS = 50


class GeodesicPath:
    """m+1 curves c(s_i, .) with their speeds c_s(s_i, .) and the energy
    profile E(s_i) = G(c_s, c_s)(s_i)."""

    def __init__(self, curves, speeds, step, energies):
        if len(curves) != len(speeds) or len(curves) < 2:
            raise DomainError("a path needs matching curve and speed lists, length >= 2")
        n = curves[0].n
        man = curves[0].manifold
        for c, w in zip(curves, speeds):
            if c.n != n or c.manifold is not man:
                raise DomainError("all curves of a path must share grid and backend")
            if not (w.base is c or w.base.anchors(c)):
                raise DomainError("path speeds must be anchored on the matching curves")
        self.curves = list(curves)
        self.speeds = list(speeds)
        self.step = float(step)
        self.energies = np.asarray(energies, dtype=float)

    @property
    def m(self) -> int:
        return len(self.curves) - 1

    @property
    def n(self) -> int:
        return self.curves[0].n

    @property
    def manifold(self):
        return self.curves[0].manifold

    def endpoint(self) -> DiscreteCurve:
        return self.curves[-1]

    def origin_factors(self):
        """Cumulative transport factors along the origin curve c(., 0):
        entry i carries vectors from c(s_i, 0) back to c(0, 0)."""
        origins = np.array([c.xy[0] for c in self.curves])
        seg = self.manifold.transport_factor(origins[1:], origins[:-1])
        return np.concatenate(([1.0 + 0.0j], np.cumprod(seg)))

    def __repr__(self):
        return f"GeodesicPath(m={self.m}, n={self.n}, {self.manifold.name})"


class _StepState(NamedTuple):
    """Carrier quantities of one s-slice, everything shaped (n, 2) or (n,)."""

    curve: DiscreteCurve
    cs: np.ndarray       # c_s
    ct: np.ndarray       # c_t
    dct: np.ndarray      # nabla_t c_s == nabla_s c_t
    f: np.ndarray        # ||c_t||
    q: np.ndarray        # square-root-velocity field
    dq: np.ndarray       # nabla_s q
    v: np.ndarray        # unit tangent c_t/||c_t||
    r: np.ndarray
    rT: np.ndarray
    d2q: np.ndarray      # nabla_s nabla_s q
    d2ct: np.ndarray     # nabla_s nabla_s c_t
    dcs: np.ndarray      # nabla_s c_s
    cumfac: np.ndarray   # cumulative transport factors: node j -> node 0 is 1/cumfac[j]


def _cumulative_factors(curve: DiscreteCurve):
    """cumfac[j] transports node 0 -> node j; k -> j is cumfac[j]/cumfac[k]."""
    return np.concatenate(([1.0 + 0.0j], np.cumprod(curve.segment_factors())))


def _transported_integral(cumfac, values, dt, reverse=False):
    """Trapezoid integral of a transported field along a discrete curve.

    values has complex shape (..., n); entry j of the result is
    int_0^{t_j} [v(tau)]^{tau, t_j} dtau  (or int_{t_j}^1 when ``reverse``),
    with transports composed from the per-segment factors.
    """
    h = values / cumfac
    if reverse:
        csum = np.cumsum(h[..., ::-1], axis=-1)[..., ::-1]
    else:
        csum = np.cumsum(h, axis=-1)
    edge = h[..., -1:] if reverse else h[..., :1]
    return cumfac * dt * (csum - 0.5 * h - 0.5 * edge)


def _first_order_state(curve: DiscreteCurve, cs: np.ndarray):
    m = curve.manifold
    xy = curve.xy
    n = curve.n
    ct = np.empty((n, 2))
    ct[:-1] = (n - 1) * m.log(xy[:-1], xy[1:])
    ct[-1] = -(n - 1) * m.log(xy[-1], xy[-2])
    zcs = as_complex(cs)
    dct = np.empty(n, dtype=complex)
    dct[:-1] = (n - 1) * (curve.segment_factors(backward=True) * zcs[1:] - zcs[:-1])
    dct[-1] = (n - 1) * (zcs[-1] - curve.segment_factors()[-1] * zcs[-2])
    dct = from_complex(dct)
    f = m.norm(xy, ct)
    q = ct / np.sqrt(f)[:, None]
    dq = dct / np.sqrt(f)[:, None] - 0.5 * (
        m.inner(xy, dct, ct) / f**2.5
    )[:, None] * ct
    v = ct / f[:, None]
    return ct, dct, f, q, dq, v


def _step_state(curve: DiscreteCurve, cs: np.ndarray) -> _StepState:
    m = curve.manifold
    xy = curve.xy
    dt = curve.dt
    ct, dct, f, q, dq, v = _first_order_state(curve, cs)
    cumfac = _cumulative_factors(curve)

    g = m.curvature(xy, q, dq, cs)
    r = from_complex(_transported_integral(cumfac, as_complex(g), dt, reverse=True))
    rT = m.inner(xy, r, v)[:, None] * v
    d2q = -np.sqrt(f)[:, None] * (r + rT)

    dot_dct_ct = m.inner(xy, dct, ct)
    d2ct = (
        np.sqrt(f)[:, None] * d2q
        + (dot_dct_ct / f**2)[:, None] * dct
        + (
            m.inner(xy, d2q, ct) / f**1.5
            - 1.5 * dot_dct_ct**2 / f**4
            + m.inner(xy, dct, dct) / f**2
        )[:, None]
        * ct
    )

    integrand = d2ct + m.curvature(xy, ct, cs, cs)
    accum = _transported_integral(cumfac, as_complex(integrand), dt)
    dcs = from_complex(cumfac * as_complex(-r[0]) + accum)

    return _StepState(curve, cs, ct, dct, f, q, dq, v, r, rT, d2q, d2ct, dcs, cumfac)


def _speed_energy(state: _StepState) -> float:
    """G(c_s, c_s) through the pullback form: origin term plus the L2 norm of
    nabla_s q (discretely identical to the Sobolev expression)."""
    m = state.curve.manifold
    xy = state.curve.xy
    origin = m.inner(xy[0], state.cs[0], state.cs[0])
    return float(origin + trapz(m.inner(xy, state.dq, state.dq), state.curve.dt))


def curve_exp(c0: DiscreteCurve, u: CurveTangent, m: int = DEFAULT_STEPS) -> GeodesicPath:
    """Exponential map in the space of curves: the geodesic path starting at
    c0 with initial speed field u, propagated through m explicit Euler steps.

    Raises :class:`PropagationError` if a node speed collapses at any step.
    """
    if not (u.base is c0 or u.base.anchors(c0)):
        raise DomainError("initial speed must be anchored on the starting curve")
    if m < 1:
        raise DomainError("step count must be at least 1")
    man = c0.manifold
    eps = 1.0 / m
    curves = [c0]
    speeds = [u.components.copy()]
    energies = []
    cur, cs = c0, speeds[0]
    for i in range(m):
        try:
            st = _step_state(cur, cs)
        except ImmersionError as err:
            raise PropagationError(
                f"immersion lost at step {i}: {err}", step=i, node=err.node
            ) from err
        energies.append(_speed_energy(st))
        try:
            nxt_xy = man.exp(cur.xy, eps * cs)
            nxt = DiscreteCurve(man, nxt_xy)
        except (DomainError, ImmersionError) as err:
            node = getattr(err, "node", None)
            raise PropagationError(
                f"immersion lost at step {i + 1}: {err}", step=i + 1, node=node
            ) from err
        fac = man.transport_factor(cur.xy, nxt.xy)
        cs = from_complex(fac * as_complex(cs + eps * st.dcs))
        curves.append(nxt)
        speeds.append(cs)
        cur = nxt
    try:
        last = _first_order_state(cur, cs)
    except ImmersionError as err:
        raise PropagationError(
            f"immersion lost at step {m}: {err}", step=m, node=err.node
        ) from err
    dq = last[4]
    origin = man.inner(cur.xy[0], cs[0], cs[0])
    energies.append(float(origin + trapz(man.inner(cur.xy, dq, dq), cur.dt)))
    tangents = [CurveTangent(c, w) for c, w in zip(curves, speeds)]
    return GeodesicPath(curves, tangents, eps, energies)


def path_energy(p: GeodesicPath) -> float:
    """Action integral 1/2 int G(c_s, c_s) ds over the path."""
    return float(0.5 * trapz(p.energies, p.step))


def path_length(p: GeodesicPath) -> float:
    """Length int sqrt(G(c_s, c_s)) ds of the path."""
    return float(trapz(np.sqrt(p.energies), p.step))


def geodesic_distance(c0: DiscreteCurve, c1: DiscreteCurve, tol: float = 1e-3,
                      max_iter: int = 10, m: int = DEFAULT_STEPS) -> float:
    """Geodesic distance between two curves: the length sqrt(G(u, u)) of the
    connecting geodesic found by shooting.

    Raises :class:`ConvergenceError` when shooting does not reach ``tol``.
    """
    from .shooting import shoot  # deferred: shooting builds on this module

    result = shoot(c0, c1, tol=tol, max_iter=max_iter, m=m)
    return float(np.sqrt(metric_G(c0, result.u, result.u)))


def raise_srv(p: GeodesicPath):
    """Raise the square-root-velocity surface q(s, t) into the fixed tangent
    space at c(0, 0) by transporting first along each curve to its origin,
    then along the origin curve back to s = 0.

    Returns an (m+1, n, 2) array of components, all anchored at c(0, 0);
    the transports are isometries so pointwise norms are preserved.
    """
    sfac = p.origin_factors()
    out = np.empty((p.m + 1, p.n, 2))
    for i, c in enumerate(p.curves):
        q = as_complex(finite_velocity(c).components)
        f = p.manifold.norm(c.xy, from_complex(q))
        q /= np.sqrt(f)
        out[i] = from_complex(sfac[i] * c.transport_field_to_origin(from_complex(q)))
    return out


def holonomy_term(p: GeodesicPath, i: int, j: int) -> TangentVector:
    """Curvature correction Omega(s_i, t_j): the holonomy accumulated by
    sliding q(s, t) around the rectangle [0, s] x [0, t], expressed in the
    tangent space at c(0, 0).

    Omega(s, t) = P^{s,0}( int_0^t P^{tau,0}( R(c_tau, c_s) P^{t,tau} q(s,t) ) dtau )
    with trapezoid quadrature and composed per-segment transports.
    """
    if not (0 <= i <= p.m and 0 <= j < p.n):
        raise DomainError(f"path indices out of range: ({i}, {j})")
    anchor = p.curves[0].point(0)
    if j == 0:
        return TangentVector(anchor, 0.0, 0.0)
    c = p.curves[i]
    man = p.manifold
    xy = c.xy
    cs = p.speeds[i].components
    ct, _, f, q, _, _ = _first_order_state(c, cs)
    cumfac = _cumulative_factors(c)

    qj = as_complex(q[j])
    idx = np.arange(j + 1)
    w = from_complex(qj * cumfac[idx] / cumfac[j])        # q(s,t) carried to tau
    g = man.curvature(xy[idx], ct[idx], cs[idx], w)       # R(c_tau, c_s) ...
    g0 = as_complex(g) / cumfac[idx]                      # carried to tau = 0
    total = c.dt * (np.sum(g0) - 0.5 * g0[0] - 0.5 * g0[-1])
    omega = p.origin_factors()[i] * total
    return TangentVector(anchor, omega.real, omega.imag)


def horizontal_vertical_split(c: DiscreteCurve, h: CurveTangent):
    """Split a field against the starting-point fiber bundle: the horizontal
    part is the parallel field spreading h(0) along the curve, the vertical
    part is the remainder (vanishing at t = 0 exactly)."""
    if not (h.base is c or h.base.anchors(c)):
        raise DomainError("field is not anchored on the given curve")
    cumfac = _cumulative_factors(c)
    h0 = from_complex(cumfac * as_complex(h.components[0]))
    horizontal = CurveTangent(c, h0)
    return horizontal, CurveTangent(c, h.components - h0)
