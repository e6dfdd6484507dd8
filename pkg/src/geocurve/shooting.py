"""Jacobi fields along curve-space geodesics and geodesic shooting.

A Jacobi field J(s, .) measures how geodesics of the space of curves spread
out; it solves a second-order linear ODE in s whose coefficients come from
the carrier geodesic.  The propagation rebuilds, per s-slice, the carrier
state used by the exponential map and then assembles the second variation of
J from the linearized geodesic equations: the a-derivatives of the
square-root-velocity field, of the curvature integral r, and of the geodesic
equations themselves, followed by a transported t-integration and an explicit
Euler step in s.

Shooting corrects the initial speed u of the exponential map by the Newton
update u <- u + alpha * phi^{-1}(gap), where phi maps an initial Jacobi
derivative (with J(0) = 0) to the endpoint value J(1), assembled column by
column from canonical basis fields.  Damping (alpha halved on residual
increase, floored at 1/16) guards the update outside the small-gap regime.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .curve import CurveTangent, DiscreteCurve, pointwise_l2_log
from .errors import ConvergenceError, DomainError, PropagationError
from .geodesic import (
    DEFAULT_STEPS,
    GeodesicPath,
    _step_state,
    _transported_integral,
    curve_exp,
)
from .manifold import as_complex, from_complex

# Tikhonov fallback threshold and weight for the phi solve.
CONDITION_LIMIT = 1e12
TIKHONOV = 1e-10

ALPHA_FLOOR = 1.0 / 16.0


class ShootResult(NamedTuple):
    """Converged two-point problem: the geodesic path, its initial speed, the
    iteration count / final endpoint residual, and the residual history
    (initial gap first, one entry per accepted iteration after it)."""

    path: GeodesicPath
    u: CurveTangent
    iterations: int
    residual: float
    history: tuple


class _CarrierExtras(NamedTuple):
    """s-derivatives of carrier scalars and frames needed by the Jacobi step."""

    sqrt_f: np.ndarray
    inv_sqrt: np.ndarray      # ||c_t||^(-1/2)
    d_inv_sqrt: np.ndarray    # d/ds of it
    d2_inv_sqrt: np.ndarray   # d2/ds2 of it
    dv: np.ndarray            # nabla_s v
    d2v: np.ndarray           # nabla_s nabla_s v


def _carrier_extras(st) -> _CarrierExtras:
    man = st.curve.manifold
    xy = st.curve.xy
    f, v = st.f, st.v
    fp = man.inner(xy, st.dct, v)
    fpp = man.inner(xy, st.d2ct, v) + (man.inner(xy, st.dct, st.dct) - fp**2) / f
    dv = st.dct / f[:, None] - (fp / f)[:, None] * v
    d2v = (
        st.d2ct / f[:, None]
        - 2.0 * (fp / f**2)[:, None] * st.dct
        + (2.0 * fp**2 / f**3 - fpp / f**2)[:, None] * st.ct
    )
    sqrt_f = np.sqrt(f)
    inv_sqrt = 1.0 / sqrt_f
    d_inv_sqrt = -0.5 * f**-1.5 * fp
    d2_inv_sqrt = 0.75 * f**-2.5 * fp**2 - 0.5 * f**-1.5 * fpp
    return _CarrierExtras(sqrt_f, inv_sqrt, d_inv_sqrt, d2_inv_sqrt, dv, d2v)


def _second_variation(st, ex: _CarrierExtras, J, W):
    """nabla_s nabla_s J for a batch of Jacobi states, shape (B, n, 2)."""
    man = st.curve.manifold
    xy = st.curve.xy
    n = st.curve.n
    dt = st.curve.dt
    cs, ct, q, dq, v, r, rT, dcs, dct = (
        st.cs, st.ct, st.q, st.dq, st.v, st.r, st.rT, st.dcs, st.dct,
    )

    def inner(a, b):
        return man.inner(xy, a, b)[..., None]

    def tang(a):
        return inner(a, v) * v

    bwd = st.curve.segment_factors(backward=True)
    fwd = st.curve.segment_factors()

    def t_derivative(field):
        z = as_complex(field)
        out = np.empty_like(z)
        out[..., :-1] = (n - 1) * (bwd * z[..., 1:] - z[..., :-1])
        out[..., -1] = (n - 1) * (z[..., -1] - fwd[-1] * z[..., -2])
        return from_complex(out)

    ntJ = t_derivative(J)                                     # nabla_t J
    ntW = t_derivative(W)                                     # nabla_t nabla_s J
    nstJ = ntW + man.curvature(xy, cs, ct, J)                 # nabla_s nabla_t J

    ntJ_tang = tang(ntJ)
    nstJ_tang = tang(nstJ)
    half_pair = 0.5 * inner(ntJ, ex.dv) * v + 0.5 * inner(ntJ, v) * ex.dv

    naq = ex.inv_sqrt[:, None] * (ntJ - 0.5 * ntJ_tang)
    nansq = (
        ex.inv_sqrt[:, None] * (nstJ - 0.5 * nstJ_tang - half_pair)
        + ex.d_inv_sqrt[:, None] * (ntJ - 0.5 * ntJ_tang)
        + man.curvature(xy, J, cs, q)
    )
    navt = (
        man.curvature(xy, naq, dq, cs)
        + man.curvature(xy, q, nansq, cs)
        + man.curvature(xy, q, dq, W)
    )
    # a-derivative of r = int_t^1 [R(q, nabla_s q) c_s]^{tau,t}: the integrand
    # variation plus the first variation of the transports, which collapses
    # (Fubini over the nested curvature integral) onto the carrier's own r:
    #   nabla_a r(t) = int_t^1 [navt]^{tau,t} - int_t^1 [R(c_t, J) r]^{tau,t}
    transport_var = man.curvature(xy, ct, J, r)
    nar = from_complex(
        _transported_integral(st.cumfac, as_complex(navt), dt, reverse=True)
        - _transported_integral(st.cumfac, as_complex(transport_var), dt, reverse=True)
    )

    nansnsq = -ex.sqrt_f[:, None] * (nar + tang(nar)) - ex.inv_sqrt[:, None] * (
        inner(r, ntJ) * v + man.inner(xy, r, v)[:, None] * ntJ
        + 0.5 * inner(ntJ, v) * (r - 3.0 * rT)
    )

    w12 = (
        inner(nstJ, ex.dv) * v
        + inner(nstJ, v) * ex.dv
        + inner(ntJ, ex.dv) * ex.dv
        + 0.5 * inner(ntJ, ex.d2v) * v
        + 0.5 * inner(ntJ, v) * ex.d2v
        + ex.sqrt_f[:, None]
        * (
            nansnsq
            - 2.0 * ex.d_inv_sqrt[:, None] * (nstJ - 0.5 * nstJ_tang - half_pair)
            - ex.d2_inv_sqrt[:, None] * (ntJ - 0.5 * ntJ_tang)
            + man.curvature(xy, cs, J, dq)
            + man.curvature(xy, dcs, J, q)
            + man.curvature(xy, cs, W, q)
            + man.curvature(xy, cs, J, dq)
        )
    )
    nsstJ = w12 + tang(w12)

    integrand = (
        nsstJ
        + 2.0 * man.curvature(xy, ct, cs, W)
        + man.curvature(xy, dct, cs, J)
        + man.curvature(xy, ct, dcs, J)
    )
    init0 = -nar[..., 0, :] + man.curvature(xy[0], cs[0], J[..., 0, :], cs[0])
    accum = _transported_integral(st.cumfac, as_complex(integrand), dt)
    return from_complex(st.cumfac * as_complex(init0)[..., None] + accum)


def _propagate_batch(p: GeodesicPath, J0, W0):
    """Propagate a (B, n, 2) batch of Jacobi initial conditions along p."""
    man = p.manifold
    eps = p.step
    J = np.array(J0, dtype=float)
    W = np.array(W0, dtype=float)
    for i in range(p.m):
        st = _step_state(p.curves[i], p.speeds[i].components)
        ex = _carrier_extras(st)
        nssJ = _second_variation(st, ex, J, W)
        nxt = man.transport_factor(p.curves[i].xy, p.curves[i + 1].xy)
        J = from_complex(nxt * (as_complex(J) + eps * as_complex(W)))
        W = from_complex(nxt * (as_complex(W) + eps * as_complex(nssJ)))
    return J


def jacobi_propagate(p: GeodesicPath, J0: CurveTangent, W0: CurveTangent) -> CurveTangent:
    """Endpoint value J(1, .) of the Jacobi field along the carrier geodesic
    with initial value J0 and initial derivative W0 on p.curves[0]."""
    for field in (J0, W0):
        if not (field.base is p.curves[0] or field.base.anchors(p.curves[0])):
            raise DomainError("Jacobi initial data must be anchored on the path start")
    out = _propagate_batch(p, J0.components[None], W0.components[None])
    return CurveTangent(p.endpoint(), out[0])


def assemble_phi(p: GeodesicPath):
    """Matrix of the map W0 -> J(1) with J(0) = 0: columns are the flattened
    endpoint fields of the 2n canonical basis derivatives e_{j, alpha}.

    The columns are propagated as one batch, which fills fixed column slots
    deterministically.
    """
    two_n = 2 * p.n
    basis = np.eye(two_n).reshape(two_n, p.n, 2)
    out = _propagate_batch(p, np.zeros_like(basis), basis)
    return out.reshape(two_n, two_n).T


def _solve_linear(phi, rhs):
    cond = np.linalg.cond(phi)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        reg = phi.T @ phi + TIKHONOV * np.eye(phi.shape[1])
        return np.linalg.solve(reg, phi.T @ rhs)
    return np.linalg.solve(phi, rhs)


def shoot(
    c0: DiscreteCurve,
    c1: DiscreteCurve,
    tol: float = 1e-3,
    max_iter: int = 10,
    m: int = DEFAULT_STEPS,
    freeze_phi: bool = False,
) -> ShootResult:
    """Solve the two-point geodesic problem between two curves.

    Starts from the nodewise L2 logarithm and iterates Newton-like updates of
    the initial speed until the L2 gap between the propagated endpoint and the
    target drops below ``tol``.  ``freeze_phi`` reuses the first assembled
    Jacobi matrix across iterations (cheaper, more iterations).

    Raises :class:`ConvergenceError` after ``max_iter`` iterations.
    """
    if not tol > 0.0:
        raise DomainError("shooting tolerance must be positive")
    u = pointwise_l2_log(c0, c1)
    path = curve_exp(c0, u, m)
    gap = pointwise_l2_log(path.endpoint(), c1)
    residual = gap.l2_norm()
    history = [residual]
    iterations = 0
    phi = None

    while residual >= tol:
        if iterations >= max_iter:
            raise ConvergenceError(
                f"shooting did not reach tol={tol:g} in {max_iter} iterations "
                f"(residual {residual:.3e})",
                residual=residual,
            )
        if phi is None or not freeze_phi:
            phi = assemble_phi(path)
        delta = _solve_linear(phi, gap.components.reshape(-1)).reshape(c0.n, 2)

        alpha = 1.0
        while True:
            cand_u = CurveTangent(c0, u.components + alpha * delta)
            try:
                cand_path = curve_exp(c0, cand_u, m)
                cand_gap = pointwise_l2_log(cand_path.endpoint(), c1)
                cand_res = cand_gap.l2_norm()
            except PropagationError:
                cand_path = None
                cand_res = np.inf
            if cand_path is not None and cand_res <= residual + tol / 10.0:
                break
            if alpha <= ALPHA_FLOOR * (1.0 + 1e-12):
                if cand_path is None:
                    raise ConvergenceError(
                        "shooting update degenerates the curve even at the "
                        f"damping floor (residual {residual:.3e})",
                        residual=residual,
                    )
                break
            alpha *= 0.5

        u, path, gap, residual = cand_u, cand_path, cand_gap, cand_res
        history.append(residual)
        iterations += 1

    return ShootResult(path, u, iterations, float(residual), tuple(history))
