"""Intrinsic statistics of curve ensembles: Fréchet mean and variance.

The mean minimizes the sum of squared geodesic distances to the members and
is found by Riemannian gradient descent: per iteration, shoot from the
running mean to every member, average the initial speed fields, and step
along the curve-space exponential.  The per-member shooting subproblems are
independent; results are accumulated in member-index order so the reduction
is deterministic regardless of worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .curve import CurveTangent, DiscreteCurve, metric_G
from .errors import ConvergenceError, DomainError, GeocurveError
from .geodesic import DEFAULT_STEPS, curve_exp, geodesic_distance
from .shooting import shoot

DEFAULT_MEAN_ITER = 20


class CurveEnsemble:
    """p >= 1 curves sharing one grid and one backend."""

    def __init__(self, members):
        members = list(members)
        if not members:
            raise DomainError("an ensemble needs at least one member")
        first = members[0]
        for c in members[1:]:
            if c.manifold is not first.manifold:
                raise DomainError("ensemble members live on different backends")
            if c.n != first.n:
                raise DomainError("ensemble members have different sample counts")
        self.members = members

    @property
    def p(self) -> int:
        return len(self.members)

    @property
    def n(self) -> int:
        return self.members[0].n

    @property
    def manifold(self):
        return self.members[0].manifold

    def __repr__(self):
        return f"CurveEnsemble(p={self.p}, n={self.n}, {self.manifold.name})"


def _member_speeds(mean, members, inner_tol, max_iter, m, workers):
    def solve(indexed):
        j, member = indexed
        try:
            return shoot(mean, member, tol=inner_tol, max_iter=max_iter, m=m).u.components
        except GeocurveError as err:
            raise ConvergenceError(f"shooting from the mean to member {j} failed: {err}") from err

    jobs = list(enumerate(members))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(solve, jobs))
    return [solve(job) for job in jobs]


def frechet_mean(
    ensemble: CurveEnsemble,
    tol: float = 1e-3,
    max_iter: int = DEFAULT_MEAN_ITER,
    m: int = DEFAULT_STEPS,
    workers: int = 1,
) -> DiscreteCurve:
    """Fréchet (intrinsic) mean of the ensemble.

    Starts at member 0 and stops when the G-norm of the averaged initial
    speed field drops below ``tol``.  The inner shooting tolerance is tol/10
    so per-member errors stay below the outer stopping test.

    Raises :class:`ConvergenceError` on a failed member shot or when
    ``max_iter`` iterations do not reach the gradient tolerance.
    """
    if not tol > 0.0:
        raise DomainError("tolerance must be positive")
    mean = ensemble.members[0]
    inner_tol = tol / 10.0
    grad_norm = np.inf
    for _ in range(max_iter + 1):
        speeds = _member_speeds(mean, ensemble.members, inner_tol, 10, m, workers)
        avg = np.zeros((ensemble.n, 2))
        for comp in speeds:  # fixed-order reduction
            avg += comp
        avg /= ensemble.p
        grad = CurveTangent(mean, avg)
        grad_norm = float(np.sqrt(metric_G(mean, grad, grad)))
        if grad_norm < tol:
            return mean
        mean = curve_exp(mean, grad, m).endpoint()
    raise ConvergenceError(
        f"mean did not converge in {max_iter} iterations "
        f"(gradient norm {grad_norm:.3e})",
        residual=grad_norm,
    )


def frechet_variance(
    ensemble: CurveEnsemble,
    mean: DiscreteCurve,
    tol: float = 1e-3,
    max_iter: int = 10,
    m: int = DEFAULT_STEPS,
) -> float:
    """Mean squared geodesic distance from the given mean to the members."""
    total = 0.0
    for j, member in enumerate(ensemble.members):
        try:
            total += geodesic_distance(mean, member, tol=tol, max_iter=max_iter, m=m) ** 2
        except GeocurveError as err:
            raise ConvergenceError(f"distance to member {j} failed: {err}") from err
    return total / ensemble.p
