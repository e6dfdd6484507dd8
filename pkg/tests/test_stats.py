"""Fréchet mean tests: fixed points, symmetry and descent."""

import numpy as np
import pytest

from geocurve.curve import DiscreteCurve, metric_G, pointwise_l2_log
from geocurve.errors import ConvergenceError, DomainError
from geocurve.geodesic import geodesic_distance
from geocurve.manifold import HYPERBOLIC
from geocurve.stats import CurveEnsemble, frechet_mean, frechet_variance
from oracles import hyperbolic_geodesic_arc


def mirror_pair(n=15):
    """Two half-plane curves that are reflections of each other across the
    vertical axis, which is an isometry fixing x = 0.

    The y-profile is strictly monotone so the square-root-velocity field
    never vanishes along the connecting deformation (the shooting regime is
    only local, and a simultaneous zero of both coordinate velocities would
    degenerate the problem)."""
    a = DiscreteCurve.from_function(HYPERBOLIC, lambda t: (0.08 + 0.25 * t, 1.0 + 0.3 * t), n)
    b = DiscreteCurve(HYPERBOLIC, np.column_stack([-a.xy[:, 0], a.xy[:, 1]]))
    return a, b


class TestEnsemble:
    def test_needs_members(self):
        with pytest.raises(DomainError):
            CurveEnsemble([])

    def test_rejects_mixed_grids(self):
        a, _ = mirror_pair(10)
        b, _ = mirror_pair(12)
        with pytest.raises(DomainError):
            CurveEnsemble([a, b])


class TestFrechetMean:
    def test_single_member_returns_it(self):
        a, _ = mirror_pair(12)
        mean = frechet_mean(CurveEnsemble([a]), tol=1e-3)
        assert np.array_equal(mean.xy, a.xy)

    def test_identical_members_return_member(self):
        a, _ = mirror_pair(12)
        copies = CurveEnsemble([a, DiscreteCurve(HYPERBOLIC, a.xy.copy()), a])
        mean = frechet_mean(copies, tol=1e-3)
        assert np.array_equal(mean.xy, a.xy)

    def test_mirror_pair_mean_sits_on_axis(self):
        tol = 1e-3
        a, b = mirror_pair(15)
        mean = frechet_mean(CurveEnsemble([a, b]), tol=tol)
        assert np.max(np.abs(mean.xy[:, 0])) < 10.0 * tol

    def test_fixed_point(self):
        tol = 1e-3
        a, b = mirror_pair(15)
        mean = frechet_mean(CurveEnsemble([a, b]), tol=tol)
        again = frechet_mean(CurveEnsemble([mean, a, b][:1]), tol=tol)
        assert np.array_equal(again.xy, mean.xy)
        # restarting the two-member problem from the converged mean moves it
        # by less than tol in one gradient step
        restarted = frechet_mean(CurveEnsemble([mean, a, b][0:1] + [a, b]), tol=tol, max_iter=3)
        gap = pointwise_l2_log(mean, restarted).l2_norm()
        assert gap < tol

    def test_accumulation_order_insensitive(self):
        # same starting member, the rest permuted: the fixed-order reduction
        # changes only by floating rounding
        a, b = mirror_pair(12)
        c = hyperbolic_geodesic_arc((0.0, 1.1), (0.25, 1.4), 12)
        m1 = frechet_mean(CurveEnsemble([a, b, c]), tol=1e-3)
        m2 = frechet_mean(CurveEnsemble([a, c, b]), tol=1e-3)
        assert np.max(np.abs(m1.xy - m2.xy)) < 1e-9

    def test_descent_of_functional(self):
        a, b = mirror_pair(15)
        c = hyperbolic_geodesic_arc((0.05, 1.0), (0.35, 1.3), 15)
        ens = CurveEnsemble([a, b, c])
        mean = frechet_mean(ens, tol=1e-3)
        before = sum(geodesic_distance(a, mm) ** 2 for mm in ens.members)
        after = sum(geodesic_distance(mean, mm) ** 2 for mm in ens.members)
        assert after <= before + 1e-4

    def test_nonconvergence_reports_gradient(self):
        a, b = mirror_pair(15)
        with pytest.raises(ConvergenceError) as err:
            frechet_mean(CurveEnsemble([a, b]), tol=1e-9, max_iter=0)
        assert err.value.residual is not None

    def test_workers_do_not_change_result(self):
        a, b = mirror_pair(12)
        m1 = frechet_mean(CurveEnsemble([a, b]), tol=1e-3, workers=1)
        m2 = frechet_mean(CurveEnsemble([a, b]), tol=1e-3, workers=4)
        assert np.array_equal(m1.xy, m2.xy)


class TestFrechetVariance:
    def test_identical_members_zero(self):
        a, _ = mirror_pair(12)
        ens = CurveEnsemble([a, DiscreteCurve(HYPERBOLIC, a.xy.copy())])
        assert frechet_variance(ens, a) < 1e-6

    def test_two_member_definition(self):
        a, b = mirror_pair(15)
        mean = frechet_mean(CurveEnsemble([a, b]), tol=1e-3)
        d1 = geodesic_distance(mean, a)
        d2 = geodesic_distance(mean, b)
        var = frechet_variance(CurveEnsemble([a, b]), mean)
        assert var == pytest.approx(0.5 * (d1**2 + d2**2), rel=1e-6)

    def test_mirror_distances_balanced(self):
        a, b = mirror_pair(15)
        mean = frechet_mean(CurveEnsemble([a, b]), tol=1e-3)
        d1 = geodesic_distance(mean, a)
        d2 = geodesic_distance(mean, b)
        assert abs(d1 - d2) <= 0.02 * max(d1, d2)
