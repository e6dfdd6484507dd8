"""Shared independent oracles and analytic fixtures for the test suite.

Everything here stays clear of the propagation code paths it is used to
check: derivatives are taken in closed form and integrals use fine brute
quadrature.
"""

import numpy as np

from geocurve.curve import CurveTangent, DiscreteCurve
from geocurve.manifold import EUCLIDEAN, HYPERBOLIC


class AnalyticFlatFixture:
    """A flat base curve and deformation field with closed-form derivatives:
    c0(t) = (t, A sin 2t),  u(t) anchored so that u(0) = 0."""

    def __init__(self, base_amp=0.3, field_amp=0.5):
        self.base_amp = base_amp
        self.field_amp = field_amp

    def curve_xy(self, ts):
        return np.stack([ts, self.base_amp * np.sin(2.0 * ts)], axis=-1)

    def curve_speed(self, ts):
        return np.stack([np.ones_like(ts), 2.0 * self.base_amp * np.cos(2.0 * ts)], axis=-1)

    def field(self, ts):
        a = self.field_amp
        return np.stack(
            [a * np.sin(1.7 * ts + 0.4) - a * np.sin(0.4), a * ts * np.cos(1.1 * ts)],
            axis=-1,
        )

    def field_speed(self, ts):
        a = self.field_amp
        return np.stack(
            [
                1.7 * a * np.cos(1.7 * ts + 0.4),
                a * np.cos(1.1 * ts) - 1.1 * a * ts * np.sin(1.1 * ts),
            ],
            axis=-1,
        )

    def discrete(self, n):
        ts = np.linspace(0.0, 1.0, n)
        c0 = DiscreteCurve(EUCLIDEAN, self.curve_xy(ts))
        return c0, CurveTangent(c0, self.field(ts))

    def chart_endpoint(self, n, refine=20):
        """Continuum flat-chart geodesic endpoint at s = 1, sampled on the
        n-grid: straight line in the (origin, SRV) chart, integrated by
        trapezoid on a ``refine``-times finer grid."""
        tt = np.linspace(0.0, 1.0, refine * (n - 1) + 1)
        cp = self.curve_speed(tt)
        up = self.field_speed(tt)
        f = np.hypot(cp[:, 0], cp[:, 1])
        q0 = cp / np.sqrt(f)[:, None]
        dq0 = up / np.sqrt(f)[:, None] - 0.5 * ((up * cp).sum(1) / f**2.5)[:, None] * cp
        q1 = q0 + dq0
        big = np.hypot(q1[:, 0], q1[:, 1])[:, None] * q1
        dt = tt[1] - tt[0]
        cum = np.concatenate(
            [np.zeros((1, 2)), np.cumsum(0.5 * dt * (big[1:] + big[:-1]), axis=0)]
        )
        endpoint = self.curve_xy(np.zeros(1))[0] + self.field(np.zeros(1))[0] + cum
        return endpoint[::refine]


def bent_hyperbolic(n=50):
    """A representative non-geodesic half-plane curve."""
    return DiscreteCurve.from_function(
        HYPERBOLIC, lambda t: (0.6 * t - 0.3, 1.0 + 0.25 * np.sin(2.0 * t)), n
    )


def smooth_field(c, amp=0.5, zero_origin=False, seed=None):
    """A low-frequency deformation field along a curve; seeded variants draw
    random Fourier-style coefficients."""
    ts = c.grid
    if seed is None:
        w = np.stack([amp * np.sin(1.7 * ts + 0.4), amp * ts * np.cos(1.1 * ts)], axis=1)
    else:
        rng = np.random.default_rng(seed)
        coeff = rng.uniform(-amp, amp, size=(2, 3))
        w = np.stack(
            [
                coeff[0, 0] + coeff[0, 1] * np.sin(2 * ts) + coeff[0, 2] * ts,
                coeff[1, 0] + coeff[1, 1] * np.cos(ts) + coeff[1, 2] * ts * ts,
            ],
            axis=1,
        )
    if zero_origin:
        w -= w[0]
    return CurveTangent(c, w)


def hyperbolic_geodesic_arc(p, q, n):
    """Sample the half-plane geodesic arc between two points on n nodes."""
    from geocurve.manifold import ManifoldPoint

    p = ManifoldPoint(*p, HYPERBOLIC)
    q = ManifoldPoint(*q, HYPERBOLIC)
    u = HYPERBOLIC.log(p.xy, q.xy)
    ts = np.linspace(0.0, 1.0, n)
    pts = HYPERBOLIC.exp(np.tile(p.xy, (n, 1)), ts[:, None] * u)
    return DiscreteCurve(HYPERBOLIC, pts)


def hyperbolic_arc_pair(n=20):
    """Two geodesic arcs of the half-plane with a visible initial gap, the
    standard two-point boundary problem fixture."""
    c0 = hyperbolic_geodesic_arc((-0.5, 0.8), (0.5, 1.0), n)
    c1 = hyperbolic_geodesic_arc((-0.2, 1.3), (0.8, 1.6), n)
    return c0, c1


def random_hyperbolic_carrier(seed, n=30, amp=0.35):
    """A random bent half-plane curve with a random moderate speed field."""
    rng = np.random.default_rng(seed)
    x0, y0 = rng.uniform(-1.0, 1.0), rng.uniform(0.8, 2.0)
    slope = rng.uniform(-0.5, 0.5)
    wob = rng.uniform(-0.3, 0.3)
    c = DiscreteCurve.from_function(
        HYPERBOLIC,
        lambda t: (x0 + 0.6 * t + wob * np.sin(2 * t), y0 + slope * t + 0.2 * np.sin(1.3 * t)),
        n,
    )
    u = smooth_field(c, amp=amp, seed=seed + 1000)
    return c, u
