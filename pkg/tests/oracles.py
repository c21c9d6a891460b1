"""Independent reference computations used by the tests."""

import math

import numpy as np
from scipy import integrate

from filippov.expr import Jet


def quadrature_sweep(F, center, radius, t0=0.0, t1=2 * math.pi):
    """Angle swept by ``F`` along a circle arc, as the integral of
    ``(A1 dA2 - A2 dA1) / |A|^2`` with ``dA`` from exact jets.
    """
    cx, cy = center

    def rate(t):
        x, y = cx + radius * math.cos(t), cy + radius * math.sin(t)
        dx, dy = -radius * math.sin(t), radius * math.cos(t)
        u, v = F(Jet.var_x(x), Jet.var_y(y))
        u = u if isinstance(u, Jet) else Jet(u)
        v = v if isinstance(v, Jet) else Jet(v)
        du = u.dx * dx + u.dy * dy
        dv = v.dx * dx + v.dy * dy
        return (u.value * dv - v.value * du) / (u.value ** 2 + v.value ** 2)

    value, _ = integrate.quad(rate, t0, t1, epsabs=1e-12, epsrel=1e-12, limit=500)
    return value


def dense_angle_sweep(F, center, radius, samples=10_000):
    """Angle accumulation of ``F`` on ``samples`` equally spaced circle points."""
    t = np.linspace(0.0, 2 * math.pi, samples + 1)
    x = center[0] + radius * np.cos(t)
    y = center[1] + radius * np.sin(t)
    u, v = F(x, y)
    u = np.broadcast_to(np.asarray(u, float), t.shape)
    v = np.broadcast_to(np.asarray(v, float), t.shape)
    ang = np.unwrap(np.arctan2(v, u))
    return float(ang[-1] - ang[0])


def jacobian_sign_index(F, point, h=1e-6):
    """Sign of the Jacobian determinant of ``F`` at a nondegenerate zero."""
    x, y = point
    u1, v1 = F(x + h, y)
    u0, v0 = F(x - h, y)
    u3, v3 = F(x, y + h)
    u2, v2 = F(x, y - h)
    det = ((u1 - u0) * (v3 - v2) - (u3 - u2) * (v1 - v0)) / (4 * h * h)
    return int(np.sign(det))
