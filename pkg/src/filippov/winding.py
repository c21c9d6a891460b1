"""Index of a planar Filippov field on a circle.

The circle is traversed counterclockwise.  Along arcs inside ``f > 0`` the
angle swept by ``F+`` is accumulated, along arcs inside ``f < 0`` the angle
swept by ``F-``, and at each crossing of the switching curve the angle swept
by the straight-line homotopy from the outgoing piece to the incoming one is
added.  That corner angle is what a thin regularization band contributes in
the limit, so the total divided by ``2 pi`` is an integer.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from .core import (
    CLASS_TOL,
    TOL,
    PlanarFilippovField,
    Singularity,
    SigmaTag,
    classify_sigma_point,
    find_singularities,
    is_removable,
    _sliding_raw,
)
from .errors import (
    DegenerateDeterminant,
    FieldVanishesOnArc,
    IndexComputationError,
    IntegerResidualTooLarge,
    NonTransversalIntersection,
    NotIsolated,
    RadiusDependence,
    SegmentThroughOrigin,
    SingularityOnBoundary,
)

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
INTEGER_TOL = 1e-6
# start the circle off the coordinate axes so symmetric inputs do not put a
# switching point exactly on a sample
ARC_PHASE = 0.1234567890123


@dataclass(frozen=True)
class ArcSpec:
    center: tuple
    radius: float
    t_start: float = 0.0
    t_end: float = TWO_PI

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if not self.t_end > self.t_start:
            raise ValueError("arcs run counterclockwise: t_end must exceed t_start")

    def point(self, t):
        cx, cy = self.center
        return cx + self.radius * np.cos(t), cy + self.radius * np.sin(t)

    def tangent(self, t):
        return -self.radius * np.sin(t), self.radius * np.cos(t)


@dataclass(frozen=True)
class SweepResult:
    total_angle: float
    min_norm: float
    samples: int
    t: np.ndarray = field(default=None, repr=False, compare=False)
    vx: np.ndarray = field(default=None, repr=False, compare=False)
    vy: np.ndarray = field(default=None, repr=False, compare=False)


def _field_on_arc(F, arc: ArcSpec, t):
    x, y = arc.point(t)
    u, v = F(x, y)
    return (np.broadcast_to(np.asarray(u, float), t.shape),
            np.broadcast_to(np.asarray(v, float), t.shape))


def sweep_along_arc(F, arc: ArcSpec, tol: float = TOL, max_rounds: int = 60) -> SweepResult:
    """Angle swept by ``F`` along ``arc`` by adaptive angle accumulation.

    Every sub-interval ends up no longer than a thousandth of the arc and
    turns the field by at most ``pi/4``.
    """
    length = arc.t_end - arc.t_start
    n0 = 1000
    t = np.linspace(arc.t_start, arc.t_end, n0 + 1)
    u, v = _field_on_arc(F, arc, t)
    u, v = np.array(u), np.array(v)
    min_dt = 1e-13 * max(1.0, length)
    for _ in range(max_rounds):
        dtheta = np.arctan2(u[:-1] * v[1:] - v[:-1] * u[1:], u[:-1] * u[1:] + v[:-1] * v[1:])
        bad = np.abs(dtheta) > math.pi / 4
        bad &= np.diff(t) > min_dt
        if not bad.any():
            break
        tm = 0.5 * (t[:-1][bad] + t[1:][bad])
        um, vm = _field_on_arc(F, arc, tm)
        pos = np.flatnonzero(bad) + 1
        t = np.insert(t, pos, tm)
        u = np.insert(u, pos, um)
        v = np.insert(v, pos, vm)
    norms = np.hypot(u, v)
    min_norm = float(norms.min()) if np.all(np.isfinite(norms)) else 0.0
    if not min_norm > tol:
        k = int(np.argmin(np.where(np.isfinite(norms), norms, -1.0)))
        raise FieldVanishesOnArc(
            f"field norm {min_norm:.3g} <= {tol:g} near {tuple(map(float, arc.point(t[k])))}"
        )
    dtheta = np.arctan2(u[:-1] * v[1:] - v[:-1] * u[1:], u[:-1] * u[1:] + v[:-1] * v[1:])
    return SweepResult(float(dtheta.sum()), min_norm, int(t.size), t, u, v)


def _det(a, b):
    """``det(a | b)`` with ``a`` and ``b`` as columns."""
    return a[0] * b[1] - a[1] * b[0]


def corner_H(A, B) -> float:
    """``(|A|^2 - <A, B>) / det(B | A)``."""
    d = _det(B, A)
    if abs(d) <= 1e-12 * math.hypot(*A) * math.hypot(*B):
        raise DegenerateDeterminant(f"det(B|A) = {d:.3g} for A={tuple(A)}, B={tuple(B)}")
    return (A[0] * A[0] + A[1] * A[1] - (A[0] * B[0] + A[1] * B[1])) / d


def segment_min_norm(A, B) -> float:
    """``min over lam in [0, 1] of |(1 - lam) A + lam B|`` in closed form."""
    dx, dy = B[0] - A[0], B[1] - A[1]
    dd = dx * dx + dy * dy
    lam = 0.0 if dd == 0 else min(1.0, max(0.0, -(A[0] * dx + A[1] * dy) / dd))
    return math.hypot(A[0] + lam * dx, A[1] + lam * dy)


def corner_sweep(A, B) -> float:
    """Signed angle swept along the segment from ``A`` to ``B``."""
    A = (float(A[0]), float(A[1]))
    B = (float(B[0]), float(B[1]))
    na, nb = math.hypot(*A), math.hypot(*B)
    if segment_min_norm(A, B) <= 1e-12 * max(na, nb, 1e-300):
        raise SegmentThroughOrigin(f"segment from {A} to {B} passes through the origin")
    if abs(_det(A, B)) <= 1e-12 * na * nb:
        return 0.0
    return math.atan(corner_H(B, A)) - math.atan(corner_H(A, B))


@dataclass(frozen=True)
class BallIndex:
    """Outcome of an index computation on one circle."""

    index: int
    raw: float
    residual: float
    crossings: tuple = ()
    arcs: tuple = ()
    corners: tuple = ()


def _sigma_crossings(Z: PlanarFilippovField, center, radius, n=4096):
    """Parameters in ``[phase, phase + 2 pi)`` where the circle meets ``f = 0``."""
    arc = ArcSpec(center, radius, ARC_PHASE, ARC_PHASE + TWO_PI)
    t = np.linspace(arc.t_start, arc.t_end, n, endpoint=False)
    g = np.asarray(Z.switch(*arc.point(t)), float)
    pos = g >= 0
    roots = []
    for k in np.flatnonzero(pos != np.roll(pos, -1)):
        a = t[k]
        b = t[k + 1] if k + 1 < n else arc.t_end

        def gt(s):
            return float(Z.switch(*arc.point(s)))

        r = optimize.brentq(gt, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        roots.append(r)
    _reject_touching(Z, arc, t, g, pos)
    return sorted(roots), pos


def _reject_touching(Z, arc, t, g, pos, tol=1e-9):
    """Raise if the circle touches ``f = 0`` without crossing it."""
    mag = np.abs(g)
    n = len(t)
    dt = t[1] - t[0]
    scale = max(float(mag.max()), 1e-300)
    for k in np.flatnonzero((mag <= np.roll(mag, 1)) & (mag <= np.roll(mag, -1))):
        if pos[k - 1] != pos[k] or pos[k] != pos[(k + 1) % n]:
            continue
        res = optimize.minimize_scalar(
            lambda s: abs(float(Z.switch(*arc.point(s)))),
            bounds=(t[k] - dt, t[k] + dt), method="bounded", options={"xatol": 1e-13},
        )
        if res.fun <= tol * scale:
            x, y = arc.point(res.x)
            raise NonTransversalIntersection(
                f"circle touches the switching curve at ({float(x):.6g}, {float(y):.6g})"
            )


def ball_index(Z: PlanarFilippovField, center, radius, tol: float = TOL,
               class_tol: float = CLASS_TOL) -> BallIndex:
    """Index of ``Z`` on the circle of ``radius`` about ``center``."""
    center = (float(center[0]), float(center[1]))
    radius = float(radius)
    if not Z.domain.contains_ball(center, radius):
        raise ValueError(f"ball {center}, r={radius} is not contained in {Z.domain.as_tuple()}")
    roots, pos = _sigma_crossings(Z, center, radius)
    if len(roots) == 0:
        sign = 1 if pos[0] else -1
        arc = ArcSpec(center, radius, ARC_PHASE, ARC_PHASE + TWO_PI)
        sweep = _sweep_piece(Z.piece(sign), arc, tol)
        total = sweep.total_angle
        arcs = ((sign, arc.t_start, arc.t_end, total),)
        corners = ()
    else:
        if len(roots) != 2:
            raise NonTransversalIntersection(
                f"circle meets the switching curve in {len(roots)} points; use a smaller ball"
            )
        for r in roots:
            _check_transversal(Z, center, radius, r)
        ta, tb = roots
        mid_a = np.asarray(Z.switch(*ArcSpec(center, radius).point(0.5 * (ta + tb))), float)
        side_ab = 1 if mid_a > 0 else -1
        pieces = ((side_ab, ta, tb), (-side_ab, tb, ta + TWO_PI))
        total = 0.0
        arcs = []
        for sign, t0, t1 in pieces:
            s = _sweep_piece(Z.piece(sign), ArcSpec(center, radius, t0, t1), tol)
            arcs.append((sign, t0, t1, s.total_angle))
            total += s.total_angle
        corners = []
        # at tb the boundary leaves side_ab; at ta it enters it
        for t_q, before, after in ((tb, side_ab, -side_ab), (ta, -side_ab, side_ab)):
            q = ArcSpec(center, radius).point(t_q)
            q = (float(q[0]), float(q[1]))
            a = Z.piece(before)(*q)
            b = Z.piece(after)(*q)
            _check_sigma_point(Z, q, class_tol, tol)
            try:
                c = corner_sweep(a, b)
            except SegmentThroughOrigin as exc:
                raise SingularityOnBoundary(f"pseudo-equilibrium on the circle at {q}") from exc
            corners.append((q, before, after, c))
            total += c
        arcs = tuple(arcs)
        corners = tuple(corners)
    raw = total / TWO_PI
    k = int(round(raw))
    residual = abs(raw - k)
    if residual > INTEGER_TOL:
        raise IntegerResidualTooLarge(f"raw index {raw!r} is {residual:.3g} from an integer")
    return BallIndex(k, raw, residual, tuple(roots), arcs, corners)


def _sweep_piece(F, arc, tol):
    try:
        return sweep_along_arc(F, arc, tol)
    except FieldVanishesOnArc as exc:
        raise SingularityOnBoundary(f"equilibrium of a piece on the circle: {exc}") from exc


def _check_transversal(Z, center, radius, t):
    arc = ArcSpec(center, radius)
    x, y = arc.point(t)
    j = Z.switch.jet(float(x), float(y))
    tx, ty = arc.tangent(t)
    g = math.hypot(j.dx, j.dy)
    if g == 0 or abs(j.dx * tx + j.dy * ty) <= 1e-6 * g * radius:
        raise NonTransversalIntersection(f"circle is tangent to the switching curve at {(x, y)}")


def _check_sigma_point(Z, q, class_tol, tol):
    c = classify_sigma_point(Z, q, max(class_tol, abs(float(Z.switch(*q)))))
    Fp, Fm = Z.fplus(*q), Z.fminus(*q)
    if c.tag in (SigmaTag.BOUNDARY_EQ_PLUS, SigmaTag.BOUNDARY_EQ_MINUS):
        raise SingularityOnBoundary(f"boundary equilibrium on the circle at {q}")
    if not c.is_regular:
        if not is_removable(Fp, Fm, tol):
            raise SingularityOnBoundary(f"tangential singularity ({c.tag}) on the circle at {q}")
    elif c.tag in (SigmaTag.SLIDING, SigmaTag.ESCAPING):
        zs = _sliding_raw(Fp, Fm, c.lie_plus, c.lie_minus)
        if math.hypot(float(zs[0]), float(zs[1])) <= class_tol:
            raise SingularityOnBoundary(f"pseudo-equilibrium on the circle at {q}")


def filippov_index_on_ball(Z: PlanarFilippovField, center, radius, tol: float = TOL,
                           class_tol: float = CLASS_TOL) -> int:
    return ball_index(Z, center, radius, tol, class_tol).index


def isolation_radius(Z: PlanarFilippovField, s: Singularity, others) -> float:
    loc = s.location
    r = 0.5 * Z.domain.margin(loc)
    for o in others:
        d = o.distance(loc)
        if d > 1e-6:
            r = min(r, 0.5 * d)
    return r


def index_at_singularity(Z: PlanarFilippovField, s: Singularity, others=None,
                         grid_n: int = 64, tol: float = TOL, class_tol: float = CLASS_TOL,
                         shrink_attempts: int = 12) -> int:
    """Index at an isolated singularity, checked at two radii.

    ``others`` lists the remaining singularities; when omitted they are
    searched for over the whole domain.
    """
    if others is None:
        others = find_singularities(Z, Z.domain, grid_n, tol, class_tol)
    r = isolation_radius(Z, s, others)
    if not r > 1e-9:
        raise NotIsolated(f"no admissible radius around {s.location}")
    last_exc: Optional[Exception] = None
    for _ in range(shrink_attempts):
        try:
            outer = filippov_index_on_ball(Z, s.location, r, tol, class_tol)
            inner = filippov_index_on_ball(Z, s.location, 0.5 * r, tol, class_tol)
        except (NonTransversalIntersection, SingularityOnBoundary) as exc:
            # the circle hit a feature the search did not report; shrink
            last_exc = exc
            r *= 0.7
            continue
        if outer != inner:
            raise RadiusDependence(
                f"index {outer} at r={r:g} but {inner} at r={0.5 * r:g} around {s.location}"
            )
        return outer
    raise NotIsolated(f"no admissible radius around {s.location}: {last_exc}")


# --------------------------------------------------------------------------
# Perturbation hypotheses


@dataclass(frozen=True)
class BulletResult:
    name: str
    passed: bool
    worst_margin: float
    points: int


@dataclass(frozen=True)
class PerturbationReport:
    bullets: tuple

    @property
    def passed(self) -> bool:
        return all(b.passed for b in self.bullets)

    def __getitem__(self, name) -> BulletResult:
        for b in self.bullets:
            if b.name == name:
                return b
        raise KeyError(name)

    @property
    def failed(self):
        return [b.name for b in self.bullets if not b.passed]


BULLETS = ("off_sigma", "lie_derivatives", "sliding_field", "pieces_near_segment")


def verify_perturbation_bounds(Z: PlanarFilippovField, Zt: PlanarFilippovField, center, radius,
                               n_samples: int = 720) -> PerturbationReport:
    """Check the four sufficient conditions for ``Zt`` to share the index of
    ``Z`` on the circle, sampled on the circle (bullets on the switching curve
    are checked at the two crossing points).
    """
    center = (float(center[0]), float(center[1]))
    arc = ArcSpec(center, float(radius), ARC_PHASE, ARC_PHASE + TWO_PI)
    roots, _ = _sigma_crossings(Z, center, radius)
    t = np.linspace(arc.t_start, arc.t_end, n_samples, endpoint=False)
    if roots:
        # drop samples that coincide with a crossing
        keep = np.ones(t.shape, bool)
        for r in roots:
            keep &= np.abs(np.angle(np.exp(1j * (t - r)))) > 1e-12
        t = t[keep]
    x, y = arc.point(t)
    fv = np.asarray(Z.switch(x, y), float)
    u, v = Z(x, y)
    up, vp = Zt.fplus(x, y)
    um, vm = Zt.fminus(x, y)
    ut = np.where(fv >= 0, up, um)
    vt = np.where(fv >= 0, vp, vm)
    m1 = np.hypot(u, v) - np.hypot(u - ut, v - vt)
    results = [BulletResult(BULLETS[0], bool(np.all(m1 > 0)), float(m1.min()), int(t.size))]

    m2, m3, m4 = [], [], []
    for r in roots:
        q = arc.point(r)
        q = (float(q[0]), float(q[1]))
        j = Z.switch.jet(*q)
        grad = (float(j.dx), float(j.dy))
        Fp, Fm = Z.fplus(*q), Z.fminus(*q)
        Gp, Gm = Zt.fplus(*q), Zt.fminus(*q)
        lp, lm = grad[0] * Fp[0] + grad[1] * Fp[1], grad[0] * Fm[0] + grad[1] * Fm[1]
        kp, km = grad[0] * Gp[0] + grad[1] * Gp[1], grad[0] * Gm[0] + grad[1] * Gm[1]
        m2.append(abs(lp) - abs(lp - kp))
        m2.append(abs(lm) - abs(lm - km))
        if lp * lm < 0:
            zs = _sliding_raw(Fp, Fm, lp, lm)
            if km - kp != 0:
                zt = _sliding_raw(Gp, Gm, kp, km)
                m3.append(math.hypot(*zs) - math.hypot(zs[0] - zt[0], zs[1] - zt[1]))
            else:
                m3.append(-math.inf)
        half = 0.5 * segment_min_norm(Fp, Fm)
        m4.append(half - math.hypot(Fp[0] - Gp[0], Fp[1] - Gp[1]))
        m4.append(half - math.hypot(Fm[0] - Gm[0], Fm[1] - Gm[1]))
    for name, m in zip(BULLETS[1:], (m2, m3, m4)):
        worst = min(m) if m else math.inf
        results.append(BulletResult(name, bool(worst > 0), float(worst), len(m)))
    return PerturbationReport(tuple(results))


# --------------------------------------------------------------------------
# Curve export


def field_curves(Z: PlanarFilippovField, center, radius, tol: float = TOL):
    """Sampled images of the circle arcs under ``F+`` and ``F-``.

    Returns ``{"gamma_plus": [(t, vx, vy), ...], "gamma_minus": [...]}`` with
    ``t`` the circle angle.  A piece that governs no arc gives an empty list.
    """
    bi = ball_index(Z, center, radius, tol)
    out = {"gamma_plus": [], "gamma_minus": []}
    for sign, t0, t1, _ in bi.arcs:
        s = sweep_along_arc(Z.piece(sign), ArcSpec(tuple(map(float, center)), float(radius), t0, t1), tol)
        key = "gamma_plus" if sign > 0 else "gamma_minus"
        out[key].extend(zip(s.t.tolist(), s.vx.tolist(), s.vy.tolist()))
    return out


def write_curves_csv(curves, out_dir):
    import os

    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for key in ("gamma_plus", "gamma_minus"):
        path = os.path.join(out_dir, f"{key}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "vx", "vy"])
            for row in curves[key]:
                w.writerow([repr(float(c)) for c in row])
        paths.append(path)
    return paths
