"""Planar Filippov fields ``Z = (F+, F-)_f``: Lie derivatives, the regions of
the switching curve, the sliding field, and the search for singularities.

A field piece is anything callable as ``F(x, y) -> (u, v)`` on floats, arrays
and jets (a :class:`~filippov.expr.VectorFieldExpr`, a pushforward, ...).  A
switching function is the scalar analogue.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np
from scipy import optimize

from .errors import DegenerateSwitch, NotOnSigma, NotSlidingRegion
from .expr import FieldMixin, lenient_domain, parse_scalar, parse_vector

log = logging.getLogger(__name__)

TOL = 1e-9
CLASS_TOL = 1e-7
GRAD_TOL = 1e-9
NEWTON_MAX_ITER = 50


@dataclass(frozen=True)
class Rect:
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError(f"degenerate rectangle {self.as_tuple()}")

    @classmethod
    def coerce(cls, r) -> "Rect":
        return r if isinstance(r, Rect) else cls(*map(float, r))

    def as_tuple(self):
        return (self.x0, self.y0, self.x1, self.y1)

    def contains(self, p, margin=0.0) -> bool:
        return self.margin(p) >= margin

    def margin(self, p) -> float:
        """Signed distance from ``p`` to the rectangle boundary (positive inside)."""
        x, y = p
        return min(x - self.x0, self.x1 - x, y - self.y0, self.y1 - y)

    def contains_ball(self, center, radius) -> bool:
        return self.margin(center) >= radius

    @property
    def diameter(self) -> float:
        return math.hypot(self.x1 - self.x0, self.y1 - self.y0)


@dataclass(frozen=True)
class PlanarFilippovField:
    """``Z = F+`` where ``f >= 0`` and ``Z = F-`` where ``f <= 0``, on ``domain``."""

    fplus: Any
    fminus: Any
    switch: Any
    domain: Rect = Rect(-1.0, -1.0, 1.0, 1.0)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "domain", Rect.coerce(self.domain))

    @classmethod
    def from_strings(cls, fplus, fminus, switch, domain=(-1, -1, 1, 1), name=""):
        return cls(parse_vector(fplus), parse_vector(fminus), parse_scalar(switch),
                   Rect.coerce(domain), name)

    def piece(self, sign: int):
        return self.fplus if sign > 0 else self.fminus

    def __call__(self, x, y):
        """Evaluate ``Z`` off the switching set (``F+`` on ``f >= 0``)."""
        fv = np.asarray(self.switch(x, y))
        up, vp = self.fplus(x, y)
        um, vm = self.fminus(x, y)
        return np.where(fv >= 0, up, um), np.where(fv >= 0, vp, vm)

    def combine(self, other: "PlanarFilippovField", lam: float) -> "PlanarFilippovField":
        """Linear homotopy ``(1 - lam) * self + lam * other`` with this switch."""
        return PlanarFilippovField(
            _Blend(self.fplus, other.fplus, lam),
            _Blend(self.fminus, other.fminus, lam),
            self.switch, self.domain, f"{self.name}~{other.name}@{lam:g}",
        )

    def scaled(self, c: float) -> "PlanarFilippovField":
        return PlanarFilippovField(_Blend(self.fplus, self.fplus, 0.0, c),
                                   _Blend(self.fminus, self.fminus, 0.0, c),
                                   self.switch, self.domain, self.name)

    def with_switch(self, switch) -> "PlanarFilippovField":
        return PlanarFilippovField(self.fplus, self.fminus, switch, self.domain, self.name)


class _Blend(FieldMixin):
    """``scale * ((1 - lam) * a + lam * b)``, jet-compatible."""

    def __init__(self, a, b, lam, scale=1.0):
        self.a, self.b, self.lam, self.scale = a, b, float(lam), float(scale)

    def __call__(self, x, y):
        ua, va = self.a(x, y)
        if self.lam == 0.0:
            return self.scale * ua, self.scale * va
        ub, vb = self.b(x, y)
        w0, w1 = self.scale * (1.0 - self.lam), self.scale * self.lam
        return w0 * ua + w1 * ub, w0 * va + w1 * vb


class SigmaTag(str, enum.Enum):
    CROSSING = "Crossing"
    SLIDING = "Sliding"
    ESCAPING = "Escaping"
    TANGENTIAL_PLUS = "TangentialPlus"
    TANGENTIAL_MINUS = "TangentialMinus"
    TANGENTIAL_BOTH = "TangentialBoth"
    BOUNDARY_EQ_PLUS = "BoundaryEqPlus"
    BOUNDARY_EQ_MINUS = "BoundaryEqMinus"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SigmaClassification:
    tag: SigmaTag
    lie_plus: float
    lie_minus: float

    @property
    def is_regular(self) -> bool:
        return self.tag in (SigmaTag.CROSSING, SigmaTag.SLIDING, SigmaTag.ESCAPING)


class SingularityKind(str, enum.Enum):
    EQUILIBRIUM_PLUS = "EquilibriumPlus"
    EQUILIBRIUM_MINUS = "EquilibriumMinus"
    BOUNDARY_EQUILIBRIUM = "BoundaryEquilibrium"
    PSEUDO_EQUILIBRIUM = "PseudoEquilibrium"
    TANGENTIAL = "Tangential"

    def __str__(self):
        return self.value


# merge precedence: a point satisfying several definitions keeps the first
_KIND_RANK = {
    SingularityKind.EQUILIBRIUM_PLUS: 0,
    SingularityKind.EQUILIBRIUM_MINUS: 0,
    SingularityKind.BOUNDARY_EQUILIBRIUM: 1,
    SingularityKind.PSEUDO_EQUILIBRIUM: 2,
    SingularityKind.TANGENTIAL: 3,
}


@dataclass(frozen=True)
class Singularity:
    location: tuple
    kind: SingularityKind
    index: Optional[int] = None
    residual: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "location", (float(self.location[0]), float(self.location[1])))
        object.__setattr__(self, "kind", SingularityKind(self.kind))
        object.__setattr__(self, "residual", float(self.residual))

    def with_index(self, index: int) -> "Singularity":
        return Singularity(self.location, self.kind, index, self.residual)

    def distance(self, p) -> float:
        return math.hypot(self.location[0] - p[0], self.location[1] - p[1])


# --------------------------------------------------------------------------
# Pointwise quantities


def gradient(f, x, y):
    j = f.jet(x, y)
    return j.value, j.dx, j.dy


def lie_derivative(F, f, p) -> float:
    """``<grad f(p), F(p)>``."""
    x, y = p
    _, fx, fy = gradient(f, x, y)
    u, v = F(x, y)
    return float(fx * u + fy * v)


def _lie_both(Z: PlanarFilippovField, x, y):
    fv, fx, fy = gradient(Z.switch, x, y)
    up, vp = Z.fplus(x, y)
    um, vm = Z.fminus(x, y)
    return fv, fx, fy, (up, vp), (um, vm), fx * up + fy * vp, fx * um + fy * vm


def classify_sigma_point(Z: PlanarFilippovField, p, tol: float = CLASS_TOL) -> SigmaClassification:
    x, y = map(float, p)
    fv, fx, fy, Fp, Fm, lp, lm = _lie_both(Z, x, y)
    if abs(fv) > tol:
        raise NotOnSigma(f"|f{(x, y)}| = {abs(fv):.3g} exceeds {tol:g}")
    if math.hypot(fx, fy) <= GRAD_TOL:
        raise DegenerateSwitch(f"grad f vanishes at {(x, y)}")
    lp, lm = float(lp), float(lm)
    if math.hypot(*Fp) <= tol:
        tag = SigmaTag.BOUNDARY_EQ_PLUS
    elif math.hypot(*Fm) <= tol:
        tag = SigmaTag.BOUNDARY_EQ_MINUS
    elif abs(lp) <= tol and abs(lm) <= tol:
        tag = SigmaTag.TANGENTIAL_BOTH
    elif abs(lp) <= tol:
        tag = SigmaTag.TANGENTIAL_PLUS
    elif abs(lm) <= tol:
        tag = SigmaTag.TANGENTIAL_MINUS
    elif lp * lm > 0:
        tag = SigmaTag.CROSSING
    elif lp < 0:
        tag = SigmaTag.SLIDING
    else:
        tag = SigmaTag.ESCAPING
    return SigmaClassification(tag, lp, lm)


def _sliding_raw(Fp, Fm, lp, lm):
    den = lm - lp
    return (lm * Fp[0] - lp * Fm[0]) / den, (lm * Fp[1] - lp * Fm[1]) / den


def sliding_field(Z: PlanarFilippovField, p):
    """Sliding vector field at a sliding or escaping point."""
    x, y = map(float, p)
    _, fx, fy, Fp, Fm, lp, lm = _lie_both(Z, x, y)
    if not lp * lm < 0:
        raise NotSlidingRegion(f"F+f = {lp:.3g}, F-f = {lm:.3g} at {(x, y)}")
    zs = _sliding_raw(Fp, Fm, lp, lm)
    zx, zy = float(zs[0]), float(zs[1])
    normal = abs(zx * fx + zy * fy)
    # relative to |Z^s|, plus rounding noise of the cancelling numerator
    noise = 64 * np.finfo(float).eps * (math.hypot(*Fp) + math.hypot(*Fm))
    if normal > (1e-9 * math.hypot(zx, zy) + noise) * math.hypot(fx, fy):
        raise ArithmeticError(f"sliding field not tangent to the switching curve at {(x, y)}")
    return zx, zy


# --------------------------------------------------------------------------
# Singularity search


def _newton_zeros(F, xs, ys, box: Rect, max_iter=NEWTON_MAX_ITER):
    """Vectorized Newton iteration on ``F`` from all seeds at once.

    Returns final points and a mask of seeds that stayed finite and inside the
    box; the caller filters by residual.
    """
    x = np.array(xs, dtype=float)
    y = np.array(ys, dtype=float)
    alive = np.ones(x.shape, bool)
    done = np.zeros(x.shape, bool)
    pad = 1e-9 * box.diameter
    with lenient_domain():
        for _ in range(max_iter):
            act = alive & ~done
            if not act.any():
                break
            ju, jv = F.jet(x[act], y[act])
            u, ux, uy = (np.broadcast_to(np.asarray(c, float), x[act].shape) for c in ju)
            v, vx, vy = (np.broadcast_to(np.asarray(c, float), x[act].shape) for c in jv)
            det = ux * vy - uy * vx
            res = np.hypot(u, v)
            scale = np.abs(ux) + np.abs(uy) + np.abs(vx) + np.abs(vy)
            singular = ~(np.abs(det) > 1e-14 * scale * scale)
            dx = np.where(singular, 0.0, (u * vy - v * uy) / np.where(singular, 1.0, det))
            dy = np.where(singular, 0.0, (v * ux - u * vx) / np.where(singular, 1.0, det))
            idx = np.flatnonzero(act)
            bad = ~np.isfinite(res) | ~np.isfinite(dx) | ~np.isfinite(dy) | (singular & (res > 0))
            # exact zeros with singular Jacobian are kept as they are
            stop_here = singular & (res == 0)
            x[idx] -= np.where(bad | stop_here, 0.0, dx)
            y[idx] -= np.where(bad | stop_here, 0.0, dy)
            alive[idx[bad]] = False
            step = np.hypot(dx, dy)
            small = step <= 1e-15 * (1.0 + np.hypot(x[idx], y[idx]))
            done[idx[stop_here | (small & ~bad)]] = True
            outside = ((x[idx] < box.x0 - pad) | (x[idx] > box.x1 + pad)
                       | (y[idx] < box.y0 - pad) | (y[idx] > box.y1 + pad))
            alive[idx[outside]] = False
    n_fail = int((alive & ~done).sum())
    if n_fail:
        log.debug("Newton: %d seeds did not converge in %d iterations", n_fail, max_iter)
    return x, y, alive


def _equilibria(Z: PlanarFilippovField, box: Rect, grid_n: int, tol: float):
    gx, gy = np.meshgrid(np.linspace(box.x0, box.x1, grid_n + 1),
                         np.linspace(box.y0, box.y1, grid_n + 1))
    gx, gy = gx.ravel(), gy.ravel()
    with lenient_domain():
        fgrid = np.asarray(Z.switch(gx, gy), float)
    h = max(box.x1 - box.x0, box.y1 - box.y0) / grid_n
    out = []
    for sign in (+1, -1):
        # seed on the closed side of the piece plus one cell of slack
        seeds = sign * fgrid >= -np.abs(_grad_scale(Z, gx, gy)) * 2 * h
        seeds &= np.isfinite(fgrid)
        F = Z.piece(sign)
        x, y, ok = _newton_zeros(F, gx[seeds], gy[seeds], box)
        for px, py in zip(x[ok], y[ok]):
            if box.margin((px, py)) < -1e-12 * box.diameter:
                continue
            try:
                u, v = F(px, py)
                fv = float(Z.switch(px, py))
            except ArithmeticError:
                continue
            res = math.hypot(u, v)
            if not res <= tol or sign * fv < -tol:
                continue
            loc = (float(px), float(py))
            if abs(fv) <= tol:
                kind = SingularityKind.BOUNDARY_EQUILIBRIUM
            elif (q := _zero_on_sigma(Z, F, loc, tol)) is not None:
                # degenerate zeros are located poorly; F still vanishes on Sigma
                kind, loc = SingularityKind.BOUNDARY_EQUILIBRIUM, q
            elif sign > 0:
                kind = SingularityKind.EQUILIBRIUM_PLUS
            else:
                kind = SingularityKind.EQUILIBRIUM_MINUS
            _add_equilibrium(Z, out, Singularity(loc, kind, None, res), sign, tol)
    return [s for s, _ in out]


def _zero_on_sigma(Z, F, p, tol, reach=1e-6):
    qx, qy = project_to_sigma(Z.switch, p[0], p[1])
    q = (float(qx), float(qy))
    if math.dist(p, q) > reach or abs(float(Z.switch(*q))) > tol:
        return None
    try:
        return q if math.hypot(*F(*q)) <= tol else None
    except ArithmeticError:
        return None


def _add_equilibrium(Z, kept, s, sign, tol, reach=1e-6):
    """Append ``s`` unless it is the same zero as a kept one.

    Two candidates closer than ``reach`` are one zero when both pieces still
    vanish at their midpoint, so close simple zeros stay apart while the
    scatter around a degenerate zero collapses.
    """
    for i, (k, ksign) in enumerate(kept):
        if k.distance(s.location) >= reach:
            continue
        mid = (0.5 * (k.location[0] + s.location[0]), 0.5 * (k.location[1] + s.location[1]))
        try:
            small = all(math.hypot(*Z.piece(g)(*mid)) <= tol for g in {sign, ksign})
        except ArithmeticError:
            small = False
        if small:
            boundary = SingularityKind.BOUNDARY_EQUILIBRIUM
            if (s.kind == boundary) != (k.kind == boundary):
                better = s.kind == boundary
            else:
                better = s.residual < k.residual
            if better:
                kept[i] = (s, sign)
            return
    kept.append((s, sign))


def _grad_scale(Z, x, y):
    with lenient_domain():
        j = Z.switch.jet(x, y)
        g = np.hypot(np.asarray(j.dx, float), np.asarray(j.dy, float))
    return np.where(np.isfinite(g), g, 0.0)


def project_to_sigma(f, x, y, iters=8):
    """Newton projection of points onto ``f = 0`` along the gradient."""
    x = np.array(x, float)
    y = np.array(y, float)
    for _ in range(iters):
        j = f.jet(x, y)
        fv, fx, fy = (np.asarray(c, float) for c in j)
        g2 = fx * fx + fy * fy
        step = np.where(g2 > 0, fv / np.where(g2 > 0, g2, 1.0), 0.0)
        x = x - step * fx
        y = y - step * fy
        if np.all(np.abs(fv) == 0):
            break
    return x, y


def _bisect_edges(f, ax, ay, bx, by, fa, iters=64):
    """Vectorized bisection for ``f = 0`` on segments a-b with sign change."""
    lo = np.zeros_like(ax)
    hi = np.ones_like(ax)
    sa = fa >= 0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = np.asarray(f(ax + mid * (bx - ax), ay + mid * (by - ay)), float)
        same = (fm >= 0) == sa
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    # lo stays on a's side; take whichever end is closer to zero
    px_lo, py_lo = ax + lo * (bx - ax), ay + lo * (by - ay)
    px_hi, py_hi = ax + hi * (bx - ax), ay + hi * (by - ay)
    f_lo = np.abs(np.asarray(f(px_lo, py_lo), float))
    f_hi = np.abs(np.asarray(f(px_hi, py_hi), float))
    pick = f_hi < f_lo
    return np.where(pick, px_hi, px_lo), np.where(pick, py_hi, py_lo)


def trace_sigma(f, box: Rect, grid_n: int):
    """Marching-squares trace of ``f = 0`` inside ``box``.

    Returns ``(points, segments)``: an ``(m, 2)`` array of curve points on cell
    edges and an ``(k, 2)`` integer array of point pairs joined inside a cell.
    Nodes with ``f == 0`` count as positive.
    """
    xs = np.linspace(box.x0, box.x1, grid_n + 1)
    ys = np.linspace(box.y0, box.y1, grid_n + 1)
    gx, gy = np.meshgrid(xs, ys)  # gx[j, i] = xs[i], gy[j, i] = ys[j]
    with lenient_domain():
        fg = np.asarray(f(gx, gy), float)
    pos = fg >= 0
    finite = np.isfinite(fg)

    points = []
    edge_id = {}

    def add_edges(mask, a_idx, b_idx, tag):
        js, is_ = np.nonzero(mask)
        if js.size == 0:
            return
        aj, ai = a_idx(js, is_)
        bj, bi = b_idx(js, is_)
        px, py = _bisect_edges(f, gx[aj, ai], gy[aj, ai], gx[bj, bi], gy[bj, bi], fg[aj, ai])
        for k, (j, i) in enumerate(zip(js, is_)):
            edge_id[(tag, int(j), int(i))] = len(points)
            points.append((float(px[k]), float(py[k])))

    # horizontal edges (j, i) -> (j, i + 1); vertical edges (j, i) -> (j + 1, i)
    h_mask = (pos[:, :-1] != pos[:, 1:]) & finite[:, :-1] & finite[:, 1:]
    v_mask = (pos[:-1, :] != pos[1:, :]) & finite[:-1, :] & finite[1:, :]
    with lenient_domain():
        add_edges(h_mask, lambda j, i: (j, i), lambda j, i: (j, i + 1), "h")
        add_edges(v_mask, lambda j, i: (j, i), lambda j, i: (j + 1, i), "v")

    segments = []
    for j in range(grid_n):
        for i in range(grid_n):
            # counterclockwise edge order: bottom, right, top, left
            ids = [edge_id.get(("h", j, i)), edge_id.get(("v", j, i + 1)),
                   edge_id.get(("h", j + 1, i)), edge_id.get(("v", j, i))]
            hits = [k for k in ids if k is not None]
            if len(hits) == 2:
                segments.append(tuple(hits))
            elif len(hits) == 4:
                with lenient_domain():
                    fc = float(f(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])))
                # corner (j, i) sign decides which pairs of edges connect
                if (fc >= 0) == pos[j, i]:
                    segments += [(ids[0], ids[1]), (ids[2], ids[3])]
                else:
                    segments += [(ids[3], ids[0]), (ids[1], ids[2])]
    pts = np.array(points, float).reshape(-1, 2)
    segs = np.array(segments, int).reshape(-1, 2)
    return pts, segs


def _sigma_functions(Z: PlanarFilippovField):
    """Scalar functions along the switching curve whose zeros are candidates."""

    def lie_plus(x, y):
        return _lie_both(Z, x, y)[5]

    def lie_minus(x, y):
        return _lie_both(Z, x, y)[6]

    def pseudo(x, y):
        # tangential part of the sliding-field numerator: zero iff Z^s = 0
        _, fx, fy, Fp, Fm, lp, lm = _lie_both(Z, x, y)
        tp = fx * Fp[1] - fy * Fp[0]
        tm = fx * Fm[1] - fy * Fm[0]
        g = np.hypot(fx, fy)
        return (lm * tp - lp * tm) / g

    return {"lie_plus": lie_plus, "lie_minus": lie_minus, "pseudo": pseudo}


def _sigma_roots(Z: PlanarFilippovField, pts, segs, tol):
    """1-D root finding of the candidate functions along traced segments."""
    if len(pts) == 0:
        return []
    f = Z.switch
    funcs = _sigma_functions(Z)
    with lenient_domain():
        vals = {name: np.asarray(h(pts[:, 0], pts[:, 1]), float) for name, h in funcs.items()}

    def along(h, a, b):
        def g(s):
            px, py = project_to_sigma(f, a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]))
            return float(h(float(px), float(py)))
        return g

    def point_at(a, b, s):
        px, py = project_to_sigma(f, a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]))
        return float(px), float(py)

    cands = []
    for name, h in funcs.items():
        hv = vals[name]
        for k in np.flatnonzero(np.abs(hv) <= tol):
            cands.append((name, tuple(pts[k])))
        for ia, ib in segs:
            ha, hb = hv[ia], hv[ib]
            if not (np.isfinite(ha) and np.isfinite(hb)):
                continue
            a, b = pts[ia], pts[ib]
            if ha * hb < 0:
                g = along(h, a, b)
                try:
                    s = optimize.brentq(g, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                                        maxiter=200)
                except (ValueError, RuntimeError, ArithmeticError):
                    continue
                cands.append((name, point_at(a, b, s)))
            elif ha * hb > 0:
                # tangential double roots do not change sign: look for a dip
                g = along(h, a, b)
                try:
                    gm = g(0.5)
                except ArithmeticError:
                    continue
                if abs(gm) < min(abs(ha), abs(hb)) and abs(gm) < 1e-2 * (abs(ha) + abs(hb)):
                    r = optimize.minimize_scalar(lambda s: g(s) ** 2, bounds=(0.0, 1.0),
                                                 method="bounded", options={"xatol": 1e-13})
                    if abs(g(r.x)) <= tol:
                        cands.append((name, point_at(a, b, r.x)))
    return cands


def _sigma_singularity(Z: PlanarFilippovField, name, p, tol, class_tol, include_removable=False):
    x, y = p
    fv, fx, fy, Fp, Fm, lp, lm = _lie_both(Z, x, y)
    fv, lp, lm = float(fv), float(lp), float(lm)
    if math.hypot(fx, fy) <= GRAD_TOL:
        raise DegenerateSwitch(f"grad f vanishes on the switching curve at {p}")
    if abs(fv) > tol:
        return None
    np_, nm = math.hypot(*Fp), math.hypot(*Fm)
    if np_ <= tol or nm <= tol:
        return Singularity(p, SingularityKind.BOUNDARY_EQUILIBRIUM, None, min(np_, nm))
    if name == "pseudo":
        if not (lp * lm < 0 and abs(lp) > class_tol and abs(lm) > class_tol):
            return None
        zs = _sliding_raw(Fp, Fm, lp, lm)
        res = math.hypot(float(zs[0]), float(zs[1]))
        if res <= tol:
            return Singularity(p, SingularityKind.PSEUDO_EQUILIBRIUM, None, res)
        return None
    res = min(abs(lp), abs(lm))
    if res <= tol:
        if not include_removable and is_removable(Fp, Fm, tol):
            return None
        return Singularity(p, SingularityKind.TANGENTIAL, None, res)
    return None


def is_removable(Fp, Fm, tol=TOL) -> bool:
    """True when both pieces agree at a switching point.

    The field is continuous there, so a tangency carries no corner term and
    the regularized field equals ``F+`` at the point.
    """
    scale = max(1.0, math.hypot(*Fp), math.hypot(*Fm))
    return math.hypot(Fp[0] - Fm[0], Fp[1] - Fm[1]) <= tol * scale


def merge_singularities(sings: Sequence[Singularity], radius: float):
    """Deterministic merge: sort by coordinates, keep the higher-precedence
    kind among points closer than ``radius``."""
    ordered = sorted(sings, key=lambda s: (round(s.location[0], 12), round(s.location[1], 12),
                                           _KIND_RANK[s.kind]))
    kept: list[Singularity] = []
    for s in ordered:
        for i, k in enumerate(kept):
            if k.distance(s.location) < radius:
                if _KIND_RANK[s.kind] < _KIND_RANK[k.kind]:
                    kept[i] = s
                break
        else:
            kept.append(s)
    return sorted(kept, key=lambda s: (s.location[0], s.location[1]))


def find_singularities(Z: PlanarFilippovField, box=None, grid_n: int = 64,
                       tol: float = TOL, class_tol: float = CLASS_TOL,
                       include_removable: bool = False):
    """All singularities of ``Z`` in ``box``.

    Zeros of ``F+`` on ``f >= 0`` and of ``F-`` on ``f <= 0`` come from Newton
    runs seeded on a grid; pseudo-equilibria and tangential points come from
    1-D root finding along the marching-squares trace of the switching curve.
    Tangencies where ``F+ = F-`` are skipped unless ``include_removable``.
    """
    box = Z.domain if box is None else Rect.coerce(box)
    if grid_n < 8:
        raise ValueError("grid_n must be at least 8")
    found = _equilibria(Z, box, grid_n, tol)
    pts, segs = trace_sigma(Z.switch, box, grid_n)
    if len(pts):
        with lenient_domain():
            j = Z.switch.jet(pts[:, 0], pts[:, 1])
            g = np.hypot(np.asarray(j.dx, float), np.asarray(j.dy, float))
        if np.any(g <= GRAD_TOL):
            k = int(np.argmin(g))
            raise DegenerateSwitch(f"grad f vanishes on the switching curve near {tuple(pts[k])}")
    for name, p in _sigma_roots(Z, pts, segs, tol):
        if not box.contains(p, -1e-12 * box.diameter):
            continue
        try:
            s = _sigma_singularity(Z, name, p, tol, class_tol, include_removable)
        except ArithmeticError:
            continue
        if s is not None:
            found.append(s)
    return merge_singularities(found, 10 * tol)
