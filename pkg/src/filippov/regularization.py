"""Sotomayor-Teixeira regularization and the regularized-index oracle.

``Z_eps = (1 + phi(f/eps))/2 * F+ + (1 - phi(f/eps))/2 * F-`` is a smooth
field agreeing with ``F+`` on ``f >= eps`` and ``F-`` on ``f <= -eps``.  For
small ``eps`` its ordinary rotation number on a circle equals the Filippov
index, which makes it an independent check on :mod:`filippov.winding`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import TOL, PlanarFilippovField, trace_sigma
from .errors import FieldVanishesOnArc, IndexComputationError
from .expr import FieldMixin, Jet
from .winding import ARC_PHASE, INTEGER_TOL, TWO_PI, ArcSpec, ball_index, sweep_along_arc

log = logging.getLogger(__name__)

DEFAULT_EPS = (1e-1, 1e-2, 1e-3)
MAX_HALVINGS = 20


def _poly(s):
    return 0.5 * s * (3.0 - s * s)


def _poly_d(s):
    return 1.5 * (1.0 - s * s)


def _trig(s):
    return np.sin(0.5 * np.pi * s)


def _trig_d(s):
    return 0.5 * np.pi * np.cos(0.5 * np.pi * s)


@dataclass(frozen=True)
class TransitionFunction:
    """Monotone ``phi`` with ``phi = sign`` outside ``(-1, 1)``.

    ``inner`` and ``inner_deriv`` are only consulted on ``[-1, 1]``.
    """

    kind: str
    inner: Callable = field(repr=False)
    inner_deriv: Callable = field(repr=False)

    @classmethod
    def polynomial(cls) -> "TransitionFunction":
        return cls("polynomial", _poly, _poly_d)

    @classmethod
    def trigonometric(cls) -> "TransitionFunction":
        return cls("trigonometric", _trig, _trig_d)

    @classmethod
    def custom(cls, inner, inner_deriv, name="custom", probe_points=1001) -> "TransitionFunction":
        s = np.linspace(-1.0, 1.0, probe_points + 2)[1:-1]
        d = np.asarray(inner_deriv(s), float)
        v = np.asarray(inner(s), float)
        if not np.all(d > 0) or not np.all(np.diff(v) > 0):
            raise ValueError(f"transition function {name!r} is not increasing on (-1, 1)")
        ends = np.asarray(inner(np.array([-1.0, 1.0])), float)
        if not np.allclose(ends, [-1.0, 1.0], atol=1e-9):
            raise ValueError(f"transition function {name!r} must reach -1 and 1 at the ends")
        return cls(name, inner, inner_deriv)

    @classmethod
    def named(cls, kind: str) -> "TransitionFunction":
        try:
            return _BUILTIN[kind]()
        except KeyError:
            raise ValueError(f"unknown transition function {kind!r}") from None

    def __call__(self, s):
        if isinstance(s, Jet):
            return Jet(self(s.value), self.deriv(s.value) * s.dx, self.deriv(s.value) * s.dy)
        s = np.asarray(s, float)
        c = np.clip(s, -1.0, 1.0)
        out = np.where(np.abs(s) >= 1.0, np.sign(s), self.inner(c))
        return float(out) if out.ndim == 0 else out

    def deriv(self, s):
        s = np.asarray(s, float)
        c = np.clip(s, -1.0, 1.0)
        out = np.where(np.abs(s) >= 1.0, 0.0, self.inner_deriv(c))
        return float(out) if out.ndim == 0 else out


_BUILTIN = {
    "polynomial": TransitionFunction.polynomial,
    "trigonometric": TransitionFunction.trigonometric,
}
BUILTIN_TRANSITIONS = tuple(_BUILTIN)


@dataclass(frozen=True)
class RegularizedField(FieldMixin):
    base: PlanarFilippovField
    epsilon: float
    phi: TransitionFunction = field(default_factory=TransitionFunction.polynomial)

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    def __call__(self, x, y):
        w = self.phi(self.base.switch(x, y) / self.epsilon)
        up, vp = self.base.fplus(x, y)
        um, vm = self.base.fminus(x, y)
        a = 0.5 * (1.0 + w)
        b = 0.5 * (1.0 - w)
        return a * up + b * um, a * vp + b * vm

    def with_epsilon(self, epsilon: float) -> "RegularizedField":
        return RegularizedField(self.base, epsilon, self.phi)


def eval_regularized(R: RegularizedField, p):
    u, v = R(float(p[0]), float(p[1]))
    return float(u), float(v)


def regularized_index(R: RegularizedField, center, radius, tol: float = TOL,
                      max_halvings: int = MAX_HALVINGS) -> int:
    """Rotation number of ``Z_eps`` on the circle; ``eps`` is halved while the
    field vanishes on the circle.
    """
    return regularized_index_detail(R, center, radius, tol, max_halvings)[0]


def regularized_index_detail(R: RegularizedField, center, radius, tol: float = TOL,
                             max_halvings: int = MAX_HALVINGS):
    """``(index, epsilon actually used, raw winding number)``."""
    center = (float(center[0]), float(center[1]))
    arc = ArcSpec(center, float(radius), ARC_PHASE, ARC_PHASE + TWO_PI)
    current = R
    for attempt in range(max_halvings + 1):
        try:
            s = sweep_along_arc(current, arc, tol)
        except FieldVanishesOnArc:
            if attempt == max_halvings:
                raise
            log.debug("Z_eps vanishes on the circle at eps=%g; halving", current.epsilon)
            current = current.with_epsilon(0.5 * current.epsilon)
            continue
        raw = s.total_angle / TWO_PI
        k = int(round(raw))
        if abs(raw - k) > INTEGER_TOL:
            raise IndexComputationError(f"regularized winding {raw!r} is not an integer")
        return k, current.epsilon, raw
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class InvarianceEntry:
    phi: str
    epsilon: float
    index: Optional[int]
    epsilon_used: Optional[float] = None
    error: str = ""


@dataclass(frozen=True)
class InvarianceReport:
    filippov_index: Optional[int]
    entries: tuple
    error: str = ""

    @property
    def all_equal(self) -> bool:
        if self.filippov_index is None:
            return False
        return all(e.index == self.filippov_index for e in self.entries)

    def as_dict(self):
        return {
            "filippov_index": self.filippov_index,
            "error": self.error,
            "all_equal": self.all_equal,
            "regularized": [
                {"phi": e.phi, "epsilon": e.epsilon, "index": e.index,
                 "epsilon_used": e.epsilon_used, "error": e.error}
                for e in self.entries
            ],
        }


def check_invariance(Z: PlanarFilippovField, center, radius,
                     eps_list: Sequence[float] = DEFAULT_EPS,
                     phis: Sequence[str] = BUILTIN_TRANSITIONS, tol: float = TOL) -> InvarianceReport:
    try:
        base = ball_index(Z, center, radius, tol).index
        base_err = ""
    except Exception as exc:  # report-only
        base, base_err = None, f"{type(exc).__name__}: {exc}"
    entries = []
    for name in phis:
        phi = TransitionFunction.named(name)
        for eps in eps_list:
            try:
                k, used, _ = regularized_index_detail(RegularizedField(Z, eps, phi), center, radius, tol)
                entries.append(InvarianceEntry(name, float(eps), k, used))
            except Exception as exc:
                entries.append(InvarianceEntry(name, float(eps), None, None,
                                               f"{type(exc).__name__}: {exc}"))
    return InvarianceReport(base, tuple(entries), base_err)


class _LevelShift(FieldMixin):
    def __init__(self, f, level):
        self.f, self.level = f, level

    def __call__(self, x, y):
        return self.f(x, y) - self.level


def band_curves(Z: PlanarFilippovField, epsilon: float, grid_n: int = 128):
    """Points on the band edges ``f = eps`` and ``f = -eps`` inside the domain."""
    out = {}
    for key, level in (("band_plus", epsilon), ("band_minus", -epsilon)):
        pts, _ = trace_sigma(_LevelShift(Z.switch, level), Z.domain, grid_n)
        out[key] = [(float(p[0]), float(p[1])) for p in pts]
    return out


__all__ = [
    "TransitionFunction", "RegularizedField", "eval_regularized", "regularized_index",
    "regularized_index_detail", "check_invariance", "InvarianceReport", "InvarianceEntry",
    "BUILTIN_TRANSITIONS", "DEFAULT_EPS", "band_curves",
]
