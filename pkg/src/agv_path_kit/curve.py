"""Planar Bezier curve engine.

Evaluation with exact polynomial derivatives, Gauss-Legendre arc length,
signed curvature and its arc-length derivative, and the raw geometric
continuity conditions that relate one-sided derivatives at a junction
through shape parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import SingularParameterizationError

__all__ = [
    "Point2",
    "BezierCurve",
    "CurveJet",
    "ShapeParameters",
    "evaluate",
    "arc_length",
    "curvature",
    "curvature_arc_derivative",
    "check_geometric_continuity",
]

# Below this first-derivative norm a parameterization is treated as singular.
SINGULAR_SPEED = 1e-12

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


@dataclass(frozen=True)
class Point2:
    """A planar point in meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point components must be finite, got ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    @classmethod
    def from_array(cls, a) -> "Point2":
        return cls(float(a[0]), float(a[1]))


@dataclass(frozen=True)
class CurveJet:
    """Position and parameter-derivatives of a planar curve at one u.

    ``d1``, ``d2``, ``d3`` are per unit-u, unit-u^2 and unit-u^3 respectively.
    """

    position: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray

    def __post_init__(self):
        for name in ("position", "d1", "d2", "d3"):
            v = np.asarray(getattr(self, name), dtype=float)
            v.setflags(write=False)
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class ShapeParameters:
    """Scalars relating one-sided derivatives at a junction (beta1 > 0)."""

    beta1: float
    beta2: float = 0.0
    beta3: float | None = None

    def __post_init__(self):
        if not (self.beta1 > 0.0):
            raise ValueError(f"beta1 must be positive, got {self.beta1}")


def _control_array(control_points) -> np.ndarray:
    pts = [p.as_array() if isinstance(p, Point2) else np.asarray(p, dtype=float)
           for p in control_points]
    arr = np.array(pts, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("control points must be planar (x, y) pairs")
    if arr.shape[0] < 2:
        raise ValueError("a Bezier curve needs at least two control points (degree >= 1)")
    if not np.all(np.isfinite(arr)):
        raise ValueError("control points must be finite")
    return arr


def _decasteljau(net: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Evaluate the Bezier polygon ``net`` (m, 2) at parameters ``u`` (N,)."""
    pts = np.repeat(net[None, :, :], u.size, axis=0)
    w = u[:, None, None]
    while pts.shape[1] > 1:
        pts = (1.0 - w) * pts[:, :-1, :] + w * pts[:, 1:, :]
    return pts[:, 0, :]


class BezierCurve:
    """Immutable planar Bezier curve of arbitrary degree >= 1.

    Instances hash by identity; evaluation caches keyed on a curve stay
    valid because control points are never mutated after construction.
    """

    def __init__(self, control_points):
        self._points = _control_array(control_points)
        self._points.setflags(write=False)

    @property
    def control_points(self) -> np.ndarray:
        return self._points

    @property
    def degree(self) -> int:
        return self._points.shape[0] - 1

    def __repr__(self):
        return f"BezierCurve(degree={self.degree})"

    @cached_property
    def _derivative_nets(self) -> tuple[np.ndarray, ...]:
        """Control nets of the 0th..degree-th derivative curves."""
        nets = [self._points]
        while nets[-1].shape[0] > 1:
            q = nets[-1]
            n = q.shape[0] - 1
            nets.append(n * (q[1:] - q[:-1]))
        return tuple(nets)

    def derivatives_many(self, us: np.ndarray, order: int) -> list[np.ndarray]:
        """Arrays (N, 2) of the 0th..order-th derivative at each u."""
        us = np.asarray(us, dtype=float)
        nets = self._derivative_nets
        out = []
        for k in range(order + 1):
            if k < len(nets):
                out.append(_decasteljau(nets[k], us))
            else:
                out.append(np.zeros((us.size, 2)))
        return out

    def jet(self, u: float, order: int = 3) -> CurveJet:
        return evaluate(self, u, order)

    def point(self, u: float) -> np.ndarray:
        return self.derivatives_many(np.array([float(u)]), 0)[0][0]

    def split(self, s: float) -> tuple["BezierCurve", "BezierCurve"]:
        """Subdivide at parameter ``s`` into two curves of the same degree."""
        if not 0.0 < s < 1.0:
            raise ValueError(f"split parameter must lie strictly inside (0, 1), got {s}")
        rows = [self._points]
        while rows[-1].shape[0] > 1:
            q = rows[-1]
            rows.append((1.0 - s) * q[:-1] + s * q[1:])
        left = np.array([row[0] for row in rows])
        right = np.array([row[-1] for row in reversed(rows)])
        return BezierCurve(left), BezierCurve(right)

    def elevated(self) -> "BezierCurve":
        """Equivalent curve of degree + 1."""
        p = self._points
        n = self.degree
        t = np.arange(1, n + 1)[:, None] / (n + 1)
        inner = t * p[:-1] + (1.0 - t) * p[1:]
        return BezierCurve(np.vstack([p[:1], inner, p[-1:]]))


def evaluate(curve: BezierCurve, u: float, order: int = 3) -> CurveJet:
    """Exact position and derivatives of ``curve`` at ``u``.

    Derivatives beyond the requested order are reported as zero; derivatives
    beyond the curve degree are exactly zero.
    """
    u = float(u)
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"curve parameter must lie in [0, 1], got {u}")
    if not 0 <= order <= 3:
        raise ValueError(f"derivative order must be in 0..3, got {order}")
    ds = curve.derivatives_many(np.array([u]), order)
    vals = [d[0] for d in ds] + [np.zeros(2)] * (3 - order)
    return CurveJet(vals[0], vals[1], vals[2], vals[3])


def _panel_quadrature(curve: BezierCurve, u1: float, u2: float, panels: int) -> float:
    edges = np.linspace(u1, u2, panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    centers = 0.5 * (edges[:-1] + edges[1:])
    us = (centers[:, None] + half * _GL_NODES[None, :]).ravel()
    d1 = curve.derivatives_many(us, 1)[1]
    speeds = np.hypot(d1[:, 0], d1[:, 1]).reshape(panels, -1)
    return float(half * np.sum(speeds @ _GL_WEIGHTS))


def arc_length(curve: BezierCurve, u1: float = 0.0, u2: float = 1.0,
               tol: float = 1e-9) -> float:
    """Arc length of ``curve`` over [u1, u2] in meters.

    24-point Gauss-Legendre per panel, with the panel count doubled until
    two successive estimates agree to ``tol``.
    """
    if not 0.0 <= u1 <= u2 <= 1.0:
        raise ValueError(f"need 0 <= u1 <= u2 <= 1, got ({u1}, {u2})")
    if u1 == u2:
        return 0.0
    previous = _panel_quadrature(curve, u1, u2, 1)
    panels = 2
    while panels <= 4096:
        current = _panel_quadrature(curve, u1, u2, panels)
        if abs(current - previous) < tol:
            return current
        previous = current
        panels *= 2
    return previous


def _cross(a: np.ndarray, b: np.ndarray) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def curvature(jet: CurveJet) -> float:
    """Signed curvature in 1/m; positive for counter-clockwise turning."""
    speed = float(np.hypot(*jet.d1))
    if speed <= SINGULAR_SPEED:
        raise SingularParameterizationError(
            "curvature undefined where the first derivative vanishes")
    return _cross(jet.d1, jet.d2) / speed**3


def curvature_arc_derivative(jet: CurveJet) -> float:
    """d(kappa)/ds in 1/m^2, expanded analytically from the curvature formula."""
    q = float(jet.d1 @ jet.d1)
    if q <= SINGULAR_SPEED**2:
        raise SingularParameterizationError(
            "curvature derivative undefined where the first derivative vanishes")
    det12 = _cross(jet.d1, jet.d2)
    det13 = _cross(jet.d1, jet.d3)
    dot12 = float(jet.d1 @ jet.d2)
    return det13 / q**2 - 3.0 * det12 * dot12 / q**3


def _continuity_defects(left: CurveJet, right: CurveJet, beta1: float,
                        beta2: float, beta3: float | None,
                        order: int) -> tuple[np.ndarray, np.ndarray]:
    """Raw defect vectors of the order-0..order continuity conditions.

    Returns (residual norms, right-hand-side norms). ``beta1`` may carry any
    sign here; positivity is a caller-level concern. The third-order
    condition uses the chain-rule coefficient 3*beta1*beta2, i.e. the betas
    are the derivatives of a common reparameterization at the junction.
    """
    residuals = np.zeros(order + 1)
    scales = np.zeros(order + 1)
    residuals[0] = np.linalg.norm(left.position - right.position)
    scales[0] = np.linalg.norm(right.position)
    if order >= 1:
        rhs = beta1 * right.d1
        residuals[1] = np.linalg.norm(left.d1 - rhs)
        scales[1] = np.linalg.norm(rhs)
    if order >= 2:
        rhs = beta1**2 * right.d2 + beta2 * right.d1
        residuals[2] = np.linalg.norm(left.d2 - rhs)
        scales[2] = np.linalg.norm(rhs)
    if order >= 3:
        rhs = beta1**3 * right.d3 + 3.0 * beta1 * beta2 * right.d2 + beta3 * right.d1
        residuals[3] = np.linalg.norm(left.d3 - rhs)
        scales[3] = np.linalg.norm(rhs)
    return residuals, scales


def check_geometric_continuity(left: CurveJet, right: CurveJet,
                               params: ShapeParameters, order: int = 2) -> np.ndarray:
    """Defect norms of the geometric continuity conditions, order by order.

    ``left`` is the jet approaching the junction (u -> 1-), ``right`` the jet
    leaving it (u -> 0+). Entry k is the norm of the order-k condition's
    defect; the caller compares against its own tolerances.
    """
    if not 0 <= order <= 3:
        raise ValueError(f"continuity order must be in 0..3, got {order}")
    if order >= 3 and params.beta3 is None:
        raise ValueError("beta3 is required to check third-order continuity")
    residuals, _ = _continuity_defects(left, right, params.beta1, params.beta2,
                                       params.beta3, order)
    return residuals
