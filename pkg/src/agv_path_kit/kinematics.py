"""Wheel-level kinematics along a path segment.

Given a segment (curve + motion mode) and a wheel mounted at r_w, the wheel
path is C_w(u) = C(u) + R(theta(u)) r_w. From its exact derivatives follow
the wheel heading, steering angle, curvature, the velocity ratio
R_v = |C_w'|/|C'|, the steering ratio R_omega = (kappa_w |C_w'| - theta')/|C'|,
and the pointwise vehicle speed limit

    v_max(u) = min(v_segment, min_w v_w_max / R_v,  min_w omega_w_max / |R_omega|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .curve import BezierCurve, CurveJet, arc_length
from .motion import (orientation_at_end, orientation_many,
                     orientation_third_derivative, wrap_angle)
from .vehicle import PathSegment, VehicleModel, Wheel

__all__ = [
    "WheelState",
    "SpeedLimitSample",
    "SegmentProfile",
    "WheelTrack",
    "wheel_curve_jet",
    "wheel_end_jet",
    "wheel_state",
    "speed_limit",
    "wheel_speed_limit",
    "profile_segment",
    "fold_steering_angles",
]

_J = np.array([[0.0, -1.0], [1.0, 0.0]])  # rotation by +90 degrees
_WHEEL_SINGULAR = 1e-12
_UNWRAP_GRID = 4096


@dataclass(frozen=True)
class WheelState:
    """Kinematic state of one wheel at a path parameter.

    ``delta_w`` (steering angle, wheel heading minus body orientation) is
    unwrapped along u within the segment. ``singular`` marks isolated points
    where the wheel path momentarily stops (|C_w'| = 0) and curvature-based
    quantities are undefined.
    """

    position: np.ndarray
    zeta_w: float
    delta_w: float
    r_v: float
    r_omega: float
    kappa_w: float
    singular: bool = False


@dataclass(frozen=True)
class SpeedLimitSample:
    """Pointwise speed limit with the constraint that attains it.

    ``binding`` is "segment", "traction(<wheel>)" or "steering(<wheel>)";
    ties resolve in that order, then by lowest wheel id. ``flagged`` marks
    samples where a wheel was singular or a steering ratio unbounded.
    """

    u: float
    s: float
    v_max: float
    binding: str
    flagged: bool = False


def _rotations(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stacked R(theta) applied later to r_w, plus J R(theta)."""
    c, s = np.cos(theta), np.sin(theta)
    rot = np.empty((theta.size, 2, 2))
    rot[:, 0, 0] = c
    rot[:, 0, 1] = -s
    rot[:, 1, 0] = s
    rot[:, 1, 1] = c
    return rot, _J[None, :, :] @ rot


def _wheel_derivative_arrays(curve: BezierCurve, mode, wheel: Wheel,
                             us: np.ndarray, theta_jets=None):
    """Position and first two derivatives of the wheel curve at each u."""
    us = np.asarray(us, dtype=float)
    c0, c1, c2 = curve.derivatives_many(us, 2)
    if theta_jets is None:
        theta_jets = orientation_many(mode, curve, us)
    theta, dtheta, ddtheta = theta_jets
    r = wheel.r_vec
    if not np.any(r):
        return c0, c1, c2, theta, dtheta
    rot, jrot = _rotations(theta)
    rr = rot @ r
    jr = jrot @ r
    pos = c0 + rr
    d1 = c1 + dtheta[:, None] * jr
    with np.errstate(invalid="ignore"):
        d2 = c2 - (dtheta**2)[:, None] * rr + ddtheta[:, None] * jr
    return pos, d1, d2, theta, dtheta


def wheel_curve_jet(segment: PathSegment, wheel: Wheel, u: float,
                    order: int = 2) -> CurveJet:
    """Exact jet of the wheel path at ``u`` up to ``order`` (max 3).

    Order 3 uses the analytic third derivative of the orientation law, which
    exists for every shipped mode at interior parameters.
    """
    if not 0 <= order <= 3:
        raise ValueError(f"order must be in 0..3, got {order}")
    us = np.array([float(u)])
    pos, d1, d2, theta, dtheta = _wheel_derivative_arrays(
        segment.curve, segment.mode, wheel, us)
    d3 = np.zeros(2)
    if order >= 3:
        c3 = segment.curve.derivatives_many(us, 3)[3][0]
        r = wheel.r_vec
        if np.any(r):
            ddtheta = orientation_many(segment.mode, segment.curve, us)[2][0]
            dddtheta = orientation_third_derivative(segment.mode, segment.curve, u)
            rot, jrot = _rotations(theta)
            rr = (rot @ r)[0]
            jr = (jrot @ r)[0]
            th1 = dtheta[0]
            d3 = c3 - 3.0 * th1 * ddtheta * rr + (dddtheta - th1**3) * jr
        else:
            d3 = c3
    return CurveJet(pos[0], d1[0],
                    d2[0] if order >= 2 else np.zeros(2),
                    d3)


def wheel_end_jet(segment: PathSegment, wheel: Wheel, end: str) -> CurveJet:
    """One-sided wheel jet at a segment end, using one-sided orientation limits."""
    u = 0.0 if end == "start" else 1.0
    jet = orientation_at_end(segment.mode, segment.curve, end)
    arrays = _wheel_derivative_arrays(
        segment.curve, segment.mode, wheel, np.array([u]),
        theta_jets=(np.array([jet.theta]), np.array([jet.dtheta]),
                    np.array([jet.ddtheta])))
    pos, d1, d2 = arrays[0][0], arrays[1][0], arrays[2][0]
    return CurveJet(pos, d1, d2, np.zeros(2))


@lru_cache(maxsize=512)
def _wheel_heading_grid(segment: PathSegment, wheel: Wheel):
    """Dense unwrapped wheel-heading samples for branch selection."""
    us = np.linspace(0.0, 1.0, _UNWRAP_GRID + 1)
    _, d1, _, _, _ = _wheel_derivative_arrays(segment.curve, segment.mode, wheel, us)
    unwrapped = np.unwrap(np.arctan2(d1[:, 1], d1[:, 0]))
    us.setflags(write=False)
    unwrapped.setflags(write=False)
    return us, unwrapped


def _unwrapped_wheel_heading(segment: PathSegment, wheel: Wheel,
                             us: np.ndarray, d1: np.ndarray) -> np.ndarray:
    grid_u, grid_z = _wheel_heading_grid(segment, wheel)
    reference = np.interp(us, grid_u, grid_z)
    principal = np.arctan2(d1[:, 1], d1[:, 0])
    return reference + np.mod(principal - reference + np.pi, 2.0 * np.pi) - np.pi


def _ratios_from_derivatives(d1, d2, dtheta, vehicle_speed):
    """r_v, r_omega, kappa, singular from wheel derivatives (no unwrapping).

    Rows where the second derivative is not finite (the flat end of an
    exponential reparameterization with 1 < n < 2) have a genuinely
    unbounded steering ratio: r_omega is +inf there, never NaN, so the
    steering constraint collapses the speed limit instead of dropping out.
    """
    wheel_speed = np.hypot(d1[:, 0], d1[:, 1])
    singular = ~(wheel_speed > _WHEEL_SINGULAR)
    unbounded = ~np.isfinite(d2).all(axis=1)
    safe = np.where(singular, 1.0, wheel_speed)
    with np.errstate(invalid="ignore", over="ignore"):
        det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        kappa = np.where(singular | unbounded, np.nan, det / safe**3)
        zeta_rate = det / safe**2  # = kappa_w |C_w'|
        r_v = wheel_speed / vehicle_speed
        r_omega = np.where(singular, np.nan, (zeta_rate - dtheta) / vehicle_speed)
    r_omega = np.where(unbounded & ~singular, np.inf, r_omega)
    return r_v, r_omega, kappa, singular


def _ratio_tracks(curve: BezierCurve, mode, vehicle: VehicleModel,
                  us: np.ndarray) -> dict[str, dict]:
    """Speed/steering ratios for every wheel, on the cheap principal-angle path."""
    us = np.asarray(us, dtype=float)
    theta_jets = orientation_many(mode, curve, us, unwrap=False)
    c1 = curve.derivatives_many(us, 1)[1]
    vehicle_speed = np.hypot(c1[:, 0], c1[:, 1])
    out = {}
    for w in vehicle.sorted_wheels():
        _, d1, d2, _, dtheta = _wheel_derivative_arrays(curve, mode, w, us,
                                                        theta_jets)
        r_v, r_omega, kappa, singular = _ratios_from_derivatives(
            d1, d2, dtheta, vehicle_speed)
        out[w.id] = {"r_v": r_v, "r_omega": r_omega, "kappa_w": kappa,
                     "singular": singular}
    return out


def _wheel_track_arrays(segment: PathSegment, wheel: Wheel, us: np.ndarray):
    """Vectorized wheel-state quantities across many parameters."""
    us = np.asarray(us, dtype=float)
    pos, d1, d2, theta, dtheta = _wheel_derivative_arrays(
        segment.curve, segment.mode, wheel, us)
    c1 = segment.curve.derivatives_many(us, 1)[1]
    vehicle_speed = np.hypot(c1[:, 0], c1[:, 1])
    r_v, r_omega, kappa, singular = _ratios_from_derivatives(
        d1, d2, dtheta, vehicle_speed)
    zeta = _unwrapped_wheel_heading(segment, wheel, us, d1)
    # Steering angle continuous along u, anchored at its principal value at u=0.
    theta0 = orientation_many(segment.mode, segment.curve, np.array([0.0]))[0][0]
    zeta0 = _unwrapped_wheel_heading(
        segment, wheel, np.array([0.0]),
        _wheel_derivative_arrays(segment.curve, segment.mode, wheel,
                                 np.array([0.0]))[1])[0]
    delta = wrap_angle(zeta0 - theta0) + (zeta - zeta0) - (theta - theta0)
    return {
        "position": pos, "zeta_w": zeta, "delta_w": delta, "r_v": r_v,
        "r_omega": r_omega, "kappa_w": kappa, "singular": singular,
    }


def fold_steering_angles(deltas: np.ndarray, limit: float = math.pi) -> np.ndarray:
    """Re-express a steering-angle track with half-turn flips at a range limit.

    Speeds are reported positive throughout the toolkit, so a wheel rolling
    backwards appears as a steering angle past +-90 deg rather than a
    negative speed. Vehicles whose steering actuators cannot reach such
    angles flip the wheel by half a turn instead (reversing the rolling
    direction). This helper applies that convention to an unwrapped track:
    whenever the angle leaves [-limit, +limit], half-turn multiples are
    added to bring it back. Production tracks are reported unflipped; this
    post-processing is opt-in for vehicles with restricted steering ranges.
    """
    out = np.asarray(deltas, dtype=float).copy()
    if not 0.0 < limit <= math.pi:
        raise ValueError(f"steering limit must lie in (0, pi], got {limit}")
    offset = 0.0
    for i in range(out.size):
        value = out[i] + offset
        while value > limit:
            offset -= math.pi
            value -= math.pi
        while value < -limit:
            offset += math.pi
            value += math.pi
        out[i] = value
    return out


def wheel_state(segment: PathSegment, wheel: Wheel, u: float) -> WheelState:
    """Full kinematic state of ``wheel`` at parameter ``u``."""
    t = _wheel_track_arrays(segment, wheel, np.array([float(u)]))
    return WheelState(
        position=t["position"][0],
        zeta_w=float(t["zeta_w"][0]),
        delta_w=float(t["delta_w"][0]),
        r_v=float(t["r_v"][0]),
        r_omega=float(t["r_omega"][0]),
        kappa_w=float(t["kappa_w"][0]),
        singular=bool(t["singular"][0]),
    )


def _limit_from_tracks(v_segment: float, vehicle: VehicleModel,
                       tracks: dict[str, dict], size: int):
    """Vectorized speed limit with binding bookkeeping.

    Binding priority on exact ties: segment, then traction, then steering,
    then lowest wheel id, implemented by strict-improvement updates in
    that visit order.
    """
    v = np.full(size, float(v_segment))
    binding = np.array(["segment"] * size, dtype=object)
    flagged = np.zeros(size, dtype=bool)
    for w in vehicle.sorted_wheels():
        t = tracks[w.id]
        flagged |= t["singular"]
        with np.errstate(divide="ignore", invalid="ignore"):
            quota = np.where(t["r_v"] > 0.0, w.v_max / t["r_v"], np.inf)
        quota = np.where(np.isnan(quota), np.inf, quota)
        better = quota < v
        v = np.where(better, quota, v)
        binding[better] = f"traction({w.id})"
    for w in vehicle.sorted_wheels():
        t = tracks[w.id]
        with np.errstate(divide="ignore", invalid="ignore"):
            mag = np.abs(t["r_omega"])
            quota = np.where(mag > 0.0, w.omega_max / mag, np.inf)
        quota = np.where(np.isnan(quota), np.inf, quota)
        flagged |= ~np.isfinite(mag) & ~t["singular"]
        better = quota < v
        v = np.where(better, quota, v)
        binding[better] = f"steering({w.id})"
    return v, binding, flagged


def _limit_arrays(segment: PathSegment, vehicle: VehicleModel, us: np.ndarray):
    """Speed limit plus full wheel tracks (used by profiling and scalar queries)."""
    us = np.asarray(us, dtype=float)
    tracks = {w.id: _wheel_track_arrays(segment, w, us)
              for w in vehicle.sorted_wheels()}
    v, binding, flagged = _limit_from_tracks(segment.v_max, vehicle, tracks,
                                             us.size)
    return v, binding, flagged, tracks


def limit_profile_fast(curve: BezierCurve, mode, v_segment: float,
                       vehicle: VehicleModel, us: np.ndarray) -> np.ndarray:
    """Speed-limit values only, skipping steering-angle bookkeeping.

    Candidate evaluation during repair calls this in a tight loop.
    """
    us = np.asarray(us, dtype=float)
    tracks = _ratio_tracks(curve, mode, vehicle, us)
    v, _, _ = _limit_from_tracks(v_segment, vehicle, tracks, us.size)
    return v


def speed_limit(segment: PathSegment, vehicle: VehicleModel, u: float,
                s: float | None = None) -> SpeedLimitSample:
    """Pointwise vehicle speed limit at ``u`` with its binding constraint."""
    v, binding, flagged, _ = _limit_arrays(segment, vehicle, np.array([float(u)]))
    if s is None:
        s = arc_length(segment.curve, 0.0, float(u))
    return SpeedLimitSample(float(u), float(s), float(v[0]), str(binding[0]),
                            bool(flagged[0]))


def wheel_speed_limit(segment: PathSegment, vehicle: VehicleModel,
                      wheel: Wheel, u: float) -> float:
    """Traction-speed limit of one wheel: vehicle limit scaled by its R_v."""
    sample = speed_limit(segment, vehicle, u)
    state = wheel_state(segment, wheel, u)
    return sample.v_max * state.r_v


@dataclass(frozen=True)
class WheelTrack:
    """Per-wheel sampled tracks along a segment."""

    delta_w: np.ndarray
    r_v: np.ndarray
    r_omega: np.ndarray
    kappa_w: np.ndarray
    singular: np.ndarray


@dataclass(frozen=True)
class SegmentProfile:
    """Densely sampled limit profile and wheel tracks over one segment."""

    u: np.ndarray
    s: np.ndarray
    v_max: np.ndarray
    binding: tuple[str, ...]
    flagged: np.ndarray
    theta: np.ndarray
    dtheta: np.ndarray
    wheel_tracks: dict[str, WheelTrack]


def profile_segment(segment: PathSegment, vehicle: VehicleModel,
                    samples: int) -> SegmentProfile:
    """Uniform-u sampling of the limit profile and all wheel tracks.

    Arc length is computed independently per sample, so evaluation order
    (or parallel evaluation) cannot change the result. Samples flagged as
    singular take the speed limit of their nearest unflagged neighbor
    rather than a silently interpolated value.
    """
    if samples < 2:
        raise ValueError(f"need at least 2 samples, got {samples}")
    us = np.linspace(0.0, 1.0, samples)
    s = np.array([arc_length(segment.curve, 0.0, float(u)) for u in us])
    v, binding, flagged, tracks = _limit_arrays(segment, vehicle, us)
    theta, dtheta, _ = orientation_many(segment.mode, segment.curve, us)
    # At an isolated wheel-cusp sample the cusp wheel imposes no constraint
    # of its own; borrow the nearest clean sample's limit instead of leaving
    # the optimistic value.
    cusp = np.zeros(samples, dtype=bool)
    for t in tracks.values():
        cusp |= t["singular"]
    if cusp.any() and (~cusp).any():
        idx = np.arange(samples)
        clean = idx[~cusp]
        for i in idx[cusp]:
            near = clean[np.argmin(np.abs(clean - i))]
            v[i] = min(v[i], v[near])
    wheel_tracks = {
        wid: WheelTrack(t["delta_w"], t["r_v"], t["r_omega"], t["kappa_w"],
                        t["singular"])
        for wid, t in tracks.items()
    }
    return SegmentProfile(us, s, v, tuple(str(b) for b in binding), flagged,
                          theta, dtheta, wheel_tracks)
