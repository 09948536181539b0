"""Velocity planning over a multi-segment path.

The pointwise speed-limit curve is sampled densely along the path; a
forward pass enforces the acceleration bound, a backward pass the
deceleration bound, and the planned profile is their pointwise minimum.
Junctions that are continuous only to first order are planned as rest
points (speed forced to zero); junctions that are outright discontinuous
make planning refuse unless a diagnostic profile is explicitly requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .continuity import DISCONTINUOUS, SMOOTH_AT_REST_ONLY, Tolerances, check_path
from .errors import DiscontinuousPathError
from .kinematics import profile_segment
from .vehicle import Path, VehicleModel

__all__ = ["VelocityProfile", "plan_velocity", "time_along"]


@dataclass(frozen=True)
class VelocityProfile:
    """Time-parameterized speed profile along a path.

    ``s`` is arc length from the path start; ``v`` never exceeds the limit
    curve ``v_limit``; ``t`` is strictly increasing. Per-wheel arrays carry
    the realized traction speeds (v * R_v) and steering rates
    (v * R_omega, rad/s) plus the sampled steering angles.
    """

    s: np.ndarray
    v: np.ndarray
    t: np.ndarray
    v_limit: np.ndarray
    binding: tuple[str, ...]
    u: np.ndarray
    segment_index: np.ndarray
    a_max: float
    boundary: tuple[float, float]
    junction_indices: tuple[int, ...]
    rest_indices: tuple[int, ...]
    wheel_speeds: dict[str, np.ndarray]
    wheel_steering_rates: dict[str, np.ndarray]
    wheel_deltas: dict[str, np.ndarray]
    wheel_r_v: dict[str, np.ndarray]
    wheel_r_omega: dict[str, np.ndarray]
    wheel_kappa: dict[str, np.ndarray]

    @property
    def total_time(self) -> float:
        return float(self.t[-1])

    @property
    def total_length(self) -> float:
        return float(self.s[-1])


def _assemble_limit(path: Path, vehicle: VehicleModel, resolution: int):
    """Concatenate per-segment profiles into path-level arrays.

    The duplicated junction sample is merged into one row carrying the
    minimum of the two one-sided limits; steering-angle tracks are re-based
    to the branch nearest the previous segment's end so genuine sub-turn
    jumps survive while branch artifacts do not.
    """
    wheel_ids = [w.id for w in vehicle.sorted_wheels()]
    s_parts, u_parts, seg_parts, v_parts, binding_parts = [], [], [], [], []
    tracks: dict[str, dict[str, list]] = {
        wid: {"delta": [], "r_v": [], "r_omega": [], "kappa": []}
        for wid in wheel_ids}
    junction_indices = []
    offset = 0.0
    count = 0
    for k, segment in enumerate(path.segments):
        prof = profile_segment(segment, vehicle, resolution)
        start = 0
        if k > 0:
            junction_indices.append(count - 1)
            if prof.v_max[0] < v_parts[-1][-1]:
                binding_parts[-1][-1] = prof.binding[0]
                v_parts[-1][-1] = prof.v_max[0]
            start = 1
        s_parts.append(prof.s[start:] + offset)
        u_parts.append(prof.u[start:])
        seg_parts.append(np.full(prof.u.size - start, k))
        v_parts.append(list(prof.v_max[start:]))
        binding_parts.append(list(prof.binding[start:]))
        for wid in wheel_ids:
            tr = prof.wheel_tracks[wid]
            delta = tr.delta_w.copy()
            if k > 0:
                prev_end = tracks[wid]["delta"][-1][-1]
                delta += 2.0 * math.pi * round((prev_end - delta[0]) / (2.0 * math.pi))
            tracks[wid]["delta"].append(delta[start:])
            tracks[wid]["r_v"].append(tr.r_v[start:])
            tracks[wid]["r_omega"].append(tr.r_omega[start:])
            tracks[wid]["kappa"].append(tr.kappa_w[start:])
        offset += float(prof.s[-1])
        count += prof.u.size - start
    s = np.concatenate(s_parts)
    return {
        "s": s,
        "u": np.concatenate(u_parts),
        "segment_index": np.concatenate(seg_parts),
        "v_limit": np.array([v for part in v_parts for v in part]),
        "binding": tuple(b for part in binding_parts for b in part),
        "junctions": tuple(junction_indices),
        "wheels": {
            wid: {key: np.concatenate(parts)
                  for key, parts in tracks[wid].items()}
            for wid in wheel_ids},
    }


def plan_velocity(path: Path, vehicle: VehicleModel, a_max: float = 0.5,
                  boundary: tuple[float, float] = (0.0, 0.0),
                  resolution: int = 1000, diagnostic: bool = False,
                  tol: Tolerances | None = None) -> VelocityProfile:
    """Plan a speed profile along ``path`` under the acceleration bound.

    Raises DiscontinuousPathError when any junction verdict is
    discontinuous, unless ``diagnostic`` is set (useful for visualizing what
    a broken layout would demand of the actuators). Junctions continuous
    only to first order are planned as rest points.
    """
    if not a_max > 0.0:
        raise ValueError(f"acceleration bound must be positive, got {a_max}")
    if resolution < 2:
        raise ValueError(f"resolution must be at least 2, got {resolution}")
    reports = check_path(path, vehicle, tol)
    bad = [r for r in reports if r.verdict == DISCONTINUOUS]
    if bad and not diagnostic:
        raise DiscontinuousPathError(
            f"{len(bad)} junction(s) are discontinuous; repair the layout or "
            "request a diagnostic profile")
    data = _assemble_limit(path, vehicle, resolution)
    v_limit = data["v_limit"]
    s = data["s"]
    n = s.size
    rest = tuple(idx for idx, rep in zip(data["junctions"], reports)
                 if rep.verdict == SMOOTH_AT_REST_ONLY)

    cap = v_limit.copy()
    for idx in rest:
        cap[idx] = 0.0
    v = cap.copy()
    v[0] = min(v[0], float(boundary[0]))
    ds = np.diff(s)
    for i in range(1, n):
        reachable = math.sqrt(v[i - 1]**2 + 2.0 * a_max * ds[i - 1])
        if reachable < v[i]:
            v[i] = reachable
    v[-1] = min(v[-1], float(boundary[1]))
    for i in range(n - 2, -1, -1):
        reachable = math.sqrt(v[i + 1]**2 + 2.0 * a_max * ds[i])
        if reachable < v[i]:
            v[i] = reachable

    t = np.zeros(n)
    for i in range(1, n):
        if ds[i - 1] == 0.0:
            t[i] = t[i - 1]
            continue
        pair = v[i - 1] + v[i]
        if pair <= 0.0:
            raise DiscontinuousPathError(
                "speed limit collapses to zero over an interval of positive length")
        t[i] = t[i - 1] + 2.0 * ds[i - 1] / pair

    wheel_speeds, wheel_rates, wheel_deltas = {}, {}, {}
    wheel_r_v, wheel_r_omega, wheel_kappa = {}, {}, {}
    for wid, tr in data["wheels"].items():
        wheel_r_v[wid] = tr["r_v"]
        wheel_r_omega[wid] = tr["r_omega"]
        wheel_kappa[wid] = tr["kappa"]
        wheel_deltas[wid] = tr["delta"]
        wheel_speeds[wid] = v * tr["r_v"]
        with np.errstate(invalid="ignore"):
            rates = v * tr["r_omega"]
        rates[v == 0.0] = 0.0
        wheel_rates[wid] = rates
    return VelocityProfile(
        s=s, v=v, t=t, v_limit=v_limit, binding=data["binding"], u=data["u"],
        segment_index=data["segment_index"], a_max=a_max,
        boundary=(float(boundary[0]), float(boundary[1])),
        junction_indices=data["junctions"], rest_indices=rest,
        wheel_speeds=wheel_speeds, wheel_steering_rates=wheel_rates,
        wheel_deltas=wheel_deltas, wheel_r_v=wheel_r_v,
        wheel_r_omega=wheel_r_omega, wheel_kappa=wheel_kappa)


def time_along(profile: VelocityProfile, s: float) -> float:
    """Time at which the profile reaches arc length ``s``."""
    if not 0.0 <= s <= profile.total_length + 1e-12:
        raise ValueError(
            f"s = {s} outside the path (total length {profile.total_length:.6f} m)")
    return float(np.interp(s, profile.s, profile.t))
