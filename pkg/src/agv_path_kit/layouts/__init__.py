"""Bundled demonstration layouts.

Three layouts ship with the package:

- ``two_wheel_g1``: two tangential segments whose curves meet with matching
  tangent direction but mismatched curvature: the junction looks smooth to
  the eye yet no finite-steering-speed vehicle can track it exactly.
- ``two_wheel_smoothed``: the same layout after tangential-rule repair; the
  downstream curve's first three interior control points are adjusted so
  curve and motion mode share second-order continuity (and the curves are
  third-order continuous) to machine precision.
- ``six_wheel_exponential``: a six-wheel vehicle handing over from a
  tangential segment to an anticipated-turn exponential segment (n = 1.7,
  offset 14 deg); both junction curvatures vanish and the third derivatives
  satisfy the orientation-rate matching relation exactly.

Run ``python -m agv_path_kit.layouts._generate`` to rebuild the JSON files.
"""

from importlib import resources

__all__ = ["bundled_layout_names", "bundled_layout_text", "bundled_layout_path"]

_NAMES = ("two_wheel_g1", "two_wheel_smoothed", "six_wheel_exponential")


def bundled_layout_names() -> tuple[str, ...]:
    return _NAMES


def bundled_layout_text(name: str) -> str:
    if name not in _NAMES:
        raise KeyError(f"unknown bundled layout {name!r}; have {_NAMES}")
    return resources.files(__package__).joinpath(f"{name}.json").read_text("utf-8")


def bundled_layout_path(name: str):
    """Filesystem path of a bundled layout (valid while the package is installed)."""
    if name not in _NAMES:
        raise KeyError(f"unknown bundled layout {name!r}; have {_NAMES}")
    return resources.files(__package__).joinpath(f"{name}.json")
