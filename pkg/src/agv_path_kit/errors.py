"""Exception types shared across the toolkit."""

__all__ = [
    "SingularParameterizationError",
    "DegenerateGeometryError",
    "DiscontinuousPathError",
    "RepairInfeasibleError",
    "LayoutError",
]


class SingularParameterizationError(ValueError):
    """The curve derivative vanishes where a regular parameterization is required."""


class DegenerateGeometryError(ValueError):
    """Vehicle or junction geometry does not admit the requested computation."""


class DiscontinuousPathError(RuntimeError):
    """Velocity planning was requested on a path whose junctions are not smooth."""


class RepairInfeasibleError(RuntimeError):
    """No admissible control-point adjustment satisfies the junction constraints."""


class LayoutError(ValueError):
    """A layout document failed validation.

    ``location`` is a path into the document (e.g. ``segments[1].mode.n``).
    """

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)
