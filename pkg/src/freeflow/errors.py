"""Exception types raised across the package.

Every error carries a short machine-readable ``code`` (its class name) so the
CLI can map failures to structured error JSON and nonzero exit codes.
"""


class FreeflowError(Exception):
    """Base class for all package errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# domain construction / queries
class DegenerateSpec(FreeflowError):
    """Polygon has (near-)zero area, too few vertices, or h exceeds feature size."""


class DisconnectedInterior(FreeflowError):
    """Rasterization split the region into several graph components."""


class EmptyErosion(FreeflowError):
    """No interior cell survives the requested erosion depth."""


class PointOutsideDomain(FreeflowError):
    """Query point does not snap to any interior cell within tolerance h."""


class ZeroLengthPath(FreeflowError):
    """Constant-speed sampling of a path with zero length."""


# fields
class KernelTooSmall(FreeflowError):
    """Mollifier radius 1/k smaller than the grid spacing."""


class IsolatedCell(FreeflowError):
    """No cell has the neighbors required for a finite-difference gradient."""


class PathLeavesSupport(FreeflowError):
    """A quadrature sample falls outside the field's support."""


class LoopOutsideRegion(FreeflowError):
    """A supplied loop leaves the mollified field's region."""


class FieldDomainMismatch(FreeflowError):
    """Field values do not match the domain they are attached to."""


# potential
class NotConservative(FreeflowError):
    """Conservativity check failed; no potential is reconstructed."""


class BasepointEroded(FreeflowError):
    """The basepoint does not survive the erosion used for reconstruction."""


# flows
class SpindleLeavesDomain(FreeflowError):
    """Spindle tube [x,y] + eps*ball is not contained in the domain."""


class DegenerateSegment(FreeflowError):
    """Spindle endpoints coincide."""


class TubeLeavesDomain(FreeflowError):
    """Loop tube gamma + B(0,1/k) is not contained in the domain."""


class RectOutsideDomain(FreeflowError):
    """Rectangle is not contained in the rasterized domain."""


# transport
class Unbalanced(FreeflowError):
    """Supplies/masses do not sum to zero."""


class Disconnected(FreeflowError):
    """Some supply cannot reach any demand."""


class SolutionMismatch(FreeflowError):
    """Flow solution does not conserve the given molecule."""


class NonSummable(FreeflowError):
    """Field has no finite grid L1 norm (kept for API symmetry)."""


# cli
class ConfigInvalid(FreeflowError):
    """Experiment configuration failed validation."""


class MissingSeries(FreeflowError):
    """Report lacks the data series required for the requested plot kind."""
