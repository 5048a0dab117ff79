"""
Exception hierarchy for the cylindrical Green's function solver.
"""


class SolverError(Exception):
    """Base class for all solver failures."""


class ZeroArgument(SolverError, ValueError):
    """A cylinder function was requested at z = 0."""


class OrderOverflow(SolverError, ValueError):
    """Azimuthal order exceeds the configured maximum."""


class WouldOverflow(SolverError, OverflowError):
    """Unscaled values leave double-precision range; stay in scaled form."""


class RadialWavenumberNearZero(SolverError, ArithmeticError):
    """|k_rho| * a underflowed: the spectral path passed through a branch point."""


class SingularInterfaceMatrix(SolverError, ArithmeticError):
    """A 2x2 interface matrix is numerically singular (spectral point on a mode)."""


class SourceOnInterface(SolverError, ValueError):
    """The source radius coincides with an interface radius."""


class FieldOnInterface(SolverError, ValueError):
    """The receiver radius coincides with an interface radius."""


class UnsupportedAnisotropy(SolverError, ValueError):
    """Direct subtraction was forced on a layer with kappa_eps != kappa_mu."""


class AnisotropyMismatch(SolverError, ValueError):
    """The closed form requires kappa_eps == kappa_mu."""


class InvalidStack(SolverError, ValueError):
    """The layer stack violates its geometric or material invariants."""
