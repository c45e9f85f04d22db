"""
Exceptions raised by ``diskbio``.

Invalid arguments raise subclasses of ``ValueError``;
numerical failures (non-convergence, loss of definiteness) raise subclasses of ``RuntimeError``.
"""


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class ExcludedModeError(DomainError):
    """The PSH mode is excluded from the operation (e.g. ``(0, 0)`` in the Gamma recursion)."""


class SingularityError(ValueError):
    """A kernel was evaluated on its singular set."""


class BoundarySingularityError(SingularityError):
    """A quantity blows up on the rim of the disk."""


class StepTooLargeError(ValueError):
    """The finite-difference stencil leaves the region where the field is defined."""


class UnsupportedRuleError(ValueError):
    """No quadrature rule exists for the requested kind or order."""


class MeshingError(ValueError):
    """Degenerate triangle or a point that cannot be located in the mesh."""


class EmptySpaceError(ValueError):
    """The requested finite element space has no degrees of freedom."""


class ConfigError(ValueError):
    """Malformed configuration file or invalid configuration value."""


class DefinitenessError(RuntimeError):
    """A matrix or operator expected to be SPD is not."""


class AccuracyError(RuntimeError):
    """A numerical integration did not reach the requested accuracy."""
