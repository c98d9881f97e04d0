"""Exception hierarchy shared by all workbench modules."""


class WorkbenchError(Exception):
    """Base class for all errors raised by this package."""


class InfiniteGroup(WorkbenchError):
    """An operation that needs a finite group met an infinite factor."""


class MismatchedParents(WorkbenchError):
    """Two group elements do not belong to the same group."""


class NotAMultiple(WorkbenchError):
    """Attempted to embed a cyclotomic scalar into a non-multiple order."""


class UnsupportedGroup(WorkbenchError):
    """Cohomology request outside the supported group/action combinations."""


class NotACocycle(WorkbenchError):
    """A 2-cochain failed the twisted cocycle identity where one is required."""


class NontrivialAction(WorkbenchError):
    """The H^2 splitting is only defined for a trivial module action."""


class MismatchedAlgebra(WorkbenchError):
    """Bimodule operation across different parent algebras."""


class NotAnAutomorphism(WorkbenchError):
    """A map claimed to be a bimodule automorphism failed verification."""


class NotAFactorSystem(WorkbenchError):
    """Assembly requires a verified factor system."""


class SolveFailed(WorkbenchError):
    """A defining linear system had no solution (non-factor-system input)."""


class NotFree(WorkbenchError):
    """Operation requires a free dynamical system."""


class NotCommutativeBase(WorkbenchError):
    """Bundle machinery requires the fixed-point algebra to be commutative."""


class UnsupportedAction(WorkbenchError):
    """Bundle splitting is undefined for point-permuting Picard maps."""


class NotCommutative(WorkbenchError):
    """Gelfand realization requires a commutative total algebra."""


class Obstructed(WorkbenchError):
    """Bundle classification requested for an obstructed Picard map."""


class RelationViolated(WorkbenchError):
    """An (S, omega) pair violated one of its two defining relations."""


class ActionsDoNotCommute(WorkbenchError):
    """The two actions handed to the mixing construction do not commute."""


class ConfigError(WorkbenchError):
    """Malformed or inconsistent CLI configuration."""


class ComputeError(WorkbenchError):
    """Internal invariant violation; indicates a bug, not a verdict."""
