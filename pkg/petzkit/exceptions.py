from __future__ import annotations

from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from petzkit.petz import RecoveryReport


class PetzkitError(Exception):
    """Base class of all errors raised by ``petzkit``."""


class DimensionMismatchError(PetzkitError, ValueError):
    """Operands live on spaces of different dimension."""


class ValidationError(PetzkitError, ValueError):
    """An operator, state, channel, ensemble or file violates its invariants.

    Args:
        message:
            Human readable diagnostic.
        residual:
            The measured violation, if there is a single number describing it.
    """

    def __init__(self, message: str, residual: float | None = None) -> None:
        super().__init__(message)
        self.residual = residual


class DomainError(PetzkitError, ValueError):
    """A scalar function is undefined on a retained eigenvalue."""


class SupportError(PetzkitError, ValueError):
    """A relative entropy that was required to be finite is infinite."""

    def __init__(self, message: str, infinite_terms: list[str]) -> None:
        super().__init__(message)
        self.infinite_terms = infinite_terms


class RankPreconditionError(PetzkitError, ValueError):
    """An ensemble state has numerical rank above the requested bound."""


class CovarianceError(PetzkitError, ValueError):
    """A channel is not covariant under a unitary, or the group is reducible."""

    def __init__(self, message: str, index: int | None = None) -> None:
        super().__init__(message)
        self.index = index


class InfeasibleConstraintError(PetzkitError, ValueError):
    """No state satisfies the energy constraint."""


class EigensolverError(PetzkitError, RuntimeError):
    """The Hermitian eigensolver failed to converge."""


class NumericalError(PetzkitError, RuntimeError):
    """Two formulas for the same quantity disagree beyond tolerance."""


class ConstructionError(PetzkitError, RuntimeError):
    """The rank-bounded Kraus construction cannot be carried out.

    Args:
        message:
            Human readable diagnostic.
        residual:
            The residual that failed its threshold.
        report:
            The reversibility audit that failed, if one was run.
    """

    def __init__(
        self,
        message: str,
        residual: float | None = None,
        report: RecoveryReport | None = None,
        **details: Any,
    ) -> None:
        super().__init__(message)
        self.residual = residual
        self.report = report
        self.details = details
