"""Exception hierarchy.

Every error raised on purpose by the library derives from ``HolonomyError``.
The CLI maps the three families below onto its exit codes.
"""


class HolonomyError(Exception):
    """Base class for all library errors."""


class ContractError(HolonomyError, ValueError):
    """An input violates an operation's precondition."""


class BudgetExhausted(HolonomyError):
    """A bounded search ran out of budget without a verdict."""


class NonPositiveDeterminant(ContractError):
    pass


class NotHyperbolicTrace(ContractError):
    pass


class SharedFixedPoint(ContractError):
    pass


class EllipticHasNoSimplestLift(ContractError):
    pass


class NotElliptic(ContractError):
    pass


class RelatorNotSatisfied(ContractError):
    pass


class EllipticBoundary(ContractError):
    pass


class NotRealizable(ContractError):
    pass


class ReducibleAmbiguity(ContractError):
    """The character has kappa = 2; ``pair`` holds one representative."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class NotConjugate(ContractError):
    pass


class WrongRegime(ContractError):
    pass


class DegeneratePentagon(ContractError):
    pass


class NotVAPair(ContractError):
    pass


class CommutatorMismatch(ContractError):
    pass


class ElementaryRepresentation(ContractError):
    pass


class IdentityCurve(ContractError):
    pass


class OutOfDisc(ContractError):
    pass


class RootNotBracketed(ContractError):
    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class InvalidDomain(ContractError):
    """Assembled cone-surface data failed one of its own invariant checks."""


class NoWitness(BudgetExhausted):
    pass
