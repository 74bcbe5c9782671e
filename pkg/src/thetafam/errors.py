"""Exception types shared across the package.

Every failure mode that callers are expected to branch on gets its own class;
anything else is a plain ValueError/TypeError from the offending operation.
"""


class ThetafamError(Exception):
    """Base class for all package-specific errors."""


class NonUnit(ThetafamError):
    """Operand reduces to 0 mod p where a unit is required."""


class DomainError(ThetafamError):
    """Input outside the convergence/validity domain of the operation."""


class PrecisionLoss(ThetafamError):
    """Requested output precision cannot be certified."""


class CapMismatch(ThetafamError):
    """Series operands disagree on variables or degree caps."""


class CapOverflow(ThetafamError):
    """Operation would need a larger degree cap than declared."""


class CapExhausted(ThetafamError):
    """q-expansion cap shrank below 1 under an index-contracting operator."""


class WeightOutOfRadius(ThetafamError):
    """Weight lies outside the disc of convergence of the coefficient ring."""


class ModulusTooLarge(ThetafamError):
    """Ray class modulus beyond the configured desk-scale bound."""


class NotCoprime(ThetafamError):
    """Ideal is not coprime to the relevant modulus."""


class Unsupported(ThetafamError):
    """Configuration the artifact deliberately refuses (for example p | h_K)."""


class NotSelfDual(ThetafamError):
    """Central characters of the two theta characters are not inverse."""


class NoConvergence(ThetafamError):
    """Iteration cap reached before stabilization could be certified."""


class RankDeficient(ThetafamError):
    """Basis matrix is not full rank on any usable index set."""


class EigenAmbiguous(ThetafamError):
    """Eigenvalue metadata does not separate the target line."""


class EigenMismatch(ThetafamError):
    """Loaded eigen metadata contradicts the Hecke action on the expansion."""

    def __init__(self, ell, expected, found):
        self.ell = ell
        self.expected = expected
        self.found = found
        super().__init__(f"T_{ell} eigenvalue mismatch: expected {expected}, found {found}")


class NotPrimitive(ThetafamError):
    """Character is imprimitive at the declared level."""


class CaseMismatch(ThetafamError):
    """Local-factor inputs violate the case table (for example p-new with k != 2)."""


class InconsistencyFound(ThetafamError):
    """A consistency grid identity failed; carries the offending tuple."""

    def __init__(self, point, detail=""):
        self.point = point
        super().__init__(f"consistency failure at {point}" + (f": {detail}" if detail else ""))


class MissingFrobenius(ThetafamError):
    """Heegner point data lacks the Frobenius image."""


class NotMultiplicative(ThetafamError):
    """Curve does not have multiplicative reduction at p (ord_p(j) >= 0)."""


class InsufficientSamples(ThetafamError):
    """Too few arc samples for the requested fit degree."""


class ValidationFailed(ThetafamError):
    """A configured run violates one of the standing assumption clauses."""

    def __init__(self, clause, detail):
        self.clause = clause
        self.detail = detail
        super().__init__(f"assumption {clause} violated: {detail}")


class ParseError(ThetafamError):
    """Malformed config or data file; message names the location."""
