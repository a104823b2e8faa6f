"""Exception and warning types raised by the engine."""


class OmegaRelError(Exception):
    """Base class for every error the engine raises on bad input."""


class LatticeError(OmegaRelError):
    pass


class UnknownKind(LatticeError, ValueError):
    pass


class UnknownOperation(LatticeError, ValueError):
    pass


class OutOfCarrier(LatticeError, ValueError):
    pass


class DistributivityViolation(LatticeError):
    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


class FlavorLawViolation(LatticeError):
    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


class LatticeMismatch(OmegaRelError):
    pass


class DomainMismatch(OmegaRelError):
    pass


class SignatureMismatch(OmegaRelError):
    pass


class DuplicateAttribute(OmegaRelError):
    pass


class UnknownAttribute(OmegaRelError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NotASuperset(OmegaRelError):
    pass


class InconsistentLattice(OmegaRelError):
    pass


class DanglingVertexObject(OmegaRelError):
    pass


class UnknownVertex(OmegaRelError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class LegMissing(OmegaRelError):
    pass


class NonIdempotentPlus(OmegaRelError):
    pass


class NotReflexive(OmegaRelError):
    pass


class NotSymmetric(OmegaRelError):
    pass


class NonCrispArrow(OmegaRelError):
    pass


class ArityMismatch(OmegaRelError):
    pass


class UnclassifiableNeuron(OmegaRelError):
    def __init__(self, wire):
        super().__init__(f"neuron producing wire {wire!r} is neither conjunctive nor disjunctive")
        self.wire = wire


class EmptyGrid(OmegaRelError):
    pass


class ColumnMismatch(OmegaRelError):
    pass


class NotInjective(OmegaRelError):
    pass


class NotAHomomorphism(OmegaRelError):
    def __init__(self, message, arrow=None):
        super().__init__(message)
        self.arrow = arrow


class SpecError(OmegaRelError):
    def __init__(self, message, line=None, path=None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.line = line
        self.path = path


class NonPositiveDefiniteKernel(UserWarning):
    """Emitted when a kernel produced a clearly negative squared distance."""
