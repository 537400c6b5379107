"""Exception hierarchy shared by all bumplab modules."""


class BumplabError(Exception):
    """Base class for every error raised by bumplab."""


class DomainError(BumplabError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ParameterError(BumplabError, ValueError):
    """Invalid parameter combination (exponents, truncation radii, ...)."""


class ExtrapolationError(BumplabError, ValueError):
    """A tabulated Young function was queried above its table range."""


class YoungOverflowError(BumplabError, OverflowError):
    """Evaluation exceeded floating-point range (e.g. exp(t) for t > 700).

    ``attempted`` carries the offending argument (or Luxemburg level).
    """

    def __init__(self, message, attempted=None):
        super().__init__(message)
        self.attempted = attempted


class ResolutionError(BumplabError, ValueError):
    """Too few table points to build a numeric conjugate."""


class HypothesisViolation(BumplabError):
    """The inverse-compatibility hypothesis of the generalized Hölder bound
    failed at the sampled argument ``witness``."""

    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


class ResourceError(BumplabError):
    """Requested grid exceeds the cell budget."""


class StructuralError(BumplabError, ValueError):
    """Cube/lattice/family mismatch or missing sparsity witnesses."""


class DegenerateCubeError(BumplabError, ValueError):
    """Cube with empty intersection with the domain."""


class ClassConditionError(BumplabError):
    """A Young-class precondition (e.g. Ā ∈ B_{q',s'}) does not hold."""

    def __init__(self, message, failing_class):
        super().__init__(message)
        self.failing_class = failing_class


class ConstructionError(BumplabError):
    """Sparse-family recursion could not certify its measure bound."""

    def __init__(self, message, mass_fraction=None):
        super().__init__(message)
        self.mass_fraction = mass_fraction


class InvariantViolation(BumplabError, AssertionError):
    """An internal invariant that must never fail did fail."""
