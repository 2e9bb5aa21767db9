"""Exception taxonomy.

Every error carries an ``exit_code`` used by the command-line front end:
1 for invalid input geometry or files, 2 for numerical failures, 3 for
bad parameters.
"""

from __future__ import annotations


class FlexError(Exception):
    exit_code = 2


# --- validation (exit 1) -------------------------------------------------

class MeshValidationError(FlexError, ValueError):
    exit_code = 1


class NonManifoldEdge(MeshValidationError):
    pass


class InconsistentOrientation(MeshValidationError):
    pass


class DegenerateFace(MeshValidationError):
    pass


class IndexOutOfRange(MeshValidationError):
    pass


class UnreferencedVertex(MeshValidationError):
    pass


class ParseError(MeshValidationError):
    pass


class UnsupportedFace(MeshValidationError):
    pass


class NotRealizable(MeshValidationError):
    """Edge lengths that no tetrahedron in R^3 can have."""


# --- numerical (exit 2) --------------------------------------------------

class NumericalError(FlexError):
    exit_code = 2


class RankGapAmbiguous(NumericalError):
    pass


class DegenerateVertexSet(NumericalError):
    pass


class ExtensionInconsistent(NumericalError):
    pass


class UnderdeterminedExtension(NumericalError):
    def __init__(self, message: str, nullity: int):
        super().__init__(message)
        self.nullity = nullity


class NoFlexDirection(NumericalError):
    pass


class NewtonDivergence(NumericalError):
    pass


class GaugeConflict(NumericalError):
    pass


class CoplanarApex(NumericalError):
    pass


class PredicateFailureExhausted(NumericalError):
    pass


# --- parameters (exit 3) -------------------------------------------------

class ParameterError(FlexError, ValueError):
    exit_code = 3


class InvalidParameter(ParameterError):
    pass


class InvalidSubdivision(ParameterError):
    pass


class InvalidBarycentric(ParameterError):
    pass
