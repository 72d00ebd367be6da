"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class WkbSpecError(Exception):
    """Base class for all toolkit errors."""


# ---- exact arithmetic ----------------------------------------------------

class DivisionByZeroFunction(WkbSpecError):
    pass


class EvalAtPole(WkbSpecError):
    pass


class TruncationMismatch(WkbSpecError):
    pass


class TruncationTooLow(WkbSpecError):
    pass


# ---- quadratic differentials ---------------------------------------------

class DegeneratePoles(WkbSpecError):
    pass


class NonSimpleZeros(WkbSpecError):
    pass


class BadResidueSign(WkbSpecError):
    pass


class BiresidueOnNegativeAxis(WkbSpecError):
    pass


class RootFindingFailure(WkbSpecError):
    pass


# ---- spectral network ------------------------------------------------------

class SaddleConnection(WkbSpecError):
    pass


class TraceBudgetExceeded(WkbSpecError):
    pass


class InconsistentSheets(WkbSpecError):
    pass


class UnflippableEdge(WkbSpecError):
    pass


class InvalidStage(WkbSpecError):
    pass


# ---- homology ---------------------------------------------------------------

class DegenerateFormUnexpectedRank(WkbSpecError):
    pass


# ---- periods / quadrature ---------------------------------------------------

class PathClearanceFailure(WkbSpecError):
    pass


class QuadratureFailure(WkbSpecError):
    pass


# ---- monodromy --------------------------------------------------------------

class StiffnessFailure(WkbSpecError):
    pass


class ResonantExponent(WkbSpecError):
    pass


class FrobeniusDivergence(WkbSpecError):
    pass


class DegenerateWronskian(WkbSpecError):
    pass


class BranchTrackingAmbiguity(WkbSpecError):
    pass


# ---- symplectic checks --------------------------------------------------------

class FiniteDifferenceInstability(WkbSpecError):
    pass


class FitFailure(WkbSpecError):
    pass


class NewtonInversionFailure(WkbSpecError):
    pass


class ConfigError(WkbSpecError):
    """Invalid run configuration (CLI exit code 2)."""
