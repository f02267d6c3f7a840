"""Exception hierarchy.

Every error carries a short module-qualified ``code`` so the command line can
report failures uniformly (e.g. ``dde.StepTooLarge``).
"""
from __future__ import annotations


class StagechainError(Exception):
    code = "stagechain.Error"


# -- parameters / configuration -------------------------------------------------


class ParameterError(StagechainError, ValueError):
    code = "model.ParameterError"


class NonPositiveRate(ParameterError):
    code = "model.NonPositiveRate"

    def __init__(self, names):
        if isinstance(names, str):
            names = [names]
        self.names = list(names)
        super().__init__("rate constants must be strictly positive: " + ", ".join(self.names))


class NegativeDelay(ParameterError):
    code = "model.NegativeDelay"


class ConfigError(StagechainError, ValueError):
    code = "cli.ConfigError"


class UnknownKey(ConfigError):
    code = "cli.UnknownKey"


class DuplicateKey(ConfigError):
    code = "cli.DuplicateKey"


class MissingKey(ConfigError):
    code = "cli.MissingKey"


class MalformedNumber(ConfigError):
    code = "cli.MalformedNumber"


# -- numerical failures ---------------------------------------------------------


class NumericalError(StagechainError, ArithmeticError):
    code = "stagechain.NumericalError"


class ThresholdUndefined(NumericalError):
    code = "model.ThresholdUndefined"


class NonFiniteState(NumericalError):
    code = "dde.NonFiniteState"

    def __init__(self, t: float):
        self.t = t
        super().__init__(f"state became non-finite or exceeded 1e12 at t={t:.6g}")


class StepTooLarge(NumericalError):
    code = "dde.StepTooLarge"


class OutOfCoverage(NumericalError, LookupError):
    code = "dde.OutOfCoverage"


class InsufficientHistory(NumericalError):
    code = "dde.InsufficientHistory"


class NoInteriorEquilibrium(NumericalError):
    code = "linstab.NoInteriorEquilibrium"


class EquilibriumAbsent(NumericalError):
    code = "linstab.EquilibriumAbsent"


class InconsistentSinCos(NumericalError):
    code = "switch.InconsistentSinCos"


class NoOmegaBranch(NumericalError):
    code = "switch.NoOmegaBranch"


class GridTooCoarse(NumericalError):
    code = "switch.GridTooCoarse"


class NotACrossing(NumericalError):
    code = "hopf.NotACrossing"


class SingularNormalizer(NumericalError):
    code = "hopf.SingularNormalizer"


class SingularSystem(NumericalError):
    code = "hopf.SingularSystem"


class TransversalityFailure(NumericalError):
    code = "hopf.TransversalityFailure"


class TrajectoryTooShort(NumericalError):
    code = "orbit.TrajectoryTooShort"
