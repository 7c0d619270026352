class SolitonError(Exception):
    """Base class for all soliton-lab errors."""


class SymmetryError(SolitonError, ValueError):
    """
    Raised when a state handed to a U(2) system breaks L2 = L3 or R2 = R3 beyond tolerance.
    """


class ParameterError(SolitonError, ValueError):
    """
    Raised when soliton or Kähler boundary parameters are not admissible.
    """


class SeriesRangeError(SolitonError, ValueError):
    """
    Raised when the series start time lies outside (0, 0.01].
    """


class ReconstructionError(SolitonError, ArithmeticError):
    """
    Raised when metric functions cannot be recovered from a trajectory.
    """


class IntegrationError(SolitonError, RuntimeError):
    """
    Raised when an integration is requested with an invalid start or tolerance.
    """


class NoCrossingError(SolitonError, LookupError):
    """
    Raised when xi never reaches the requested level before the horizon.
    """


class ProfileError(SolitonError, ArithmeticError):
    """
    Raised when a Kähler profile has no admissible initial f-range.
    """


class KahlerClassError(SolitonError, ValueError):
    """
    Raised when the boundary data of a Kähler profile matches no case of the classification.
    """


class UnknownSolutionError(SolitonError, KeyError):
    """
    Raised when a reference solution name is not in the catalog.
    """


class DomainError(SolitonError, ValueError):
    """
    Raised when a reference solution is evaluated outside its interval.
    """


class ConfigError(SolitonError, ValueError):
    """
    Raised when a run configuration cannot be resolved. The CLI exits with status 2.
    """


__all__ = [
    "SolitonError",
    "SymmetryError",
    "ParameterError",
    "SeriesRangeError",
    "ReconstructionError",
    "IntegrationError",
    "NoCrossingError",
    "ProfileError",
    "KahlerClassError",
    "UnknownSolutionError",
    "DomainError",
    "ConfigError",
]
