"""Shared exception types.

ContractError: a caller violated a documented precondition.
NumericalError: a numerical procedure left its validity envelope
    (singular solve, spectral condition violated, result out of range).
ConfigError: an experiment config file failed validation.
"""


class ContractError(ValueError):
    pass


class NumericalError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass
