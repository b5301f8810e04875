"""Direct-method benchmark of the indirect optimizer."""

from cranetraj.validation.validator import DirectOracle, OracleSolution, Validator

__all__ = ["DirectOracle", "OracleSolution", "Validator"]
