class AlgebraError(Exception):
    """Base class for every error raised by the algebra and holonomy services"""


class ConfigurationError(AlgebraError, ValueError):
    """Invalid parameters: mismatched n or L, bad degrees, violated preconditions"""


class CompositionError(AlgebraError):
    """Raised when two n-category morphisms are not composable along the requested face"""


class AxiomViolation(AlgebraError):
    """Raised when extracted or imported structure constants break a crossed-complex axiom"""


class GlobeConditionError(ConfigurationError):
    """Raised for sampled branes whose faces are not degenerate as the globe conditions require"""
