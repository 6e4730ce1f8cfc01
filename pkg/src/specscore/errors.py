"""Exception hierarchy shared by the estimator modules and the CLI."""


class SpecScoreError(Exception):
    """Base class for every error raised by this package."""


class DegenerateSamples(SpecScoreError):
    """The sample set is too degenerate to define a kernel bandwidth."""


class EigensolverFailure(SpecScoreError):
    """The symmetric eigensolver did not converge."""


class AllZeroSpectrum(SpecScoreError):
    """The Gram matrix has no positive eigenvalue."""


class InvalidRank(SpecScoreError):
    """A requested truncation rank is outside ``[1, M]``."""


class SingularSystem(SpecScoreError):
    """The regularised Stein linear system could not be factorised."""


class NonFiniteEnergy(SpecScoreError):
    """The log density is not finite where it has to be."""


class ConfigError(SpecScoreError):
    """Invalid experiment configuration or input file contents."""
