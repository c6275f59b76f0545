"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A user-supplied configuration value is structurally invalid.

    The message names the offending key or argument so callers can
    surface it directly (the command line maps this to exit code 2).
    """


class DomainError(ValueError):
    """An input lies outside the mathematical domain of an operation.

    Examples: a norming sequence that is not strictly increasing, a
    vector whose norm exceeds the truncation level b_n where the
    bounded-weights hypothesis requires otherwise.
    """
