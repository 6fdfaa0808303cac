"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: configuration and input problems
exit 2, numerical failures exit 3, a finished verification whose
residual exceeds its tolerance exits 1.
"""


class GbxError(Exception):
    """Base class for all package errors."""


class ConfigError(GbxError):
    """Bad scenario configuration, schema violation, or bad input data."""


class ExprSyntaxError(ConfigError):
    """Expression parse failure; carries the offending position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class MetricError(ConfigError):
    """Metric is not positive definite (or degenerate) at a sampled point."""


class DomainError(ConfigError):
    """A point falls outside the chart domain or a disk exits the chart."""


class NumericalError(GbxError):
    """Runtime numerical failure (exit code 3 in the CLI)."""


class NeedsRefinement(NumericalError):
    """Internal signal: an angle loop has a gap >= period/4; resample denser."""


class UnderResolvedLoop(NumericalError):
    """Loop still under-resolved after the maximum number of doublings."""

    def __init__(self, label: int, n_samples: int):
        super().__init__(f"loop under-resolved at point i={label} (N={n_samples})")
        self.label = label


class UnstableIndex(NumericalError):
    """Index changed under radius halving; likely an undeclared nearby zero."""

    def __init__(self, label: int, at_r, at_half_r):
        super().__init__(
            f"index unstable at point i={label}: {at_r} at r vs {at_half_r} at r/2"
        )
        self.label = label


class NonFiniteDensity(NumericalError):
    """A quadrature node produced a non-finite density value."""
