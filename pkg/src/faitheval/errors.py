"""Exception hierarchy for the evaluation engine."""


class FaithevalError(Exception):
    """Base class for all engine errors."""


class FormatError(FaithevalError):
    """File does not look like a supported format (bad magic, bad container)."""


class CorruptionError(FaithevalError):
    """File parsed but its contents are internally inconsistent."""


class ValidationError(FaithevalError):
    """Data violates a domain invariant (non-finite values, bad shapes)."""


class ManifestError(FaithevalError):
    """Dataset manifest is malformed or references missing files."""


class ParameterError(FaithevalError):
    """Caller supplied an out-of-range or inconsistent argument."""


class TransportError(FaithevalError):
    """Remote predictor could not be reached or returned garbage."""

    def __init__(self, message, attempts=1):
        super().__init__(message)
        self.attempts = attempts


class UndefinedCorrelationError(FaithevalError):
    """Rank correlation is undefined (an input sequence is constant)."""


class AlignmentError(FaithevalError):
    """Run manifests do not share a common sample set."""

    def __init__(self, message, missing_ids=()):
        super().__init__(message)
        self.missing_ids = list(missing_ids)


class ConfigError(FaithevalError):
    """Run configuration is invalid."""
