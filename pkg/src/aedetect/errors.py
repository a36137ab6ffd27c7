"""Exception types shared across the package."""


class AedetectError(Exception):
    """Base class for package-specific failures."""


class ParseError(AedetectError, ValueError):
    """A dataset file or record could not be parsed."""


class ConfigError(AedetectError, ValueError):
    """A run configuration is missing, malformed, or inconsistent."""


class ModelFormatError(AedetectError, ValueError):
    """A serialized model file is corrupt or has an unsupported version."""


class TrainingDivergedError(AedetectError, RuntimeError):
    """Training produced a non-finite loss; carries the offending step."""


class ExperimentError(AedetectError, RuntimeError):
    """A cross-validation fold failed; message carries fold and stage."""
