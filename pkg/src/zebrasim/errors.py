"""Exception types shared across the package."""


class ZebrasimError(Exception):
    """Base class for package errors."""


class ValidationError(ZebrasimError):
    """A configuration value violates a documented invariant."""


class ParseError(ZebrasimError):
    """A config file could not be parsed."""


class MalformedTrace(ZebrasimError):
    """A trace is unusable for metric computation (e.g. empty)."""


class IncomparableConfigs(ZebrasimError):
    """Paired traces differ in more than pedestrian presence."""


class VehicleNeverFinished(ZebrasimError):
    """Time-lost requested but the vehicle never reached the finish line."""


class SingularGram(ZebrasimError):
    """GP Gram matrix stayed non-positive-definite after jitter escalation."""


class EmptyLowPetSet(ZebrasimError):
    """No searched individual produced a PET below the adversarial threshold."""


class NoFeasibleCandidate(ZebrasimError):
    """Every braking-distance candidate violated a constraint."""
