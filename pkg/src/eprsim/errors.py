"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Bad input: wrong dimensions, non-unit axis, out-of-range index."""


class UnsupportedObservableError(ValidationError):
    """Measurement requested for an observable whose spectrum is not {+1, -1}."""


class ConsistencyError(RuntimeError):
    """An internal numerical identity failed to hold within tolerance."""


class ModelContractError(ValueError):
    """A hidden-variable model returned something other than +1/-1 responses."""
