"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class CapacityError(DomainError):
    """An exhaustive routine was asked to handle an instance that is too large."""


class InfeasibleError(DomainError):
    """No object satisfies the requested constraints."""


class ConfigError(ValueError):
    """An experiment configuration failed validation.

    ``violations`` lists every problem found, not only the first.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ConstructionError(RuntimeError):
    """A builder produced a tree violating its own guarantee."""
