# byzfed/core/error.py

from collections import defaultdict

from pydantic import Field

from ..utils.immutable import ImmutableBaseModel


class UserException(RuntimeError):
    """
    Any exception that can be reported to the user.

    Usual usage:
    ```
    try:
        do_something_dangerous()
    except AnticipatedException as e:
        raise UserException("prepared message") from e
    ```
    """

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ConfigurationError(UserException):
    """
    An invalid network spec, attack spec, experiment plan or config file.
    The message names the offending key and the violated constraint.
    """


class ArgumentError(UserException):
    """
    An operation was called with arguments outside its domain.
    """


class NumericError(UserException):
    """
    A non-finite value reached the learning recursions.
    """


class ProtocolError(UserException):
    """
    The server received updates that do not match the round's schedule.
    """


class UnsupportedLawError(UserException):
    """
    The closed-form moments only exist for uniformly drawn selection masks.
    """


class DegenerateConfigError(UserException):
    """
    A closed-form quantity has a zero denominator for this configuration.
    """


class InstabilityError(UserException):
    """
    The moment recursion does not converge: rho(F) >= 1.
    """

    def __init__(self, spectral_radius: float, stepsize: float):
        super().__init__(
            f"mean-square recursion is unstable at stepsize {stepsize:.6g}: "
            f"spectral radius rho(F) = {spectral_radius:.9g} >= 1"
        )
        self.spectral_radius = spectral_radius
        self.stepsize = stepsize


class DivergenceError(UserException):
    """
    A trace exceeded the overflow guard.
    """

    def __init__(self, iteration: int, value: float, limit: float):
        super().__init__(
            f"diverged at iteration {iteration}: value {value:.6g} exceeds {limit:.6g}"
        )
        self.iteration = iteration
        self.value = value


class ExperimentError(UserException):
    """
    An experiment produced no usable replica.
    """


class ReplicaException(RuntimeError):
    """
    An exception that occurred while running one simulation replica.
    """

    def __init__(self, replica_index: int):
        super().__init__()
        self.replica_index = replica_index

    @property
    def message(self) -> str | None:
        if isinstance(self.__cause__, UserException):
            return self.__cause__.message
        return None

    @property
    def diverged(self) -> bool:
        """True if the replica failed numerically rather than by a fault."""
        return isinstance(self.__cause__, (DivergenceError, NumericError))

    def __str__(self) -> str:
        return f"replica {self.replica_index} failed: {self.message or self.__cause__!r}"


class ExperimentErrors(ImmutableBaseModel):
    """
    Accumulates the errors that occurred during an experiment.

    None represents an error that is not user-visible.

    experiment_errors contains errors which cannot be associated with a
    replica; replica_errors is keyed by replica index.
    """

    experiment_errors: list[str | None] = Field(default_factory=list)
    replica_errors: dict[int, list[str | None]] = Field(
        default_factory=lambda: defaultdict(list)
    )

    def add(self, exception: Exception):
        if isinstance(exception, ReplicaException):
            replica_index = exception.replica_index
            message = exception.message
        else:
            replica_index = None
            if isinstance(exception, UserException):
                message = exception.message
            else:
                message = None
        if replica_index is None:
            self.experiment_errors.append(message)
        else:
            self.replica_errors.setdefault(replica_index, []).append(message)

    @property
    def failed_replicas(self) -> list[int]:
        return sorted(self.replica_errors)

    @property
    def count(self) -> int:
        return len(self.experiment_errors) + sum(
            len(errors) for errors in self.replica_errors.values()
        )

    def any(self) -> bool:
        return self.count > 0


__all__ = [
    "ArgumentError",
    "ConfigurationError",
    "DegenerateConfigError",
    "DivergenceError",
    "ExperimentError",
    "ExperimentErrors",
    "InstabilityError",
    "NumericError",
    "ProtocolError",
    "ReplicaException",
    "UnsupportedLawError",
    "UserException",
]
