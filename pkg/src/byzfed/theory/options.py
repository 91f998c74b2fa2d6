# byzfed/theory/options.py
from typing import Literal

from pydantic import Field, model_validator

from ..core.error import ConfigurationError
from ..utils.immutable import ImmutableBaseModel

type SolverKind = Literal["auto", "direct", "gmres"]


class TheoryOptions(ImmutableBaseModel):
    """
    Numerical knobs of the theory engine.
    """

    neumann_j: int = Field(default=5, description="Truncation order of the series behind mu*.")
    small_step_approx: bool = Field(
        default=False,
        description="Drop the mu^2 H term of F.",
    )
    solver: SolverKind = "auto"
    direct_limit: int = Field(
        default=20_000,
        description="Largest side solved by sparse LU under solver='auto'.",
    )
    solver_rtol: float = 1e-10
    dense_limit: int = Field(
        default=1_500,
        description="Largest side handed to dense eigen-solvers.",
    )
    max_clients: int = Field(
        default=12,
        description="Largest K for which sweeps predict the full steady-state MSE.",
    )
    verify_bound: bool = True
    divergence_limit: float = 1e12

    @model_validator(mode="after")
    def _check_options(self):
        if self.neumann_j < 3:
            raise ConfigurationError(f"neumann_j >= 3 violated: neumann_j={self.neumann_j}")
        if not 0 < self.solver_rtol < 1:
            raise ConfigurationError(f"0 < solver_rtol < 1 violated: solver_rtol={self.solver_rtol}")
        if self.direct_limit < 1 or self.dense_limit < 1:
            raise ConfigurationError("direct_limit and dense_limit must be positive")
        if self.max_clients < 1:
            raise ConfigurationError(f"max_clients >= 1 violated: max_clients={self.max_clients}")
        return self


__all__ = [
    "SolverKind",
    "TheoryOptions",
]
