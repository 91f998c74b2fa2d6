# byzfed/algorithms/base.py
import logging
import warnings
from typing import ClassVar, Literal, Type, Unpack, get_origin

import numpy as np
from pydantic import ConfigDict, Field, model_validator

from ..core.data import SampleBatch
from ..core.error import ArgumentError
from ..core.spec import NetworkSpec
from ..core.state import FedState
from ..scheduling import RoundSchedule, SelectionMask
from ..utils.arrays import FloatArray
from ..utils.immutable import ImmutableBaseModel

logger = logging.getLogger(__name__)


class AlgorithmTypeInfo(ImmutableBaseModel):
    """
    Information about a learning algorithm, in serializable form.
    """

    name: str = Field(description="The unique name used in config files.")
    display_name: str
    description: str | None = None
    has_theory: bool = Field(
        default=False,
        description="Whether the closed-form moment analysis describes this algorithm.",
    )


class ClientUpdate(ImmutableBaseModel):
    """
    The uplink message of one client: its (possibly corrupted) model entries
    on the support of S_{k,n+1}.
    """

    client_id: int
    mask: SelectionMask
    values: tuple[float, ...]

    @model_validator(mode="after")
    def _check_payload(self):
        if len(self.values) != self.mask.size:
            raise ArgumentError(
                f"update of client {self.client_id} carries {len(self.values)} values for a mask of size {self.mask.size}"
            )
        return self

    @classmethod
    def from_model(cls, client_id: int, model: np.ndarray, mask: SelectionMask) -> "ClientUpdate":
        return cls(
            client_id=client_id,
            mask=mask,
            values=tuple(float(v) for v in np.asarray(model)[list(mask.indices)]),
        )


class RoundOutcome(ImmutableBaseModel):
    model_config: ClassVar[ConfigDict] = ConfigDict(arbitrary_types_allowed=True)

    state: FedState
    errors: FloatArray = Field(description="epsilon_{k,n} of every client, shape (K,).")


class FedAlgorithm(ImmutableBaseModel):
    """
    A federated learning recursion. Concrete algorithms are selected by
    their `type` literal, so FedAlgorithm.model_validate({"type": "psofed"})
    returns a PsoFedAlgorithm.
    """

    # The base class has extra="allow" so that it can be validated into any of
    # its subclasses; registered subclasses forbid extra fields.
    model_config: ClassVar[ConfigDict] = ConfigDict(extra="allow")

    # Must be annotated as ClassVar[AlgorithmTypeInfo] when overriding.
    TYPE_INFO: ClassVar[AlgorithmTypeInfo]

    type: str = Field(description="Discriminates the concrete algorithm class.")

    # --------------------------------------------------------------------------
    # SUBCLASS DISPATCH

    def __init_subclass__(cls, **kwargs: Unpack[ConfigDict]):
        super().__init_subclass__(**kwargs)  # type: ignore

        type_annotation = cls.__annotations__.get("type", None)
        if type_annotation is None or get_origin(type_annotation) is not Literal:
            _registry.register_base(cls)
        else:
            (type_name,) = type_annotation.__args__
            assert isinstance(type_name, str), type_name
            _registry.register(type_name, cls)

    @model_validator(mode="before")
    @classmethod
    def _from_name(cls, data):
        if isinstance(data, str):
            return {"type": data}
        return data

    @model_validator(mode="after")  # type: ignore
    def _to_subclass(self):
        """
        Replaces the FedAlgorithm object with an instance of the registered
        subclass.
        """
        if _registry.is_base_class(self.__class__):
            subclass = _registry.get(self.type)
            return subclass.model_validate(self.model_dump())
        if self.__class__ is FedAlgorithm:
            warnings.warn(f"Algorithm {self} could not be dispatched to a registered subclass.")
        return self

    @property
    def name(self) -> str:
        return self.type

    def configure(self, spec: NetworkSpec) -> NetworkSpec:
        """
        The network this algorithm actually runs on; algorithms that fix
        some protocol parameter override this.
        """
        return spec

    def run_round(
        self,
        *,
        state: FedState,
        schedule: RoundSchedule,
        batch: SampleBatch,
        spec: NetworkSpec,
        attack_rng: np.random.Generator,
    ) -> RoundOutcome:
        """
        Runs one synchronous round. Not marked abstract because the base
        class must be instantiable for dispatching.
        """
        raise NotImplementedError("Subclasses must implement this method")


class AlgorithmRegistry:
    def __init__(self):
        self.types: dict[str, Type[FedAlgorithm]] = {}
        self.base_classes: list[Type[FedAlgorithm]] = []

    def register(self, type: str, cls: Type[FedAlgorithm]):
        if type in self.types:
            conflict = self.types[type]
            if cls is not conflict:
                raise ValueError(
                    f'Algorithm "{type}" (class {cls.__name__}) is already registered to a different class ({conflict.__name__})'
                )
        self.types[type] = cls
        logger.debug("Registering class %s as algorithm %s", cls.__name__, type)

    def get(self, type: str) -> Type[FedAlgorithm]:
        if type not in self.types:
            raise ValueError(
                f'unknown algorithm "{type}", expected one of {sorted(self.types)}'
            )
        return self.types[type]

    def register_base(self, cls: Type[FedAlgorithm]):
        if cls not in self.base_classes:
            self.base_classes.append(cls)

    def is_base_class(self, cls: Type[FedAlgorithm]) -> bool:
        return cls in self.base_classes

    @property
    def names(self) -> list[str]:
        return sorted(self.types)


_registry = AlgorithmRegistry()
# the subclass hook never runs for FedAlgorithm itself
_registry.register_base(FedAlgorithm)


def algorithm_names() -> list[str]:
    return _registry.names


__all__ = [
    "AlgorithmTypeInfo",
    "ClientUpdate",
    "FedAlgorithm",
    "RoundOutcome",
    "algorithm_names",
]
