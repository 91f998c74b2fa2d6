# byzfed/utils/immutable.py
from typing import Any, Self

from pydantic import BaseModel, ConfigDict

_immutable_model_config = ConfigDict(
    frozen=True,
    revalidate_instances="always",
    validate_assignment=True,
)


class _ImmutableMixin:
    """
    A base model that is immutable.
    """

    def __init_subclass__(cls, **kwargs):
        """
        Add the immutable model config to the rest of this class' model config.
        """
        cls.model_config = cls.model_config | _immutable_model_config
        super().__init_subclass__(**kwargs)


class ImmutableBaseModel(BaseModel, _ImmutableMixin):
    def model_update(self, **kwargs: Any) -> Self:
        """
        Returns a new copy of the model with the given fields replaced.

        model_copy skips validation entirely, so the updated fields are run
        through model_validate, which is where the domain invariants
        (M <= D, round_size <= K, ...) are enforced.
        """
        assert isinstance(self, BaseModel)
        data = {name: getattr(self, name) for name in type(self).model_fields}
        data.update(kwargs)
        return self.__class__.model_validate(data)

    def _model_mutate(self, **kwargs: Any):
        """
        Mutates the model in place despite its immutability.
        Only meant for validators that normalize a freshly built instance.
        """
        updated = self.model_update(**kwargs)
        self.__dict__.update(updated.__dict__)


__all__ = [
    "ImmutableBaseModel",
]
