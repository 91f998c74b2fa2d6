# byzfed/utils/env.py
import os

from dotenv import load_dotenv

from ..core.error import ConfigurationError

load_dotenv()


def get_env(key: str, default: str | None = None) -> str:
    value = os.getenv(key)
    if not value:
        if default is None:
            raise ConfigurationError(f"Environment variable {key} is not set")
        return default
    return value


def get_env_int(key: str, default: int) -> int:
    raw = get_env(key, str(default))
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigurationError(f"Environment variable {key} must be an integer, got {raw!r}") from e
    if value < 1:
        raise ConfigurationError(f"Environment variable {key} must be positive, got {value}")
    return value


__all__ = [
    "get_env",
    "get_env_int",
]
