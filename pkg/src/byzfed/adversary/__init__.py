# byzfed/adversary/__init__.py
from .poisoning import attack_second_moment, corrupt_model, corrupt_uploads

__all__ = [
    "attack_second_moment",
    "corrupt_model",
    "corrupt_uploads",
]
