"""Service configuration."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ServiceConfig:
    """What to serve and how much of it per request.

    ``model`` selects the encoder: ``hashed[:dim[:seed]]`` for the
    built-in feature-hash encoder, a filesystem path to a ``.npz`` word
    vector file for a mean-pooled pretrained encoder, or ``st:<name>``
    for a sentence-transformers model. See ``encoders.load_encoder``.
    """

    port: int = 8231
    model: str = "hashed:512"
    max_batch: int = 256

    def __post_init__(self) -> None:
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port out of range: {self.port}")
        if self.max_batch < 1:
            raise ValueError(f"max_batch must be >= 1, got {self.max_batch}")
        if not self.model:
            raise ValueError("model must be a nonempty encoder identifier")
