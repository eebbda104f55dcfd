"""Sentence embedding HTTP service.

Serves a frozen sentence encoder behind two endpoints:

    POST /embed   {"sentences": [...]} -> {"embeddings": [[...], ...], "dim": N, "model": "..."}
    GET  /health  -> {"status": "ok", "dim": N}   (503 until the encoder is loaded)

The encoder is read-only shared state: no request mutates it, identical
sentences always produce element-wise identical vectors, and the vector
dimension is constant for the lifetime of the process.
"""

__version__ = "0.1.0"

from .app import create_app
from .config import ServiceConfig
from .encoders import Encoder, load_encoder

__all__ = ["Encoder", "ServiceConfig", "create_app", "load_encoder", "__version__"]
