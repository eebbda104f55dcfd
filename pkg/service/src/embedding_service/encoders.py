"""Frozen sentence encoders.

Every encoder is deterministic and read-only after construction: the same
sentence maps to the same vector for the lifetime of the process, and the
output dimension never changes. Three kinds are supported:

- ``hashed[:dim[:seed]]`` — a self-contained feature-hash encoder. Word
  unigrams and bigrams are hashed into signed buckets and the result is
  L2-normalized. No model file needed; useful as a reference deployment
  and for tests.
- a path to a ``.npz`` file with arrays ``vocab`` (strings) and
  ``vectors`` (float matrix, one row per vocab entry) — mean-pooled
  pretrained word vectors, L2-normalized. Out-of-vocabulary words are
  skipped; a sentence with no hits embeds to the zero vector.
- ``st:<model-name-or-path>`` — a sentence-transformers model run in
  inference mode. Requires the optional ``sentence-transformers``
  dependency at load time.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np


class Encoder(Protocol):
    name: str
    dim: int

    def encode(self, sentences: Sequence[str]) -> list[np.ndarray]:
        """One float64 vector of length ``dim`` per sentence, in order."""
        ...


def _normalize(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    return vec / norm if norm > 0 else vec


@dataclass(frozen=True)
class HashedEncoder:
    """Signed feature hashing over word unigrams and bigrams."""

    dim: int = 512
    seed: int = 0
    name: str = field(init=False, default="")

    def __post_init__(self) -> None:
        if self.dim < 8:
            raise ValueError(f"dim must be >= 8, got {self.dim}")
        object.__setattr__(self, "name", f"hashed-{self.dim}-{self.seed}")

    def _features(self, sentence: str) -> list[str]:
        words = sentence.lower().split()
        return words + [f"{a} {b}" for a, b in zip(words, words[1:])]

    def encode(self, sentences: Sequence[str]) -> list[np.ndarray]:
        out = []
        for sentence in sentences:
            vec = np.zeros(self.dim, dtype=np.float64)
            for feature in self._features(sentence):
                digest = hashlib.blake2b(
                    f"{self.seed}|{feature}".encode("utf-8"), digest_size=8
                ).digest()
                value = int.from_bytes(digest, "big")
                sign = 1.0 if value & 1 else -1.0
                vec[(value >> 1) % self.dim] += sign
            out.append(_normalize(vec))
        return out


@dataclass(frozen=True)
class WordVectorEncoder:
    """Mean-pooled pretrained word vectors loaded from an .npz file."""

    name: str
    dim: int
    table: dict[str, np.ndarray]

    @classmethod
    def from_npz(cls, path: Path | str) -> "WordVectorEncoder":
        path = Path(path)
        with np.load(path, allow_pickle=False) as data:
            if "vocab" not in data or "vectors" not in data:
                raise ValueError(f"{path}: expected arrays 'vocab' and 'vectors'")
            vocab = [str(w) for w in data["vocab"]]
            vectors = np.asarray(data["vectors"], dtype=np.float64)
        if vectors.ndim != 2 or len(vocab) != vectors.shape[0]:
            raise ValueError(
                f"{path}: vectors must be [len(vocab), dim], got {vectors.shape}"
            )
        table = {w: vectors[i] for i, w in enumerate(vocab)}
        return cls(name=f"wordvec-{path.stem}", dim=vectors.shape[1], table=table)

    def encode(self, sentences: Sequence[str]) -> list[np.ndarray]:
        out = []
        for sentence in sentences:
            hits = [self.table[w] for w in sentence.lower().split() if w in self.table]
            if hits:
                out.append(_normalize(np.mean(hits, axis=0)))
            else:
                out.append(np.zeros(self.dim, dtype=np.float64))
        return out


class SentenceTransformerEncoder:
    """Adapter for a sentence-transformers model, weights frozen."""

    def __init__(self, model_name: str) -> None:
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:  # pragma: no cover - depends on extras
            raise ValueError(
                "sentence-transformers is not installed; "
                "use a hashed: or .npz encoder instead"
            ) from exc
        self._model = SentenceTransformer(model_name)
        if hasattr(self._model, "eval"):
            self._model.eval()
        self.name = f"st-{model_name}"
        probe = np.asarray(self._model.encode([""], convert_to_numpy=True))
        self.dim = int(probe.shape[1])

    def encode(self, sentences: Sequence[str]) -> list[np.ndarray]:
        if not sentences:
            return []
        matrix = np.asarray(
            self._model.encode(list(sentences), convert_to_numpy=True),
            dtype=np.float64,
        )
        return [matrix[i] for i in range(matrix.shape[0])]


def load_encoder(model: str) -> Encoder:
    """Resolve a model identifier from ServiceConfig into a live encoder."""
    if model.startswith("hashed"):
        parts = model.split(":")
        if len(parts) == 1:
            return HashedEncoder()
        if len(parts) == 2:
            return HashedEncoder(dim=int(parts[1]))
        if len(parts) == 3:
            return HashedEncoder(dim=int(parts[1]), seed=int(parts[2]))
        raise ValueError(f"bad hashed encoder spec: {model!r}")
    if model.startswith("st:"):
        return SentenceTransformerEncoder(model[3:])
    if model.endswith(".npz"):
        path = Path(model)
        if not path.exists():
            raise FileNotFoundError(f"encoder file not found: {path}")
        return WordVectorEncoder.from_npz(path)
    raise ValueError(
        f"unknown encoder {model!r}: expected 'hashed[:dim[:seed]]', "
        "'st:<model>', or a path to a .npz word vector file"
    )
