"""Sentence embeddings from a pluggable backend.

Two backends satisfy the same contract: a deterministic in-process stub
(seeded feature hashing over tokens and bigrams) and a remote encoder
service speaking a fixed JSON-over-HTTP protocol. The pipeline never falls
back from remote to stub silently; a dead backend is a hard error so
reported metrics always name their encoder honestly.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np
import requests

RETRY_ATTEMPTS = 3
RETRY_BASE_DELAY = 0.5
REQUEST_TIMEOUT = 30.0


class BackendUnavailable(RuntimeError):
    """Connection failures, timeouts, or 5xx after retries."""


class DimensionDrift(RuntimeError):
    """Remote returned vectors of inconsistent dimension."""


class ProtocolError(RuntimeError):
    """Remote response does not match the wire protocol."""


class BackendKind(str, Enum):
    STUB = "stub"
    REMOTE = "remote"


@dataclass(frozen=True)
class BackendConfig:
    kind: BackendKind = BackendKind.STUB
    dim: int = 512
    seed: int = 0
    endpoint: str = ""
    batch_size: int = 64
    max_inflight: int = 4
    cache_path: Path | None = None

    def __post_init__(self) -> None:
        if self.dim < 8:
            raise ValueError(f"dim must be >= 8, got {self.dim}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_inflight < 1:
            raise ValueError("max_inflight must be >= 1")
        if self.kind is BackendKind.REMOTE and not self.endpoint:
            raise ValueError("remote backend needs an endpoint")

    @property
    def backend_id(self) -> str:
        if self.kind is BackendKind.STUB:
            return f"stub:{self.dim}:{self.seed}"
        return f"remote:{self.endpoint.rstrip('/')}"


def _bucket(feature: str, dim: int, seed: int) -> tuple[int, float]:
    digest = hashlib.blake2b(f"{seed}|{feature}".encode("utf-8"), digest_size=8).digest()
    value = int.from_bytes(digest, "big")
    sign = 1.0 if value & 1 else -1.0
    return (value >> 1) % dim, sign


def stub_embed(sentence: str, dim: int = 512, seed: int = 0) -> np.ndarray:
    """Hash tokens and token bigrams into signed buckets, then L2-normalize.

    Pure in (sentence, dim, seed); the hash is keyed so different seeds give
    unrelated embeddings. Empty input maps to the zero vector.
    """
    tokens = sentence.lower().split()
    vec = np.zeros(dim)
    features = tokens + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]
    for feature in features:
        i, sign = _bucket(feature, dim, seed)
        vec[i] += sign
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


def _cache_key(backend_id: str, sentence: str) -> str:
    return hashlib.sha256(f"{backend_id}|{sentence}".encode("utf-8")).hexdigest()


class EmbeddingClient:
    """Batched, cached access to one configured backend.

    Remote batches are issued through a bounded thread pool; cache appends
    happen on the calling thread only, in input order, so the cache file is
    deterministic for a given sequence of calls.
    """

    def __init__(self, config: BackendConfig):
        self.config = config
        self.remote_calls = 0
        self._cache: dict[str, np.ndarray] = {}
        self._cache_loaded = False

    def _load_cache(self) -> None:
        if self._cache_loaded:
            return
        self._cache_loaded = True
        path = self.config.cache_path
        if path is None or not Path(path).exists():
            return
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                self._cache[record["k"]] = np.asarray(record["v"], dtype=float)

    def _append_cache(self, entries: list[tuple[str, np.ndarray]]) -> None:
        path = self.config.cache_path
        if path is None or not entries:
            return
        with open(path, "a", encoding="utf-8") as fh:
            for key, vec in entries:
                fh.write(json.dumps({"k": key, "v": [float(v) for v in vec]}) + "\n")

    def _fetch_remote(self, batch: list[str]) -> list[np.ndarray]:
        url = self.config.endpoint.rstrip("/") + "/embed"
        last_error: Exception | None = None
        for attempt in range(RETRY_ATTEMPTS):
            if attempt:
                time.sleep(RETRY_BASE_DELAY * 2 ** (attempt - 1))
            try:
                self.remote_calls += 1
                resp = requests.post(
                    url, json={"sentences": batch}, timeout=REQUEST_TIMEOUT
                )
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_error = exc
                continue
            if resp.status_code >= 500:
                last_error = BackendUnavailable(f"{url} returned {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise ProtocolError(f"{url} returned {resp.status_code}: {resp.text[:200]}")
            try:
                payload = resp.json()
                embeddings = payload["embeddings"]
                dim = int(payload["dim"])
            except (ValueError, KeyError, TypeError) as exc:
                raise ProtocolError(f"malformed response from {url}: {exc}") from exc
            if len(embeddings) != len(batch):
                raise ProtocolError(
                    f"sent {len(batch)} sentences, got {len(embeddings)} vectors"
                )
            vectors = [np.asarray(e, dtype=float) for e in embeddings]
            for vec in vectors:
                if vec.shape != (dim,):
                    raise DimensionDrift(
                        f"vector of shape {vec.shape} in a dim={dim} response"
                    )
            return vectors
        raise BackendUnavailable(f"giving up on {url} after {RETRY_ATTEMPTS} attempts: {last_error}")

    def embed(self, sentences: Sequence[str]) -> list[np.ndarray]:
        """Embed sentences, order preserved; cache consulted first."""
        self._load_cache()
        cfg = self.config
        keys = [_cache_key(cfg.backend_id, s) for s in sentences]
        results: dict[int, np.ndarray] = {}
        missing: list[int] = []
        pending: dict[str, list[int]] = {}
        for i, key in enumerate(keys):
            cached = self._cache.get(key)
            if cached is not None:
                results[i] = cached
            elif key in pending:
                pending[key].append(i)
            else:
                pending[key] = [i]
                missing.append(i)

        if missing:
            texts = [sentences[i] for i in missing]
            if cfg.kind is BackendKind.STUB:
                vectors = [stub_embed(t, cfg.dim, cfg.seed) for t in texts]
            else:
                batches = [
                    texts[i : i + cfg.batch_size]
                    for i in range(0, len(texts), cfg.batch_size)
                ]
                with ThreadPoolExecutor(max_workers=cfg.max_inflight) as pool:
                    chunks = list(pool.map(self._fetch_remote, batches))
                vectors = [vec for chunk in chunks for vec in chunk]
                dims = {len(v) for v in vectors}
                if len(dims) > 1:
                    raise DimensionDrift(f"mixed dimensions across batches: {sorted(dims)}")
            new_entries = []
            for i, vec in zip(missing, vectors):
                key = keys[i]
                self._cache[key] = vec
                new_entries.append((key, vec))
                for j in pending[key]:
                    results[j] = vec
            self._append_cache(new_entries)

        return [results[i] for i in range(len(sentences))]


def embed_batch(sentences: Sequence[str], backend: BackendConfig) -> list[np.ndarray]:
    return EmbeddingClient(backend).embed(sentences)
