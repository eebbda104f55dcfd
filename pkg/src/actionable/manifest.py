"""Run manifests: every command records what it ran and what it produced.

The manifest sits next to the artifacts it describes and lists each one
with its content hash, so any output file can be traced back to the exact
invocation (command, config, seeds) that made it. The duration field is the
one value excluded from reproducibility comparisons.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path

from . import __version__


def sha256_file(path: Path | str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    path: Path | str,
    command: str,
    config: dict,
    seeds: dict,
    inputs: list[str],
    outputs: list[Path | str],
    started: float,
) -> Path:
    path = Path(path)
    manifest = {
        "command": command,
        "config": config,
        "seeds": seeds,
        "inputs": sorted(str(p) for p in inputs),
        "outputs": {Path(p).name: sha256_file(p) for p in outputs},
        "tool_version": __version__,
        "duration_seconds": round(time.time() - started, 3),
    }
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def manifest_path_for(artifact: Path | str) -> Path:
    """Manifest location convention: <artifact stem>.manifest.json alongside."""
    artifact = Path(artifact)
    if artifact.is_dir():
        return artifact / "manifest.json"
    return artifact.parent / (artifact.stem + ".manifest.json")
