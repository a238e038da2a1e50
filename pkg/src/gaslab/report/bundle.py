"""Report bundle plumbing: atomic writes and provenance manifests.

A bundle is a directory of named tables (CSV/JSON) plus a manifest that
records the command, its parameters, and SHA-256 hashes of every input and
output. Identical inputs and seeds produce byte-identical bundles, so the
manifest carries no timestamps. Files are written to a temp name in the
target directory and renamed into place.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Mapping


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as fp:
            fp.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def sha256_of(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fp:
        for chunk in iter(lambda: fp.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(out_dir: str | Path, command: str,
                   params: Mapping[str, object],
                   inputs: Mapping[str, str | Path],
                   outputs: list[str]) -> Path:
    """Write manifest.json; inputs/outputs are hashed for provenance."""
    out_dir = Path(out_dir)
    manifest = {
        "command": command,
        "parameters": dict(sorted(params.items())),
        "inputs": {name: {"path": str(path), "sha256": sha256_of(path)}
                   for name, path in sorted(inputs.items())},
        "outputs": {name: {"sha256": sha256_of(out_dir / name)}
                    for name in sorted(outputs)},
    }
    path = out_dir / "manifest.json"
    atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
