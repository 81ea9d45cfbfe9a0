"""Run manifests: what a command read, resolved, and wrote.

Manifests carry no timestamps or machine identity, so a rerun of an
identical config produces a byte-identical manifest. Output paths are
recorded relative to the output directory. One manifest references every
file its run wrote; a manifest is written even when the run fails.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

TOOL_VERSION = "0.1.0"

MANIFEST_NAME = "manifest.json"


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict
    inputs: list[dict] = field(default_factory=list)  # {"path": ..., "sha256": ...}
    outputs: list[str] = field(default_factory=list)  # relative to the manifest's directory
    status: str = "ok"  # "ok" | "error"
    error: str | None = None
    tool_version: str = TOOL_VERSION

    def add_input(self, path: str | Path) -> None:
        self.inputs.append({"path": str(path), "sha256": file_digest(path)})

    def write(self, out_dir: str | Path) -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        target = out_dir / MANIFEST_NAME
        doc = {
            "command": self.command,
            "tool_version": self.tool_version,
            "config": self.config,
            "inputs": self.inputs,
            "outputs": sorted(self.outputs),
            "status": self.status,
            "error": self.error,
        }
        target.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return target
