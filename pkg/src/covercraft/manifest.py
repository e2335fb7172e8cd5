"""Run manifests: enough provenance to re-run a command and check its outputs."""

from __future__ import annotations

import hashlib
import json
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path

from covercraft.io import atomic_write


def file_hash(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def versions() -> dict[str, str]:
    import matplotlib
    import numpy
    import scipy

    from covercraft import __version__

    return {
        "covercraft": __version__,
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "matplotlib": matplotlib.__version__,
        "python": platform.python_version(),
    }


@dataclass
class RunManifest:
    """Provenance of one CLI invocation.

    ``outputs`` maps each reproducible artifact to its sha256. Files in
    ``volatile`` (wall-clock timings) are written by the run but not hashed.
    """

    command: str
    argv: list[str]
    cwd: str
    config: dict
    seed: int | None = None
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    volatile: list[str] = field(default_factory=list)
    versions: dict[str, str] = field(default_factory=versions)

    def add_input(self, path):
        self.inputs[str(path)] = file_hash(path)

    def add_output(self, path):
        self.outputs[str(path)] = file_hash(path)

    def write(self, path):
        atomic_write(path, json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "RunManifest":
        with open(path, encoding="utf-8") as fh:
            return cls(**json.load(fh))

    def mismatches(self) -> dict[str, tuple[str, str | None]]:
        """Outputs whose current hash differs from the recorded one."""
        bad = {}
        for out, digest in self.outputs.items():
            now = file_hash(out) if Path(out).exists() else None
            if now != digest:
                bad[out] = (digest, now)
        return bad
