"""Run manifests written next to every output artifact."""

import hashlib
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import yaml

from errorfloor import __version__
from errorfloor.logging_config import get_logger

logger = get_logger(__name__)


def sha256_file(path: Path) -> str:
    """Hex SHA-256 digest of a file."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def manifest_path(output: Path) -> Path:
    """Sibling manifest path <output>.manifest.yaml."""
    output = Path(output)
    return output.with_name(output.name + ".manifest.yaml")


@dataclass
class RunManifest:
    """What produced an artifact and how to produce it again."""

    command: str
    options: Dict[str, Any]
    seed: Optional[int] = None
    config: Dict[str, Any] = field(default_factory=dict)
    version: str = __version__
    input_hashes: Dict[str, str] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)
    wall_time: float = 0.0
    _started: float = field(default_factory=time.perf_counter, repr=False)

    def add_inputs(self, paths: Iterable[Path]) -> None:
        """Record SHA-256 hashes of input files."""
        for path in paths:
            self.input_hashes[str(path)] = sha256_file(Path(path))

    def finish(self) -> None:
        """Stop the wall clock."""
        self.wall_time = round(time.perf_counter() - self._started, 3)

    def to_dict(self) -> Dict[str, Any]:
        """YAML-ready export."""
        return {
            "command": self.command,
            "options": dict(self.options),
            "seed": self.seed,
            "config": dict(self.config),
            "version": self.version,
            "input_hashes": dict(self.input_hashes),
            "outputs": list(self.outputs),
            "wall_time": self.wall_time,
        }

    def write(self, output: Path) -> Path:
        """Write the manifest beside `output` and return its path."""
        if not self.wall_time:
            self.finish()
        path = manifest_path(output)
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(self.to_dict(), f, sort_keys=False)
        logger.debug(f"Wrote manifest {path}")
        return path


def load_manifest(path: Path) -> Dict[str, Any]:
    """Read a manifest written by RunManifest.write."""
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    if not isinstance(data, dict):
        raise ValueError(f"Error loading manifest from {path}")
    return data
