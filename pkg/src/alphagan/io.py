"""CSV and manifest helpers shared by the experiment writers."""

from __future__ import annotations

import csv
import json
import os
import platform
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__


def format_float(value) -> str:
    """17 significant digits: round-trips every double, so reruns compare byte-for-byte."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.17g}"


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else format_float(v) for v in row])
    return path


def default_output_root() -> Path:
    return Path(os.environ.get("AGAN_OUT", "agan_runs"))


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    seed: int | None
    output_dir: str
    tool_version: str = __version__
    started_at: str = field(default_factory=lambda: time.strftime("%Y-%m-%dT%H:%M:%S%z"))
    python: str = field(default_factory=platform.python_version)
    status: str = "running"

    def write(self, out_dir=None) -> Path:
        out = Path(out_dir or self.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "manifest.json"
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True, default=str) + "\n")
        return path
