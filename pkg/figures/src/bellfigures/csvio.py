"""Reading bellsim sweep CSVs and their sibling manifests."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class SchemaError(Exception):
    """The CSV (or its manifest) does not follow the bellsim format."""


EXPECTED_HEADER = "setting,value,stderr"


@dataclass(frozen=True)
class SweepData:
    """One sweep series plus whatever its manifest recorded."""

    path: Path
    settings: np.ndarray
    values: np.ndarray
    stderrs: np.ndarray
    manifest: dict


def read_manifest(csv_path):
    """Key=value pairs from the sibling ``<name>.manifest``, if present."""
    manifest_path = Path(csv_path).with_suffix(".manifest")
    if not manifest_path.exists():
        return {}
    entries = {}
    for raw in manifest_path.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SchemaError(f"{manifest_path}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


def read_sweep_csv(path):
    """Load a ``setting,value,stderr`` CSV written by the bellsim CLI."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError:
        raise
    if not lines or lines[0].strip() != EXPECTED_HEADER:
        head = lines[0] if lines else "<empty>"
        raise SchemaError(f"{path}: expected header {EXPECTED_HEADER!r}, got {head!r}")
    settings, values, stderrs = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise SchemaError(f"{path}:{lineno}: expected 3 columns, got {len(parts)}")
        try:
            settings.append(float(parts[0]))
            values.append(float(parts[1]))
            stderrs.append(float(parts[2]))
        except ValueError:
            raise SchemaError(f"{path}:{lineno}: non-numeric row {line!r}") from None
    if not settings:
        raise SchemaError(f"{path}: no data rows")
    return SweepData(
        path=path,
        settings=np.array(settings),
        values=np.array(values),
        stderrs=np.array(stderrs),
        manifest=read_manifest(path),
    )
