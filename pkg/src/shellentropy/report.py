"""CSV emission and run manifests."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(float(value))
    if hasattr(value, "item"):
        return _fmt(value.item())
    return str(value)


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Sequence],
              meta: Mapping[str, object] | None = None) -> Path:
    """Write a ``#``-prefixed metadata block, one header line, then rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {k} = {_fmt(v)}" for k, v in (meta or {}).items()]
    lines.append(",".join(columns))
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row {row!r} does not match columns {columns}")
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path: str | Path) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Parse a file written by :func:`write_csv` into (metadata, rows)."""
    meta, rows, header = {}, [], None
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            meta[key.strip()] = value.strip()
        elif header is None:
            header = line.split(",")
        elif line:
            rows.append(dict(zip(header, line.split(","))))
    return meta, rows


def sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir: str | Path, config: Mapping[str, object], version: str,
                   files: Sequence[Path], timings: Mapping[str, float]) -> Path:
    out_dir = Path(out_dir)
    manifest = {
        "config": dict(config),
        "version": version,
        "files": {str(Path(f).relative_to(out_dir)): sha256(f) for f in sorted(files)},
        "timings_s": {k: round(v, 3) for k, v in timings.items()},
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
