"""Point-cloud files: headerless CSV (default) or ``{"m": ..., "points": [...]}`` JSON."""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import numpy as np

from .angle_kernel import PointCloud
from .errors import EmptyInputError, ParseError, ValidationError

__all__ = ["parse_cloud", "parse_cloud_text", "format_cloud", "write_cloud", "read_text", "write_text"]


def read_text(source) -> str:
    if source is None or str(source) == "-":
        return sys.stdin.read()
    if hasattr(source, "read"):
        return source.read()
    return Path(source).read_text()


def write_text(dest, text: str):
    if dest is None or str(dest) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(dest).write_text(text)


def _finite(value, line):
    if not math.isfinite(value):
        raise ValidationError(f"non-finite value {value!r}", line=line)
    return value


def _parse_csv(text):
    rows = []
    width = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split(",")
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise ParseError(f"expected {width} fields, found {len(fields)}", line=lineno)
        try:
            values = [float(f) for f in fields]
        except ValueError:
            raise ParseError(f"not a number in {line!r}", line=lineno) from None
        rows.append([_finite(v, lineno) for v in values])
    if not rows:
        raise EmptyInputError("no points in input")
    return np.array(rows, dtype=float)


def _parse_json(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(doc, dict) or "points" not in doc or "m" not in doc:
        raise ParseError('JSON clouds need "m" and "points" keys')
    m = doc["m"]
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise ValidationError(f'"m" must be a positive integer, got {m!r}')
    points = doc["points"]
    if not isinstance(points, list) or not points:
        raise EmptyInputError("no points in input")
    for i, p in enumerate(points, start=1):
        if not isinstance(p, list) or len(p) != m:
            got = len(p) if isinstance(p, list) else type(p).__name__
            raise ValidationError(f"point {i} has {got} coordinates, expected m={m}", line=i)
        for v in p:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValidationError(f"point {i} has a non-numeric coordinate {v!r}", line=i)
            _finite(float(v), i)
    return np.array(points, dtype=float)


def parse_cloud_text(text: str) -> PointCloud:
    """Parse CSV or JSON text; JSON is recognised by a leading ``{``.

    For JSON the reported "line" is the 1-based point number.
    """
    stripped = text.lstrip()
    if not stripped:
        raise EmptyInputError("empty input")
    data = _parse_json(stripped) if stripped.startswith("{") else _parse_csv(text)
    return PointCloud(data)


def parse_cloud(source) -> PointCloud:
    """Read a cloud from a path, ``"-"`` (stdin) or an open text stream."""
    return parse_cloud_text(read_text(source))


def format_cloud(cloud, fmt: str = "csv") -> str:
    """Serialise with ``repr`` floats, which round-trip exactly."""
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float)
    if fmt == "json":
        return json.dumps({"m": int(pts.shape[1]), "points": pts.tolist()}) + "\n"
    return "".join(",".join(repr(v) for v in row) + "\n" for row in pts.tolist())


def write_cloud(cloud, dest, fmt: str = "csv"):
    write_text(dest, format_cloud(cloud, fmt))
