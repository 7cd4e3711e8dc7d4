"""Reader for spdclayers CSV exports with tamper/truncation detection."""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np


class ExportError(ValueError):
    """The input file is not a valid, intact spdclayers export."""


def read_export(path):
    """Parse an export; returns (meta, columns, data).

    Verifies that the body hash recorded in the header matches the data body,
    so truncated or edited files are rejected. Non-numeric cells (labels such
    as the sweep's peak_side column) read as NaN.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ExportError(f"{path}: {exc}") from exc
    if not raw.strip():
        raise ExportError(f"{path}: empty data file")

    lines = raw.split(b"\n")
    meta = {}
    i = 0
    while i < len(lines) and lines[i].startswith(b"# "):
        key, _, val = lines[i][2:].partition(b": ")
        meta[key.decode()] = val.decode()
        i += 1
    if "schema" not in meta or "body_sha256" not in meta:
        raise ExportError(f"{path}: missing schema/body-hash header")
    body = b"\n".join(lines[i:])
    if hashlib.sha256(body).hexdigest() != meta["body_sha256"]:
        raise ExportError(f"{path}: body hash mismatch (truncated or modified file)")

    text = body.decode().strip().split("\n")
    if not text or not text[0]:
        raise ExportError(f"{path}: empty data body")
    columns = text[0].split(",")

    def cell(v: str) -> float:
        try:
            return float(v)
        except ValueError:
            return float("nan")

    rows = [[cell(v) for v in line.split(",")] for line in text[1:]]
    if not rows:
        raise ExportError(f"{path}: no data rows")
    return meta, columns, np.asarray(rows)


def grid_from_triples(data, ix=0, iy=1, iz=2):
    """Reshape (x, y, z) triples in row-major grid order to 2D arrays."""
    x = np.unique(data[:, ix])
    y = np.unique(data[:, iy])
    if len(x) * len(y) != data.shape[0]:
        raise ExportError("data rows do not form a complete tensor grid")
    z = data[:, iz].reshape(len(x), len(y))
    return x, y, z
