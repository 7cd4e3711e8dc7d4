"""Deterministic data-file exports shared by the CLI scenarios.

Every file starts with '# ' metadata lines: schema tag, tool version, config
hash, column names/units, and a body hash over the data bytes that lets
consumers detect truncation or tampering. Numbers are written with 17
significant digits (round-trip safe); rows are emitted in fixed grid order;
writes are atomic (temp file + rename). No timestamps: repeated runs with the
same config produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

TOOL_VERSION = "0.1.0"


def config_hash(resolved_config: dict) -> str:
    blob = json.dumps(resolved_config, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def _atomic_write(path: Path, data: bytes):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, schema: str, columns, rows, cfg_hash: str, extra_meta=()):
    """Write a schema-tagged CSV with header metadata and a body hash."""
    path = Path(path)
    body_lines = [",".join(columns)]
    for row in rows:
        body_lines.append(",".join(_fmt(v) for v in row))
    body = ("\n".join(body_lines) + "\n").encode()
    head = [f"# schema: {schema} v1",
            f"# tool: spdclayers {TOOL_VERSION}",
            f"# config_sha256: {cfg_hash}",
            f"# body_sha256: {hashlib.sha256(body).hexdigest()}"]
    for key, val in extra_meta:
        head.append(f"# {key}: {val}")
    _atomic_write(path, ("\n".join(head) + "\n").encode() + body)
    return path


def write_json(path, schema: str, payload: dict, cfg_hash: str):
    doc = {"schema": f"{schema} v1", "tool": f"spdclayers {TOOL_VERSION}",
           "config_sha256": cfg_hash, "data": payload}
    blob = json.dumps(doc, sort_keys=True, indent=2, default=_json_default).encode() + b"\n"
    _atomic_write(Path(path), blob)
    return Path(path)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def read_csv(path):
    """Parse an exported CSV; returns (meta dict, columns, float array).

    Verifies the body hash and raises ValueError on mismatch (truncated or
    edited files).
    """
    raw = Path(path).read_bytes()
    lines = raw.split(b"\n")
    meta = {}
    i = 0
    while i < len(lines) and lines[i].startswith(b"# "):
        key, _, val = lines[i][2:].partition(b": ")
        meta[key.decode()] = val.decode()
        i += 1
    body = b"\n".join(lines[i:])
    if "body_sha256" not in meta:
        raise ValueError(f"{path}: missing body hash header")
    if hashlib.sha256(body).hexdigest() != meta["body_sha256"]:
        raise ValueError(f"{path}: body hash mismatch (truncated or modified file)")
    text = body.decode().strip().split("\n")
    if not text or not text[0]:
        raise ValueError(f"{path}: empty data body")
    columns = text[0].split(",")

    def cell(v: str) -> float:
        try:
            return float(v)
        except ValueError:
            return float("nan")   # non-numeric cells (e.g. labels) read as NaN

    data = np.array([[cell(v) for v in line.split(",")] for line in text[1:]]) \
        if len(text) > 1 else np.empty((0, len(columns)))
    return meta, columns, data
