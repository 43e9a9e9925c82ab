"""Parameter checkpoints.

Format, version 1::

    SENTIMIX-CKPT 1\\n
    <header: one line of JSON, keys sorted>\\n
    <values: float64 little-endian, row-major, parameters in header order>

The header is ``{"meta": {...}, "params": [{"name": ..., "shape": [...]}, ...]}``.
``meta`` carries whatever the caller needs to rebuild the model (kind,
dimensions, vocabularies). Writing the same parameters and meta twice gives
identical bytes.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import BinaryIO, Mapping

import numpy as np

MAGIC = b"SENTIMIX-CKPT 1\n"


class CheckpointError(ValueError):
    pass


def dump_checkpoint(params: Mapping[str, np.ndarray], meta: dict | None = None) -> bytes:
    header = {
        "meta": meta or {},
        "params": [{"name": name, "shape": list(np.shape(v))} for name, v in params.items()],
    }
    head = json.dumps(header, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    body = b"".join(np.ascontiguousarray(v, dtype="<f8").tobytes() for v in params.values())
    return MAGIC + head.encode("ascii") + b"\n" + body


def parse_checkpoint(blob: bytes) -> tuple[dict[str, np.ndarray], dict]:
    if not blob.startswith(MAGIC):
        raise CheckpointError("not a sentimix checkpoint (bad magic line)")
    end = blob.index(b"\n", len(MAGIC))
    try:
        header = json.loads(blob[len(MAGIC):end].decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"corrupt checkpoint header: {exc}") from None
    body = memoryview(blob)[end + 1:]
    params, offset = {}, 0
    for entry in header["params"]:
        shape = tuple(entry["shape"])
        n = int(np.prod(shape, dtype=np.int64)) * 8
        if offset + n > len(body):
            raise CheckpointError(f"checkpoint truncated in parameter {entry['name']!r}")
        params[entry["name"]] = np.frombuffer(body[offset:offset + n], dtype="<f8").reshape(shape).astype(np.float64)
        offset += n
    if offset != len(body):
        raise CheckpointError(f"{len(body) - offset} trailing bytes after last parameter")
    return params, header["meta"]


def save_checkpoint(path: str | Path | BinaryIO, params: Mapping[str, np.ndarray], meta: dict | None = None):
    blob = dump_checkpoint(params, meta)
    if hasattr(path, "write"):
        path.write(blob)
    else:
        Path(path).write_bytes(blob)


def load_checkpoint(path: str | Path | BinaryIO) -> tuple[dict[str, np.ndarray], dict]:
    blob = path.read() if hasattr(path, "read") else Path(path).read_bytes()
    return parse_checkpoint(blob)
