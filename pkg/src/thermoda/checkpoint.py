"""Binary checkpoint container for model parameters.

Layout, all little-endian:

    bytes 0..15   magic b"THERMODA-CKPT-01"
    bytes 16..23  uint64 manifest length in bytes
    manifest      canonical JSON (sorted keys, compact separators, ASCII)
    payload       every parameter block as contiguous float64, in the fixed
                  block order of Seq2SeqParams.view()

The manifest records the model shape, a block table (name + shape), a
sha256 of the payload, and a caller-supplied meta dict. Canonical JSON plus
the fixed block order makes a save byte-deterministic for identical
contents, so save -> load -> save reproduces the file exactly.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import CheckpointError
from .model import ModelShape, Seq2SeqParams

MAGIC = b"THERMODA-CKPT-01"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    params: Seq2SeqParams
    meta: dict


def _manifest_bytes(params: Seq2SeqParams, meta: dict, payload: bytes) -> bytes:
    view = params.view()
    manifest = {
        "format": FORMAT_VERSION,
        "shape": params.shape.to_dict(),
        "blocks": [{"name": name, "shape": list(block.shape)}
                   for name, block in zip(view.names, view.blocks)],
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
        "meta": meta,
    }
    try:
        text = json.dumps(manifest, sort_keys=True, separators=(",", ":"))
    except (TypeError, ValueError) as exc:
        raise CheckpointError(f"meta is not JSON-serializable: {exc}") from None
    return text.encode("ascii")


def save_checkpoint(path, params: Seq2SeqParams, meta: dict | None = None) -> None:
    """Write atomically: a sibling temp file is renamed over the destination."""
    params.view().check_finite()
    view = params.view()
    payload = b"".join(np.ascontiguousarray(b, dtype="<f8").tobytes()
                       for b in view.blocks)
    header = _manifest_bytes(params, dict(meta or {}), payload)
    path = os.fspath(path)
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(np.uint64(len(header)).tobytes())
        fh.write(header)
        fh.write(payload)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def load_checkpoint(path) -> Checkpoint:
    """Read and validate; any structural damage raises CheckpointError."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) + 8:
        raise CheckpointError(f"{path}: file too short to be a checkpoint")
    if blob[:len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path}: bad magic, not a thermoda checkpoint")
    header_len = int(np.frombuffer(blob, dtype="<u8", count=1, offset=len(MAGIC))[0])
    start = len(MAGIC) + 8
    if start + header_len > len(blob):
        raise CheckpointError(f"{path}: manifest length {header_len} overruns the file")
    try:
        manifest = json.loads(blob[start:start + header_len].decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: manifest is not valid JSON: {exc}") from None
    if manifest.get("format") != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: unsupported format version {manifest.get('format')!r}")
    try:
        shape = ModelShape.from_dict(manifest["shape"])
        blocks = manifest["blocks"]
        meta = manifest["meta"]
    except (KeyError, TypeError) as exc:
        raise CheckpointError(f"{path}: manifest missing field: {exc}") from None

    template = Seq2SeqParams.zeros(shape).view()
    if [b["name"] for b in blocks] != list(template.names):
        raise CheckpointError(f"{path}: block table does not match the declared shape")
    for b, ref in zip(blocks, template.blocks):
        if tuple(b["shape"]) != ref.shape:
            raise CheckpointError(
                f"{path}: block '{b['name']}' has shape {b['shape']}, "
                f"expected {list(ref.shape)}")

    expected = sum(ref.size for ref in template.blocks) * 8
    payload = blob[start + header_len:]
    if len(payload) != expected:
        raise CheckpointError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}")
    recorded = manifest.get("payload_sha256")
    if recorded != hashlib.sha256(payload).hexdigest():
        raise CheckpointError(f"{path}: payload checksum mismatch, file is damaged")
    flat = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    if not np.all(np.isfinite(flat)):
        raise CheckpointError(f"{path}: payload contains non-finite values")
    params = Seq2SeqParams.from_flat(shape, flat)
    return Checkpoint(params=params, meta=meta)
