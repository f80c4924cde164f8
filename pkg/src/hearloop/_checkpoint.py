"""Checkpoint: binary DNN-HA parameter files.

Layout::

    b"DNNHA1" | version (1 byte) | manifest length (uint32 LE) | manifest (UTF-8 JSON)
    | parameter blobs (little-endian float64, C order, manifest order)

The manifest holds the architecture, the name and shape of every parameter
and free-form metadata. It carries no timestamps, so equal parameters give
byte-identical files.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from hearloop import adcore as ad
from hearloop._dnnha import ArchSpec, ModelParams
from hearloop._errors import ArchitectureMismatch, DataError, HearloopError

if TYPE_CHECKING:
    from collections.abc import Mapping

    from hearloop._types import PathLike

MAGIC = b"DNNHA1"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<6sBI")
_DTYPE = np.dtype("<f8")
CHECKPOINT_NAME = "model.ckpt"


def dumps(params: ModelParams, metadata: Mapping[str, object] | None = None) -> bytes:
    """Serialize *params* (and JSON-serializable *metadata*) to checkpoint bytes."""
    manifest = {
        "arch": params.spec.to_dict(),
        "params": [{"name": name, "shape": list(arr.shape)} for name, arr in params.items()],
        "metadata": dict(metadata or {}),
    }
    header_json = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    blobs = b"".join(np.ascontiguousarray(arr.values, dtype=_DTYPE).tobytes() for _, arr in params.items())
    return _HEADER.pack(MAGIC, FORMAT_VERSION, len(header_json)) + header_json + blobs


def loads(data: bytes) -> tuple[ModelParams, dict[str, object]]:
    """Parse checkpoint bytes into parameters (gradient-enabled leaves) and metadata.

    :raises DataError: If the bytes are not a well-formed checkpoint.
    """
    if len(data) < _HEADER.size:
        raise DataError("checkpoint is truncated", op="load_checkpoint", target="header")
    magic, version, length = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise DataError(f"not a DNN-HA checkpoint (magic {magic!r})", op="load_checkpoint", target="magic")
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported checkpoint version {version}", op="load_checkpoint", target="version")
    start = _HEADER.size
    try:
        manifest = json.loads(data[start : start + length].decode("utf-8"))
        spec = ArchSpec.from_dict(manifest["arch"])
        entries = [(str(e["name"]), tuple(int(n) for n in e["shape"])) for e in manifest["params"]]
        metadata = dict(manifest.get("metadata", {}))
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed checkpoint manifest: {exc}", op="load_checkpoint", target="manifest") from None
    except HearloopError as exc:
        raise DataError(f"invalid architecture in checkpoint: {exc}", op="load_checkpoint", target="arch") from None

    offset = start + length
    arrays: dict[str, ad.Array] = {}
    for name, shape in entries:
        count = int(np.prod(shape, dtype=np.int64))
        end = offset + count * _DTYPE.itemsize
        if end > len(data):
            raise DataError("checkpoint is truncated", op="load_checkpoint", target=name)
        values = np.frombuffer(data, dtype=_DTYPE, count=count, offset=offset).reshape(shape)
        arrays[name] = ad.Array(values, requires_grad=True, name=name)
        offset = end
    if offset != len(data):
        raise DataError(f"{len(data) - offset} trailing bytes after parameters", op="load_checkpoint")
    try:
        params = ModelParams(spec, arrays)
    except HearloopError as exc:
        raise DataError(f"parameters do not match the stored architecture: {exc}", op="load_checkpoint") from None
    if not params.all_finite():
        raise DataError("checkpoint contains non-finite parameters", op="load_checkpoint", target="params")
    return params, metadata


def save_checkpoint(path: PathLike, params: ModelParams, metadata: Mapping[str, object] | None = None) -> None:
    """Write a checkpoint file (not atomically; use ``RunDir.write_bytes`` inside run directories)."""
    Path(path).write_bytes(dumps(params, metadata))


def load_checkpoint(path: PathLike, expected: ArchSpec | None = None) -> tuple[ModelParams, dict[str, object]]:
    """Read a checkpoint file.

    :param path: Checkpoint file, or a run directory containing ``model.ckpt``.
    :param expected: If given, the architecture the caller requires.
    :raises DataError: If the file is missing or malformed.
    :raises ArchitectureMismatch: If the stored architecture differs from *expected*.
    """
    p = Path(path)
    if p.is_dir():
        p = p / CHECKPOINT_NAME
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read checkpoint: {exc.strerror or exc}", op="load_checkpoint", target=str(p)) from None
    params, metadata = loads(raw)
    if expected is not None:
        check_compatible(params.spec, expected)
    return params, metadata


def check_compatible(stored: ArchSpec, expected: ArchSpec) -> None:
    """:raises ArchitectureMismatch: Naming every field that differs."""
    a, b = stored.to_dict(), expected.to_dict()
    diffs = [f"{k}: checkpoint={a[k]!r}, requested={b[k]!r}" for k in sorted(a) if a[k] != b[k]]
    if diffs:
        raise ArchitectureMismatch(
            "checkpoint architecture differs: " + "; ".join(diffs), op="check_compatible", target="arch"
        )

