"""Array bundles: one JSON header line followed by raw float64 payload.

Bundles are byte-identical on re-save (sorted keys, no timestamps), which
keeps every CLI output reproducible.
"""

import hashlib
import json
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import HashMismatchError, ParseError, TruncatedPayloadError, UnsupportedVersionError

BUNDLE_FORMAT = "mfe-bundle"
BUNDLE_VERSION = 1


def compute_hash(content: bytes) -> str:
    """Short content hash (first 16 hex chars of SHA-256)."""
    return hashlib.sha256(content).hexdigest()[:16]


def _dumps(data: dict) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def encode_bundle(kind: str, arrays: Dict[str, np.ndarray], metadata: Optional[dict] = None) -> bytes:
    entries = []
    chunks = []
    offset = 0
    for name, array in arrays.items():
        data = np.ascontiguousarray(array, dtype="<f8").tobytes()
        entries.append({"name": name, "shape": list(np.shape(array)), "offset": offset})
        chunks.append(data)
        offset += len(data)
    payload = b"".join(chunks)
    header = {
        "format": BUNDLE_FORMAT,
        "version": BUNDLE_VERSION,
        "kind": kind,
        "metadata": metadata or {},
        "arrays": entries,
        "payload_bytes": len(payload),
    }
    header["checksum"] = compute_hash(_dumps(header).encode() + payload)
    return _dumps(header).encode() + b"\n" + payload


def decode_bundle(
    blob: bytes, expected_kind: Optional[str] = None
) -> Tuple[dict, Dict[str, np.ndarray]]:
    """Parse a bundle, checking version, length and checksum."""
    newline = blob.find(b"\n")
    if newline < 0:
        raise ParseError("Bundle header line is missing", line=1)
    try:
        header = json.loads(blob[:newline].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ParseError(f"Bundle header is not valid JSON: {e}", line=1) from e
    if header.get("format") != BUNDLE_FORMAT:
        raise ParseError("Not an array bundle", line=1, field="format")
    if header.get("version") != BUNDLE_VERSION:
        raise UnsupportedVersionError(f"Unsupported bundle version {header.get('version')}")
    if expected_kind is not None and header.get("kind") != expected_kind:
        raise ParseError(
            f"Expected a '{expected_kind}' bundle, found '{header.get('kind')}'", line=1, field="kind"
        )

    payload = blob[newline + 1 :]
    if len(payload) < header["payload_bytes"]:
        raise TruncatedPayloadError(
            f"Payload has {len(payload)} bytes, header promises {header['payload_bytes']}"
        )
    if len(payload) > header["payload_bytes"]:
        raise HashMismatchError("Payload is longer than the header records")
    checksum = header.pop("checksum", None)
    if checksum != compute_hash(_dumps(header).encode() + payload):
        raise HashMismatchError("Bundle checksum does not match its contents")

    arrays = {}
    for entry in header["arrays"]:
        count = int(np.prod(entry["shape"])) if entry["shape"] else 1
        start = entry["offset"]
        data = np.frombuffer(payload[start : start + 8 * count], dtype="<f8")
        arrays[entry["name"]] = data.astype(float).reshape(entry["shape"])
    header["checksum"] = checksum
    return header, arrays


def save_bundle(path, kind: str, arrays: Dict[str, np.ndarray], metadata: Optional[dict] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_bundle(kind, arrays, metadata))
    return path


def load_bundle(path, expected_kind: Optional[str] = None) -> Tuple[dict, Dict[str, np.ndarray]]:
    return decode_bundle(Path(path).read_bytes(), expected_kind)
