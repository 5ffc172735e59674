"""Stable content digests used to address runs, scores, and orderings."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, is_dataclass


def _plain(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return {"__type__": type(obj).__name__, **asdict(obj)}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):  # numpy scalar
        return obj.item()
    return obj

def stable_digest(obj) -> str:
    """sha256 hex of a canonical JSON rendering; first 16 chars are the tag."""
    payload = json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def short_digest(obj) -> str:
    return stable_digest(obj)[:16]


def bytes_digest(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()
