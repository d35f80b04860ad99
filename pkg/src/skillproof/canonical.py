"""Canonical JSON encoding and content hashing.

Every hash in the system is SHA-256 over these bytes, so the encoding is
deliberately stricter than round-trippable JSON:

- object keys sorted ascending by Unicode code point,
- no insignificant whitespace,
- integers in minimal base-10 form,
- no floating-point values (callers encode reals as decimal strings),
- strings minimally escaped: only ``"``, ``\\`` and control characters,
  the latter as lowercase ``\\u00xx``.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

from .errors import NonCanonicalizable

_ESCAPES = {'"': '\\"', "\\": "\\\\"}


def _escape(text: str) -> str:
    out = []
    for ch in text:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    return "".join(out)


def _write(value: Any, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        raise NonCanonicalizable(
            f"float {value!r} is not canonicalizable; encode reals as decimal strings"
        )
    elif isinstance(value, str):
        out.append('"')
        out.append(_escape(value))
        out.append('"')
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _write(item, out)
        out.append("]")
    elif isinstance(value, dict):
        out.append("{")
        for i, key in enumerate(sorted(value)):
            if not isinstance(key, str):
                raise NonCanonicalizable(f"object key {key!r} is not a string")
            if i:
                out.append(",")
            out.append('"')
            out.append(_escape(key))
            out.append('":')
            _write(value[key], out)
        out.append("}")
    else:
        raise NonCanonicalizable(f"type {type(value).__name__} is not canonicalizable")


def canonicalize(value: Any) -> bytes:
    """Encode ``value`` as canonical JSON bytes (UTF-8)."""
    out: list[str] = []
    _write(value, out)
    try:
        return "".join(out).encode("utf-8")
    except UnicodeEncodeError as exc:
        raise NonCanonicalizable(f"string is not valid UTF-8: {exc}") from exc


def document_hash(value: Any) -> str:
    """SHA-256 of the canonical encoding, lowercase hex."""
    return hashlib.sha256(canonicalize(value)).hexdigest()


def hash_bytes(data: bytes) -> str:
    """SHA-256 of raw bytes, lowercase hex."""
    return hashlib.sha256(data).hexdigest()


def _reject_float(text: str) -> None:
    raise NonCanonicalizable(f"canonical document contains a float literal: {text}")


def canonical_loads(data: bytes) -> Any:
    """Parse bytes produced by :func:`canonicalize` (floats rejected)."""
    return json.loads(data.decode("utf-8"), parse_float=_reject_float)
