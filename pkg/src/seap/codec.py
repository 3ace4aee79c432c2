"""Canonical tag-length-value codec.

Every value is written as a one-byte tag, a four-byte big-endian length and
the payload. Supported values are ``bytes``, ``str``, ``int``, ``bool``,
``None``, tuples/lists of supported values, and dataclasses registered with
:func:`wire_type`. The encoding is deterministic and injective, so it doubles
as the canonical form for signature payloads.
"""

from __future__ import annotations

import dataclasses
import struct
import typing
from typing import Any, Union

from .errors import MalformedMessageError

_T_BYTES = b"B"
_T_STR = b"S"
_T_INT = b"I"
_T_BOOL = b"?"
_T_NONE = b"N"
_T_SEQ = b"L"
_T_MSG = b"M"

_HEADER = struct.Struct(">cI")

_REGISTRY: dict[int, type] = {}
_TAGS: dict[type, int] = {}


def wire_type(tag: int):
    """Class decorator registering a frozen dataclass under a numeric tag."""

    def register(cls):
        if tag in _REGISTRY and _REGISTRY[tag] is not cls:
            raise ValueError(f"wire tag {tag} already used by {_REGISTRY[tag].__name__}")
        _REGISTRY[tag] = cls
        _TAGS[cls] = tag
        return cls

    return register


def _item(tag: bytes, payload: bytes) -> bytes:
    return _HEADER.pack(tag, len(payload)) + payload


def encode_value(value: Any) -> bytes:
    if isinstance(value, bool):
        return _item(_T_BOOL, b"\x01" if value else b"\x00")
    if value is None:
        return _item(_T_NONE, b"")
    if isinstance(value, (bytes, bytearray)):
        return _item(_T_BYTES, bytes(value))
    if isinstance(value, str):
        return _item(_T_STR, value.encode("utf-8"))
    if isinstance(value, int):
        return _item(_T_INT, value.to_bytes(8, "big", signed=True))
    if isinstance(value, (tuple, list)):
        return _item(_T_SEQ, b"".join(encode_value(v) for v in value))
    tag = _TAGS.get(type(value))
    if tag is not None:
        body = tag.to_bytes(2, "big") + b"".join(
            encode_value(getattr(value, f.name)) for f in dataclasses.fields(value)
        )
        return _item(_T_MSG, body)
    raise TypeError(f"cannot encode {type(value).__name__}")


def pack(*values: Any) -> bytes:
    """Canonical encoding of a tuple of values (used for signature payloads)."""
    return encode_value(tuple(values))


def _read(buf: bytes, pos: int) -> tuple[bytes, bytes, int]:
    if pos + _HEADER.size > len(buf):
        raise MalformedMessageError("truncated header")
    tag, length = _HEADER.unpack_from(buf, pos)
    start = pos + _HEADER.size
    end = start + length
    if end > len(buf):
        raise MalformedMessageError("truncated payload")
    return tag, buf[start:end], end


def _decode_tree(buf: bytes, pos: int) -> tuple[Any, int]:
    tag, payload, end = _read(buf, pos)
    if tag == _T_BYTES:
        return payload, end
    if tag == _T_STR:
        try:
            return payload.decode("utf-8"), end
        except UnicodeDecodeError as exc:
            raise MalformedMessageError("invalid utf-8") from exc
    if tag == _T_INT:
        if len(payload) != 8:
            raise MalformedMessageError("bad integer width")
        return int.from_bytes(payload, "big", signed=True), end
    if tag == _T_BOOL:
        if payload not in (b"\x00", b"\x01"):
            raise MalformedMessageError("bad boolean")
        return payload == b"\x01", end
    if tag == _T_NONE:
        if payload:
            raise MalformedMessageError("non-empty null")
        return None, end
    if tag == _T_SEQ:
        items, p = [], 0
        while p < len(payload):
            value, p = _decode_tree(payload, p)
            items.append(value)
        return tuple(items), end
    if tag == _T_MSG:
        if len(payload) < 2:
            raise MalformedMessageError("missing message tag")
        cls = _REGISTRY.get(int.from_bytes(payload[:2], "big"))
        if cls is None:
            raise MalformedMessageError("unknown message tag")
        values, p = [], 2
        while p < len(payload):
            value, p = _decode_tree(payload, p)
            values.append(value)
        return _build(cls, values), end
    raise MalformedMessageError(f"unknown tag {tag!r}")


def _conforms(value: Any, hint: Any) -> bool:
    origin = typing.get_origin(hint)
    if hint is Any:
        return True
    if origin is Union:
        return any(_conforms(value, arg) for arg in typing.get_args(hint))
    if hint is type(None):
        return value is None
    if origin in (tuple, list):
        if not isinstance(value, tuple):
            return False
        args = typing.get_args(hint)
        if len(args) == 2 and args[1] is Ellipsis:
            return all(_conforms(v, args[0]) for v in value)
        return len(args) == len(value) and all(_conforms(v, a) for v, a in zip(value, args))
    if hint is int:
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(hint, type):
        return isinstance(value, hint)
    return True


def _build(cls: type, values: list) -> Any:
    fields = dataclasses.fields(cls)
    if len(values) != len(fields):
        raise MalformedMessageError(f"{cls.__name__}: expected {len(fields)} fields, got {len(values)}")
    hints = typing.get_type_hints(cls)
    for f, v in zip(fields, values):
        if not _conforms(v, hints[f.name]):
            raise MalformedMessageError(f"{cls.__name__}.{f.name}: unexpected {type(v).__name__}")
    try:
        return cls(*values)
    except (TypeError, ValueError) as exc:
        raise MalformedMessageError(str(exc)) from exc


def decode_value(buf: bytes) -> Any:
    value, end = _decode_tree(bytes(buf), 0)
    if end != len(buf):
        raise MalformedMessageError("trailing bytes")
    return value
