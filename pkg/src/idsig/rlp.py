"""Minimal canonical RLP encoder.

Accepts bytes, non-negative ints (encoded as minimal-length big-endian,
zero as the empty string) and arbitrarily nested lists of those. Encoding
only; nothing in the pipeline decodes.
"""

from __future__ import annotations

from typing import Sequence, Union

Encodable = Union[bytes, bytearray, int, Sequence["Encodable"]]


def _int_to_minimal_bytes(value: int) -> bytes:
    if value < 0:
        raise ValueError("RLP integers must be non-negative")
    if value == 0:
        return b""
    return value.to_bytes((value.bit_length() + 7) // 8, "big")


def _encode_length(length: int, offset: int) -> bytes:
    if length < 56:
        return bytes([offset + length])
    length_bytes = _int_to_minimal_bytes(length)
    return bytes([offset + 55 + len(length_bytes)]) + length_bytes


def encode(item: Encodable) -> bytes:
    """Canonical RLP encoding; deterministic and injective per item type."""
    if isinstance(item, bool):
        raise TypeError("refusing to guess an RLP encoding for bool")
    if isinstance(item, (bytes, bytearray)):
        data = bytes(item)
        if len(data) == 1 and data[0] < 0x80:
            return data
        return _encode_length(len(data), 0x80) + data
    if isinstance(item, int):
        return encode(_int_to_minimal_bytes(item))
    if isinstance(item, (list, tuple)):
        payload = b"".join(encode(child) for child in item)
        return _encode_length(len(payload), 0xC0) + payload
    raise TypeError(f"cannot RLP-encode {type(item).__name__}")
