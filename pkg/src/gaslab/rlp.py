"""Recursive length prefix encoding for trie nodes and chain data.

Items are byte strings or (arbitrarily nested) lists of items. Decoding is
strict: non-canonical encodings and trailing bytes are rejected.
"""

from __future__ import annotations

RlpItem = bytes | list  # list elements are themselves RlpItem


class RLPError(ValueError):
    """Raised for undecodable or non-canonical RLP input."""


def encode(item: RlpItem) -> bytes:
    if isinstance(item, (bytes, bytearray)):
        payload = bytes(item)
        if len(payload) == 1 and payload[0] < 0x80:
            return payload
        return _length_prefix(len(payload), 0x80) + payload
    if isinstance(item, (list, tuple)):
        payload = b"".join(encode(sub) for sub in item)
        return _length_prefix(len(payload), 0xC0) + payload
    raise TypeError(f"cannot RLP-encode {type(item).__name__}")


def _length_prefix(length: int, offset: int) -> bytes:
    if length <= 55:
        return bytes([offset + length])
    length_bytes = length.to_bytes((length.bit_length() + 7) // 8, "big")
    return bytes([offset + 55 + len(length_bytes)]) + length_bytes


def decode(data: bytes) -> RlpItem:
    """Decode a single RLP item; the input must be exactly one encoding."""
    item, consumed = _decode_at(data, 0)
    if consumed != len(data):
        raise RLPError(f"trailing bytes after RLP item ({len(data) - consumed})")
    return item


def _decode_at(data: bytes, pos: int) -> tuple[RlpItem, int]:
    if pos >= len(data):
        raise RLPError("unexpected end of input")
    tag = data[pos]

    if tag < 0x80:
        return bytes([tag]), pos + 1

    if tag <= 0xBF:
        length, payload_start = _read_length(data, pos, tag, 0x80)
        payload = data[payload_start:payload_start + length]
        if tag <= 0xB7 and length == 1 and payload[0] < 0x80:
            raise RLPError("non-canonical single byte")
        return payload, payload_start + length

    length, payload_start = _read_length(data, pos, tag, 0xC0)
    end = payload_start + length
    items: list[RlpItem] = []
    cursor = payload_start
    while cursor < end:
        item, cursor = _decode_at(data, cursor)
        if cursor > end:
            raise RLPError("list item overruns list payload")
        items.append(item)
    return items, end


def _read_length(data: bytes, pos: int, tag: int, offset: int) -> tuple[int, int]:
    """Return (payload length, payload start) for the prefix at pos."""
    if tag <= offset + 55:
        length = tag - offset
        payload_start = pos + 1
    else:
        n = tag - offset - 55
        if pos + 1 + n > len(data):
            raise RLPError("truncated length field")
        length_bytes = data[pos + 1:pos + 1 + n]
        if length_bytes[0] == 0:
            raise RLPError("length field has leading zero")
        length = int.from_bytes(length_bytes, "big")
        if length <= 55:
            raise RLPError("non-minimal length encoding")
        payload_start = pos + 1 + n
    if payload_start + length > len(data):
        raise RLPError("payload extends past end of input")
    return length, payload_start
