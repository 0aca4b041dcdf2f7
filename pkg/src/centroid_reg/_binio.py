"""Low-level helpers shared by the EMBD/EMBC/EMBM binary containers.

All three containers follow one layout: a little-endian header of
``magic (4 bytes) | version u16 | format-specific integer fields |
payload crc32 u32`` followed by the payload bytes the CRC covers.
Parsing goes through ``Cursor`` so every failure is a structured
``FormatError`` subclass naming the byte offset; corrupted input can
never crash the process or silently yield garbage.
"""

from __future__ import annotations

import os
import struct
import tempfile
import zlib

import numpy as np

FORMAT_VERSION = 1


class FormatError(ValueError):
    """Base for malformed container files."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class BadMagicError(FormatError):
    pass


class UnsupportedVersionError(FormatError):
    pass


class TruncatedFileError(FormatError):
    pass


class ChecksumMismatchError(FormatError):
    pass


class TrailingBytesError(FormatError):
    pass


class Cursor:
    """Bounds-checked reader over an in-memory byte buffer."""

    def __init__(self, data: bytes, base_offset: int = 0):
        self.data = data
        self.pos = 0
        self.base = base_offset

    @property
    def offset(self) -> int:
        return self.base + self.pos

    def take(self, n: int, what: str) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise TruncatedFileError(
                f"need {n} bytes for {what}, only {len(self.data) - self.pos} remain",
                offset=self.offset,
            )
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def _scalar(self, fmt: str, what: str) -> int:
        size = struct.calcsize(fmt)
        return struct.unpack(fmt, self.take(size, what))[0]

    def u8(self, what: str) -> int:
        return self._scalar("<B", what)

    def u16(self, what: str) -> int:
        return self._scalar("<H", what)

    def u32(self, what: str) -> int:
        return self._scalar("<I", what)

    def u64(self, what: str) -> int:
        return self._scalar("<Q", what)

    def utf8(self, n: int, what: str) -> str:
        start = self.offset
        raw = self.take(n, what)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"{what} is not valid UTF-8: {exc}", offset=start) from exc

    def f32_vector(self, count: int, what: str) -> np.ndarray:
        raw = self.take(4 * count, what)
        return np.frombuffer(raw, dtype="<f4").astype(np.float64)

    def f64_vector(self, count: int, what: str) -> np.ndarray:
        raw = self.take(8 * count, what)
        return np.frombuffer(raw, dtype="<f8").copy()

    def expect_end(self, what: str) -> None:
        if self.pos != len(self.data):
            raise TrailingBytesError(
                f"{len(self.data) - self.pos} unexpected bytes after {what}",
                offset=self.offset,
            )


def read_container(data: bytes, magic: bytes, header_fmt: str):
    """Validate header and CRC; return (header_fields, payload, payload_offset).

    ``header_fmt`` lists the struct codes of the format-specific fields
    between the version and the CRC, e.g. ``"IIQ"`` for EMBD.
    """
    cur = Cursor(data)
    got_magic = cur.take(4, "magic")
    if got_magic != magic:
        raise BadMagicError(
            f"expected magic {magic!r}, found {got_magic!r}", offset=0
        )
    version = cur.u16("format version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"unsupported {magic.decode()} version {version}", offset=4
        )
    fields = tuple(cur._scalar("<" + code, "header field") for code in header_fmt)
    stored_crc = cur.u32("payload checksum")
    payload_offset = cur.pos
    payload = data[payload_offset:]
    actual_crc = zlib.crc32(payload) & 0xFFFFFFFF
    if actual_crc != stored_crc:
        raise ChecksumMismatchError(
            f"payload crc32 mismatch: header says {stored_crc:#010x},"
            f" payload hashes to {actual_crc:#010x}",
            offset=payload_offset - 4,
        )
    return fields, payload, payload_offset


def build_container(magic: bytes, header_fmt: str, fields, payload: bytes) -> bytes:
    header = magic + struct.pack("<H", FORMAT_VERSION)
    header += struct.pack("<" + header_fmt, *fields)
    header += struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF)
    return header + payload


def atomic_write(path, data: bytes) -> None:
    """Write via a temp file in the target directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
