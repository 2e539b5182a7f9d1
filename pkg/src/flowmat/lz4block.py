"""Minimal LZ4 block compression via the system liblz4."""

from __future__ import annotations

import ctypes
import ctypes.util


class Lz4Error(RuntimeError):
    pass


def _load() -> ctypes.CDLL:
    name = ctypes.util.find_library("lz4") or "liblz4.so.1"
    try:
        lib = ctypes.CDLL(name)
    except OSError as exc:
        raise Lz4Error(f"cannot load liblz4 ({name}): {exc}") from exc
    lib.LZ4_compressBound.restype = ctypes.c_int
    lib.LZ4_compressBound.argtypes = [ctypes.c_int]
    lib.LZ4_compress_default.restype = ctypes.c_int
    lib.LZ4_compress_default.argtypes = [
        ctypes.c_char_p, ctypes.c_char_p, ctypes.c_int, ctypes.c_int,
    ]
    lib.LZ4_decompress_safe.restype = ctypes.c_int
    lib.LZ4_decompress_safe.argtypes = [
        ctypes.c_char_p, ctypes.c_char_p, ctypes.c_int, ctypes.c_int,
    ]
    return lib


_lib = _load()


def compress(data: bytes) -> bytes:
    """LZ4 block-compress; empty input maps to empty output."""
    if not data:
        return b""
    bound = _lib.LZ4_compressBound(len(data))
    if bound <= 0:
        raise Lz4Error(f"input too large for LZ4 block: {len(data)} bytes")
    dst = ctypes.create_string_buffer(bound)
    written = _lib.LZ4_compress_default(data, dst, len(data), bound)
    if written <= 0:
        raise Lz4Error("LZ4_compress_default failed")
    return dst.raw[:written]


def decompress(data: bytes, raw_len: int) -> bytes:
    """Inverse of compress; raw_len must be the exact original size."""
    if raw_len == 0:
        if data:
            raise Lz4Error("expected empty compressed payload for raw_len=0")
        return b""
    dst = ctypes.create_string_buffer(raw_len)
    produced = _lib.LZ4_decompress_safe(data, dst, len(data), raw_len)
    if produced != raw_len:
        raise Lz4Error(f"LZ4 decompression produced {produced}, expected {raw_len}")
    return dst.raw
