"""Ingest of newline-delimited Suricata EVE JSON into flow records.

Only ``event_type == "flow"`` events with IPv4 endpoints are kept; everything
else is counted and skipped so a long-running sensor survives log corruption,
mixed event streams, and IPv6 traffic it does not handle.
"""

from __future__ import annotations

import enum
import json
import os
import socket
import stat
import sys
import threading
from dataclasses import dataclass
from typing import IO, Iterator, NamedTuple

MAX_LINE_BYTES = 1 << 20  # longer lines are malformed by contract

_U64_MAX = (1 << 64) - 1


class FlowRecord(NamedTuple):
    """One parsed EVE flow event. Addresses are 32-bit unsigned ints."""

    src_ip: int
    dest_ip: int
    pkts_toserver: int
    pkts_toclient: int


class Skip(enum.Enum):
    """Why a line did not produce a FlowRecord."""

    NON_FLOW = "non_flow"
    IPV6 = "ipv6"
    MALFORMED = "malformed"


@dataclass
class IngestCounters:
    records_ok: int = 0
    records_skipped_non_flow: int = 0
    records_skipped_ipv6: int = 0
    records_skipped_malformed: int = 0

    def count(self, result) -> None:
        if result is Skip.NON_FLOW:
            self.records_skipped_non_flow += 1
        elif result is Skip.IPV6:
            self.records_skipped_ipv6 += 1
        elif result is Skip.MALFORMED:
            self.records_skipped_malformed += 1
        else:
            self.records_ok += 1

    @property
    def lines_consumed(self) -> int:
        return (
            self.records_ok
            + self.records_skipped_non_flow
            + self.records_skipped_ipv6
            + self.records_skipped_malformed
        )

    def as_dict(self) -> dict:
        return {
            "records_ok": self.records_ok,
            "records_skipped_non_flow": self.records_skipped_non_flow,
            "records_skipped_ipv6": self.records_skipped_ipv6,
            "records_skipped_malformed": self.records_skipped_malformed,
        }


def parse_ipv4(text: str) -> int | None:
    """Dotted-quad string to a 32-bit int, or None if not strict IPv4."""
    parts = text.split(".")
    if len(parts) != 4:
        return None
    addr = 0
    for part in parts:
        if not (1 <= len(part) <= 3) or not part.isdigit():
            return None
        octet = int(part)
        if octet > 255:
            return None
        addr = (addr << 8) | octet
    return addr


def format_ipv4(addr: int) -> str:
    return f"{(addr >> 24) & 0xFF}.{(addr >> 16) & 0xFF}.{(addr >> 8) & 0xFF}.{addr & 0xFF}"


def _count(value) -> int | None:
    # bool is an int subclass; JSON true/false must not pass as counts
    if type(value) is not int or value < 0 or value > _U64_MAX:
        return None
    return value


def parse_flow_record(line: bytes) -> FlowRecord | Skip:
    """Parse one EVE JSON line. Never raises: bad input becomes a Skip."""
    if len(line) > MAX_LINE_BYTES:
        return Skip.MALFORMED
    try:
        doc = json.loads(line)
    except (ValueError, UnicodeDecodeError):
        return Skip.MALFORMED
    if not isinstance(doc, dict):
        return Skip.MALFORMED
    if doc.get("event_type") != "flow":
        return Skip.NON_FLOW

    src = doc.get("src_ip")
    dst = doc.get("dest_ip")
    if not isinstance(src, str) or not isinstance(dst, str):
        return Skip.MALFORMED
    if ":" in src or ":" in dst:
        return Skip.IPV6
    src_addr = parse_ipv4(src)
    dst_addr = parse_ipv4(dst)
    if src_addr is None or dst_addr is None:
        return Skip.MALFORMED

    flow = doc.get("flow")
    if not isinstance(flow, dict):
        return Skip.MALFORMED
    toserver = _count(flow.get("pkts_toserver"))
    toclient = _count(flow.get("pkts_toclient"))
    if toserver is None or toclient is None:
        return Skip.MALFORMED

    return FlowRecord(src_addr, dst_addr, toserver, toclient)


def _bounded_lines(stream: IO[bytes]) -> Iterator[bytes]:
    """Yield newline-delimited lines, capping per-line memory.

    A physical line longer than MAX_LINE_BYTES is yielded as a single
    over-long chunk (the parser rejects it) and its remainder is discarded.
    """
    limit = MAX_LINE_BYTES + 1
    while True:
        chunk = stream.readline(limit)
        if not chunk:
            return
        if chunk.endswith(b"\n"):
            line = chunk[:-1]
            if line:
                yield line
            continue
        if len(chunk) < limit:
            # EOF without trailing newline
            yield chunk
            return
        # over-long line: drain the rest of it
        while True:
            rest = stream.readline(limit)
            if not rest or rest.endswith(b"\n"):
                break
        yield chunk


class SocketLineSource:
    """Listening unix stream socket yielding lines from successive peers.

    Accepts one connection at a time and re-listens after the peer
    disconnects, until close() is called.
    """

    def __init__(self, path: str):
        self.path = path
        if os.path.exists(path):
            if not stat.S_ISSOCK(os.stat(path).st_mode):
                raise OSError(f"refusing to replace non-socket path: {path}")
            os.unlink(path)
        self._listener = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
        try:
            self._listener.bind(path)
            self._listener.listen(1)
        except OSError:
            self._listener.close()
            raise
        # closing a socket does not wake a blocked accept(); poll instead
        self._listener.settimeout(0.2)
        self._closed = threading.Event()

    def close(self) -> None:
        self._closed.set()
        try:
            self._listener.close()
        except OSError:
            pass

    def __iter__(self) -> Iterator[bytes]:
        try:
            while not self._closed.is_set():
                try:
                    conn, _ = self._listener.accept()
                except socket.timeout:
                    continue
                except OSError:
                    return  # listener closed
                conn.settimeout(None)
                with conn, conn.makefile("rb") as stream:
                    yield from _bounded_lines(stream)
        finally:
            try:
                os.unlink(self.path)
            except OSError:
                pass


class _FileLineSource:
    def __init__(self, stream: IO[bytes], owns: bool):
        self._stream = stream
        self._owns = owns

    def close(self) -> None:
        if self._owns:
            self._stream.close()

    def __iter__(self) -> Iterator[bytes]:
        return _bounded_lines(self._stream)


def open_source(spec: str, *, socket_mode: bool = False):
    """Open an EVE line source: a file path, "-" for stdin, or a unix socket.

    Returns an iterable of line byte strings with a close() method.
    Raises OSError naming the path if it cannot be opened.
    """
    if socket_mode:
        return SocketLineSource(spec)
    if spec == "-":
        return _FileLineSource(sys.stdin.buffer, owns=False)
    try:
        stream = open(spec, "rb")
    except OSError as exc:
        raise OSError(f"cannot open input {spec!r}: {exc}") from exc
    return _FileLineSource(stream, owns=True)
