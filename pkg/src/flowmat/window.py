"""Exact packet-count windowing of anonymized flow records.

Each flow record contributes up to two directed entries: (src, dst) with the
to-server count, then (dst, src) with the to-client count. An entry crossing
the window boundary is split so every non-final window sums to exactly the
configured packet count; the remainder seeds the next window.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from flowmat.eve import FlowRecord
from flowmat.hypermat import HyperMatrix, MatrixMeta, build_arrays

import numpy as np

DEFAULT_WINDOW_BITS = 17


@dataclass
class TripleBuffer:
    """Accumulated (row, col, count) entries for one window."""

    seq: int
    rows: list[int] = field(default_factory=list)
    cols: list[int] = field(default_factory=list)
    vals: list[int] = field(default_factory=list)
    packets_accumulated: int = 0

    def add(self, row: int, col: int, val: int) -> None:
        self.rows.append(row)
        self.cols.append(col)
        self.vals.append(val)
        self.packets_accumulated += val

    def __len__(self) -> int:
        return len(self.vals)

    def build(self) -> tuple[HyperMatrix, MatrixMeta]:
        matrix = build_arrays(
            np.array(self.rows, dtype=np.uint32),
            np.array(self.cols, dtype=np.uint32),
            np.array(self.vals, dtype=np.uint64),
        )
        meta = MatrixMeta(
            seq=self.seq,
            packet_total=self.packets_accumulated,
            created_unix_s=int(time.time()),
        )
        return matrix, meta


class Windower:
    """Stateful splitter from a flow-record stream to exact-size windows."""

    def __init__(self, window_packets: int = 1 << DEFAULT_WINDOW_BITS):
        if window_packets < 1:
            raise ValueError("window_packets must be >= 1")
        self.window_packets = window_packets
        self._next_seq = 0
        self._buffer = TripleBuffer(seq=0)

    def _complete(self) -> TripleBuffer:
        done = self._buffer
        self._next_seq += 1
        self._buffer = TripleBuffer(seq=self._next_seq)
        return done

    def push_flow(self, rec: FlowRecord) -> list[TripleBuffer]:
        """Add both directions of a record; return any windows it completed."""
        completed: list[TripleBuffer] = []
        buf = self._buffer
        budget = self.window_packets
        for row, col, remaining in (
            (rec.src_ip, rec.dest_ip, rec.pkts_toserver),
            (rec.dest_ip, rec.src_ip, rec.pkts_toclient),
        ):
            while remaining > 0:
                take = budget - buf.packets_accumulated
                if remaining < take:
                    take = remaining
                buf.add(row, col, take)
                remaining -= take
                if buf.packets_accumulated == budget:
                    completed.append(self._complete())
                    buf = self._buffer
        return completed

    def flush(self) -> TripleBuffer | None:
        """Hand back the partial trailing window, if any, and reset."""
        buf = self._buffer
        if buf.packets_accumulated == 0:
            return None
        self._next_seq += 1
        self._buffer = TripleBuffer(seq=self._next_seq)
        return buf
