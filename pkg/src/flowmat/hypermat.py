"""Hypersparse (doubly-compressed) traffic matrices over a 2^32 x 2^32 space.

Storage is proportional to the number of stored entries and present rows,
never to the 4-billion-row logical dimension. Row = source address,
column = destination address. Only the operations the pipeline needs exist:
plus-duplicate build from triples, sum/degree reductions, and triple
extraction for round-trip checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DIMENSION = 1 << 32

_U64_MAX = (1 << 64) - 1


@dataclass(frozen=True)
class MatrixMeta:
    seq: int
    packet_total: int
    created_unix_s: int


@dataclass(frozen=True)
class HyperMatrix:
    """Canonical doubly-compressed sparse matrix.

    rows_present is strictly increasing; col_ids strictly increase within
    each row (duplicates were summed at build); vals are >= 1.
    """

    rows_present: np.ndarray  # uint32, sorted unique
    row_ptr: np.ndarray       # uint64, len(rows_present)+1
    col_ids: np.ndarray       # uint32
    vals: np.ndarray          # uint64
    nrows: int = field(default=DIMENSION)
    ncols: int = field(default=DIMENSION)

    @property
    def nvals(self) -> int:
        return len(self.col_ids)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HyperMatrix):
            return NotImplemented
        return (
            np.array_equal(self.rows_present, other.rows_present)
            and np.array_equal(self.row_ptr, other.row_ptr)
            and np.array_equal(self.col_ids, other.col_ids)
            and np.array_equal(self.vals, other.vals)
        )


def empty() -> HyperMatrix:
    return HyperMatrix(
        rows_present=np.empty(0, dtype=np.uint32),
        row_ptr=np.zeros(1, dtype=np.uint64),
        col_ids=np.empty(0, dtype=np.uint32),
        vals=np.empty(0, dtype=np.uint64),
    )


def build_arrays(rows: np.ndarray, cols: np.ndarray, vals: np.ndarray) -> HyperMatrix:
    """Plus-duplicate build from parallel coordinate arrays.

    Sort on packed 64-bit (row, col) keys, then fold runs of equal keys.
    """
    n = len(vals)
    if n == 0:
        return empty()
    if (vals == 0).any():
        raise ValueError("zero-valued triples must be dropped before build")

    total = float(vals.sum(dtype=np.float64))
    if total >= 2.0**63:
        exact = sum(int(v) for v in vals)
        if exact > _U64_MAX:
            raise OverflowError("triple values sum past 64 bits")

    keys = (rows.astype(np.uint64) << np.uint64(32)) | cols.astype(np.uint64)
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    sorted_vals = vals.astype(np.uint64)[order]

    starts = np.flatnonzero(np.diff(keys)) + 1
    starts = np.concatenate(([0], starts))
    summed = np.add.reduceat(sorted_vals, starts)
    uniq_keys = keys[starts]

    entry_rows = (uniq_keys >> np.uint64(32)).astype(np.uint32)
    col_ids = (uniq_keys & np.uint64(0xFFFFFFFF)).astype(np.uint32)

    rows_present, row_counts = np.unique(entry_rows, return_counts=True)
    row_ptr = np.zeros(len(rows_present) + 1, dtype=np.uint64)
    np.cumsum(row_counts, out=row_ptr[1:])

    return HyperMatrix(
        rows_present=rows_present.astype(np.uint32),
        row_ptr=row_ptr,
        col_ids=col_ids,
        vals=summed,
    )


def build(triples) -> HyperMatrix:
    """Plus-duplicate build from an iterable of (row, col, val) triples."""
    triples = list(triples)
    if not triples:
        return empty()
    rows = np.fromiter((t[0] for t in triples), dtype=np.uint32, count=len(triples))
    cols = np.fromiter((t[1] for t in triples), dtype=np.uint32, count=len(triples))
    vals = np.fromiter((t[2] for t in triples), dtype=np.uint64, count=len(triples))
    return build_arrays(rows, cols, vals)


def total_sum(m: HyperMatrix) -> int:
    return int(m.vals.sum(dtype=np.uint64))


def row_degrees(m: HyperMatrix) -> list[tuple[int, int]]:
    degrees = np.diff(m.row_ptr).astype(np.int64)
    return list(zip(m.rows_present.tolist(), degrees.tolist()))


def col_degrees(m: HyperMatrix) -> list[tuple[int, int]]:
    if m.nvals == 0:
        return []
    cols, counts = np.unique(m.col_ids, return_counts=True)
    return list(zip(cols.tolist(), counts.tolist()))


def to_triples(m: HyperMatrix) -> list[tuple[int, int, int]]:
    """Sorted (row, col, val) list; build(to_triples(m)) == m."""
    if m.nvals == 0:
        return []
    rows = np.repeat(m.rows_present, np.diff(m.row_ptr).astype(np.int64))
    return list(zip(rows.tolist(), m.col_ids.tolist(), m.vals.tolist()))
