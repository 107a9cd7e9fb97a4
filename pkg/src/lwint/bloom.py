"""Per-flow telemetry state kept in a Bloom-filter style array of 2-bit cells.

Each of the ``m`` hash functions is XXH64 over the 13-byte serialized
FlowKey with its own seed; the cell index is ``hash mod K``.  Because a cell
stores a full state rather than a membership bit, lookups with ``m > 1`` take
the minimum state across the key's cells.
"""

from __future__ import annotations

import enum
from array import array

import xxhash

from .errors import InvalidSize
from .model import FlowKey

DEFAULT_SEEDS = (0x9E3779B97F4A7C15, 0xC2B2AE3D27D4EB4F, 0x165667B19E3779F9, 0x27D4EB2F165667C5,
                 0x85EBCA77C2B2AE63, 0xFF51AFD7ED558CCD, 0xC4CEB9FE1A85EC53, 0x94D049BB133111EB)

_CELLS_PER_WORD = 32


class TelemetryState(enum.IntEnum):
    AWAITING_INIT = 0
    READY_TO_INSERT = 1
    INSERTED_ID = 2


def default_seeds(m: int) -> list:
    if m <= len(DEFAULT_SEEDS):
        return list(DEFAULT_SEEDS[:m])
    return list(DEFAULT_SEEDS) + [DEFAULT_SEEDS[-1] + i for i in range(1, m - len(DEFAULT_SEEDS) + 1)]


def flow_hash(key: FlowKey, seed: int) -> int:
    return xxhash.xxh64_intdigest(key.packed, seed=seed)


class BloomStateStore:
    """K two-bit cells packed into 64-bit words, all starting at AwaitingInit."""

    def __init__(self, K: int, m: int = 1, seeds=None):
        if K < 1:
            raise InvalidSize(f"K must be >= 1, got {K}")
        if m < 1:
            raise InvalidSize(f"m must be >= 1, got {m}")
        seeds = default_seeds(m) if seeds is None else [int(s) for s in seeds]
        if len(seeds) != m:
            raise ValueError(f"need exactly m={m} seeds, got {len(seeds)}")
        self.K = K
        self.m = m
        self.seeds = tuple(s & 0xFFFFFFFFFFFFFFFF for s in seeds)
        self._words = array("Q", bytes(8 * (-(-K // _CELLS_PER_WORD))))
        self._index_cache: dict = {}

    def __repr__(self) -> str:
        return f"BloomStateStore(K={self.K}, m={self.m})"

    def indices(self, key: FlowKey) -> tuple:
        idx = self._index_cache.get(key)
        if idx is None:
            data = key.packed
            K = self.K
            idx = self._index_cache[key] = tuple(xxhash.xxh64_intdigest(data, seed=s) % K
                                                 for s in self.seeds)
        return idx

    def cell(self, i: int) -> int:
        return (self._words[i >> 5] >> ((i & 31) << 1)) & 3

    def _set_cell(self, i: int, code: int) -> None:
        w = i >> 5
        shift = (i & 31) << 1
        self._words[w] = (self._words[w] & ~(3 << shift) & 0xFFFFFFFFFFFFFFFF) | (code << shift)

    def code(self, key: FlowKey) -> int:
        """Raw state code for ``key`` (the minimum over its cells)."""
        words = self._words
        code = 3
        for i in self.indices(key):
            c = (words[i >> 5] >> ((i & 31) << 1)) & 3
            if c < code:
                code = c
        return code

    def lookup(self, key: FlowKey) -> TelemetryState:
        return TelemetryState(self.code(key))

    def update(self, key: FlowKey, state: TelemetryState) -> None:
        code = int(state)
        if code not in (0, 1, 2):
            raise ValueError(f"invalid telemetry state {state!r}")
        words = self._words
        for i in self.indices(key):
            w = i >> 5
            shift = (i & 31) << 1
            words[w] = (words[w] & ~(3 << shift) & 0xFFFFFFFFFFFFFFFF) | (code << shift)

    def occupancy(self) -> int:
        """Number of cells not in AwaitingInit."""
        return sum(1 for i in range(self.K) if self.cell(i))
