"""S-NUCA grid floorplan and Manhattan-distance LLC latency model.

The last-level cache is split into one bank per core on a rectangular
grid. A core's average LLC access latency is driven by its average
Manhattan distance (AMD) over all banks: central cores have low AMD,
corner cores the highest.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache


@dataclass(frozen=True, order=True)
class CoreId:
    """Grid position of a core: x is the column, y is the row."""

    x: int
    y: int


@dataclass(frozen=True)
class Floorplan:
    width: int = 8
    height: int = 8
    hop_latency_s: float = 1.5e-9
    bank_access_latency_s: float = 5e-9
    # One-way hops are counted; a load travels to the bank and back.
    round_trip_factor: float = 2.0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("floorplan must be at least 1x1")
        if self.hop_latency_s <= 0:
            raise ValueError("hop_latency_s must be positive")
        if self.bank_access_latency_s < 0:
            raise ValueError("bank_access_latency_s must be non-negative")
        if self.round_trip_factor <= 0:
            raise ValueError("round_trip_factor must be positive")

    @property
    def core_count(self) -> int:
        return self.width * self.height

    def cores(self) -> list[CoreId]:
        """All cores in row-major order (y outer, x inner)."""
        return [CoreId(x, y) for y in range(self.height) for x in range(self.width)]

    def contains(self, core: CoreId) -> bool:
        return 0 <= core.x < self.width and 0 <= core.y < self.height

    def require(self, core: CoreId) -> None:
        if not self.contains(core):
            raise ValueError(f"core {core} outside {self.width}x{self.height} floorplan")

    def core_index(self, core: CoreId) -> int:
        """Row-major index, the deterministic tie-breaker everywhere."""
        return core.y * self.width + core.x


def manhattan_distance(a: CoreId, b: CoreId) -> int:
    """Hop count between two cores on the mesh NoC."""
    return abs(a.x - b.x) + abs(a.y - b.y)


@lru_cache(maxsize=None)
def _amd_table(fp: Floorplan) -> dict[CoreId, float]:
    table = {}
    for core in fp.cores():
        total = 0
        for bank in fp.cores():
            total += manhattan_distance(core, bank)
        table[core] = total / fp.core_count
    return table


def amd(core: CoreId, fp: Floorplan) -> float:
    """Average Manhattan distance from `core` to all LLC banks.

    The core's own bank counts with distance 0: static address
    interleaving spreads accesses over all banks uniformly.
    """
    fp.require(core)
    return _amd_table(fp)[core]


def avg_llc_latency(core: CoreId, fp: Floorplan) -> float:
    """Average LLC access latency in seconds for `core`."""
    fp.require(core)
    hops = fp.round_trip_factor * _amd_table(fp)[core]
    return hops * fp.hop_latency_s + fp.bank_access_latency_s


def rank_free_cores(
    fp: Floorplan,
    occupied: set[CoreId],
    direction: str,
) -> list[CoreId]:
    """Free cores ordered by AMD, ascending for "toward_center" and
    descending for "away_from_center". Ties break by row-major index so
    results are reproducible run to run.
    """
    if direction not in ("toward_center", "away_from_center"):
        raise ValueError(f"unknown direction {direction!r}")
    table = _amd_table(fp)
    free = [c for c in fp.cores() if c not in occupied]
    if direction == "toward_center":
        free.sort(key=lambda c: (table[c], fp.core_index(c)))
    else:
        free.sort(key=lambda c: (-table[c], fp.core_index(c)))
    return free
