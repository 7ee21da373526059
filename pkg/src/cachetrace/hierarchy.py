"""Set-associative multi-level cache simulation engine.

The hot loop is compiled with numba so full-size experiment traces
(hundreds of millions of accesses) stay tractable; all per-level state
lives in flat numpy arrays indexed by per-level offsets.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np
from numba import njit

from .errors import GeometryError, ModeConflictError
from .trace import AccessKind, MemoryAccess, Trace, iter_chunks

KB = 1024

#: number of distinct array tags tracked for per-array attribution
NUM_TAGS = 8


class Replacement(Enum):
    LRU = 0
    FIFO = 1
    RANDOM = 2


class WritePolicy(Enum):
    WRITE_BACK_ALLOCATE = 0
    WRITE_THROUGH_NO_ALLOCATE = 1


class Platform(Enum):
    CPU = "CPU"
    GPU = "GPU"


class GpuCacheMode(Enum):
    L1_48K = "L1_48K"
    L1_16K = "L1_16K"
    L1_OFF = "L1_OFF"


@dataclass(frozen=True)
class CacheLevelConfig:
    name: str
    capacity: int
    line_size: int
    associativity: int
    replacement: Replacement = Replacement.LRU
    write_policy: WritePolicy = WritePolicy.WRITE_BACK_ALLOCATE
    enabled: bool = True

    def validate(self) -> None:
        if self.line_size <= 0 or self.line_size & (self.line_size - 1):
            raise GeometryError(
                f"{self.name}: line size {self.line_size} is not a power of two"
            )
        if self.associativity < 1:
            raise GeometryError(f"{self.name}: associativity must be positive")
        if self.capacity % (self.line_size * self.associativity):
            raise GeometryError(
                f"{self.name}: capacity {self.capacity} not divisible by "
                f"line_size*ways = {self.line_size * self.associativity}"
            )

    @property
    def sets(self) -> int:
        return self.capacity // (self.line_size * self.associativity)


@dataclass(frozen=True)
class HierarchyConfig:
    levels: tuple[CacheLevelConfig, ...]
    platform: Platform = Platform.CPU
    gpu_mode: Optional[GpuCacheMode] = None

    def validate(self) -> None:
        if not self.levels:
            raise GeometryError("hierarchy needs at least one level")
        for lvl in self.levels:
            lvl.validate()
        enabled = [l for l in self.levels if l.enabled]
        for upper, lower in zip(enabled, enabled[1:]):
            if lower.line_size % upper.line_size:
                raise GeometryError(
                    f"{upper.name} line size {upper.line_size} does not divide "
                    f"{lower.name} line size {lower.line_size}"
                )
        if self.platform is Platform.GPU:
            self._validate_gpu_mode()

    def _validate_gpu_mode(self) -> None:
        if self.gpu_mode is None:
            raise ModeConflictError("GPU hierarchy requires a gpu_mode")
        l1, l2 = self.levels[0], self.levels[1]
        mode = self.gpu_mode
        if mode is GpuCacheMode.L1_OFF:
            if l1.enabled or l2.line_size != 32:
                raise ModeConflictError(
                    "L1_OFF requires a disabled L1 and a 32-byte L2 line"
                )
            return
        want = 48 * KB if mode is GpuCacheMode.L1_48K else 16 * KB
        if not l1.enabled or l1.capacity != want or l2.line_size != 128:
            raise ModeConflictError(
                f"{mode.value} requires an enabled {want // KB}KB L1 "
                "and a 128-byte L2 line"
            )

    @property
    def enabled_levels(self) -> tuple[CacheLevelConfig, ...]:
        return tuple(l for l in self.levels if l.enabled)


def cpu_preset() -> HierarchyConfig:
    """Three-level Ivy Bridge style hierarchy (i5-3230M)."""
    mk = lambda name, cap, ways: CacheLevelConfig(
        name=name, capacity=cap, line_size=64, associativity=ways,
        replacement=Replacement.LRU,
        write_policy=WritePolicy.WRITE_BACK_ALLOCATE,
    )
    return HierarchyConfig(
        levels=(mk("L1", 32 * KB, 8), mk("L2", 256 * KB, 8), mk("L3", 3072 * KB, 12)),
        platform=Platform.CPU,
    )


def gpu_preset(
    mode: GpuCacheMode,
    l1_ways: int = 4,
    l2_ways: int = 16,
    replacement: Replacement = Replacement.LRU,
) -> HierarchyConfig:
    """Fermi-style two-level hierarchy (Tesla c2075).

    The hardware associativities are unpublished; 4-way L1 / 16-way L2 are
    overridable defaults.
    """
    if mode is GpuCacheMode.L1_OFF:
        l1_cap, l1_enabled, l2_line = 48 * KB, False, 32
    elif mode is GpuCacheMode.L1_16K:
        l1_cap, l1_enabled, l2_line = 16 * KB, True, 128
    else:
        l1_cap, l1_enabled, l2_line = 48 * KB, True, 128
    l1 = CacheLevelConfig(
        name="L1", capacity=l1_cap, line_size=128, associativity=l1_ways,
        replacement=replacement,
        write_policy=WritePolicy.WRITE_THROUGH_NO_ALLOCATE,
        enabled=l1_enabled,
    )
    l2 = CacheLevelConfig(
        name="L2", capacity=768 * KB, line_size=l2_line, associativity=l2_ways,
        replacement=replacement,
        write_policy=WritePolicy.WRITE_BACK_ALLOCATE,
    )
    return HierarchyConfig(levels=(l1, l2), platform=Platform.GPU, gpu_mode=mode)


def shared_memory_capacity(mode: GpuCacheMode) -> int:
    """Scratchpad size complementary to the L1 split (64KB total)."""
    return 16 * KB if mode is GpuCacheMode.L1_48K else 48 * KB


@dataclass
class LevelStats:
    name: str
    enabled: bool = True
    hits: int = 0
    misses: int = 0
    evictions: int = 0
    writebacks: int = 0
    lines_fetched: int = 0
    hits_by_tag: np.ndarray = field(
        default_factory=lambda: np.zeros(NUM_TAGS, dtype=np.int64)
    )
    misses_by_tag: np.ndarray = field(
        default_factory=lambda: np.zeros(NUM_TAGS, dtype=np.int64)
    )

    @property
    def accesses(self) -> int:
        return self.hits + self.misses

    @property
    def miss_rate(self) -> float:
        return self.misses / self.accesses if self.accesses else 0.0


@dataclass
class SimResult:
    levels: list[LevelStats]          # one entry per configured level, in order
    trace_length: int
    transactions: int
    workload_echo: object = None

    @property
    def per_level(self) -> list[LevelStats]:
        """Stats of the enabled levels only."""
        return [s for s in self.levels if s.enabled]

    def level(self, name: str) -> LevelStats:
        for s in self.levels:
            if s.name == name:
                return s
        raise KeyError(name)

    @property
    def total_misses(self) -> int:
        return sum(s.misses for s in self.per_level)


# outcome codes used by the record path of the engine
_OUT_NONE, _OUT_HIT, _OUT_MISS = 0, 1, 2


@njit(cache=True)
def _simulate(addr, is_write, tag, sm,
              enabled, sets, ways, shift, walloc, policy, copies, off,
              line_tag, valid, dirty, stamp,
              hits, misses, evict, wb, fetched, tag_hits, tag_misses,
              clock_io, rng_io, record, outcomes):
    """Run a chunk of accesses through the hierarchy state in place.

    ``clock_io``/``rng_io`` are single-element arrays so the logical clock
    and the xorshift state persist across chunks.
    """
    nlev = len(sets)
    clock = clock_io[0]
    rng = rng_io[0]
    for i in range(len(addr)):
        a = addr[i]
        wr = is_write[i] != 0
        tg = tag[i]
        s_id = sm[i]
        clock += 1
        for l in range(nlev):
            if record:
                outcomes[i, l] = _OUT_NONE
            if not enabled[l]:
                continue
            line = a >> np.uint64(shift[l])
            st = np.int64(line % np.uint64(sets[l]))
            base = off[l] + (s_id % copies[l]) * sets[l] * ways[l] + st * ways[l]
            w = ways[l]
            hit_way = -1
            for way in range(w):
                if valid[base + way] and line_tag[base + way] == line:
                    hit_way = way
                    break
            if hit_way >= 0:
                hits[l] += 1
                tag_hits[l, tg] += 1
                if record:
                    outcomes[i, l] = _OUT_HIT
                if policy[l] == 0:  # LRU refresh; FIFO/RANDOM keep install stamp
                    stamp[base + hit_way] = clock
                if wr:
                    if walloc[l] == 0:  # write-back: absorb here
                        dirty[base + hit_way] = 1
                        break
                    # write-through: forward the write downstream
                    continue
                break
            # miss
            misses[l] += 1
            tag_misses[l, tg] += 1
            if record:
                outcomes[i, l] = _OUT_MISS
            if wr and walloc[l] == 1:
                # no-write-allocate: forward the write, do not fill
                continue
            fetched[l] += 1
            victim = -1
            for way in range(w):
                if not valid[base + way]:
                    victim = way
                    break
            if victim < 0:
                if policy[l] == 2:  # RANDOM (xorshift64)
                    rng ^= rng << np.uint64(13)
                    rng ^= rng >> np.uint64(7)
                    rng ^= rng << np.uint64(17)
                    victim = np.int64(rng % np.uint64(w))
                else:  # LRU / FIFO: oldest stamp
                    victim = 0
                    best = stamp[base]
                    for way in range(1, w):
                        if stamp[base + way] < best:
                            best = stamp[base + way]
                            victim = way
                evict[l] += 1
                if dirty[base + victim]:
                    wb[l] += 1
            line_tag[base + victim] = line
            valid[base + victim] = 1
            dirty[base + victim] = 1 if (wr and walloc[l] == 0) else 0
            stamp[base + victim] = clock
            if wr:
                wr = False  # downstream sees the line fetch, a read
            # fall through to the next level to model the fetch
    clock_io[0] = clock
    rng_io[0] = rng


class Hierarchy:
    """Mutable simulation state for one cache hierarchy.

    One instance is exclusively owned by one experiment run; build a fresh
    instance per concurrent run.

    ``l1_copies`` replicates the first enabled level so multi-SM GPU
    streams can each own a private L1 in front of the shared lower levels.
    Dirty victim lines are counted as writebacks but the writeback traffic
    is not replayed into lower levels.
    """

    def __init__(self, config: HierarchyConfig, seed: int = 0, l1_copies: int = 1):
        config.validate()
        if l1_copies < 1:
            raise GeometryError("l1_copies must be >= 1")
        self.config = config
        self.seed = seed
        nlev = len(config.levels)
        self._enabled = np.array([l.enabled for l in config.levels], dtype=np.uint8)
        self._sets = np.array([l.sets for l in config.levels], dtype=np.int64)
        self._ways = np.array([l.associativity for l in config.levels], dtype=np.int64)
        self._shift = np.array(
            [int(l.line_size).bit_length() - 1 for l in config.levels], dtype=np.int64
        )
        self._walloc = np.array(
            [l.write_policy.value for l in config.levels], dtype=np.int64
        )
        self._policy = np.array(
            [l.replacement.value for l in config.levels], dtype=np.int64
        )
        copies = [1] * nlev
        first_enabled = next(
            (i for i, l in enumerate(config.levels) if l.enabled), None
        )
        if first_enabled is not None:
            copies[first_enabled] = l1_copies
        self._copies = np.array(copies, dtype=np.int64)
        sizes = self._copies * self._sets * self._ways
        self._off = np.zeros(nlev, dtype=np.int64)
        self._off[1:] = np.cumsum(sizes)[:-1]
        total = int(sizes.sum())
        self._line_tag = np.zeros(total, dtype=np.uint64)
        self._valid = np.zeros(total, dtype=np.uint8)
        self._dirty = np.zeros(total, dtype=np.uint8)
        self._stamp = np.zeros(total, dtype=np.int64)
        self._clock = np.zeros(1, dtype=np.int64)
        self._rng = np.array([seed * 2654435761 + 0x9E3779B97F4A7C15], dtype=np.uint64)
        self._hits = np.zeros(nlev, dtype=np.int64)
        self._misses = np.zeros(nlev, dtype=np.int64)
        self._evict = np.zeros(nlev, dtype=np.int64)
        self._wb = np.zeros(nlev, dtype=np.int64)
        self._fetched = np.zeros(nlev, dtype=np.int64)
        self._tag_hits = np.zeros((nlev, NUM_TAGS), dtype=np.int64)
        self._tag_misses = np.zeros((nlev, NUM_TAGS), dtype=np.int64)
        self._accesses_run = 0

    # ------------------------------------------------------------------
    def run_chunk(self, trace: Trace, sm: Optional[np.ndarray] = None) -> None:
        if sm is None:
            sm = np.zeros(len(trace), dtype=np.int64)
        else:
            sm = np.ascontiguousarray(sm, dtype=np.int64)
        dummy = np.zeros((1, len(self.config.levels)), dtype=np.int8)
        _simulate(
            trace.addr, trace.is_write, trace.tag, sm,
            self._enabled, self._sets, self._ways, self._shift,
            self._walloc, self._policy, self._copies, self._off,
            self._line_tag, self._valid, self._dirty, self._stamp,
            self._hits, self._misses, self._evict, self._wb, self._fetched,
            self._tag_hits, self._tag_misses,
            self._clock, self._rng, False, dummy,
        )
        self._accesses_run += len(trace)

    def access(self, access: MemoryAccess, sm: int = 0) -> list[Optional[str]]:
        """Run one access and report the per-level outcome.

        Returns one entry per configured level: ``"hit"``, ``"miss"`` or
        ``None`` when the level was disabled or never reached.
        """
        trace = Trace(
            np.array([access.address], dtype=np.uint64),
            np.array([access.is_write], dtype=np.uint8),
            np.array([access.array_tag], dtype=np.uint8),
            np.array([access.thread_id], dtype=np.int32),
            size=access.size,
        )
        outcomes = np.zeros((1, len(self.config.levels)), dtype=np.int8)
        _simulate(
            trace.addr, trace.is_write, trace.tag,
            np.array([sm], dtype=np.int64),
            self._enabled, self._sets, self._ways, self._shift,
            self._walloc, self._policy, self._copies, self._off,
            self._line_tag, self._valid, self._dirty, self._stamp,
            self._hits, self._misses, self._evict, self._wb, self._fetched,
            self._tag_hits, self._tag_misses,
            self._clock, self._rng, True, outcomes,
        )
        self._accesses_run += 1
        codes = {_OUT_NONE: None, _OUT_HIT: "hit", _OUT_MISS: "miss"}
        return [codes[int(c)] for c in outcomes[0]]

    def run_trace(
        self,
        trace: Trace | Iterable[Trace],
        workload_echo: object = None,
        transactions: Optional[int] = None,
    ) -> SimResult:
        before = self._accesses_run
        for chunk in iter_chunks(trace):
            self.run_chunk(chunk)
        length = self._accesses_run - before
        return self.result(
            trace_length=length,
            transactions=transactions if transactions is not None else length,
            workload_echo=workload_echo,
        )

    def flush(self) -> None:
        """Invalidate every line; dirty lines count as writebacks."""
        for l, lvl in enumerate(self.config.levels):
            size = int(self._copies[l] * self._sets[l] * self._ways[l])
            sl = slice(int(self._off[l]), int(self._off[l]) + size)
            dirty_valid = int(
                np.count_nonzero(self._valid[sl] & self._dirty[sl])
            )
            self._wb[l] += dirty_valid
            self._valid[sl] = 0
            self._dirty[sl] = 0

    def reset_stats(self) -> None:
        for arr in (self._hits, self._misses, self._evict, self._wb,
                    self._fetched, self._tag_hits, self._tag_misses):
            arr[...] = 0
        self._accesses_run = 0

    def level_stats(self) -> list[LevelStats]:
        out = []
        for l, lvl in enumerate(self.config.levels):
            out.append(LevelStats(
                name=lvl.name,
                enabled=lvl.enabled,
                hits=int(self._hits[l]),
                misses=int(self._misses[l]),
                evictions=int(self._evict[l]),
                writebacks=int(self._wb[l]),
                lines_fetched=int(self._fetched[l]),
                hits_by_tag=self._tag_hits[l].copy(),
                misses_by_tag=self._tag_misses[l].copy(),
            ))
        return out

    def result(
        self,
        trace_length: Optional[int] = None,
        transactions: Optional[int] = None,
        workload_echo: object = None,
    ) -> SimResult:
        length = self._accesses_run if trace_length is None else trace_length
        return SimResult(
            levels=self.level_stats(),
            trace_length=length,
            transactions=transactions if transactions is not None else length,
            workload_echo=workload_echo,
        )


def build_hierarchy(
    config: HierarchyConfig, seed: int = 0, l1_copies: int = 1
) -> Hierarchy:
    """Validate ``config`` and return an empty (all-invalid) hierarchy."""
    return Hierarchy(config, seed=seed, l1_copies=l1_copies)
