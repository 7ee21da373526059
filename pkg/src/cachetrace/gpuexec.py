"""Fermi-style GPU execution model: warps, round-robin scheduling and
segment coalescing.

Two entry points exist for the same semantics:

* :func:`coalesce_warp` / :func:`interleave_grid` operate on explicit
  ``MemoryAccess`` / ``ThreadTrace`` objects and are convenient at test
  scale.
* :func:`stream_transactions` consumes a :class:`StepKernel` (addresses
  computed lazily per scheduling batch) and is the vectorized path the
  harness uses for full-size experiments.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .errors import RaggedTraceError, TileTooLargeError
from .trace import AccessKind, MemoryAccess, Trace


@dataclass(frozen=True)
class ExecModelConfig:
    warp_size: int = 32
    threads_per_block: int = 256
    num_sms: int = 1
    segment_size: int = 128
    coalescing: bool = True
    #: warps concurrently resident per SM; Fermi schedules at most 48.
    resident_warps: int = 48

    def validate(self) -> None:
        if self.warp_size < 1 or self.num_sms < 1 or self.resident_warps < 1:
            raise ValueError("warp_size, num_sms and resident_warps must be >= 1")
        if self.threads_per_block <= 0 or self.threads_per_block % self.warp_size:
            raise ValueError(
                "threads_per_block must be a positive multiple of warp_size"
            )
        if self.segment_size <= 0 or self.segment_size & (self.segment_size - 1):
            raise ValueError("segment_size must be a power of two")


@dataclass
class ThreadTrace:
    thread_id: int
    accesses: list = field(default_factory=list)  # list of MemoryAccess

    def __len__(self) -> int:
        return len(self.accesses)


@dataclass(frozen=True)
class Transaction:
    segment_base: int
    kind: AccessKind
    contributing_threads: frozenset
    array_tag: int = 0
    sm: int = 0


def coalesce_warp(
    accesses: Sequence[MemoryAccess],
    segment_size: int,
    coalescing: bool = True,
    sm: int = 0,
) -> list[Transaction]:
    """Collapse one warp step into memory transactions.

    All accesses belong to the same step of the same warp and share one
    kind. With coalescing enabled, one transaction is issued per distinct
    aligned segment, ordered by ascending segment base; without it, one
    per access.
    """
    if not accesses:
        return []
    kind = accesses[0].kind
    if not coalescing:
        return [
            Transaction(
                segment_base=(a.address // segment_size) * segment_size,
                kind=kind,
                contributing_threads=frozenset({a.thread_id}),
                array_tag=a.array_tag,
                sm=sm,
            )
            for a in accesses
        ]
    by_segment: dict[int, list[MemoryAccess]] = {}
    for a in accesses:
        base = (a.address // segment_size) * segment_size
        by_segment.setdefault(base, []).append(a)
    return [
        Transaction(
            segment_base=base,
            kind=kind,
            contributing_threads=frozenset(a.thread_id for a in group),
            array_tag=group[0].array_tag,
            sm=sm,
        )
        for base, group in sorted(by_segment.items())
    ]


def interleave_grid(
    threads: Sequence[ThreadTrace],
    cfg: ExecModelConfig,
    pad: bool = True,
) -> list[Transaction]:
    """Produce the globally ordered transaction stream of one grid launch.

    Threads are grouped into warps by ascending thread_id, warps into
    blocks, blocks assigned to SMs round-robin. Scheduling proceeds in
    residency batches; within a batch every warp issues one step per
    round, warps in ascending order (SMs interleaved per round).
    """
    cfg.validate()
    if not threads:
        return []
    threads = sorted(threads, key=lambda t: t.thread_id)
    ws = cfg.warp_size
    warps = [threads[i:i + ws] for i in range(0, len(threads), ws)]
    warps_per_block = cfg.threads_per_block // ws

    for warp in warps:
        lengths = {len(t) for t in warp}
        if len(lengths) > 1:
            if not pad:
                raise RaggedTraceError(
                    "threads of one warp have unequal step counts"
                )
    out: list[Transaction] = []
    batch = cfg.resident_warps * cfg.num_sms
    for start in range(0, len(warps), batch):
        group = warps[start:start + batch]
        max_steps = max(len(t) for warp in group for t in warp)
        for step in range(max_steps):
            for wi, warp in enumerate(group, start=start):
                block = wi // warps_per_block
                sm = block % cfg.num_sms
                step_accs = [t.accesses[step] for t in warp if step < len(t)]
                if step_accs:
                    out.extend(
                        coalesce_warp(step_accs, cfg.segment_size,
                                      cfg.coalescing, sm=sm)
                    )
    return out


def apply_scratchpad(
    tile_loads: Sequence[MemoryAccess],
    reuse_count: int,
    capacity_bytes: int,
) -> list[MemoryAccess]:
    """Model an explicitly managed scratchpad tile.

    The returned accesses (the tile loads) traverse the cache hierarchy
    once; every subsequent in-tile reuse is free and generates no memory
    traffic, so only the loads are returned regardless of
    ``reuse_count``.
    """
    required = len({a.address for a in tile_loads}) * (
        tile_loads[0].size if tile_loads else 0
    )
    if required > capacity_bytes:
        raise TileTooLargeError(required, capacity_bytes)
    return list(tile_loads)


# ----------------------------------------------------------------------
# Vectorized streaming path
# ----------------------------------------------------------------------

@dataclass
class StepKernel:
    """Lazily addressable grid launch: ``num_threads`` threads each issue
    ``num_steps`` lockstep accesses.

    ``addr_fn(thread_ids, steps)`` returns a ``(len(thread_ids),
    len(steps))`` uint64 address matrix. Kind and array tag are uniform
    across threads at each step, which holds for every built-in workload.
    """

    num_threads: int
    num_steps: int
    kind_per_step: np.ndarray      # uint8, 0 read / 1 write
    tag_per_step: np.ndarray       # uint8
    addr_fn: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def logical_accesses(self) -> int:
        return self.num_threads * self.num_steps


_SENTINEL = np.uint64(0xFFFFFFFFFFFFFFFF)


def stream_transactions(
    kernel: StepKernel,
    cfg: ExecModelConfig,
) -> Iterator[tuple[Trace, np.ndarray]]:
    """Yield coalesced transaction chunks for one launch.

    Each yielded item is ``(trace_chunk, sm_ids)`` where the trace rows
    are segment-base probe accesses in global issue order (one residency
    batch per chunk).
    """
    cfg.validate()
    ws = cfg.warp_size
    seg = np.uint64(cfg.segment_size)
    num_warps = -(-kernel.num_threads // ws)
    warps_per_block = cfg.threads_per_block // ws
    batch_warps = cfg.resident_warps * cfg.num_sms
    steps = np.arange(kernel.num_steps, dtype=np.int64)
    kinds = np.ascontiguousarray(kernel.kind_per_step, dtype=np.uint8)
    tags = np.ascontiguousarray(kernel.tag_per_step, dtype=np.uint8)

    for w0 in range(0, num_warps, batch_warps):
        w1 = min(w0 + batch_warps, num_warps)
        nw = w1 - w0
        tid = np.arange(w0 * ws, w1 * ws, dtype=np.int64)
        lane_valid = tid < kernel.num_threads
        addr = kernel.addr_fn(np.minimum(tid, kernel.num_threads - 1), steps)
        addr = np.ascontiguousarray(addr, dtype=np.uint64)
        ns = kernel.num_steps
        addr = addr.reshape(nw, ws, ns)
        valid = lane_valid.reshape(nw, ws, 1)

        if cfg.coalescing:
            segs = addr // seg
            segs = np.where(valid, segs, _SENTINEL)
            # (steps, warps, lanes) so flattening yields round-robin order
            segs = np.transpose(segs, (2, 0, 1))
            segs = np.sort(segs, axis=2)
            keep = np.empty_like(segs, dtype=bool)
            keep[:, :, 0] = segs[:, :, 0] != _SENTINEL
            keep[:, :, 1:] = (segs[:, :, 1:] != segs[:, :, :-1]) & (
                segs[:, :, 1:] != _SENTINEL
            )
            out_addr = (segs * seg)[keep]
            counts = keep.sum(axis=2)  # (steps, warps)
            step_idx = np.repeat(
                np.arange(ns, dtype=np.int64),
                counts.sum(axis=1),
            )
            warp_counts = counts.reshape(-1)
            warp_idx = np.repeat(
                np.tile(np.arange(w0, w1, dtype=np.int64), ns), warp_counts
            )
        else:
            addr_t = np.transpose(addr, (2, 0, 1))
            keep = np.broadcast_to(np.transpose(valid, (2, 0, 1)), addr_t.shape)
            out_addr = addr_t[keep]
            counts = keep.sum(axis=2)
            step_idx = np.repeat(np.arange(ns, dtype=np.int64), counts.sum(axis=1))
            warp_idx = np.repeat(
                np.tile(np.arange(w0, w1, dtype=np.int64), ns),
                counts.reshape(-1),
            )
        block_idx = warp_idx // warps_per_block
        sm_ids = block_idx % cfg.num_sms
        chunk = Trace(
            out_addr,
            kinds[step_idx],
            tags[step_idx],
            np.zeros(len(out_addr), dtype=np.int32),
            size=8,
        )
        yield chunk, sm_ids
