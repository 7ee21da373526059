"""Deterministic access-pattern generators for the four locality
techniques (blocking, loop/kernel fusion, array merging, array
transpose) on CPU and GPU.

CPU workloads are produced as iterators of :class:`~cachetrace.trace.Trace`
chunks so full-size runs never materialize the whole trace; GPU workloads
are produced as :class:`~cachetrace.gpuexec.StepKernel` launches. The
``gen_*`` wrappers materialize both forms for direct use at test scale.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator, Optional

import numpy as np

from .errors import (
    BlockMismatchError,
    OutOfRangeError,
    SizeMismatchError,
    TileTooLargeError,
    ValidationError,
)
from .gpuexec import StepKernel, ThreadTrace
from .trace import AccessKind, MemoryAccess, Trace

ELEMENT_SIZE = 8
#: CPU merge test skips this many elements between visits (two 64B lines)
CPU_MERGE_STRIDE = 16
#: GPU merge test: consecutive accesses of one thread jump this many elements
GPU_MERGE_STRIDE = 64
TEXTURE_TILE_EDGE = 4


class Technique(Enum):
    BLOCKING = "BLOCKING"
    FUSION = "FUSION"
    MERGING = "MERGING"
    TRANSPOSE = "TRANSPOSE"


class BlockingVariant(Enum):
    NAIVE = "NAIVE"
    HP_BLOCKS = "HP_BLOCKS"
    EQUAL_TILES = "EQUAL_TILES"
    SHARED_TILES = "SHARED_TILES"


@dataclass(frozen=True)
class WorkloadSpec:
    technique: Technique
    platform: str            # "CPU" | "GPU"
    n: int
    variant: str
    element_size: int = ELEMENT_SIZE
    block: int = 16          # blocking tile edge
    bases: Optional[tuple[int, ...]] = None

    def validate(self) -> None:
        if self.n < 1:
            raise ValidationError("n must be >= 1")
        if self.platform not in ("CPU", "GPU"):
            raise ValidationError(f"unknown platform {self.platform!r}")
        if self.technique is Technique.BLOCKING:
            if self.variant != "NAIVE" and self.n % self.block:
                raise BlockMismatchError(
                    f"block size {self.block} does not divide n={self.n}"
                )
            if self.variant == "SHARED_TILES" and self.platform != "GPU":
                raise ValidationError("SHARED_TILES is GPU-only")


def allocate_bases(sizes_bytes, align: int = 4096, guard: int = 128) -> list[int]:
    """Consecutive 4KB-aligned regions separated by one guard line, so
    distinct arrays never share a cache line by accident."""
    bases, cur = [], 0
    for s in sizes_bytes:
        bases.append(cur)
        cur = ((cur + s + guard + align - 1) // align) * align
    return bases


def _trace(addr, wr, tag):
    return Trace(
        np.asarray(addr, dtype=np.uint64),
        np.asarray(wr, dtype=np.uint8),
        np.asarray(tag, dtype=np.uint8),
    )


# ----------------------------------------------------------------------
# CPU trace chunk generators
# ----------------------------------------------------------------------

def cpu_matmul_chunks(
    n: int,
    es: int = ELEMENT_SIZE,
    transposed_b: bool = False,
    rows_per_chunk: int = 8,
) -> Iterator[Trace]:
    """i-j-k matrix multiply with register accumulation: per innermost
    step READ A[i][k] and READ B[k][j], one WRITE C[i][j] per (i,j)."""
    base_a, base_b, base_c = allocate_bases([n * n * es] * 3)
    k = np.arange(n, dtype=np.int64)
    j = np.arange(n, dtype=np.int64)
    width = 2 * n + 1
    for i0 in range(0, n, rows_per_chunk):
        rows = range(i0, min(i0 + rows_per_chunk, n))
        addr = np.empty((len(rows), n, width), dtype=np.uint64)
        wr = np.zeros((len(rows), n, width), dtype=np.uint8)
        tag = np.empty((len(rows), n, width), dtype=np.uint8)
        for ri, i in enumerate(rows):
            a_row = (base_a + (i * n + k) * es).astype(np.uint64)
            addr[ri, :, 0:2 * n:2] = a_row[None, :]
            if transposed_b:
                b_part = base_b + (j[:, None] * n + k[None, :]) * es
            else:
                b_part = base_b + (k[None, :] * n + j[:, None]) * es
            addr[ri, :, 1:2 * n:2] = b_part.astype(np.uint64)
            addr[ri, :, 2 * n] = (base_c + (i * n + j) * es).astype(np.uint64)
        wr[:, :, 2 * n] = 1
        tag[:, :, 0:2 * n:2] = 0
        tag[:, :, 1:2 * n:2] = 1
        tag[:, :, 2 * n] = 2
        yield _trace(addr.ravel(), wr.ravel(), tag.ravel())


def cpu_matmul_hp_blocked_chunks(
    n: int, b: int, es: int = ELEMENT_SIZE
) -> Iterator[Trace]:
    """Blocked multiply walking small blocks of A against column blocks of
    B (kji-style blocked kernel): outer loops over (jj, kk) blocks, full
    sweep over rows i inside."""
    if n % b:
        raise BlockMismatchError(f"block size {b} does not divide n={n}")
    base_a, base_b, base_c = allocate_bases([n * n * es] * 3)
    kk_rel = np.arange(b, dtype=np.int64)
    jj_rel = np.arange(b, dtype=np.int64)
    width = 2 * b
    for jj in range(0, n, b):
        for kk in range(0, n, b):
            j = jj + jj_rel
            k = kk + kk_rel
            addr = np.empty((n, b, width + 1), dtype=np.uint64)
            wr = np.zeros((n, b, width + 1), dtype=np.uint8)
            tag = np.empty((n, b, width + 1), dtype=np.uint8)
            i = np.arange(n, dtype=np.int64)
            a_part = base_a + (i[:, None] * n + k[None, :]) * es       # (n, b)
            b_part = base_b + (k[None, :] * n + j[:, None]) * es      # (b_j, b_k)
            addr[:, :, 0:width:2] = a_part[:, None, :].astype(np.uint64)
            addr[:, :, 1:width:2] = b_part[None, :, :].astype(np.uint64)
            addr[:, :, width] = (
                base_c + (i[:, None] * n + j[None, :]) * es
            ).astype(np.uint64)
            wr[:, :, width] = 1
            tag[:, :, 0:width:2] = 0
            tag[:, :, 1:width:2] = 1
            tag[:, :, width] = 2
            yield _trace(addr.ravel(), wr.ravel(), tag.ravel())


def cpu_matmul_equal_tiles_chunks(
    n: int, b: int, es: int = ELEMENT_SIZE
) -> Iterator[Trace]:
    """Blocked multiply over equal-size tiles of both matrices: every
    (ii, jj, kk) tile triple is processed with an i-j-k sweep inside and
    one C write per (i, j) per triple."""
    if n % b:
        raise BlockMismatchError(f"block size {b} does not divide n={n}")
    base_a, base_b, base_c = allocate_bases([n * n * es] * 3)
    rel = np.arange(b, dtype=np.int64)
    width = 2 * b + 1
    for ii in range(0, n, b):
        for jj in range(0, n, b):
            for kk in range(0, n, b):
                i = ii + rel
                j = jj + rel
                k = kk + rel
                addr = np.empty((b, b, width), dtype=np.uint64)
                wr = np.zeros((b, b, width), dtype=np.uint8)
                tag = np.empty((b, b, width), dtype=np.uint8)
                a_part = base_a + (i[:, None] * n + k[None, :]) * es
                b_part = base_b + (k[None, :] * n + j[:, None]) * es
                addr[:, :, 0:2 * b:2] = a_part[:, None, :].astype(np.uint64)
                addr[:, :, 1:2 * b:2] = b_part[None, :, :].astype(np.uint64)
                addr[:, :, 2 * b] = (
                    base_c + (i[:, None] * n + j[None, :]) * es
                ).astype(np.uint64)
                wr[:, :, 2 * b] = 1
                tag[:, :, 0:2 * b:2] = 0
                tag[:, :, 1:2 * b:2] = 1
                tag[:, :, 2 * b] = 2
                yield _trace(addr.ravel(), wr.ravel(), tag.ravel())


def cpu_loop_fusion_chunks(
    n: int, fused: bool, es: int = ELEMENT_SIZE, chunk: int = 1 << 18
) -> Iterator[Trace]:
    """Two loops sharing reads of X and Y; loop1 writes Z, loop2 writes W.
    Fused mode emits both bodies per index; separate mode emits loop1
    fully, then loop2. Access multiset is identical either way."""
    bx, by, bz, bw = allocate_bases([n * es] * 4)

    def body(i0, i1, write_base, write_tag):
        i = np.arange(i0, i1, dtype=np.int64)
        addr = np.empty((len(i), 3), dtype=np.uint64)
        addr[:, 0] = (bx + i * es).astype(np.uint64)
        addr[:, 1] = (by + i * es).astype(np.uint64)
        addr[:, 2] = (write_base + i * es).astype(np.uint64)
        wr = np.zeros((len(i), 3), dtype=np.uint8)
        wr[:, 2] = 1
        tag = np.empty((len(i), 3), dtype=np.uint8)
        tag[:, 0] = 0
        tag[:, 1] = 1
        tag[:, 2] = write_tag
        return addr, wr, tag

    if fused:
        for i0 in range(0, n, chunk):
            i1 = min(i0 + chunk, n)
            a1, w1, t1 = body(i0, i1, bz, 2)
            a2, w2, t2 = body(i0, i1, bw, 3)
            addr = np.concatenate([a1[:, None, :], a2[:, None, :]], axis=1)
            wr = np.concatenate([w1[:, None, :], w2[:, None, :]], axis=1)
            tag = np.concatenate([t1[:, None, :], t2[:, None, :]], axis=1)
            yield _trace(addr.ravel(), wr.ravel(), tag.ravel())
    else:
        for write_base, write_tag in ((bz, 2), (bw, 3)):
            for i0 in range(0, n, chunk):
                i1 = min(i0 + chunk, n)
                a, w, t = body(i0, i1, write_base, write_tag)
                yield _trace(a.ravel(), w.ravel(), t.ravel())


def cpu_array_merge_chunks(
    n: int, merged: bool, es: int = ELEMENT_SIZE,
    stride: int = CPU_MERGE_STRIDE,
) -> Iterator[Trace]:
    """Single loop over indices 0, stride, 2*stride, ...; at each index
    READ a[i], READ b[i], WRITE c[i]. Merged mode interleaves the three
    arrays element-wise (array-of-structures)."""
    if n < stride:
        raise ValidationError(f"n must be >= stride ({stride})")
    i = np.arange(0, n, stride, dtype=np.int64)
    addr = np.empty((len(i), 3), dtype=np.uint64)
    if merged:
        base = allocate_bases([3 * n * es])[0]
        for j in range(3):
            addr[:, j] = (base + (3 * i + j) * es).astype(np.uint64)
    else:
        bases = allocate_bases([n * es] * 3)
        for j in range(3):
            addr[:, j] = (bases[j] + i * es).astype(np.uint64)
    wr = np.zeros((len(i), 3), dtype=np.uint8)
    wr[:, 2] = 1
    tag = np.empty((len(i), 3), dtype=np.uint8)
    tag[:, 0], tag[:, 1], tag[:, 2] = 0, 1, 2
    yield _trace(addr.ravel(), wr.ravel(), tag.ravel())


def cpu_transpose_overhead_chunks(
    n: int, es: int = ELEMENT_SIZE, rows_per_chunk: int = 256
) -> Iterator[Trace]:
    """Host-side transpose: sequential READ B[i][j], WRITE Bt[j][i];
    exactly 2*n*n accesses."""
    base_b, base_bt = allocate_bases([n * n * es] * 2)
    j = np.arange(n, dtype=np.int64)
    for i0 in range(0, n, rows_per_chunk):
        i = np.arange(i0, min(i0 + rows_per_chunk, n), dtype=np.int64)
        addr = np.empty((len(i), n, 2), dtype=np.uint64)
        addr[:, :, 0] = (base_b + (i[:, None] * n + j[None, :]) * es).astype(np.uint64)
        addr[:, :, 1] = (base_bt + (j[None, :] * n + i[:, None]) * es).astype(np.uint64)
        wr = np.zeros((len(i), n, 2), dtype=np.uint8)
        wr[:, :, 1] = 1
        tag = np.ones((len(i), n, 2), dtype=np.uint8)
        yield _trace(addr.ravel(), wr.ravel(), tag.ravel())


# ----------------------------------------------------------------------
# GPU step kernels
# ----------------------------------------------------------------------

def gpu_matmul_naive_kernel(
    n: int, es: int = ELEMENT_SIZE, transposed_b: bool = False
) -> StepKernel:
    """One thread per C element; thread (i, j) reads row i of A and
    column j of B (or row j of the transposed B), then writes C[i][j]."""
    base_a, base_b, base_c = allocate_bases([n * n * es] * 3)
    steps_total = 2 * n + 1
    kinds = np.zeros(steps_total, dtype=np.uint8)
    kinds[-1] = 1
    tags = np.empty(steps_total, dtype=np.uint8)
    tags[0:2 * n:2] = 0
    tags[1:2 * n:2] = 1
    tags[-1] = 2

    def addr_fn(tids, steps):
        i = tids // n
        j = tids % n
        k = steps // 2
        a = base_a + (i[:, None] * n + k[None, :]) * es
        if transposed_b:
            bb = base_b + (j[:, None] * n + k[None, :]) * es
        else:
            bb = base_b + (k[None, :] * n + j[:, None]) * es
        out = np.where(steps[None, :] % 2 == 0, a, bb)
        is_last = steps == 2 * n
        if is_last.any():
            out[:, is_last] = (base_c + (i * n + j) * es)[:, None]
        return out.astype(np.uint64)

    return StepKernel(n * n, steps_total, kinds, tags, addr_fn)


def _tiled_thread_coords(tids, n, b):
    """Thread id -> (i, j, ty, tx, bi, bj) for a 2D grid of b*b blocks."""
    tpb = b * b
    block = tids // tpb
    within = tids % tpb
    blocks_per_row = n // b
    bi = block // blocks_per_row
    bj = block % blocks_per_row
    ty = within // b
    tx = within % b
    return bi * b + ty, bj * b + tx, ty, tx, bi, bj


def gpu_matmul_tiled_kernel(
    n: int,
    b: int,
    es: int = ELEMENT_SIZE,
    scratchpad: bool = False,
    shared_capacity: Optional[int] = None,
) -> StepKernel:
    """Equal-tile blocked multiply on a 2D grid of b*b thread blocks.

    Per phase each thread issues one cooperative load from the A tile and
    one from the B tile; without a scratchpad it then reads its row/column
    slices of both tiles (served by the cache), with a scratchpad those
    in-tile reuses are elided and only the cooperative loads remain.
    """
    if n % b:
        raise BlockMismatchError(f"block size {b} does not divide n={n}")
    if scratchpad:
        required = 2 * b * b * es
        if shared_capacity is not None and required > shared_capacity:
            raise TileTooLargeError(required, shared_capacity)
    base_a, base_b, base_c = allocate_bases([n * n * es] * 3)
    phases = n // b
    per_phase = 2 if scratchpad else 2 + 2 * b
    steps_total = phases * per_phase + 1
    kinds = np.zeros(steps_total, dtype=np.uint8)
    kinds[-1] = 1
    rel = np.arange(steps_total, dtype=np.int64) % per_phase
    tags = np.where(rel % 2 == 0, 0, 1).astype(np.uint8)
    tags[-1] = 2

    def addr_fn(tids, steps):
        i, j, ty, tx, bi, bj = _tiled_thread_coords(tids, n, b)
        p = steps // per_phase
        r = steps % per_phase
        coop_a = base_a + (i[:, None] * n + p[None, :] * b + tx[:, None]) * es
        coop_b = base_b + ((p[None, :] * b + ty[:, None]) * n + j[:, None]) * es
        out = np.where(r[None, :] == 0, coop_a, coop_b)
        if not scratchpad:
            q = (r - 2) // 2
            comp_a = base_a + (i[:, None] * n + p[None, :] * b + q[None, :]) * es
            comp_b = base_b + ((p[None, :] * b + q[None, :]) * n + j[:, None]) * es
            comp = np.where(r[None, :] % 2 == 0, comp_a, comp_b)
            out = np.where(r[None, :] >= 2, comp, out)
        is_last = steps == steps_total - 1
        if is_last.any():
            out[:, is_last] = (base_c + (i * n + j) * es)[:, None]
        return out.astype(np.uint64)

    return StepKernel(n * n, steps_total, kinds, tags, addr_fn)


def gpu_fusion_kernels(
    n: int, fused: bool, es: int = ELEMENT_SIZE
) -> list[StepKernel]:
    """One thread per index. Fused: a single launch issuing all six
    accesses; separate: two launches of three accesses each, with cache
    state persisting across the launch boundary."""
    bx, by, bz, bw = allocate_bases([n * es] * 4)

    def make(bases_tags):
        kinds = np.array(
            [1 if w else 0 for _, _, w in bases_tags], dtype=np.uint8
        )
        tags = np.array([t for _, t, _ in bases_tags], dtype=np.uint8)
        bases = np.array([b for b, _, _ in bases_tags], dtype=np.int64)

        def addr_fn(tids, steps):
            return (
                bases[None, steps] + tids[:, None] * es
            ).astype(np.uint64)

        return StepKernel(n, len(bases_tags), kinds, tags, addr_fn)

    k1 = [(bx, 0, False), (by, 1, False), (bz, 2, True)]
    k2 = [(bx, 0, False), (by, 1, False), (bw, 3, True)]
    if fused:
        return [make(k1 + k2)]
    return [make(k1), make(k2)]


def gpu_merge_threads(n: int) -> tuple[int, int]:
    """(num_threads, visits_per_thread) for the GPU merge test."""
    if n % GPU_MERGE_STRIDE:
        raise ValidationError(f"n must be a multiple of {GPU_MERGE_STRIDE}")
    visited = n // GPU_MERGE_STRIDE
    num_threads = 64
    while num_threads > 1 and visited % num_threads:
        num_threads //= 2
    return num_threads, visited // num_threads


def gpu_array_merge_kernel(
    n: int, merged: bool, es: int = ELEMENT_SIZE
) -> StepKernel:
    """Strided triple-array walk mirroring the CPU merge loop.

    The globally visited indices are 0, 64, 128, ... (so every new visit
    starts a new cache line), distributed round-robin over the threads;
    at each index READ a[i], READ b[i], WRITE c[i]."""
    num_threads, per_thread = gpu_merge_threads(n)
    if merged:
        base = allocate_bases([3 * n * es])[0]
        bases = np.array([base, base, base], dtype=np.int64)
    else:
        bases = np.array(allocate_bases([n * es] * 3), dtype=np.int64)
    steps_total = per_thread * 3
    kinds = np.zeros(steps_total, dtype=np.uint8)
    kinds[2::3] = 1
    tags = np.arange(steps_total, dtype=np.uint8) % 3

    def addr_fn(tids, steps):
        m = steps // 3
        r = steps % 3
        i = (m[None, :] * num_threads + tids[:, None]) * GPU_MERGE_STRIDE
        if merged:
            return (bases[r][None, :] + (3 * i + r[None, :]) * es).astype(np.uint64)
        return (bases[r][None, :] + i * es).astype(np.uint64)

    return StepKernel(num_threads, steps_total, kinds, tags, addr_fn)


def tile_address_map(
    row: int, col: int, n: int,
    tile_edge: int = TEXTURE_TILE_EDGE,
    element_size: int = ELEMENT_SIZE,
    base: int = 0,
):
    """Block-linear layout: tiles in row-major tile order, elements
    row-major within a tile; a 4x4 tile of 8B elements fills exactly one
    128B segment. Accepts scalars or numpy arrays."""
    scalar = np.isscalar(row) and np.isscalar(col)
    row = np.asarray(row, dtype=np.int64)
    col = np.asarray(col, dtype=np.int64)
    if n % tile_edge:
        raise SizeMismatchError(f"n={n} not a multiple of tile_edge={tile_edge}")
    if scalar and not (
        (0 <= row < n) and (0 <= col < n)
    ):
        raise OutOfRangeError(f"({int(row)},{int(col)}) outside {n}x{n} array")
    tiles_per_row = n // tile_edge
    tile_idx = (row // tile_edge) * tiles_per_row + col // tile_edge
    intra = (row % tile_edge) * tile_edge + col % tile_edge
    addr = base + (tile_idx * tile_edge * tile_edge + intra) * element_size
    return int(addr) if scalar else addr


def gpu_texture_merge_kernel(
    n: int, merged: bool, es: int = ELEMENT_SIZE,
    tile_edge: int = TEXTURE_TILE_EDGE, block_edge: int = 16,
) -> StepKernel:
    """Texture-style kernel over two tiled 2D arrays.

    Thread (r, c) samples a 2-row footprint of both arrays, interleaving
    the two (A then B per row), then writes one linear output element.
    Merged mode interleaves the arrays tile-by-tile so paired tiles sit
    in adjacent segments instead of conflicting cache sets.
    """
    if n % tile_edge:
        raise SizeMismatchError(f"n={n} not a multiple of tile_edge={tile_edge}")
    if n % block_edge:
        raise SizeMismatchError(f"n={n} not a multiple of block_edge={block_edge}")
    tile_elems = tile_edge * tile_edge
    array_bytes = n * n * es
    if merged:
        base_m, base_out = allocate_bases([2 * array_bytes, array_bytes])
        base_a = base_b = base_m
    else:
        base_a, base_b, base_out = allocate_bases([array_bytes] * 3)
    tiles_per_row = n // tile_edge

    def tiled_addr(r, c, which):
        tile_idx = (r // tile_edge) * tiles_per_row + c // tile_edge
        intra = (r % tile_edge) * tile_edge + c % tile_edge
        if merged:
            return base_a + ((2 * tile_idx + which) * tile_elems + intra) * es
        return (base_a if which == 0 else base_b) + (tile_idx * tile_elems + intra) * es

    kinds = np.array([0, 0, 0, 0, 1], dtype=np.uint8)
    tags = np.array([0, 1, 0, 1, 2], dtype=np.uint8)

    def addr_fn(tids, steps):
        r, c, _, _, _, _ = _tiled_thread_coords(tids, n, block_edge)
        r1 = np.minimum(r + 1, n - 1)
        cols = np.empty((len(tids), len(steps)), dtype=np.int64)
        for si, s in enumerate(steps):
            if s == 0:
                cols[:, si] = tiled_addr(r, c, 0)
            elif s == 1:
                cols[:, si] = tiled_addr(r, c, 1)
            elif s == 2:
                cols[:, si] = tiled_addr(r1, c, 0)
            elif s == 3:
                cols[:, si] = tiled_addr(r1, c, 1)
            else:
                cols[:, si] = base_out + (r * n + c) * es
        return cols.astype(np.uint64)

    return StepKernel(n * n, 5, kinds, tags, addr_fn)


# ----------------------------------------------------------------------
# Spec-level wrappers (materialized, for direct/small-scale use)
# ----------------------------------------------------------------------

def kernel_to_threads(kernel: StepKernel) -> list[ThreadTrace]:
    """Materialize a step kernel into explicit per-thread access lists."""
    tids = np.arange(kernel.num_threads, dtype=np.int64)
    steps = np.arange(kernel.num_steps, dtype=np.int64)
    addr = kernel.addr_fn(tids, steps)
    out = []
    for t in range(kernel.num_threads):
        accs = [
            MemoryAccess(
                address=int(addr[t, s]),
                size=ELEMENT_SIZE,
                kind=AccessKind.WRITE if kernel.kind_per_step[s] else AccessKind.READ,
                thread_id=t,
                array_tag=int(kernel.tag_per_step[s]),
            )
            for s in range(kernel.num_steps)
        ]
        out.append(ThreadTrace(thread_id=t, accesses=accs))
    return out


def gen_matmul_naive(n: int, platform: str = "CPU"):
    if platform == "GPU":
        return kernel_to_threads(gpu_matmul_naive_kernel(n))
    return Trace.concat(cpu_matmul_chunks(n))


def gen_matmul_blocked(
    n: int, b: int, variant: BlockingVariant, platform: str = "CPU"
):
    if platform == "GPU":
        if variant is BlockingVariant.NAIVE:
            return kernel_to_threads(gpu_matmul_naive_kernel(n))
        scratch = variant is BlockingVariant.SHARED_TILES
        return kernel_to_threads(gpu_matmul_tiled_kernel(n, b, scratchpad=scratch))
    if variant is BlockingVariant.SHARED_TILES:
        raise ValidationError("SHARED_TILES is GPU-only")
    if variant is BlockingVariant.NAIVE:
        return Trace.concat(cpu_matmul_chunks(n))
    if variant is BlockingVariant.HP_BLOCKS:
        return Trace.concat(cpu_matmul_hp_blocked_chunks(n, b))
    return Trace.concat(cpu_matmul_equal_tiles_chunks(n, b))


def gen_loop_fusion(n: int, fused: bool) -> Trace:
    return Trace.concat(cpu_loop_fusion_chunks(n, fused))


def gen_kernel_fusion(n: int, fused: bool) -> list[list[ThreadTrace]]:
    """Returns one launch (fused) or two sequential launches (separate),
    each as a ThreadTrace list."""
    return [kernel_to_threads(k) for k in gpu_fusion_kernels(n, fused)]


def gen_array_merge(n: int, merged: bool, platform: str = "CPU"):
    if platform == "GPU":
        return kernel_to_threads(gpu_array_merge_kernel(n, merged))
    return Trace.concat(cpu_array_merge_chunks(n, merged))


def gen_texture_merge(n: int, merged: bool) -> list[ThreadTrace]:
    return kernel_to_threads(gpu_texture_merge_kernel(n, merged))


def gen_transpose_matmul(
    n: int, transposed: bool, platform: str = "CPU",
    with_overhead: bool = False,
):
    if platform == "GPU":
        main = kernel_to_threads(gpu_matmul_naive_kernel(n, transposed_b=transposed))
    else:
        main = Trace.concat(cpu_matmul_chunks(n, transposed_b=transposed))
    if with_overhead:
        overhead = (
            Trace.concat(cpu_transpose_overhead_chunks(n))
            if transposed else Trace.empty()
        )
        return main, overhead
    return main
