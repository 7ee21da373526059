"""GPU execution model: coalescing arithmetic, grid interleaving,
scratchpad elision, and the vectorized streaming path."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cachetrace.errors import RaggedTraceError, TileTooLargeError
from cachetrace.gpuexec import (
    ExecModelConfig,
    StepKernel,
    ThreadTrace,
    apply_scratchpad,
    coalesce_warp,
    interleave_grid,
    stream_transactions,
)
from cachetrace.trace import AccessKind, MemoryAccess


def warp_reads(addresses, size=4):
    return [
        MemoryAccess(address=a, size=size, kind=AccessKind.READ, thread_id=t)
        for t, a in enumerate(addresses)
    ]


# ----------------------------------------------------------------------
# coalesce_warp
# ----------------------------------------------------------------------

def test_consecutive_4b_reads_one_transaction():
    accs = warp_reads([0x1000 + 4 * t for t in range(32)])
    assert len(coalesce_warp(accs, 128)) == 1


def test_strided_8b_reads_32_transactions():
    accs = warp_reads([8 * 16 * t for t in range(32)], size=8)
    assert len(coalesce_warp(accs, 128)) == 32


def test_broadcast_one_transaction():
    accs = warp_reads([0x2000] * 32)
    tx = coalesce_warp(accs, 128)
    assert len(tx) == 1
    assert tx[0].contributing_threads == frozenset(range(32))


def test_consecutive_4b_reads_segment_32_four_transactions():
    accs = warp_reads([4 * t for t in range(32)])
    assert len(coalesce_warp(accs, 32)) == 4


def test_coalescing_disabled_one_per_access():
    accs = warp_reads([4 * t for t in range(32)])
    assert len(coalesce_warp(accs, 128, coalescing=False)) == 32


def test_transactions_sorted_and_aligned():
    accs = warp_reads([0x500, 0x100, 0x300], size=4)
    tx = coalesce_warp(accs, 128)
    bases = [t.segment_base for t in tx]
    assert bases == sorted(bases)
    assert all(b % 128 == 0 for b in bases)


@given(
    addrs=st.lists(st.integers(0, 2**16 // 8 - 1), min_size=1, max_size=32),
)
@settings(max_examples=80, deadline=None)
def test_coalescing_properties(addrs):
    accs = warp_reads([8 * a for a in addrs], size=8)
    tx128 = coalesce_warp(accs, 128)
    tx64 = coalesce_warp(accs, 64)
    # per-step transaction count within [1, warp_size]
    assert 1 <= len(tx128) <= 32
    # halving the segment never decreases the count, at most doubles it
    assert len(tx128) <= len(tx64) <= 2 * len(tx128)
    # no under-fetch: every distinct byte accessed lies in some segment
    assert len(tx128) * 128 >= len({a.address for a in accs}) * 8
    # every access is represented in exactly one transaction
    covered = sorted(
        t for tx in tx128 for t in tx.contributing_threads
    )
    assert covered == sorted(range(len(accs)))


# ----------------------------------------------------------------------
# interleave_grid
# ----------------------------------------------------------------------

def one_step_thread(tid, addr):
    return ThreadTrace(tid, [MemoryAccess(address=addr, size=8, thread_id=tid)])


def test_round_robin_order_two_warps_two_steps():
    threads = []
    for tid in range(64):
        warp = tid // 32
        threads.append(ThreadTrace(tid, [
            MemoryAccess(address=0x1000 * (1 + warp), size=8, thread_id=tid),
            MemoryAccess(address=0x1000 * (3 + warp), size=8, thread_id=tid),
        ]))
    cfg = ExecModelConfig(threads_per_block=32)
    tx = interleave_grid(threads, cfg)
    assert [t.segment_base for t in tx] == [0x1000, 0x2000, 0x3000, 0x4000]


def test_single_thread_stream_equals_own_trace():
    thread = ThreadTrace(0, [
        MemoryAccess(address=0, size=8),
        MemoryAccess(address=256, size=8),
    ])
    tx = interleave_grid([thread], ExecModelConfig(threads_per_block=32))
    assert [t.segment_base for t in tx] == [0, 256]


def test_64_consecutive_threads_one_step_four_transactions():
    threads = [one_step_thread(t, 8 * t) for t in range(64)]
    tx = interleave_grid(threads, ExecModelConfig(threads_per_block=64))
    assert len(tx) == 4  # 64 * 8B / 128B


def test_ragged_warp_rejected_without_padding():
    threads = [
        ThreadTrace(0, [MemoryAccess(address=0, size=8)] * 2),
        ThreadTrace(1, [MemoryAccess(address=8, size=8)]),
    ]
    with pytest.raises(RaggedTraceError):
        interleave_grid(threads, ExecModelConfig(threads_per_block=32), pad=False)
    # with padding (default) the shorter thread simply stops contributing
    tx = interleave_grid(threads, ExecModelConfig(threads_per_block=32))
    assert len(tx) == 2


def test_exec_config_validation():
    with pytest.raises(ValueError):
        ExecModelConfig(threads_per_block=33).validate()
    with pytest.raises(ValueError):
        ExecModelConfig(segment_size=96).validate()
    with pytest.raises(ValueError):
        ExecModelConfig(num_sms=0).validate()


# ----------------------------------------------------------------------
# apply_scratchpad
# ----------------------------------------------------------------------

def test_scratchpad_tile_loads_pass_through():
    loads = [MemoryAccess(address=8 * i, size=8) for i in range(16 * 16)]
    out = apply_scratchpad(loads, reuse_count=16, capacity_bytes=16 * 1024)
    assert out == loads  # 2048B of loads, reuses free


def test_scratchpad_overflow():
    loads = [MemoryAccess(address=8 * i, size=8) for i in range(49 * 128)]
    with pytest.raises(TileTooLargeError) as exc:
        apply_scratchpad(loads, reuse_count=1, capacity_bytes=48 * 1024)
    assert exc.value.required == 49 * 1024
    assert exc.value.available == 48 * 1024


def test_scratchpad_zero_reuse_identity():
    loads = [MemoryAccess(address=0, size=8)]
    assert apply_scratchpad(loads, 0, 1024) == loads


# ----------------------------------------------------------------------
# stream_transactions vs. interleave_grid
# ----------------------------------------------------------------------

def test_streaming_path_matches_object_path():
    num_threads, num_steps = 96, 3
    rng = np.random.default_rng(5)
    table = rng.integers(0, 4096, (num_threads, num_steps)) * np.int64(8)
    kinds = np.array([0, 0, 1], dtype=np.uint8)
    tags = np.array([0, 1, 2], dtype=np.uint8)

    kernel = StepKernel(
        num_threads, num_steps, kinds, tags,
        addr_fn=lambda tids, steps: table[np.ix_(tids, steps)].astype(np.uint64),
    )
    cfg = ExecModelConfig(threads_per_block=32)

    threads = [
        ThreadTrace(t, [
            MemoryAccess(
                address=int(table[t, s]), size=8,
                kind=AccessKind.WRITE if kinds[s] else AccessKind.READ,
                thread_id=t, array_tag=int(tags[s]),
            )
            for s in range(num_steps)
        ])
        for t in range(num_threads)
    ]
    expected = [
        (t.segment_base, t.kind is AccessKind.WRITE)
        for t in interleave_grid(threads, cfg)
    ]
    got = []
    for chunk, _sm in stream_transactions(kernel, cfg):
        got.extend(
            (int(a), bool(w)) for a, w in zip(chunk.addr, chunk.is_write)
        )
    assert got == expected
