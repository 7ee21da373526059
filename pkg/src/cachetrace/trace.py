"""Memory access records and bulk trace containers.

Single accesses are plain dataclasses; bulk traces are kept as parallel
numpy columns so generators and the simulation engine can stay vectorized.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator

import numpy as np

_VALID_SIZES = (1, 2, 4, 8, 16)


class AccessKind(Enum):
    READ = 0
    WRITE = 1


@dataclass(frozen=True)
class MemoryAccess:
    """One naturally aligned byte-addressed read or write."""

    address: int
    size: int = 8
    kind: AccessKind = AccessKind.READ
    thread_id: int = 0
    array_tag: int = 0

    def __post_init__(self):
        if self.size not in _VALID_SIZES:
            raise ValueError(f"size must be one of {_VALID_SIZES}, got {self.size}")
        if self.address % self.size != 0:
            raise ValueError(
                f"address {self.address:#x} not aligned to size {self.size}"
            )
        if self.address < 0 or self.address >= 2**64:
            raise ValueError("address outside 64-bit space")
        if self.thread_id < 0:
            raise ValueError("thread_id must be non-negative")

    @property
    def is_write(self) -> bool:
        return self.kind is AccessKind.WRITE


@dataclass
class Trace:
    """An ordered access sequence stored column-wise.

    ``size`` is uniform per trace (element accesses only); the default of
    8 bytes matches the element width used by every built-in workload.
    """

    addr: np.ndarray          # uint64 byte addresses
    is_write: np.ndarray      # uint8, 0 = read, 1 = write
    tag: np.ndarray           # uint8 array identity
    thread: np.ndarray = field(default=None)  # int32, 0 for CPU traces
    size: int = 8

    def __post_init__(self):
        self.addr = np.ascontiguousarray(self.addr, dtype=np.uint64)
        self.is_write = np.ascontiguousarray(self.is_write, dtype=np.uint8)
        self.tag = np.ascontiguousarray(self.tag, dtype=np.uint8)
        if self.thread is None:
            self.thread = np.zeros(len(self.addr), dtype=np.int32)
        else:
            self.thread = np.ascontiguousarray(self.thread, dtype=np.int32)
        n = len(self.addr)
        if not (len(self.is_write) == len(self.tag) == len(self.thread) == n):
            raise ValueError("trace columns have unequal lengths")

    def __len__(self) -> int:
        return len(self.addr)

    @classmethod
    def empty(cls) -> "Trace":
        z = np.zeros(0, dtype=np.uint64)
        return cls(z, z.astype(np.uint8), z.astype(np.uint8))

    @classmethod
    def from_accesses(cls, accesses: Iterable[MemoryAccess]) -> "Trace":
        accesses = list(accesses)
        addr = np.array([a.address for a in accesses], dtype=np.uint64)
        wr = np.array([a.is_write for a in accesses], dtype=np.uint8)
        tag = np.array([a.array_tag for a in accesses], dtype=np.uint8)
        thr = np.array([a.thread_id for a in accesses], dtype=np.int32)
        size = accesses[0].size if accesses else 8
        return cls(addr, wr, tag, thr, size=size)

    def to_accesses(self) -> list[MemoryAccess]:
        return [
            MemoryAccess(
                address=int(self.addr[i]),
                size=self.size,
                kind=AccessKind.WRITE if self.is_write[i] else AccessKind.READ,
                thread_id=int(self.thread[i]),
                array_tag=int(self.tag[i]),
            )
            for i in range(len(self))
        ]

    @classmethod
    def concat(cls, chunks: Iterable["Trace"]) -> "Trace":
        chunks = list(chunks)
        if not chunks:
            return cls.empty()
        return cls(
            np.concatenate([c.addr for c in chunks]),
            np.concatenate([c.is_write for c in chunks]),
            np.concatenate([c.tag for c in chunks]),
            np.concatenate([c.thread for c in chunks]),
            size=chunks[0].size,
        )

    def dump(self, fh) -> None:
        """Write the ASCII dump format: one access per line,
        ``<thread_id> <R|W> <hex address> <size> <array_tag>``."""
        for i in range(len(self)):
            kind = "W" if self.is_write[i] else "R"
            fh.write(
                f"{self.thread[i]} {kind} {self.addr[i]:#x} {self.size} {self.tag[i]}\n"
            )


def iter_chunks(trace_iter: Iterable[Trace]) -> Iterator[Trace]:
    """Pass-through helper so callers can treat a single Trace or an
    iterable of chunks uniformly."""
    if isinstance(trace_iter, Trace):
        yield trace_iter
    else:
        yield from trace_iter
