"""Independent fully-associative LRU miss-count oracle.

Implements the classic reuse-distance method directly on a recency list,
with no code shared with the set-associative engine, so the two can
cross-validate each other.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _reuse_distances(lines):
    """Distance of each access in the recency stack, -1 for first touches."""
    n = len(lines)
    dist = np.empty(n, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)  # most recent first
    depth = 0
    for i in range(n):
        x = lines[i]
        pos = -1
        for j in range(depth):
            if stack[j] == x:
                pos = j
                break
        dist[i] = pos
        if pos == -1:
            pos = depth
            depth += 1
        for j in range(pos, 0, -1):
            stack[j] = stack[j - 1]
        stack[0] = x
    return dist


def reuse_distances(line_addresses) -> np.ndarray:
    """Per-access LRU stack distance (number of distinct lines touched
    since the previous access to the same line); -1 for cold accesses."""
    lines = np.ascontiguousarray(line_addresses, dtype=np.int64)
    return _reuse_distances(lines)


def stack_distance_oracle(line_addresses, capacity_lines: int) -> int:
    """Exact miss count of a fully-associative LRU cache of
    ``capacity_lines`` lines."""
    if capacity_lines < 1:
        raise ValueError("capacity_lines must be >= 1")
    dist = reuse_distances(line_addresses)
    return int(np.count_nonzero((dist < 0) | (dist >= capacity_lines)))
