"""Outcome-space enumeration, counting and ranking.

Modes are 0-indexed everywhere in memory; 1-indexed labels appear only in
files and CLI output.  An n-photon outcome over m modes is represented as
a sorted tuple of mode indices: strictly increasing for collision-free
outcomes, non-decreasing (repeats allowed) in general.  Lexicographic
order of these tuples is the canonical index order shared by every module
that builds or consumes probability vectors.
"""

from __future__ import annotations

import math
from itertools import combinations, combinations_with_replacement
from typing import Iterable, Iterator, Sequence

import numpy as np

INT64_MAX = (1 << 63) - 1


def _checked(value: int, what: str) -> int:
    if value > INT64_MAX:
        raise OverflowError(f"{what} = {value} exceeds 64-bit range")
    return value


def count_collision_free(m: int, n: int) -> int:
    """Number of collision-free outcomes, C(m, n)."""
    if n < 0 or m < 0:
        raise ValueError("m and n must be non-negative")
    if n > m:
        raise ValueError(f"n = {n} photons cannot be collision-free over m = {m} modes")
    return _checked(math.comb(m, n), "C(m, n)")


def count_full_space(m: int, n: int) -> int:
    """Bosonic Fock-space dimension, the multiset coefficient C(m+n-1, n)."""
    if m < 1 or n < 0:
        raise ValueError("need m >= 1 and n >= 0")
    return _checked(math.comb(m + n - 1, n), "C(m+n-1, n)")


def hypercube_node_count(m: int, n: int) -> int:
    """Distinguishable-photon product-space size, m**n."""
    if m < 1 or n < 0:
        raise ValueError("need m >= 1 and n >= 0")
    return _checked(m**n, "m**n")


def enumerate_collision_free(m: int, n: int, start_rank: int = 0) -> Iterator[tuple[int, ...]]:
    """All sorted n-subsets of [0, m) in lexicographic order (streaming).

    ``start_rank`` resumes mid-sequence, so disjoint rank ranges can be
    enumerated independently (and in parallel) without replaying the
    prefix.
    """
    if not 1 <= n <= m:
        raise ValueError(f"need 1 <= n <= m, got n={n}, m={m}")
    if start_rank == 0:
        return combinations(range(m), n)
    return _combinations_from(m, n, start_rank)


def _combinations_from(m: int, n: int, start_rank: int) -> Iterator[tuple[int, ...]]:
    modes = list(index_occupation(start_rank, m, n))
    while True:
        yield tuple(modes)
        # advance the rightmost position that still has headroom
        i = n - 1
        while i >= 0 and modes[i] == m - n + i:
            i -= 1
        if i < 0:
            return
        modes[i] += 1
        for k in range(i + 1, n):
            modes[k] = modes[k - 1] + 1


def enumerate_full_support(m: int, n: int) -> Iterator[tuple[int, ...]]:
    """All sorted n-multisets of [0, m) in lexicographic order (streaming)."""
    if m < 1 or n < 1:
        raise ValueError(f"need m >= 1 and n >= 1, got m={m}, n={n}")
    return combinations_with_replacement(range(m), n)


def collision_free_array(m: int, n: int) -> np.ndarray:
    """Materialized enumerate_collision_free as an (K, n) int64 array."""
    return np.fromiter(
        enumerate_collision_free(m, n),
        dtype=np.dtype((np.int64, n)),
        count=count_collision_free(m, n),
    )


def full_support_array(m: int, n: int) -> np.ndarray:
    return np.fromiter(
        enumerate_full_support(m, n),
        dtype=np.dtype((np.int64, n)),
        count=count_full_space(m, n),
    )


def _validate_collision_free(modes: Sequence[int], m: int, n: int) -> None:
    if len(modes) != n:
        raise ValueError(f"expected {n} modes, got {len(modes)}")
    prev = -1
    for v in modes:
        if not prev < v < m:
            raise ValueError(f"invalid collision-free occupation {tuple(modes)} for (m={m}, n={n})")
        prev = v


def occupation_index(modes: Sequence[int], m: int, n: int) -> int:
    """Lexicographic rank of a collision-free outcome in [0, C(m, n))."""
    _validate_collision_free(modes, m, n)
    rank = 0
    prev = -1
    for i, v in enumerate(modes):
        for c in range(prev + 1, v):
            rank += math.comb(m - 1 - c, n - 1 - i)
        prev = v
    return rank


def index_occupation(rank: int, m: int, n: int) -> tuple[int, ...]:
    """Inverse of occupation_index."""
    total = count_collision_free(m, n)
    if not 0 <= rank < total:
        raise ValueError(f"rank {rank} out of range [0, {total})")
    modes = []
    c = 0
    for i in range(n):
        while True:
            block = math.comb(m - 1 - c, n - 1 - i)
            if rank < block:
                break
            rank -= block
            c += 1
        modes.append(c)
        c += 1
    return tuple(modes)


def full_support_index(modes: Sequence[int], m: int, n: int) -> int:
    """Lexicographic rank of a sorted multiset outcome in [0, C(m+n-1, n)).

    Uses the stars-and-bars bijection (i_k -> i_k + k), which preserves
    lexicographic order.
    """
    if len(modes) != n:
        raise ValueError(f"expected {n} modes, got {len(modes)}")
    prev = -1
    for v in modes:
        if v < prev or not 0 <= v < m:
            raise ValueError(f"invalid occupation {tuple(modes)} for (m={m}, n={n})")
        prev = v
    shifted = [v + k for k, v in enumerate(modes)]
    return occupation_index(shifted, m + n - 1, n)


def full_index_occupation(rank: int, m: int, n: int) -> tuple[int, ...]:
    shifted = index_occupation(rank, m + n - 1, n)
    return tuple(v - k for k, v in enumerate(shifted))


def _rank_prefix_tables(m: int, n: int) -> np.ndarray:
    """tables[i, c] = number of rank units skipped when position i passes c.

    tables[i, c] = sum_{t < c} C(m-1-t, n-1-i); used by the vectorized
    rankers below via rank = sum_i tables[i, v_i] - tables[i, prev_i + 1].
    """
    tables = np.zeros((n, m + 1), dtype=np.int64)
    for i in range(n):
        acc = 0
        for c in range(m):
            tables[i, c] = acc
            acc += math.comb(m - 1 - c, n - 1 - i)
        tables[i, m] = acc
    return tables


def collision_free_ranks(events: np.ndarray, m: int, n: int) -> np.ndarray:
    """Vectorized occupation_index over an (N, n) array of sorted rows."""
    events = np.asarray(events, dtype=np.int64)
    if events.ndim != 2 or events.shape[1] != n:
        raise ValueError(f"expected an (N, {n}) event array")
    if events.size == 0:
        return np.zeros(0, dtype=np.int64)
    if events.min() < 0 or events.max() >= m:
        raise ValueError("event mode index out of range")
    if n > 1 and not (np.diff(events, axis=1) > 0).all():
        raise ValueError("events must be strictly increasing rows (collision-free)")
    tables = _rank_prefix_tables(m, n)
    prev = np.zeros(events.shape[0], dtype=np.int64)
    rank = np.zeros(events.shape[0], dtype=np.int64)
    for i in range(n):
        v = events[:, i]
        rank += tables[i, v] - tables[i, prev]
        prev = v + 1
    return rank


def full_support_ranks(events: np.ndarray, m: int, n: int) -> np.ndarray:
    """Vectorized full_support_index over an (N, n) array of sorted rows."""
    events = np.asarray(events, dtype=np.int64)
    if events.ndim != 2 or events.shape[1] != n:
        raise ValueError(f"expected an (N, {n}) event array")
    if events.size == 0:
        return np.zeros(0, dtype=np.int64)
    if n > 1 and (np.diff(events, axis=1) < 0).any():
        raise ValueError("events must be sorted rows")
    return collision_free_ranks(events + np.arange(n, dtype=np.int64), m + n - 1, n)


def occupation_vector(modes: Iterable[int], m: int) -> np.ndarray:
    """Length-m vector of per-mode counts for a mode tuple."""
    occ = np.zeros(m, dtype=np.int64)
    for v in modes:
        occ[v] += 1
    return occ


def modes_from_occupation(occ: Sequence[int]) -> tuple[int, ...]:
    """Sorted mode tuple from a length-m occupation vector."""
    out: list[int] = []
    for mode, c in enumerate(occ):
        if c < 0:
            raise ValueError("occupation counts must be non-negative")
        out.extend([mode] * int(c))
    return tuple(out)


def is_collision_free(modes: Sequence[int]) -> bool:
    return all(a < b for a, b in zip(modes, modes[1:]))


def multiplicity_factorial(modes: Sequence[int]) -> int:
    """Product of factorials of the per-mode multiplicities of a sorted tuple."""
    prod = 1
    run = 1
    for a, b in zip(modes, modes[1:]):
        if a == b:
            run += 1
            prod *= run
        else:
            run = 1
    return prod
