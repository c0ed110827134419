"""numba implementations of the hot kernels.

Arithmetic mirrors the numpy fallback in `_kernels` operation for
operation (same summation orders, same RNG word consumption), so both
backends produce identical results for identical seeds.  Only imported
when the numba backend is selected.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
U64_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
U64_MIX2 = np.uint64(0x94D049BB133111EB)
U64_1 = np.uint64(1)
U64_11 = np.uint64(11)
U64_27 = np.uint64(27)
U64_30 = np.uint64(30)
U64_31 = np.uint64(31)

_U53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> U64_30)) * U64_MIX1
    z = (z ^ (z >> U64_27)) * U64_MIX2
    return z ^ (z >> U64_31)


@njit(cache=True)
def _uniform(seed, index):
    w = _mix64(seed + (index + U64_1) * U64_GOLDEN)
    return np.float64(w >> U64_11) * _U53


@njit(cache=True)
def _hash64(a, b):
    return _mix64(_mix64(a + U64_GOLDEN) + b * U64_MIX1)


@njit(cache=True)
def _ryser(a, row):
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    for i in range(n):
        row[i] = 0.0 + 0.0j
    total = 0.0 + 0.0j
    gray = 0
    sign = 1.0
    for k in range(1, 1 << n):
        new_gray = k ^ (k >> 1)
        bit = new_gray ^ gray
        j = 0
        b = bit
        while b > 1:
            b >>= 1
            j += 1
        if new_gray & bit:
            for i in range(n):
                row[i] += a[i, j]
        else:
            for i in range(n):
                row[i] -= a[i, j]
        sign = -sign
        prod = 1.0 + 0.0j
        for i in range(n):
            prod *= row[i]
        total += sign * prod
        gray = new_gray
    if n % 2:
        total = -total
    return total


@njit(cache=True)
def _permanent(a):
    row = np.empty(a.shape[0], dtype=np.complex128)
    return _ryser(a, row)


def permanent(a: np.ndarray) -> complex:
    return complex(_permanent(np.ascontiguousarray(a, dtype=np.complex128)))


@njit(cache=True)
def _outcome_permanents(ucols, outcomes):
    k_count, n = outcomes.shape
    out = np.empty(k_count, dtype=np.complex128)
    a = np.empty((n, n), dtype=np.complex128)
    row = np.empty(n, dtype=np.complex128)
    for t in range(k_count):
        for i in range(n):
            r = outcomes[t, i]
            for c in range(n):
                a[i, c] = ucols[r, c]
        out[t] = _ryser(a, row)
    return out


def outcome_permanents(ucols: np.ndarray, outcomes: np.ndarray) -> np.ndarray:
    return _outcome_permanents(
        np.ascontiguousarray(ucols, dtype=np.complex128),
        np.ascontiguousarray(outcomes, dtype=np.int64),
    )


@njit(cache=True)
def _pick_categorical(weights, u):
    total = 0.0
    m = weights.shape[0]
    for j in range(m):
        total += weights[j]
    if not total > 0.0:
        raise ValueError("conditional probabilities sum to zero")
    threshold = u * total
    acc = 0.0
    for j in range(m):
        acc += weights[j]
        if threshold < acc:
            return j
    for j in range(m - 1, -1, -1):
        if weights[j] > 0.0:
            return j
    return m - 1


@njit(cache=True)
def _clifford_samples(bmat, count, seed, start):
    n, m = bmat.shape
    out = np.empty((count, n), dtype=np.int64)
    perm_idx = np.empty(n, dtype=np.int64)
    modes = np.empty(n, dtype=np.int64)
    p = np.empty((n, m), dtype=np.complex128)
    w = np.empty(m, dtype=np.float64)
    amp = np.empty(m, dtype=np.complex128)
    for s in range(count):
        sub_seed = _hash64(seed, np.uint64(start + s))
        t = np.uint64(0)
        for i in range(n):
            perm_idx[i] = i
        for j in range(n - 1, 0, -1):
            u = _uniform(sub_seed, t)
            t += U64_1
            r = int(u * (j + 1))
            tmp = perm_idx[j]
            perm_idx[j] = perm_idx[r]
            perm_idx[r] = tmp
        for i in range(n):
            src = perm_idx[i]
            for j in range(m):
                p[i, j] = bmat[src, j]
        for j in range(m):
            w[j] = p[0, j].real ** 2 + p[0, j].imag ** 2
        u = _uniform(sub_seed, t)
        t += U64_1
        modes[0] = _pick_categorical(w, u)
        for k in range(1, n):
            sp = np.empty(k + 1, dtype=np.complex128)
            keep = np.empty((k, k), dtype=np.complex128)
            row = np.empty(k, dtype=np.complex128)
            for i in range(k + 1):
                for ii in range(k + 1):
                    if ii == i:
                        continue
                    dst = ii if ii < i else ii - 1
                    for c in range(k):
                        keep[dst, c] = p[ii, modes[c]]
                sp[i] = _ryser(keep, row)
            for j in range(m):
                acc = 0.0 + 0.0j
                for i in range(k + 1):
                    acc += sp[i] * p[i, j]
                amp[j] = acc
            for j in range(m):
                w[j] = amp[j].real ** 2 + amp[j].imag ** 2
            u = _uniform(sub_seed, t)
            t += U64_1
            modes[k] = _pick_categorical(w, u)
        out[s] = np.sort(modes)
    return out


def clifford_samples(bmat: np.ndarray, count: int, seed: int, start: int = 0) -> np.ndarray:
    return _clifford_samples(
        np.ascontiguousarray(bmat, dtype=np.complex128),
        np.int64(count),
        np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
        np.int64(start),
    )
