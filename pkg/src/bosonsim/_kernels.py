"""Hot numeric kernels with a numba backend and a pure-numpy fallback.

The two backends implement the same arithmetic in the same order, so a
fixed seed produces the same event streams on either one.  Selection:

* default: numba, JIT-compiled on first use;
* ``BOSONSIM_DISABLE_NUMBA=1`` in the environment (or numba missing):
  pure numpy/python fallback.

``benchmarks/bench_kernels.py`` times one against the other.
"""

from __future__ import annotations

import os
from typing import Callable, NamedTuple

import numpy as np

from .rng import GOLDEN, MASK64, hash64, mix64

ENV_DISABLE_NUMBA = "BOSONSIM_DISABLE_NUMBA"

_U53 = 1.0 / (1 << 53)


class KernelSet(NamedTuple):
    backend: str
    permanent: Callable[[np.ndarray], complex]
    outcome_permanents: Callable[[np.ndarray, np.ndarray], np.ndarray]
    clifford_samples: Callable[[np.ndarray, int, int], np.ndarray]


def numba_disabled_by_env() -> bool:
    return os.environ.get(ENV_DISABLE_NUMBA, "").strip().lower() in {"1", "true", "yes"}


def numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


# ---------------------------------------------------------------------------
# pure numpy / python backend
# ---------------------------------------------------------------------------

def _np_permanent(a: np.ndarray) -> complex:
    """Permanent by Ryser's formula with Gray-code subset updates.

    One column is added to or removed from the running row sums per subset
    step, giving O(2^n * n) arithmetic.
    """
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    row = np.zeros(n, dtype=np.complex128)
    total = 0.0 + 0.0j
    gray = 0
    sign = 1.0
    for k in range(1, 1 << n):
        new_gray = k ^ (k >> 1)
        bit = new_gray ^ gray
        j = bit.bit_length() - 1
        if new_gray & bit:
            row += a[:, j]
        else:
            row -= a[:, j]
        sign = -sign  # (-1)^|S|, |S| changes by one per Gray step
        prod = 1.0 + 0.0j
        for i in range(n):
            prod *= row[i]
        total += sign * prod
        gray = new_gray
    if n % 2:
        total = -total
    return total


def _np_outcome_permanents(ucols: np.ndarray, outcomes: np.ndarray) -> np.ndarray:
    """perm(ucols[rows, :]) for each row-tuple in ``outcomes`` (K x n)."""
    k_count, n = outcomes.shape
    out = np.empty(k_count, dtype=np.complex128)
    for t in range(k_count):
        out[t] = _np_permanent(ucols[outcomes[t]])
    return out


def _np_word(seed: int, index: int) -> int:
    return mix64((seed + (index + 1) * GOLDEN) & MASK64)


def _np_uniform(seed: int, index: int) -> float:
    return (_np_word(seed, index) >> 11) * _U53


def _pick_categorical(weights: np.ndarray, u: float) -> int:
    """Index of the first cumulative-weight crossing of ``u * total``.

    Linear left-to-right scan; zero-weight entries can never be chosen.
    """
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
    for j in range(m - 1, -1, -1):  # threshold == total after rounding
        if weights[j] > 0.0:
            return j
    return m - 1


def _np_clifford_samples(bmat: np.ndarray, count: int, seed: int, start: int = 0) -> np.ndarray:
    """Sequential-conditional boson sampling draws (see sampling module).

    Event k derives its own stream from hash64(seed, start + k), so
    disjoint index ranges concatenate into the same stream as one call.
    """
    n, m = bmat.shape
    out = np.empty((count, n), dtype=np.int64)
    perm_idx = np.empty(n, dtype=np.int64)
    modes = np.empty(n, dtype=np.int64)
    for s in range(count):
        sub_seed = hash64(seed, start + s)
        t = 0
        for i in range(n):
            perm_idx[i] = i
        for j in range(n - 1, 0, -1):
            u = _np_uniform(sub_seed, t)
            t += 1
            r = int(u * (j + 1))
            perm_idx[j], perm_idx[r] = perm_idx[r], perm_idx[j]
        p = bmat[perm_idx]
        w = p[0].real ** 2 + p[0].imag ** 2
        u = _np_uniform(sub_seed, t)
        t += 1
        modes[0] = _pick_categorical(w, u)
        for k in range(1, n):
            # Laplace expansion: sp[i] = perm of rows 0..k minus row i,
            # restricted to the k modes already chosen
            chosen = p[: k + 1, modes[:k]]
            sp = np.empty(k + 1, dtype=np.complex128)
            keep = np.empty((k, k), dtype=np.complex128)
            for i in range(k + 1):
                keep[:i] = chosen[:i]
                keep[i:] = chosen[i + 1:]
                sp[i] = _np_permanent(keep)
            amp = (sp[:, None] * p[: k + 1]).sum(axis=0)
            w = amp.real ** 2 + amp.imag ** 2
            u = _np_uniform(sub_seed, t)
            t += 1
            modes[k] = _pick_categorical(w, u)
        out[s] = np.sort(modes[:n])
    return out


def numpy_kernels() -> KernelSet:
    return KernelSet(
        backend="numpy",
        permanent=_np_permanent,
        outcome_permanents=_np_outcome_permanents,
        clifford_samples=_np_clifford_samples,
    )


def numba_kernels() -> KernelSet:
    from . import _kernels_numba as knb

    return KernelSet(
        backend="numba",
        permanent=knb.permanent,
        outcome_permanents=knb.outcome_permanents,
        clifford_samples=knb.clifford_samples,
    )


_ACTIVE: KernelSet | None = None


def active_kernels() -> KernelSet:
    """Kernel set selected by the environment, resolved once per process."""
    global _ACTIVE
    if _ACTIVE is None:
        if not numba_disabled_by_env() and numba_available():
            _ACTIVE = numba_kernels()
        else:
            _ACTIVE = numpy_kernels()
    return _ACTIVE
