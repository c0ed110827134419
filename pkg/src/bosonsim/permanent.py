"""Matrix permanents and scattering submatrices.

The permanent is the complexity kernel of everything downstream: the
transition amplitude between photon configurations is the permanent of a
submatrix of the transfer matrix, built by repeating columns per input
occupation and rows per output occupation.
"""

from __future__ import annotations

from itertools import permutations
from typing import Sequence

import numpy as np

from ._kernels import active_kernels

NAIVE_MAX_N = 7
RYSER_MAX_N = 30  # 2**n subset sweep; hard cap, not a tuning knob


def _as_square(a: np.ndarray, max_n: int, who: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{who} requires a square matrix, got shape {a.shape}")
    if a.shape[0] > max_n:
        raise ValueError(f"{who} supports n <= {max_n}, got n = {a.shape[0]}")
    if a.size and not np.isfinite(a).all():
        raise ValueError("matrix entries must be finite")
    return a


def permanent_naive(a: np.ndarray) -> complex:
    """Permanent by direct summation over all n! permutations.

    Test oracle only; n is capped at 7 to keep the factorial cost sane.
    """
    a = _as_square(a, NAIVE_MAX_N, "permanent_naive")
    n = a.shape[0]
    total = 0.0 + 0.0j
    for sigma in permutations(range(n)):
        prod = 1.0 + 0.0j
        for i, j in enumerate(sigma):
            prod *= a[i, j]
        total += prod
    return complex(total)


def permanent_exact(a: np.ndarray) -> complex:
    """Permanent via Ryser's formula with Gray-code subset updates.

    O(2^n * n) arithmetic in double precision; agrees with
    permanent_naive to better than 1e-10 relative wherever both run.
    """
    a = _as_square(a, RYSER_MAX_N, "permanent_exact")
    return complex(active_kernels().permanent(np.ascontiguousarray(a)))


def scattering_submatrix(
    u: np.ndarray,
    input_modes: Sequence[int],
    output_modes: Sequence[int],
) -> np.ndarray:
    """n x n submatrix whose permanent is the input -> output amplitude.

    Column j of ``u`` enters once per photon in input mode j; row i enters
    once per photon in output mode i.  Both mode lists may contain
    repeats (sorted, general occupation form).
    """
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2:
        raise ValueError("transfer matrix must be 2-D")
    rows, cols = u.shape
    inp = list(input_modes)
    out = list(output_modes)
    if len(inp) != len(out):
        raise ValueError(
            f"photon number mismatch: {len(inp)} input vs {len(out)} output"
        )
    if any(not 0 <= j < cols for j in inp):
        raise ValueError(f"input mode out of range for {cols} columns: {inp}")
    if any(not 0 <= i < rows for i in out):
        raise ValueError(f"output mode out of range for {rows} rows: {out}")
    return u[np.ix_(out, inp)].copy()
