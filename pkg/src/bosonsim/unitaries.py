"""Transfer-matrix generation: Haar draws and the grid-graph device model.

The device model mimics a multimode waveguide chip whose cross section is
a 2-D grid of coupled sites: propagation is split into L segments, each
with its own random nearest-neighbour couplings and on-site detunings,
and the segment evolutions multiply into one effective unitary.  With
enough segments the element statistics become indistinguishable from a
Haar-random unitary, which `haar_convergence_stats` quantifies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .rng import gaussian_generator, hash64

UNITARITY_TOL = 1e-8


def unitarity_defect(u: np.ndarray) -> float:
    """max |(U^dag U - I)_ij|; zero for an exactly unitary matrix."""
    u = np.asarray(u)
    m = u.shape[0]
    return float(np.max(np.abs(u.conj().T @ u - np.eye(m))))


@dataclass(frozen=True)
class TransferMatrix:
    """An m x m scattering matrix with unitarity metadata."""

    matrix: np.ndarray
    provenance: str  # "haar" | "grid-device" | "file"
    unitarity_defect: float = field(default=-1.0)

    def __post_init__(self):
        mat = np.ascontiguousarray(self.matrix, dtype=np.complex128)
        object.__setattr__(self, "matrix", mat)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"transfer matrix must be square, got {mat.shape}")
        if self.unitarity_defect < 0:
            object.__setattr__(self, "unitarity_defect", unitarity_defect(mat))
        if self.provenance in ("haar", "grid-device") and self.unitarity_defect > UNITARITY_TOL:
            raise ValueError(
                f"{self.provenance} matrix has unitarity defect "
                f"{self.unitarity_defect:.3e} > {UNITARITY_TOL:.0e}"
            )

    @property
    def m(self) -> int:
        return self.matrix.shape[0]


def haar_unitary(m: int, seed: int) -> TransferMatrix:
    """Haar-measure random unitary, deterministic for a fixed seed.

    Complex Ginibre matrix, QR orthonormalization, then the R diagonal is
    rotated onto the positive reals so the decomposition (and hence the
    measure) is unique.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = gaussian_generator(seed)
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return TransferMatrix(q, "haar")


@dataclass(frozen=True)
class GridDeviceSpec:
    """Randomized segmented coupled-grid device.

    coupling_range is in radians of accumulated coupling per segment,
    phase_range in radians of on-site detuning per segment.
    """

    grid_rows: int = 7
    grid_cols: int = 5
    segments: int = 20
    coupling_range: tuple[float, float] = (0.5, 2.0)
    phase_range: tuple[float, float] = (0.0, 2.0 * math.pi)
    seed: int = 0

    def __post_init__(self):
        if self.grid_rows < 1 or self.grid_cols < 1:
            raise ValueError("grid dimensions must be >= 1")
        if self.segments < 1:
            raise ValueError("need at least one segment")
        for name in ("coupling_range", "phase_range"):
            lo, hi = getattr(self, name)
            if hi < lo:
                raise ValueError(f"{name} must be a (lo, hi) interval")

    @property
    def m(self) -> int:
        return self.grid_rows * self.grid_cols


def grid_edges(rows: int, cols: int) -> list[tuple[int, int]]:
    """Undirected 4-neighbour edges of a rows x cols grid, row-major sites.

    Deterministic order: for each site, the rightward edge then the
    downward edge.  Count is rows*(cols-1) + cols*(rows-1).
    """
    edges = []
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            if c + 1 < cols:
                edges.append((i, i + 1))
            if r + 1 < rows:
                edges.append((i, i + cols))
    return edges


def grid_hamiltonian(spec: GridDeviceSpec, segment_index: int) -> np.ndarray:
    """Hermitian coupled-mode matrix of one device segment.

    Real couplings on grid-adjacent pairs drawn from coupling_range,
    real detunings on the diagonal drawn from phase_range; deterministic
    per (spec.seed, segment_index).
    """
    if not 0 <= segment_index < spec.segments:
        raise ValueError(f"segment_index {segment_index} out of range [0, {spec.segments})")
    rng = gaussian_generator(hash64(spec.seed, segment_index))
    m = spec.m
    h = np.zeros((m, m), dtype=np.complex128)
    lo, hi = spec.coupling_range
    for i, j in grid_edges(spec.grid_rows, spec.grid_cols):
        c = rng.uniform(lo, hi)
        h[i, j] = c
        h[j, i] = c
    lo, hi = spec.phase_range
    h[np.diag_indices(m)] = rng.uniform(lo, hi, size=m)
    return h


def device_unitary(spec: GridDeviceSpec) -> TransferMatrix:
    """Product of segment evolutions exp(-i H_k), k = 1..L.

    Each exponential is taken through the eigendecomposition of the
    Hermitian H_k, which keeps every factor unitary to solver precision.
    Segment 1 acts first: U = exp(-i H_L) @ ... @ exp(-i H_1).
    """
    m = spec.m
    u = np.eye(m, dtype=np.complex128)
    for k in range(spec.segments):
        h = grid_hamiltonian(spec, k)
        w, v = np.linalg.eigh(h)
        if not np.isfinite(w).all():
            raise ArithmeticError(f"eigendecomposition failed for segment {k}")
        u = (v * np.exp(-1j * w)) @ v.conj().T @ u
    return TransferMatrix(u, "grid-device")


def haar_ensemble(m: int, size: int, seed: int) -> list[TransferMatrix]:
    """`size` independent Haar draws with per-draw derived seeds."""
    return [haar_unitary(m, hash64(seed, k)) for k in range(size)]


def device_ensemble(spec: GridDeviceSpec, size: int) -> list[TransferMatrix]:
    """`size` independent devices differing only in their derived seeds."""
    return [
        device_unitary(
            GridDeviceSpec(
                grid_rows=spec.grid_rows,
                grid_cols=spec.grid_cols,
                segments=spec.segments,
                coupling_range=spec.coupling_range,
                phase_range=spec.phase_range,
                seed=hash64(spec.seed, k),
            )
        )
        for k in range(size)
    ]


@dataclass(frozen=True)
class EnsembleStats:
    """Element statistics of a unitary ensemble vs. the Haar prediction."""

    m: int
    size: int
    mean_sq_modulus: float        # mean |U_ij|^2 over everything (Haar: 1/m)
    var_sq_modulus: float
    elementwise_mean: np.ndarray  # (m, m) per-position mean of |U_ij|^2
    ks_statistic: float           # KS of m|U_ij|^2 against Exp(1)


def haar_convergence_stats(ensemble: Sequence[TransferMatrix | np.ndarray]) -> EnsembleStats:
    """Compare an ensemble's element-modulus law against the Haar law.

    For a Haar unitary the rescaled intensities m|U_ij|^2 follow Exp(1)
    up to O(1/m) corrections; the KS statistic against Exp(1) is the
    convergence figure of merit.
    """
    if len(ensemble) == 0:
        raise ValueError("empty ensemble")
    mats = [t.matrix if isinstance(t, TransferMatrix) else np.asarray(t) for t in ensemble]
    m = mats[0].shape[0]
    if any(a.shape != (m, m) for a in mats):
        raise ValueError("ensemble contains mixed dimensions")
    sq = np.stack([np.abs(a) ** 2 for a in mats])
    rescaled = (m * sq).ravel()
    ks = stats.kstest(rescaled, "expon").statistic
    return EnsembleStats(
        m=m,
        size=len(mats),
        mean_sq_modulus=float(sq.mean()),
        var_sq_modulus=float(sq.var()),
        elementwise_mean=sq.mean(axis=0),
        ks_statistic=float(ks),
    )
