"""Exact output distributions and the metrics used to compare them.

Probabilities live in dense vectors in the canonical lexicographic
outcome order defined by `combinat`.  For indistinguishable photons the
probability of outcome T is |perm(A_ST)|^2 / (prod s_j! prod t_i!); a
distinguishable (classical) imposter replaces the amplitude permanent by
the permanent of the elementwise |U_ij|^2 matrix, perm(M_ST) / prod t_i!.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import combinat
from ._kernels import active_kernels
from .unitaries import TransferMatrix

FULL_SUPPORT_SUM_TOL = 1e-6

SUPPORTS = ("collision-free", "full")


@dataclass
class OutputDistribution:
    """Probability vector over n-photon outcomes in canonical index order."""

    m: int
    n: int
    support: str
    probs: np.ndarray
    provenance: str  # boson | distinguishable | uniform | empirical
    renormalized: bool
    support_mass: float | None = None  # pre-normalization probability mass

    def __post_init__(self):
        if self.support not in SUPPORTS:
            raise ValueError(f"unknown support {self.support!r}")
        self.probs = np.asarray(self.probs, dtype=np.float64)
        expected = support_size(self.m, self.n, self.support)
        if self.probs.shape != (expected,):
            raise ValueError(
                f"probability vector has length {self.probs.shape}, expected ({expected},)"
            )
        if (self.probs < 0).any():
            raise ValueError("probabilities must be non-negative")

    def outcome_array(self) -> np.ndarray:
        """(K, n) sorted mode tuples in index order."""
        if self.support == "collision-free":
            return combinat.collision_free_array(self.m, self.n)
        return combinat.full_support_array(self.m, self.n)

    def index_of(self, modes) -> int:
        if self.support == "collision-free":
            return combinat.occupation_index(modes, self.m, self.n)
        return combinat.full_support_index(modes, self.m, self.n)

    def probability(self, modes) -> float:
        return float(self.probs[self.index_of(modes)])


def support_size(m: int, n: int, support: str) -> int:
    if support == "collision-free":
        return combinat.count_collision_free(m, n)
    if support == "full":
        return combinat.count_full_space(m, n)
    raise ValueError(f"unknown support {support!r}")


def _resolve_columns(u, input_modes):
    """Normalize (transfer matrix, input) into per-photon columns.

    Returns (ucols, n, m, input_factorial) with ucols[j, k] the amplitude
    from photon k's input port to output mode j.  ``u`` is either an
    m x m matrix with ``input_modes`` selecting columns (repeats allowed,
    sorted), or an n x m sub-block whose rows are the input channels.
    """
    if isinstance(u, TransferMatrix):
        u = u.matrix
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2:
        raise ValueError("transfer matrix must be 2-D")
    if u.shape[0] == u.shape[1]:
        if input_modes is None:
            raise ValueError("input_modes is required with a square transfer matrix")
        inp = tuple(int(v) for v in input_modes)
        if any(b < a for a, b in zip(inp, inp[1:])):
            raise ValueError("input modes must be sorted")
        m = u.shape[0]
        if any(not 0 <= j < m for j in inp):
            raise ValueError(f"input mode out of range for m = {m}: {inp}")
        ucols = np.ascontiguousarray(u[:, inp])
        s_fact = combinat.multiplicity_factorial(inp)
        return ucols, len(inp), m, s_fact
    # n x m block, one row per (distinct) input channel
    if input_modes is not None:
        raise ValueError("input_modes must be omitted for an n x m sub-block")
    n, m = u.shape
    if n > m:
        raise ValueError(f"sub-block has more rows than modes: {u.shape}")
    return np.ascontiguousarray(u.T), n, m, 1


def _output_factorials(outcomes: np.ndarray, support: str) -> np.ndarray:
    if support == "collision-free":
        return np.ones(outcomes.shape[0])
    return np.array([combinat.multiplicity_factorial(tuple(row)) for row in outcomes], dtype=np.float64)


def _finalize(probs, m, n, support, provenance, renormalize, unitary_sum_check):
    mass = float(probs.sum())
    if renormalize:
        if support == "full" and unitary_sum_check and abs(mass - 1.0) > FULL_SUPPORT_SUM_TOL:
            raise ValueError(
                f"full-support probabilities sum to {mass:.12f}; "
                "transfer matrix is not unitary to tolerance"
            )
        if mass <= 0:
            raise ValueError("zero probability mass on the requested support")
        probs = probs / mass
    return OutputDistribution(
        m=m,
        n=n,
        support=support,
        probs=probs,
        provenance=provenance,
        renormalized=bool(renormalize),
        support_mass=mass,
    )


def boson_distribution(u, input_modes=None, support="collision-free", renormalize=True) -> OutputDistribution:
    """Exact n-photon output distribution for indistinguishable photons.

    With support="collision-free" the raw (sub-unit) mass is recorded in
    ``support_mass`` and, when ``renormalize`` is set, divided out --
    matching post-selected no-collision measurements.
    """
    ucols, n, m, s_fact = _resolve_columns(u, input_modes)
    outcomes = np.ascontiguousarray(support_outcomes(m, n, support))
    amps = active_kernels().outcome_permanents(ucols, outcomes)
    probs = (amps.real**2 + amps.imag**2) / (s_fact * _output_factorials(outcomes, support))
    return _finalize(probs, m, n, support, "boson", renormalize, unitary_sum_check=True)


def distinguishable_distribution(u, input_modes=None, support="collision-free", renormalize=True) -> OutputDistribution:
    """Classical-imposter distribution: independent single-photon transits."""
    ucols, n, m, _ = _resolve_columns(u, input_modes)
    intensities = (np.abs(ucols) ** 2).astype(np.complex128)
    outcomes = np.ascontiguousarray(support_outcomes(m, n, support))
    perms = active_kernels().outcome_permanents(intensities, outcomes)
    probs = np.maximum(perms.real, 0.0) / _output_factorials(outcomes, support)
    return _finalize(probs, m, n, support, "distinguishable", renormalize, unitary_sum_check=True)


def uniform_distribution(m: int, n: int, support="collision-free") -> OutputDistribution:
    """Equal probability on every outcome of the chosen support."""
    k = support_size(m, n, support)
    return OutputDistribution(
        m=m,
        n=n,
        support=support,
        probs=np.full(k, 1.0 / k),
        provenance="uniform",
        renormalized=True,
        support_mass=1.0,
    )


def support_outcomes(m: int, n: int, support: str) -> np.ndarray:
    if support == "collision-free":
        return combinat.collision_free_array(m, n)
    if support == "full":
        return combinat.full_support_array(m, n)
    raise ValueError(f"unknown support {support!r}")


def empirical_distribution(events, m: int, n: int, support="collision-free") -> OutputDistribution:
    """Normalized outcome frequencies of an event stream."""
    ev = np.asarray(getattr(events, "events", events), dtype=np.int64)
    if ev.ndim != 2 or ev.shape[0] == 0:
        raise ValueError("need a non-empty (N, n) event array")
    if support == "collision-free":
        ranks = combinat.collision_free_ranks(ev, m, n)
    else:
        ranks = combinat.full_support_ranks(ev, m, n)
    k = support_size(m, n, support)
    counts = np.bincount(ranks, minlength=k)
    return OutputDistribution(
        m=m,
        n=n,
        support=support,
        probs=counts / counts.sum(),
        provenance="empirical",
        renormalized=True,
        support_mass=1.0,
    )


def collision_free_mass(u, input_modes=None) -> float:
    """Total probability of no-collision outcomes (pre-normalization)."""
    return float(
        boson_distribution(u, input_modes, support="collision-free", renormalize=False).support_mass
    )


def _check_comparable(p: OutputDistribution, q: OutputDistribution):
    if (p.m, p.n, p.support) != (q.m, q.n, q.support):
        raise ValueError(
            f"distributions not comparable: ({p.m},{p.n},{p.support}) vs ({q.m},{q.n},{q.support})"
        )


def fidelity(p: OutputDistribution, q: OutputDistribution) -> float:
    """Classical (Bhattacharyya) fidelity sum_i sqrt(p_i q_i), in [0, 1]."""
    _check_comparable(p, q)
    return float(np.sqrt(p.probs * q.probs).sum())


def total_variation_distance(p: OutputDistribution, q: OutputDistribution) -> float:
    """(1/2) sum_i |p_i - q_i|, in [0, 1]."""
    _check_comparable(p, q)
    return float(0.5 * np.abs(p.probs - q.probs).sum())
