"""Event-stream samplers: exact-distribution inversion and direct sampling.

All randomness comes from the SplitMix64 counter streams in `rng`, so a
stream is reproducible from (inputs, seed) alone and both backends of the
hot kernels yield the same events.  Draw k of an inversion stream uses
counter word k; the direct sampler gives each event its own derived
sub-stream ``hash64(seed, event_index)`` and consumes 2n-1 words from it
(n-1 for the input-row shuffle, one per photon placement).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ._kernels import active_kernels
from .distributions import OutputDistribution
from .rng import uniforms
from .unitaries import TransferMatrix

logger = logging.getLogger(__name__)

PROVENANCES = ("boson-exact", "boson-direct", "distinguishable", "uniform", "external")

_DIST_TO_STREAM = {
    "boson": "boson-exact",
    "distinguishable": "distinguishable",
    "uniform": "uniform",
    "empirical": "external",
}


@dataclass
class EventStream:
    """Ordered n-photon outcomes over m modes, with sampling provenance."""

    events: np.ndarray  # (N, n) int64, each row sorted ascending
    m: int
    n: int
    provenance: str
    seed: int | None = None
    retention_fraction: float | None = None

    def __post_init__(self):
        self.events = np.asarray(self.events, dtype=np.int64).reshape(-1, self.n)
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.events.size:
            if self.events.min() < 0 or self.events.max() >= self.m:
                raise ValueError("event mode index out of range")
            if self.n > 1 and (np.diff(self.events, axis=1) < 0).any():
                raise ValueError("event rows must be sorted")

    def __len__(self) -> int:
        return self.events.shape[0]


def sample_from_distribution(dist: OutputDistribution, count: int, seed: int) -> EventStream:
    """``count`` i.i.d. draws from an exact distribution.

    Inverse-transform sampling: cumulative sums searched with the
    uniform counter stream of ``seed`` (documented in FORMATS.md).
    """
    if not dist.renormalized:
        raise ValueError("distribution must be normalized before sampling")
    if count < 0:
        raise ValueError("count must be >= 0")
    outcomes = dist.outcome_array()
    cum = np.cumsum(dist.probs)
    u = uniforms(seed, count)
    idx = np.searchsorted(cum, u * cum[-1], side="right")
    idx = np.minimum(idx, len(cum) - 1)
    return EventStream(
        events=outcomes[idx],
        m=dist.m,
        n=dist.n,
        provenance=_DIST_TO_STREAM[dist.provenance],
        seed=seed,
    )


def clifford_clifford_sample(
    u,
    input_modes,
    count: int,
    seed: int,
    collision_free_only: bool = False,
) -> EventStream:
    """Exact boson-sampling draws without the full output distribution.

    Photons are placed one at a time; after a random shuffle of the input
    rows, photon k+1 lands in mode j with probability proportional to
    |perm([already-chosen columns | column j])|^2, the permanents coming
    from a Laplace expansion over the new column's minors.  Cost per
    event is O(n^2 2^n + m n^2) instead of the C(m, n) table.

    Conditional weights are squared moduli, hence never negative; a
    zero-mass conditional (impossible for a unitary transfer matrix)
    raises rather than being clamped.
    """
    if isinstance(u, TransferMatrix):
        u = u.matrix
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("clifford_clifford_sample needs a square transfer matrix")
    m = u.shape[0]
    inp = tuple(int(v) for v in input_modes)
    if any(not 0 <= j < m for j in inp):
        raise ValueError(f"input mode out of range for m = {m}: {inp}")
    if count < 0:
        raise ValueError("count must be >= 0")
    n = len(inp)
    bmat = np.ascontiguousarray(u[:, inp].T)  # row per photon
    if count == 0:
        events = np.zeros((0, n), dtype=np.int64)
    else:
        events = active_kernels().clifford_samples(bmat, count, seed)
    stream = EventStream(events=events, m=m, n=n, provenance="boson-direct", seed=seed)
    if collision_free_only:
        stream = filter_collision_free(stream)
    return stream


def filter_collision_free(stream: EventStream) -> EventStream:
    """Post-select events with at most one photon per mode.

    Order is preserved; the retained fraction is reported on the result.
    """
    ev = stream.events
    if stream.n > 1 and len(stream):
        mask = (np.diff(ev, axis=1) > 0).all(axis=1)
    else:
        mask = np.ones(len(stream), dtype=bool)
    kept = ev[mask]
    retention = float(mask.mean()) if len(stream) else 1.0
    return EventStream(
        events=kept,
        m=stream.m,
        n=stream.n,
        provenance=stream.provenance,
        seed=stream.seed,
        retention_fraction=retention,
    )
