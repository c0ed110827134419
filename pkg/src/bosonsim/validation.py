"""Certification counters that separate a boson sampler from imposters.

Two per-event discriminators, each accumulated into a running counter:

* row-norm estimator (against the uniform imposter): for event k with
  scattering submatrix A, P_k = prod_i sum_j |A_ij|^2; the counter gains
  one when P_k > (n/m)^n and loses one otherwise.

* likelihood ratio (against the distinguishable imposter): for event k,
  L_k = p_k / q_k with p from the indistinguishable and q from the
  distinguishable model, both on the same (renormalized) support, and the
  counter moves by {0, +1, +2, -1, -2} through a five-way bracket of L_k.

A genuine boson sampler drives both counters up; the imposters drive them
down.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import combinat
from .distributions import OutputDistribution
from .sampling import EventStream
from .unitaries import TransferMatrix

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-300  # log-space underflow floor


@dataclass
class CounterTrace:
    """Counter value after each event, plus the test that produced it."""

    values: np.ndarray  # int64, one entry per event
    test_kind: str      # "rne" | "likelihood-ratio"
    a1: float | None = None
    a2: float | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int64)

    @property
    def final(self) -> int:
        return int(self.values[-1]) if self.values.size else 0


def row_norm_estimator(a: np.ndarray) -> float:
    """prod_i sum_j |A_ij|^2 over the rows of a square submatrix."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"row_norm_estimator needs a square matrix, got {a.shape}")
    return float(np.prod(np.sum(np.abs(a) ** 2, axis=1)))


def rne_counter(events: EventStream, u, input_modes) -> CounterTrace:
    """Row-norm-estimator trace over an event stream.

    The +1 branch requires P_k strictly above (n/m)^n; equality
    decrements.  Row norms depend only on the event's output modes, so
    they are precomputed per mode and gathered per event.
    """
    if isinstance(u, TransferMatrix):
        u = u.matrix
    u = np.asarray(u, dtype=np.complex128)
    inp = tuple(int(v) for v in input_modes)
    m = u.shape[0]
    n = len(inp)
    if events.n != n or events.m != m:
        raise ValueError(
            f"event stream is ({events.m}, {events.n}), expected ({m}, {n})"
        )
    if len(events) == 0:
        return CounterTrace(values=np.zeros(0, dtype=np.int64), test_kind="rne")
    row_norms = np.sum(np.abs(u[:, inp]) ** 2, axis=1)  # per output mode
    p_k = np.prod(row_norms[events.events], axis=1)
    steps = np.where(p_k > (n / m) ** n, 1, -1)
    return CounterTrace(values=np.cumsum(steps), test_kind="rne")


def likelihood_ratio_step(l_k: float, a1: float, a2: float) -> int:
    """Counter update for one likelihood ratio, first matching branch wins.

    Branch order: [a1 < L < 1/a1] -> 0, [1/a1 <= L < a2] -> +1,
    [L >= a2] -> +2, [1/a2 <= L < a1] -> -1, [L <= 1/a2] -> -2.  The
    brackets touch at their printed endpoints (and leave L == a1
    unmatched), so ties resolve to the earliest branch and anything
    falling through gets the dead-zone update 0.
    """
    if l_k < 0:
        raise ValueError("likelihood ratio must be non-negative")
    if a1 < l_k < 1.0 / a1:
        return 0
    if 1.0 / a1 <= l_k < a2:
        return 1
    if l_k >= a2:
        return 2
    if 1.0 / a2 <= l_k < a1:
        return -1
    if l_k <= 1.0 / a2:
        return -2
    return 0


def likelihood_ratio_counter(
    events: EventStream,
    p_ind: OutputDistribution,
    q_dis: OutputDistribution,
    a1: float = 0.9,
    a2: float = 1.5,
) -> CounterTrace:
    """Likelihood-ratio trace over an event stream.

    Both distributions must be normalized on the same support containing
    every event.  Ratios are formed in log space with a 1e-300 floor; an
    event with q = 0 < p is treated as an infinite ratio (+2 branch) and
    logged, while p = q = 0 marks an impossible event and raises.
    """
    if not a1 < 1.0 < a2:
        raise ValueError(f"need a1 < 1 < a2, got a1={a1}, a2={a2}")
    if (p_ind.m, p_ind.n, p_ind.support) != (q_dis.m, q_dis.n, q_dis.support):
        raise ValueError("distributions live on different supports")
    if (events.m, events.n) != (p_ind.m, p_ind.n):
        raise ValueError("event stream does not match the distributions")
    if len(events) == 0:
        return CounterTrace(np.zeros(0, dtype=np.int64), "likelihood-ratio", a1, a2)
    if p_ind.support == "collision-free":
        ranks = combinat.collision_free_ranks(events.events, events.m, events.n)
    else:
        ranks = combinat.full_support_ranks(events.events, events.m, events.n)
    p = p_ind.probs[ranks]
    q = q_dis.probs[ranks]
    impossible = (p <= 0) & (q <= 0)
    if impossible.any():
        k = int(np.argmax(impossible))
        raise ValueError(
            f"event {k} = {tuple(events.events[k])} has zero probability in both models"
        )
    infinite = (q <= 0) & (p > 0)
    if infinite.any():
        logger.warning(
            "%d events with q=0 < p treated as infinite likelihood ratio (+2)",
            int(infinite.sum()),
        )
    l_k = np.exp(np.log(np.maximum(p, PROB_FLOOR)) - np.log(np.maximum(q, PROB_FLOOR)))
    l_k[infinite] = np.inf
    steps = np.fromiter(
        (likelihood_ratio_step(float(v), a1, a2) for v in l_k),
        dtype=np.int64,
        count=len(l_k),
    )
    return CounterTrace(np.cumsum(steps), "likelihood-ratio", a1, a2)
