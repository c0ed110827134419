"""Transfer-matrix characterization from simulated interference data.

The probed sub-block B (one row per injected port, one column per output
mode) is recovered in two stages, mirroring how an interferometer is
measured in practice:

* moduli |B| from single-photon output intensities;
* phases from two-photon HOM visibilities.  With the gauge fixed so the
  first probed row and first output column are real, the visibility taken
  between probe rows (0, b) at outputs (0, j) yields cos of the remaining
  phase at (b, j); its sign is settled by the consistency of additional
  visibilities that couple neighbouring phases.

Since every visibility only constrains cosines of phase differences, the
data determine B up to one global complex conjugation on top of the usual
per-row/per-column phase freedom; the sign convention picked here seeds
each consistency component positive.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .rng import gaussian_generator, hash64
from .unitaries import TransferMatrix

logger = logging.getLogger(__name__)


class UndefinedVisibilityError(ValueError):
    """Classical coincidence rate is zero; the visibility has no value."""


class UnderdeterminedError(ValueError):
    """The visibility set does not pin down every phase."""

    def __init__(self, message: str, missing=()):
        super().__init__(message)
        self.missing = tuple(missing)


@dataclass(frozen=True)
class VisibilityRecord:
    """One HOM visibility: inputs (k, l), outputs (i, j), all 0-indexed ports."""

    in_k: int
    in_l: int
    out_i: int
    out_j: int
    value: float


@dataclass
class CharacterizationDataset:
    probe_inputs: tuple[int, ...]
    amplitudes: np.ndarray  # (n, m), row a = probe a
    visibilities: list[VisibilityRecord]
    noise_sigma: float = 0.0

    def __post_init__(self):
        self.probe_inputs = tuple(int(v) for v in self.probe_inputs)
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.float64)
        if self.amplitudes.ndim != 2 or self.amplitudes.shape[0] != len(self.probe_inputs):
            raise ValueError("amplitudes must be (n_probes, m)")
        if (self.amplitudes < 0).any():
            raise ValueError("amplitudes must be non-negative")
        for rec in self.visibilities:
            if not -1.0 <= rec.value <= 1.0:
                raise ValueError(f"visibility out of [-1, 1]: {rec}")


def _matrix(u) -> np.ndarray:
    if isinstance(u, TransferMatrix):
        u = u.matrix
    return np.asarray(u, dtype=np.complex128)


def simulate_amplitudes(u, probe_inputs, noise_sigma: float = 0.0, seed: int = 0) -> np.ndarray:
    """|U[j, p]| for each probed input p and output j, optionally noisy.

    Gaussian noise of scale ``noise_sigma`` is added to the intensities
    (clipped at zero) before the square root, as an intensity measurement
    would see it.
    """
    u = _matrix(u)
    probes = tuple(int(p) for p in probe_inputs)
    if any(not 0 <= p < u.shape[1] for p in probes):
        raise ValueError(f"probe input out of range: {probes}")
    intensities = np.abs(u[:, probes].T) ** 2
    if noise_sigma > 0:
        rng = gaussian_generator(hash64(seed, 0))
        intensities = np.clip(intensities + noise_sigma * rng.standard_normal(intensities.shape), 0.0, None)
    return np.sqrt(intensities)


def simulate_hom_visibility(u, input_pair, output_pair) -> float:
    """Two-photon HOM visibility (C_dist - C_indist) / C_dist.

    C_indist = |U_ik U_jl + U_il U_jk|^2 is the coincidence rate with
    full temporal overlap, C_dist = |U_ik U_jl|^2 + |U_il U_jk|^2 without.
    """
    u = _matrix(u)
    k, l = (int(v) for v in input_pair)
    i, j = (int(v) for v in output_pair)
    if k == l or i == j:
        raise ValueError("input and output pairs must each be distinct")
    z1 = u[i, k] * u[j, l]
    z2 = u[i, l] * u[j, k]
    c_dist = abs(z1) ** 2 + abs(z2) ** 2
    if c_dist == 0.0:
        raise UndefinedVisibilityError(
            f"no classical coincidences for inputs ({k},{l}) outputs ({i},{j})"
        )
    c_ind = abs(z1 + z2) ** 2
    return float((c_dist - c_ind) / c_dist)


def visibility_pairs(probe_inputs, m: int, strategy: str = "standard"):
    """(input_k, input_l, out_i, out_j) combinations to scan.

    "standard": for every probe beyond the first, visibilities against
    probe 0 anchored at output 0 (one per phase) plus nearest-neighbour
    output chains (sign resolution within a row), and anchored
    visibilities between consecutive probes (sign resolution across
    rows).  "exhaustive": every probe pair at every anchored/chained
    output pair.
    """
    probes = tuple(int(p) for p in probe_inputs)
    n = len(probes)
    pairs: list[tuple[int, int, int, int]] = []
    if strategy == "standard":
        for b in range(1, n):
            pairs += [(probes[0], probes[b], 0, j) for j in range(1, m)]
            # nearest and next-nearest output chains, so one phase near 0 or
            # pi cannot disconnect the sign graph
            pairs += [(probes[0], probes[b], j, j + 1) for j in range(1, m - 1)]
            pairs += [(probes[0], probes[b], j, j + 2) for j in range(1, m - 2)]
        for a in range(1, n):
            for b in range(a + 1, n):
                pairs += [(probes[a], probes[b], 0, j) for j in range(1, m)]
    elif strategy == "exhaustive":
        for a in range(n):
            for b in range(a + 1, n):
                pairs += [(probes[a], probes[b], 0, j) for j in range(1, m)]
                pairs += [(probes[a], probes[b], j, j + 1) for j in range(1, m - 1)]
                pairs += [(probes[a], probes[b], j, j + 2) for j in range(1, m - 2)]
    else:
        raise ValueError(f"unknown pair-selection strategy {strategy!r}")
    return pairs


def simulate_dataset(
    u,
    probe_inputs,
    visibility_sigma: float = 0.0,
    amplitude_sigma: float = 0.0,
    seed: int = 0,
    strategy: str = "standard",
) -> CharacterizationDataset:
    """Characterization data for ``u`` as the measurement would produce it.

    Undefined visibilities (zero classical coincidence rate) are dropped
    from the dataset, as flagged data would be excluded from a fit.
    """
    u = _matrix(u)
    m = u.shape[0]
    amplitudes = simulate_amplitudes(u, probe_inputs, amplitude_sigma, seed)
    rng = gaussian_generator(hash64(seed, 1))
    records = []
    dropped = 0
    for k, l, i, j in visibility_pairs(probe_inputs, m, strategy):
        try:
            v = simulate_hom_visibility(u, (k, l), (i, j))
        except UndefinedVisibilityError:
            dropped += 1
            continue
        if visibility_sigma > 0:
            v = float(np.clip(v + visibility_sigma * rng.standard_normal(), -1.0, 1.0))
        records.append(VisibilityRecord(k, l, i, j, v))
    if dropped:
        logger.info("dropped %d undefined visibilities", dropped)
    return CharacterizationDataset(
        probe_inputs=tuple(int(p) for p in probe_inputs),
        amplitudes=amplitudes,
        visibilities=records,
        noise_sigma=visibility_sigma,
    )


@dataclass
class ReconstructionReport:
    n_records: int
    residual_max: float
    residual_rms: float
    sign_components: int
    sign_conflicts: int
    unresolved_signs: tuple = field(default_factory=tuple)
    refined: bool = False
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _model_visibility(r, phi, a, b, i, j):
    z1 = r[a, i] * r[b, j]
    z2 = r[a, j] * r[b, i]
    c_dist = z1 * z1 + z2 * z2
    if c_dist == 0.0:
        return 0.0
    delta = phi[a, i] + phi[b, j] - phi[a, j] - phi[b, i]
    return -2.0 * z1 * z2 * np.cos(delta) / c_dist


class _ParityUnionFind:
    """Union-find over sign nodes carrying a relative-parity bit."""

    def __init__(self, size):
        self.parent = list(range(size))
        self.parity = [0] * size  # parity to parent

    def find(self, x):
        if self.parent[x] == x:
            return x, 0
        root, par = self.find(self.parent[x])
        self.parent[x] = root
        self.parity[x] ^= par
        return root, self.parity[x]

    def union(self, x, y, rel):
        """rel = 0 for same sign, 1 for opposite; returns False on conflict."""
        rx, px = self.find(x)
        ry, py = self.find(y)
        if rx == ry:
            return (px ^ py) == rel
        self.parent[rx] = ry
        self.parity[rx] = px ^ py ^ rel
        return True


def reconstruct_matrix(
    dataset: CharacterizationDataset,
    m: int | None = None,
    probe_inputs=None,
    refine: bool = True,
):
    """Rebuild the probed n x m sub-block from amplitudes + visibilities.

    Moduli are copied from the amplitude table.  Phases are gauge-fixed
    (first probed row and first output column real), their magnitudes
    extracted from the visibilities anchored at probe 0 / output 0, and
    their signs propagated through a parity union-find over the
    phase-difference visibilities, most discriminating edges first.  A
    final least-squares pass over all visibilities polishes the phases
    (moduli stay copied).  Returns (block, ReconstructionReport).

    Raises UnderdeterminedError when some phase has no anchoring
    visibility, naming the missing (probe_row, output_mode) pairs.
    """
    probes = tuple(probe_inputs) if probe_inputs is not None else dataset.probe_inputs
    r = dataset.amplitudes
    n, m_data = r.shape
    if m is not None and m != m_data:
        raise ValueError(f"amplitude table has {m_data} output modes, expected {m}")
    m = m_data
    row_of = {p: a for a, p in enumerate(probes)}

    by_pair: dict[tuple[int, int, int, int], float] = {}
    for rec in dataset.visibilities:
        if rec.in_k not in row_of or rec.in_l not in row_of:
            raise ValueError(f"visibility uses a non-probed input: {rec}")
        a, b = row_of[rec.in_k], row_of[rec.in_l]
        i, j = rec.out_i, rec.out_j
        if a > b:
            a, b = b, a
        if i > j:
            i, j = j, i
        by_pair[(a, b, i, j)] = rec.value

    def cos_delta(a, b, i, j):
        """cos(phi_ai + phi_bj - phi_aj - phi_bi) from the stored visibility."""
        v = by_pair.get((a, b, i, j))
        if v is None:
            return None
        z1 = r[a, i] * r[b, j]
        z2 = r[a, j] * r[b, i]
        denom = 2.0 * z1 * z2
        if denom == 0.0:
            return None
        return float(np.clip(-v * (z1 * z1 + z2 * z2) / denom, -1.0, 1.0))

    # phase magnitudes |phi[b, j]| from visibilities anchored at (0, 0)
    abs_phi = np.zeros((n, m))
    missing = []
    for b in range(1, n):
        for j in range(1, m):
            if r[b, j] == 0.0:
                continue  # zero modulus, phase immaterial
            c = cos_delta(0, b, 0, j)
            if c is None:
                missing.append((b, j))
            else:
                abs_phi[b, j] = np.arccos(c)
    if missing:
        modes = sorted({j for _, j in missing})
        raise UnderdeterminedError(
            f"phases underdetermined for probe-row/output pairs {missing[:8]}"
            f"{'...' if len(missing) > 8 else ''} (output modes {modes})",
            missing=missing,
        )

    # sign graph: edges from phase-difference visibilities
    def node(b, j):
        return (b - 1) * (m - 1) + (j - 1)

    edges = []  # (discriminability, node1, node2, relative_parity)
    for (a, b, i, j), _v in by_pair.items():
        c = cos_delta(a, b, i, j)
        if c is None:
            continue
        if a == 0 and i == 0:
            continue  # anchor datum, already consumed
        if a == 0 and i >= 1:
            n1, n2 = node(b, i), node(b, j)
            p1, p2 = abs_phi[b, i], abs_phi[b, j]
        elif i == 0 and a >= 1:
            n1, n2 = node(a, j), node(b, j)
            p1, p2 = abs_phi[a, j], abs_phi[b, j]
        else:
            continue  # four-phase plaquette: used only by the refinement fit
        same = np.cos(p2 - p1)
        opposite = np.cos(p2 + p1)
        # decision confidence: how far the observed cosine sits from the
        # rejected candidate relative to the accepted one
        margin = abs(abs(c - same) - abs(c - opposite))
        if margin < 1e-12:
            continue
        rel = 0 if abs(c - same) <= abs(c - opposite) else 1
        edges.append((margin, n1, n2, rel))

    uf = _ParityUnionFind((n - 1) * (m - 1))
    conflicts = 0
    for margin, n1, n2, rel in sorted(edges, key=lambda e: -e[0]):
        if not uf.union(n1, n2, rel):
            conflicts += 1

    sign = np.ones((n, m))
    roots = {}
    for b in range(1, n):
        for j in range(1, m):
            if abs(np.sin(abs_phi[b, j])) < 1e-12 or r[b, j] == 0.0:
                continue  # sign carries no information at phase 0 or pi
            root, par = uf.find(node(b, j))
            roots.setdefault(root, []).append((b, j))
            sign[b, j] = -1.0 if par else 1.0

    components = len(roots)
    unresolved = []
    if components > 1:
        # every component beyond the largest keeps its own arbitrary seed sign
        largest = max(roots.values(), key=len)
        unresolved = [bj for group in roots.values() if group is not largest for bj in group]
        logger.warning("sign graph split into %d components; %d phases seeded by convention",
                       components, len(unresolved))

    phi = sign * abs_phi

    records = [
        (row_of[rec.in_k], row_of[rec.in_l], rec.out_i, rec.out_j, rec.value)
        for rec in dataset.visibilities
    ]

    def residuals(theta):
        ph = np.zeros((n, m))
        ph[1:, 1:] = theta.reshape(n - 1, m - 1)
        return np.array([_model_visibility(r, ph, a, b, i, j) - v for a, b, i, j, v in records])

    refined = False
    if refine and len(records) >= (n - 1) * (m - 1) and n > 1 and m > 1:
        fit = least_squares(residuals, phi[1:, 1:].ravel(), method="lm", max_nfev=200 * (n - 1) * (m - 1))
        phi = np.zeros((n, m))
        phi[1:, 1:] = fit.x.reshape(n - 1, m - 1)
        refined = True

    final_res = residuals(phi[1:, 1:].ravel()) if records else np.zeros(0)
    block = r * np.exp(1j * phi)
    report = ReconstructionReport(
        n_records=len(records),
        residual_max=float(np.abs(final_res).max()) if final_res.size else 0.0,
        residual_rms=float(np.sqrt(np.mean(final_res**2))) if final_res.size else 0.0,
        sign_components=components,
        sign_conflicts=conflicts,
        unresolved_signs=tuple(unresolved),
        refined=refined,
        residuals=final_res,
    )
    return block, report


def gauge_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius distance between A and B minimized over phase gauges.

    min over diagonal phase matrices D_in (rows), D_out (columns) of
    ||D_in A D_out - B||_F, computed by closed-form row/column phase
    alignment iterated to convergence from a reference-row start.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.ndim != 2:
        raise ValueError("gauge_distance expects 2-D matrices")
    med = a * b.conj()
    norms = float((np.abs(a) ** 2).sum() + (np.abs(b) ** 2).sum())
    ref = int(np.argmax(np.abs(med).sum(axis=1)))
    col = np.exp(-1j * np.angle(med[ref]))
    best = -np.inf
    for _ in range(300):
        rowvec = med @ col
        row = np.exp(-1j * np.angle(rowvec))
        colvec = row @ med
        col = np.exp(-1j * np.angle(colvec))
        score = float(np.real(row @ med @ col))
        if score - best <= 1e-15 * max(1.0, abs(best)):
            best = max(best, score)
            break
        best = score
    return float(np.sqrt(max(norms - 2.0 * best, 0.0)))
