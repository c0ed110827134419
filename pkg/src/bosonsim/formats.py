"""Shared on-disk formats binding the pipeline together.

All user-facing files carry 1-indexed mode/port labels; conversion to the
0-indexed in-memory convention happens here and only here.  FORMATS.md in
the repository root is the normative description.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .characterization import CharacterizationDataset, VisibilityRecord
from .distributions import OutputDistribution
from .sampling import EventStream
from .unitaries import TransferMatrix
from .validation import CounterTrace


class FormatError(ValueError):
    """A file failed to parse or violates its documented schema."""


def _read_json(path) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _require(doc: dict, key: str, path) -> object:
    if key not in doc:
        raise FormatError(f"{path}: missing required key {key!r}")
    return doc[key]


def sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


# -- transfer matrices -------------------------------------------------------

def save_transfer_matrix(path, tm: TransferMatrix) -> None:
    """Square matrix file: {"m": int, "re": [[...]], "im": [[...]]}."""
    mat = tm.matrix if isinstance(tm, TransferMatrix) else np.asarray(tm)
    doc = {"m": mat.shape[0], "re": mat.real.tolist(), "im": mat.imag.tolist()}
    Path(path).write_text(json.dumps(doc) + "\n")


def load_transfer_matrix(path) -> TransferMatrix:
    doc = _read_json(path)
    m = int(_require(doc, "m", path))
    re = np.asarray(_require(doc, "re", path), dtype=np.float64)
    im = np.asarray(_require(doc, "im", path), dtype=np.float64)
    if re.shape != (m, m) or im.shape != (m, m):
        raise FormatError(f"{path}: re/im must both be {m}x{m}, got {re.shape} and {im.shape}")
    return TransferMatrix(re + 1j * im, provenance="file")


def save_matrix_block(path, block: np.ndarray) -> None:
    """Rectangular sub-block file: {"rows", "cols", "re", "im"}."""
    block = np.asarray(block, dtype=np.complex128)
    doc = {
        "rows": block.shape[0],
        "cols": block.shape[1],
        "re": block.real.tolist(),
        "im": block.imag.tolist(),
    }
    Path(path).write_text(json.dumps(doc) + "\n")


def load_matrix_block(path) -> np.ndarray:
    doc = _read_json(path)
    rows = int(_require(doc, "rows", path))
    cols = int(_require(doc, "cols", path))
    re = np.asarray(_require(doc, "re", path), dtype=np.float64)
    im = np.asarray(_require(doc, "im", path), dtype=np.float64)
    if re.shape != (rows, cols) or im.shape != (rows, cols):
        raise FormatError(f"{path}: re/im must both be {rows}x{cols}")
    return re + 1j * im


# -- distributions -----------------------------------------------------------

def modes_label(modes) -> str:
    """1-indexed display form of a mode tuple, e.g. (1,2,3)."""
    return "(" + ",".join(str(v + 1) for v in modes) + ")"


def save_distribution_csv(path, dist: OutputDistribution) -> None:
    """CSV `index,modes,probability` in canonical index order."""
    outcomes = dist.outcome_array()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "modes", "probability"])
        for idx, (modes, p) in enumerate(zip(outcomes, dist.probs)):
            writer.writerow([idx, modes_label(modes), repr(float(p))])


def load_distribution_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Returns (modes array (K, n) 0-indexed, probabilities (K,))."""
    modes_rows = []
    probs = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["index", "modes", "probability"]:
            raise FormatError(f"{path}: unexpected header {header}")
        for lineno, row in enumerate(reader, start=2):
            try:
                label = row[1].strip().strip("()")
                modes_rows.append([int(v) - 1 for v in label.split(",")])
                probs.append(float(row[2]))
            except (IndexError, ValueError) as exc:
                raise FormatError(f"{path}: bad record at line {lineno}: {row}") from exc
    return np.asarray(modes_rows, dtype=np.int64), np.asarray(probs)


# -- event streams -----------------------------------------------------------

def save_event_stream(path, stream: EventStream) -> None:
    """`event_index,mode_1,...,mode_n` records plus a JSON sidecar."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for idx, row in enumerate(stream.events, start=1):
            writer.writerow([idx] + [int(v) + 1 for v in row])
    meta = {
        "m": stream.m,
        "n": stream.n,
        "seed": stream.seed,
        "provenance": stream.provenance,
    }
    if stream.retention_fraction is not None:
        meta["retention_fraction"] = stream.retention_fraction
    sidecar_path(path).write_text(json.dumps(meta) + "\n")


def load_event_stream(path) -> EventStream:
    meta = _read_json(sidecar_path(path))
    m = int(_require(meta, "m", sidecar_path(path)))
    n = int(_require(meta, "n", sidecar_path(path)))
    rows = []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != n + 1:
                raise FormatError(f"{path}: line {lineno}: expected {n + 1} fields, got {len(parts)}")
            try:
                rows.append([int(v) - 1 for v in parts[1:]])
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno}: non-integer mode") from exc
    events = np.asarray(rows, dtype=np.int64).reshape(-1, n)
    try:
        return EventStream(
            events=events,
            m=m,
            n=n,
            provenance=meta.get("provenance", "external"),
            seed=meta.get("seed"),
            retention_fraction=meta.get("retention_fraction"),
        )
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


# -- counter traces ----------------------------------------------------------

def save_trace_csv(path, trace: CounterTrace) -> None:
    """`event_number,counter_value` records plus a JSON parameter sidecar."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["event_number", "counter_value"])
        for idx, value in enumerate(trace.values, start=1):
            writer.writerow([idx, int(value)])
    meta = {"test_kind": trace.test_kind, "final": trace.final}
    if trace.a1 is not None:
        meta["a1"] = trace.a1
        meta["a2"] = trace.a2
    sidecar_path(path).write_text(json.dumps(meta) + "\n")


# -- characterization datasets -----------------------------------------------

def save_dataset(path, dataset: CharacterizationDataset) -> None:
    doc = {
        "probes": [p + 1 for p in dataset.probe_inputs],
        "amplitudes": dataset.amplitudes.tolist(),
        "visibilities": [
            {"k": r.in_k + 1, "l": r.in_l + 1, "i": r.out_i + 1, "j": r.out_j + 1, "V": r.value}
            for r in dataset.visibilities
        ],
        "noise_sigma": dataset.noise_sigma,
    }
    Path(path).write_text(json.dumps(doc) + "\n")


def load_dataset(path) -> CharacterizationDataset:
    doc = _read_json(path)
    probes = [int(p) - 1 for p in _require(doc, "probes", path)]
    amplitudes = np.asarray(_require(doc, "amplitudes", path), dtype=np.float64)
    records = []
    for rec in _require(doc, "visibilities", path):
        try:
            records.append(
                VisibilityRecord(
                    in_k=int(rec["k"]) - 1,
                    in_l=int(rec["l"]) - 1,
                    out_i=int(rec["i"]) - 1,
                    out_j=int(rec["j"]) - 1,
                    value=float(rec["V"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}: bad visibility record {rec}") from exc
    try:
        return CharacterizationDataset(
            probe_inputs=tuple(probes),
            amplitudes=amplitudes,
            visibilities=records,
            noise_sigma=float(doc.get("noise_sigma", 0.0)),
        )
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def save_summary(path, summary: dict) -> None:
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
