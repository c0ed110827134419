"""Command-line front end.

Subcommands mirror the experiment pipeline: ``gen-unitary`` makes a
transfer matrix, ``run`` computes the exact distribution and samples
events, ``validate`` runs the certification counters over stored events,
``characterize`` simulates and/or inverts interference data.

Exit codes: 0 success, 2 usage error, 3 data/format error, 4
numeric/validation failure.  All ports and modes are 1-indexed on the
command line and in files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import formats
from .characterization import (
    UnderdeterminedError,
    gauge_distance,
    reconstruct_matrix,
    simulate_dataset,
)
from .distributions import (
    boson_distribution,
    distinguishable_distribution,
    empirical_distribution,
    fidelity,
    total_variation_distance,
    uniform_distribution,
)
from .sampling import clifford_clifford_sample, filter_collision_free, sample_from_distribution
from .unitaries import GridDeviceSpec, device_unitary, haar_unitary
from .validation import likelihood_ratio_counter, rne_counter

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FORMAT = 3
EXIT_NUMERIC = 4

RUN_UNITARITY_TOL = 1e-6


class UsageError(ValueError):
    pass


class NumericError(ValueError):
    pass


def _parse_ports(text: str, m: int, what: str) -> tuple[int, ...]:
    try:
        ports = tuple(int(v) - 1 for v in text.split(","))
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of integers: {text!r}")
    if len(set(ports)) != len(ports):
        raise UsageError(f"{what} must be distinct: {text!r}")
    if any(not 0 <= p < m for p in ports):
        raise UsageError(f"{what} out of range 1..{m}: {text!r}")
    return tuple(sorted(ports))


def _set_threads(threads):
    if threads is None:
        return
    if threads < 1:
        raise UsageError("--threads must be >= 1")
    try:
        import numba

        numba.set_num_threads(threads)
    except ImportError:
        pass  # numpy backend is single-threaded anyway


def cmd_gen_unitary(args) -> int:
    if args.mode == "haar":
        if args.m is None:
            raise UsageError("--mode haar requires --m")
        if args.grid_rows or args.grid_cols:
            raise UsageError("grid dimensions are only valid with --mode grid")
        tm = haar_unitary(args.m, args.seed)
    else:
        rows = args.grid_rows or 7
        cols = args.grid_cols or 5
        if args.m is not None and args.m != rows * cols:
            raise UsageError(f"--m {args.m} contradicts grid {rows}x{cols} = {rows * cols}")
        spec = GridDeviceSpec(grid_rows=rows, grid_cols=cols, segments=args.segments, seed=args.seed)
        tm = device_unitary(spec)
    formats.save_transfer_matrix(args.out, tm)
    print(f"wrote {tm.m}x{tm.m} {tm.provenance} unitary to {args.out} "
          f"(unitarity defect {tm.unitarity_defect:.3e})")
    return EXIT_OK


def cmd_run(args) -> int:
    tm = formats.load_transfer_matrix(args.unitary)
    if tm.unitarity_defect > RUN_UNITARITY_TOL:
        raise NumericError(
            f"unitary file has unitarity defect {tm.unitarity_defect:.3e} > {RUN_UNITARITY_TOL:.0e}"
        )
    ports = _parse_ports(args.input, tm.m, "--input")
    n = len(ports)
    if args.n is not None and args.n != n:
        raise UsageError(f"--n {args.n} contradicts {n} input ports")
    support = "collision-free" if args.collision_free_only else "full"

    if args.sampler in ("boson", "boson-direct"):
        exact = boson_distribution(tm, ports, support=support)
    elif args.sampler == "distinguishable":
        exact = distinguishable_distribution(tm, ports, support=support)
    else:
        exact = uniform_distribution(tm.m, n, support=support)

    cf_mass = boson_distribution(tm, ports, support="collision-free", renormalize=False).support_mass

    retention = None
    if args.samples == 0:
        stream = sample_from_distribution(exact, 0, args.seed)
    elif args.sampler == "boson-direct":
        stream = clifford_clifford_sample(tm, ports, args.samples, args.seed)
        if args.collision_free_only:
            stream = filter_collision_free(stream)
            retention = stream.retention_fraction
    elif args.sampler == "boson" and args.collision_free_only:
        # draw on the full support, then post-select, as the experiment does
        full = boson_distribution(tm, ports, support="full")
        stream = filter_collision_free(sample_from_distribution(full, args.samples, args.seed))
        retention = stream.retention_fraction
    elif args.sampler == "distinguishable" and args.collision_free_only:
        full = distinguishable_distribution(tm, ports, support="full")
        stream = filter_collision_free(sample_from_distribution(full, args.samples, args.seed))
        retention = stream.retention_fraction
    else:
        stream = sample_from_distribution(exact, args.samples, args.seed)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    formats.save_distribution_csv(out_dir / "distribution.csv", exact)
    formats.save_event_stream(out_dir / "events.csv", stream)

    summary = {
        "m": tm.m,
        "n": n,
        "input_ports": [p + 1 for p in ports],
        "sampler": args.sampler,
        "seed": args.seed,
        "samples_requested": args.samples,
        "samples_recorded": len(stream),
        "support": support,
        "collision_free_mass": cf_mass,
        "retention_fraction": retention,
        "fidelity": None,
        "tvd": None,
    }
    if len(stream):
        emp = empirical_distribution(stream, tm.m, n, support=support)
        summary["fidelity"] = fidelity(emp, exact)
        summary["tvd"] = total_variation_distance(emp, exact)
    formats.save_summary(out_dir / "summary.json", summary)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_validate(args) -> int:
    if not args.a1 < 1.0 < args.a2:
        raise UsageError(f"need a1 < 1 < a2, got a1={args.a1}, a2={args.a2}")
    tm = formats.load_transfer_matrix(args.unitary)
    stream = formats.load_event_stream(args.events)
    ports = _parse_ports(args.input, tm.m, "--input")
    if stream.m != tm.m:
        raise NumericError(f"events are over {stream.m} modes but the unitary has {tm.m}")
    if stream.n != len(ports):
        raise NumericError(f"events carry {stream.n} photons but {len(ports)} input ports given")

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = {"events": len(stream), "test": args.test}

    if args.test in ("rne", "both"):
        trace = rne_counter(stream, tm, ports)
        formats.save_trace_csv(out_dir / "trace_rne.csv", trace)
        summary["rne_final"] = trace.final
    if args.test in ("lrt", "both"):
        collision_free = stream.n <= 1 or bool(
            (np.diff(stream.events, axis=1) > 0).all()
        )
        support = "collision-free" if collision_free else "full"
        p_ind = boson_distribution(tm, ports, support=support)
        q_dis = distinguishable_distribution(tm, ports, support=support)
        trace = likelihood_ratio_counter(stream, p_ind, q_dis, args.a1, args.a2)
        formats.save_trace_csv(out_dir / "trace_lrt.csv", trace)
        summary["lrt_final"] = trace.final
        summary["lrt_support"] = support
    formats.save_summary(out_dir / "summary.json", summary)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_characterize(args) -> int:
    if (args.unitary is None) == (args.dataset is None):
        raise UsageError("give exactly one of --unitary (simulate) or --dataset (reconstruct)")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    truth = None
    if args.unitary is not None:
        if args.probes is None:
            raise UsageError("--unitary mode requires --probes")
        tm = formats.load_transfer_matrix(args.unitary)
        probes = _parse_ports(args.probes, tm.m, "--probes")
        dataset = simulate_dataset(
            tm,
            probes,
            visibility_sigma=args.noise_sigma,
            seed=args.seed,
            strategy=args.strategy,
        )
        formats.save_dataset(out_dir / "dataset.json", dataset)
        truth = tm.matrix[:, probes].T
    else:
        dataset = formats.load_dataset(args.dataset)

    block, report = reconstruct_matrix(dataset)
    formats.save_matrix_block(out_dir / "reconstructed.json", block)
    summary = {
        "probes": [p + 1 for p in dataset.probe_inputs],
        "rows": block.shape[0],
        "cols": block.shape[1],
        "visibility_records": report.n_records,
        "residual_max": report.residual_max,
        "residual_rms": report.residual_rms,
        "sign_components": report.sign_components,
        "sign_conflicts": report.sign_conflicts,
        "refined": report.refined,
    }
    if truth is not None:
        d_direct = gauge_distance(block, truth)
        d_conj = gauge_distance(block.conj(), truth)
        summary["gauge_distance"] = d_direct
        summary["gauge_distance_conjugate"] = d_conj
        summary["gauge_distance_orbit_min"] = min(d_direct, d_conj)
    formats.save_summary(out_dir / "summary.json", summary)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bosonsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-unitary", help="generate a transfer matrix file")
    p.add_argument("--mode", choices=["haar", "grid"], required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--grid-rows", type=int)
    p.add_argument("--grid-cols", type=int)
    p.add_argument("--segments", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_unitary)

    p = sub.add_parser("run", help="exact distribution + sampled events + summary")
    p.add_argument("--unitary", required=True)
    p.add_argument("--input", required=True, help="1-indexed ports, e.g. 1,3,4")
    p.add_argument("--n", type=int)
    p.add_argument("--samples", type=int, default=0)
    p.add_argument(
        "--sampler",
        choices=["boson", "boson-direct", "distinguishable", "uniform"],
        default="boson",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--collision-free-only", action="store_true")
    p.add_argument("--threads", type=int)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="certification counters over stored events")
    p.add_argument("--events", required=True)
    p.add_argument("--unitary", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--test", choices=["rne", "lrt", "both"], default="both")
    p.add_argument("--a1", type=float, default=0.9)
    p.add_argument("--a2", type=float, default=1.5)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("characterize", help="simulate or invert interference data")
    p.add_argument("--unitary")
    p.add_argument("--probes", help="1-indexed probe inputs, e.g. 1,3,4")
    p.add_argument("--dataset")
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strategy", choices=["standard", "exhaustive"], default="standard")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_characterize)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _set_threads(getattr(args, "threads", None))
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except formats.FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (UnderdeterminedError, NumericError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
