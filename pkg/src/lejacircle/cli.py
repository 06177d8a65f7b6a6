"""Batch entry point: generate sequences, measure them, verify the claims.

Four subcommands share one contract: outputs are written atomically (no
partial files on error), every invocation that produces an output also
writes `<out>.manifest.json` describing the flags, paths, and tolerances
in effect, and the exit code is 0 for success, 1 when a verification
check fails, 2 for any input or precondition problem.

The verify subcommand rebuilds a GreedyRun from a sequence CSV: leading
`seed` rows form the seed, maximal blocks of `manual` rows become
injection batches fired at their position, and the mode is inferred from
mirror pairing. The kernel behind a CSV is not recoverable, so run-based
checks assume LogSin and say so in their report notes.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import replace

from . import __version__
from .greedy import (
    DegenerateGapError,
    GreedyConfig,
    GreedyRun,
    Mode,
    SymmetryError,
    parse_injection_schedule,
    run,
)
from .kernels import KernelKind, SingularityError
from .metrics import (
    ConvergenceError,
    metrics_over_sequence,
    write_metrics_csv,
)
from .pointset import (
    CirclePointSet,
    DistinctnessError,
    Provenance,
    StateError,
    _atomic_write_text,
    is_mirror_paired,
    kronecker,
    read_sequence_csv,
    roots_of_unity,
    van_der_corput,
    write_sequence_csv,
)
from .verify import (
    fekete_sweep_check,
    lemma1_check,
    lemma2_check,
    proposition_check,
    stability_check,
    theorem1_check,
    theorem2_check,
    theorem3_check,
    wagner_check,
    write_reports_ndjson,
)

_INPUT_ERRORS = (
    ValueError,
    OSError,
    StateError,
    SymmetryError,
    DistinctnessError,
    DegenerateGapError,
    SingularityError,
    ConvergenceError,
)

_CHECK_NAMES = (
    "lemma1",
    "lemma2",
    "proposition",
    "fekete",
    "wagner",
    "theorem1",
    "theorem2",
    "theorem3",
    "stability",
)

_KERNELS = {"logsin": KernelKind.LOG_SIN, "bernoulli": KernelKind.BERNOULLI}
_MODES = {"plain": Mode.PLAIN, "symmetric": Mode.SYMMETRIC}


def _write_manifest(out_path: str, subcommand: str, flags: dict[str, str],
                    inputs: list[str], outputs: list[str],
                    tolerances: dict[str, float], wall: float) -> None:
    manifest = {
        "tool_version": __version__,
        "subcommand": subcommand,
        "flags": flags,
        "inputs": inputs,
        "outputs": outputs,
        "tolerances": tolerances,
        "wall_time_seconds": wall,
    }
    _atomic_write_text(
        out_path + ".manifest.json",
        json.dumps(manifest, indent=2, sort_keys=True) + "\n",
    )


def _parse_seed(text: str) -> CirclePointSet:
    try:
        angles = [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise ValueError(f"bad --seed {text!r}: {exc}") from exc
    if not angles:
        raise ValueError(f"bad --seed {text!r}: no angles")
    return CirclePointSet(angles)


def cmd_generate(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    seed = _parse_seed(args.seed)
    config = GreedyConfig(
        kernel=_KERNELS[args.kernel],
        mode=_MODES[args.mode],
        target_count=args.n,
    )
    injections = ()
    if args.inject is not None:
        with open(args.inject, "r", encoding="utf-8") as fh:
            injections = parse_injection_schedule(fh.read())
    result = run(seed, config, injections)
    write_sequence_csv(args.out, result.final)
    flags = {
        "kernel": args.kernel,
        "mode": args.mode,
        "seed": args.seed,
        "n": str(args.n),
        "out": args.out,
    }
    inputs = []
    if args.inject is not None:
        flags["inject"] = args.inject
        inputs.append(args.inject)
    _write_manifest(
        args.out, "generate", flags, inputs, [args.out],
        {
            "tie_tolerance": config.tie_tolerance,
            "position_tolerance": config.position_tolerance,
            "self_conjugate_exclusion": config.self_conjugate_exclusion,
        },
        time.perf_counter() - t0,
    )
    return 0


def cmd_reference(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    if args.n < 1:
        raise ValueError(f"--n must be >= 1: {args.n}")
    if args.family == "vdc":
        points = CirclePointSet(van_der_corput(k) for k in range(1, args.n + 1))
    elif args.family == "kronecker":
        points = CirclePointSet(
            kronecker(k, args.alpha) for k in range(1, args.n + 1)
        )
    else:
        points = roots_of_unity(args.n)
    write_sequence_csv(args.out, points)
    flags = {
        "family": args.family,
        "n": str(args.n),
        "alpha": repr(args.alpha),
        "out": args.out,
    }
    _write_manifest(args.out, "reference", flags, [], [args.out], {},
                    time.perf_counter() - t0)
    return 0


def cmd_measure(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    points = read_sequence_csv(args.infile)
    rows = metrics_over_sequence(points.angles, args.prefixes)
    write_metrics_csv(rows, args.out)
    flags = {"in": args.infile, "prefixes": args.prefixes, "out": args.out}
    _write_manifest(args.out, "measure", flags, [args.infile], [args.out],
                    {"position_tolerance": 1e-13}, time.perf_counter() - t0)
    return 0


def _run_from_csv(points: CirclePointSet) -> GreedyRun:
    """Rebuild the run shape a sequence CSV encodes.

    Leading seed rows form the seed; each maximal block of manual rows is
    an injection batch fired at its starting index; the mode is inferred
    from mirror pairing; the kernel is assumed LogSin (not recoverable).
    """
    provs = points.provenances
    n_seed = 0
    while n_seed < len(provs) and provs[n_seed] is Provenance.SEED:
        n_seed += 1
    if n_seed == 0:
        raise ValueError("sequence CSV has no leading seed rows")
    if any(p is Provenance.SEED for p in provs[n_seed:]):
        raise ValueError("seed rows must all precede greedy/manual rows")
    injections: list[tuple[int, tuple[float, ...]]] = []
    i = n_seed
    while i < len(provs):
        if provs[i] is Provenance.MANUAL:
            j = i
            while j < len(provs) and provs[j] is Provenance.MANUAL:
                j += 1
            injections.append((i, tuple(points.angles[i:j])))
            i = j
        else:
            i += 1
    seed = CirclePointSet(points.angles[:n_seed])
    symmetric = (
        len(points) % 2 == 0
        and n_seed % 2 == 0
        and is_mirror_paired(points)
        and is_mirror_paired(seed)
    )
    config = GreedyConfig(
        kernel=KernelKind.LOG_SIN,
        mode=Mode.SYMMETRIC if symmetric else Mode.PLAIN,
        target_count=len(points),
    )
    return GreedyRun(
        config=config,
        seed=seed,
        steps=(),
        final=points,
        injections=tuple(injections),
    )


def _load_baseline(path: str | None, check: str, n: int) -> float | None:
    if path is None:
        return None
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    entry = data.get(check)
    if entry is None:
        return None
    value = entry.get(str(n))
    if value is None:
        return None
    return float(value)


_KERNEL_NOTE = "kernel assumed LogSin (not recorded in sequence CSVs)"


def cmd_verify(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    names = [part.strip() for part in args.check.split(",") if part.strip()]
    if not names:
        raise ValueError("--check names are empty")
    for name in names:
        if name not in _CHECK_NAMES:
            raise ValueError(
                f"unknown check {name!r}; known: {', '.join(_CHECK_NAMES)}"
            )
    needs_input = [name for name in names if name != "fekete"]
    if needs_input and args.infile is None:
        raise ValueError(f"--in is required for checks: {', '.join(needs_input)}")
    if "stability" in names and args.in2 is None:
        raise ValueError("--in2 (perturbed run CSV) is required for stability")

    points = read_sequence_csv(args.infile) if args.infile is not None else None
    reports = []
    for name in names:
        if name == "fekete":
            reports.append(fekete_sweep_check())
            continue
        if name == "proposition":
            reports.append(proposition_check(points))
        elif name == "lemma1":
            reports.append(lemma1_check(points))
        elif name == "lemma2":
            reports.append(lemma2_check(points))
        elif name == "wagner":
            rep = wagner_check(_run_from_csv(points))
            reports.append(_with_note(rep, _KERNEL_NOTE))
        elif name == "theorem1":
            rebuilt = _run_from_csv(points)
            n = len(rebuilt.final) - (len(rebuilt.final) % 2)
            rep = theorem1_check(
                rebuilt, n, _load_baseline(args.baseline, name, n)
            )
            reports.append(_with_note(rep, _KERNEL_NOTE))
        elif name == "theorem2":
            rebuilt = _run_from_csv(points)
            n = len(rebuilt.final)
            rep = theorem2_check(
                rebuilt, n, _load_baseline(args.baseline, name, n)
            )
            reports.append(_with_note(rep, _KERNEL_NOTE))
        elif name == "theorem3":
            rows = metrics_over_sequence(points.angles, "all")
            reports.append(theorem3_check(rows))
        else:
            perturbed = _run_from_csv(read_sequence_csv(args.in2))
            base = _run_from_csv(points)
            n = min(len(base.final), len(perturbed.final))
            reports.append(stability_check(base, perturbed, n))
    write_reports_ndjson(reports, args.out)
    flags = {"check": args.check, "out": args.out}
    inputs = []
    if args.infile is not None:
        flags["in"] = args.infile
        inputs.append(args.infile)
    if args.in2 is not None:
        flags["in2"] = args.in2
        inputs.append(args.in2)
    if args.baseline is not None:
        flags["baseline"] = args.baseline
        inputs.append(args.baseline)
    _write_manifest(args.out, "verify", flags, inputs, [args.out],
                    {"position_tolerance": 1e-13}, time.perf_counter() - t0)
    return 0 if all(r.passed for r in reports) else 1


def _with_note(report, note: str):
    extended = report.notes + "; " + note if report.notes else note
    return replace(report, notes=extended)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leja",
        description=(
            "Leja sequences on the unit circle: generation, reference "
            "families, exact metrics, and verification checks."
        ),
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    gen = sub.add_parser("generate", help="grow a greedy sequence")
    gen.add_argument("--kernel", choices=sorted(_KERNELS), default="logsin")
    gen.add_argument("--mode", choices=sorted(_MODES), default="plain")
    gen.add_argument("--seed", required=True,
                     help="comma-separated seed angles in [0, 1)")
    gen.add_argument("--n", type=int, required=True, help="target point count")
    gen.add_argument("--inject", default=None,
                     help="schedule file, lines `at_count:angle[,angle...]`")
    gen.add_argument("--out", required=True)
    gen.set_defaults(handler=cmd_generate)

    ref = sub.add_parser("reference", help="write a reference sequence")
    ref.add_argument("--family", choices=("vdc", "kronecker", "roots"),
                     required=True)
    ref.add_argument("--n", type=int, required=True)
    ref.add_argument("--alpha", type=float, default=math.sqrt(2.0))
    ref.add_argument("--out", required=True)
    ref.set_defaults(handler=cmd_reference)

    mea = sub.add_parser("measure", help="metrics CSV over prefixes")
    mea.add_argument("--in", dest="infile", required=True)
    mea.add_argument("--prefixes", choices=("all", "dyadic"), default="all")
    mea.add_argument("--out", required=True)
    mea.set_defaults(handler=cmd_measure)

    ver = sub.add_parser("verify", help="run checks, emit NDJSON reports")
    ver.add_argument("--check", required=True,
                     help=f"comma-separated names: {', '.join(_CHECK_NAMES)}")
    ver.add_argument("--in", dest="infile", default=None)
    ver.add_argument("--in2", dest="in2", default=None,
                     help="perturbed run CSV (stability)")
    ver.add_argument("--baseline", default=None,
                     help="JSON of committed ratios: {check: {N: value}}")
    ver.add_argument("--out", required=True)
    ver.set_defaults(handler=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
