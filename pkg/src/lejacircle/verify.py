"""Runnable checks tying runs and reference sequences to the known bounds.

Each check evaluates both sides of an identity or inequality the metrics
module can state exactly, and folds the comparison into a CheckReport:
the measured quantities, the thresholds they were compared against, and
the resulting verdict. Preconditions (wrong mode, asymmetric input,
missing prefixes) raise, they never come back as failed reports.

The growth-rate checks have no universal constants attached, so they
compare against a loose absolute ceiling plus an optional committed
baseline; the identity checks are sharp (1e-9 relative or better).

Reports serialize to single-line JSON (sorted keys) and batches emit as
NDJSON sorted by check_name, so re-running a check on the same inputs
reproduces the output byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .greedy import GreedyRun, Mode, _GapEngine
from .kernels import KernelKind
from .metrics import (
    MetricsRow,
    _DipCache,
    _POSITION_TOLERANCE,
    _d_l1_from_sorted,
    _fn_l1_from_sorted,
    _logpot_l1_from_engine,
    discrepancy_l2_sq,
    logpot_l2_sq,
    pair_energy,
)
from .pointset import StateError, _atomic_write_text, as_angles, is_mirror_paired

__all__ = [
    "CheckReport",
    "theorem1_ratio",
    "theorem2_ratio",
    "theorem3_growth",
    "theorem1_check",
    "theorem2_check",
    "theorem3_check",
    "wagner_check",
    "proposition_check",
    "lemma1_check",
    "lemma2_check",
    "fekete_check",
    "fekete_sweep_check",
    "stability_check",
    "report_to_json",
    "write_reports_ndjson",
]

RATIO_CEILING = 10.0
BASELINE_BAND = 0.2
GROWTH_FLOOR = 0.1
WAGNER_FLOOR = 0.05

# Any fixed seed works; the draws only need to be reproducible.
_LEMMA2_SEED = 414213562
_LEMMA2_DRAWS = 1000
_LEMMA2_EXCLUSION = 1e-9


@dataclass(frozen=True)
class CheckReport:
    check_name: str
    passed: bool
    measured: dict[str, float] = field(default_factory=dict)
    threshold: dict[str, float] = field(default_factory=dict)
    notes: str = ""


def report_to_json(report: CheckReport) -> str:
    payload = {
        "check_name": report.check_name,
        "passed": bool(report.passed),
        "measured": {k: float(v) for k, v in report.measured.items()},
        "threshold": {k: float(v) for k, v in report.threshold.items()},
        "notes": report.notes,
    }
    return json.dumps(payload, sort_keys=True)


def write_reports_ndjson(reports, path: str) -> None:
    """One JSON document per check, sorted by check_name, atomic replace."""
    ordered = sorted(reports, key=lambda r: r.check_name)
    _atomic_write_text(path, "".join(report_to_json(r) + "\n" for r in ordered))


# -- averaged-discrepancy ratios ----------------------------------------------


def _weighted_prefix_sum(angles: np.ndarray, upto: int, from_sorted) -> float:
    """sum_{n<=upto} n * norm(prefix n), inserting one point at a time."""
    s = np.empty(0, dtype=float)
    acc = 0.0
    for n in range(1, upto + 1):
        x = angles[n - 1] % 1.0
        s = np.insert(s, np.searchsorted(s, x), x)
        acc += n * from_sorted(s)
    return acc


def theorem1_ratio(run: GreedyRun, N: int) -> float:
    """R1(N) = [(1/N) sum_{n<=N} n d_l1(prefix n)] / (log N)^2.

    Needs a symmetric LogSin run and even N with 4 <= N <= |run|.
    """
    if run.config.mode is not Mode.SYMMETRIC:
        raise StateError("theorem1_ratio needs a symmetric run")
    if run.config.kernel is not KernelKind.LOG_SIN:
        raise StateError("theorem1_ratio is defined for the LogSin kernel")
    angles = as_angles(run.final)
    if N % 2 != 0 or N < 4 or N > angles.size:
        raise ValueError(f"N must be even with 4 <= N <= {angles.size}: {N}")
    total = _weighted_prefix_sum(angles, N, _d_l1_from_sorted)
    return total / N / math.log(N) ** 2


def theorem2_ratio(run: GreedyRun, N: int) -> float:
    """R2(N) = [(1/N) sum_{n<=N} n f_l1(prefix n)] / (log N)^2.

    Needs a plain LogSin run and N >= 4.
    """
    if run.config.mode is not Mode.PLAIN:
        raise StateError("theorem2_ratio needs a plain run")
    if run.config.kernel is not KernelKind.LOG_SIN:
        raise StateError("theorem2_ratio is defined for the LogSin kernel")
    angles = as_angles(run.final)
    if N < 4 or N > angles.size:
        raise ValueError(f"N must satisfy 4 <= N <= {angles.size}: {N}")
    total = _weighted_prefix_sum(angles, N, _fn_l1_from_sorted)
    return total / N / math.log(N) ** 2


def _ratio_check(name: str, ratio: float, N: int,
                 baseline: float | None) -> CheckReport:
    measured = {"ratio": float(ratio), "N": float(N)}
    threshold = {"ceiling": RATIO_CEILING}
    passed = ratio <= RATIO_CEILING
    if baseline is None:
        notes = "no baseline supplied; absolute ceiling only"
    else:
        threshold["baseline"] = float(baseline)
        threshold["band"] = BASELINE_BAND
        passed = passed and abs(ratio - baseline) <= BASELINE_BAND * abs(baseline)
        notes = "ceiling plus +-20% band around the committed baseline"
    return CheckReport(name, bool(passed), measured, threshold, notes)


def theorem1_check(run: GreedyRun, N: int | None = None,
                   baseline: float | None = None) -> CheckReport:
    if N is None:
        N = len(run.final) - (len(run.final) % 2)
    return _ratio_check("theorem1", theorem1_ratio(run, N), N, baseline)


def theorem2_check(run: GreedyRun, N: int | None = None,
                   baseline: float | None = None) -> CheckReport:
    if N is None:
        N = len(run.final)
    return _ratio_check("theorem2", theorem2_ratio(run, N), N, baseline)


# -- L2 growth floor -----------------------------------------------------------


def theorem3_growth(rows: list[MetricsRow]) -> float:
    """max_n sqrt(logpot_l2_sq at n) / sqrt(log n) over rows with n >= 2.

    Rows with n < 2 contribute nothing (log 1 = 0); at least one row with
    n >= 2 is required.
    """
    best = -math.inf
    for row in rows:
        if row.N < 2:
            continue
        best = max(best, math.sqrt(row.logpot_l2_sq) / math.sqrt(math.log(row.N)))
    if best == -math.inf:
        raise StateError("growth statistic needs a prefix of at least 2 points")
    return best


def theorem3_check(rows: list[MetricsRow]) -> CheckReport:
    growth = theorem3_growth(rows)
    top = max((r.N for r in rows if r.N >= 2))
    return CheckReport(
        "theorem3",
        growth >= GROWTH_FLOOR,
        {"max_growth": float(growth), "max_n": float(top)},
        {"floor": GROWTH_FLOOR},
        "normalized L2 log-potential growth over all supplied prefixes",
    )


# -- Wagner's lower-bound constant ---------------------------------------------


def wagner_check(run: GreedyRun) -> CheckReport:
    """min over even prefixes n >= 4 of logpot_l1 * log n / (n * d_l1).

    The lower bound holds for symmetric sets, so only even prefixes of a
    symmetric run qualify.
    """
    if run.config.mode is not Mode.SYMMETRIC:
        raise StateError("wagner_check needs a symmetric run")
    angles = as_angles(run.final)
    if angles.size < 4:
        raise StateError("wagner_check needs at least 4 points")
    min_ratio = math.inf
    argmin_n = 0
    engine = _GapEngine(angles[:1], run.config.kernel, _POSITION_TOLERANCE)
    dips = _DipCache(1)
    try:
        for n in range(2, angles.size + 1):
            k = engine.insert_point(float(angles[n - 1]))
            dips.insert(k)
            dips.predict(float(angles[n - 1]), *engine.gap_bounds())
            if n < 4 or n % 2 != 0:
                continue
            engine.refresh()
            lp1, dips = _logpot_l1_from_engine(engine, dips)
            d1 = _d_l1_from_sorted(np.sort(engine.pts))
            ratio = lp1 * math.log(n) / (n * d1)
            if ratio < min_ratio:
                min_ratio = ratio
                argmin_n = n
    finally:
        engine.close()
    return CheckReport(
        "wagner",
        min_ratio >= WAGNER_FLOOR,
        {"min_ratio": float(min_ratio), "argmin_n": float(argmin_n)},
        {"min_ratio": WAGNER_FLOOR},
        f"even prefixes 4..{angles.size - angles.size % 2}",
    )


# -- exact identities ----------------------------------------------------------


def proposition_check(points) -> CheckReport:
    """logpot_l2_sq == pi^2 N^2 d_l2_sq for mirror-paired sets."""
    if not is_mirror_paired(points):
        raise StateError("proposition_check needs a mirror-paired set")
    n = len(points)
    lhs = logpot_l2_sq(points)
    rhs = math.pi ** 2 * n * n * discrepancy_l2_sq(points)
    rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
    return CheckReport(
        "proposition",
        rel <= 1e-9,
        {"lhs": float(lhs), "rhs": float(rhs), "rel_err": float(rel)},
        {"rel_err": 1e-9},
        "L2 log-potential norm against the scaled L2 discrepancy",
    )


def lemma1_check(points) -> CheckReport:
    """pair_energy <= N log N, with 1e-12 slack scaled to the bound.

    Near-uniform sets attain the bound, and there the comparison runs at
    the edge of float64: the bound's own ulp at N = 1024 is about 1e-12,
    and the summed energy carries error a couple of orders above that.
    Scaling the slack by max(1, bound) keeps it 1e-12 where that is
    meaningful and proportionally loose where equality is only
    representable to rounding.
    """
    n = len(points)
    if n < 1:
        raise StateError("lemma1_check needs a nonempty set")
    # a single point has no pairs; the empty sum meets the bound 1 log 1 = 0
    energy = pair_energy(points) if n >= 2 else 0.0
    bound = n * math.log(n)
    slack = 1e-12 * max(1.0, bound)
    return CheckReport(
        "lemma1",
        energy <= bound + slack,
        {"pair_energy": float(energy), "bound": float(bound)},
        {"slack": float(slack)},
        "pairwise log-distance energy against N log N",
    )


def lemma2_check(points) -> CheckReport:
    """sum_k f(x - x_k) == #{x_k <= x} - N x at random off-set arguments.

    Holds for mirror-paired sets only: an on-axis point shifts the sum
    by 1/2, which is why such sets are rejected outright.
    """
    if not is_mirror_paired(points):
        raise StateError("lemma2_check needs a mirror-paired set")
    s = np.sort(as_angles(points))
    if s.size == 0:
        raise StateError("lemma2_check needs a nonempty set")
    rng = np.random.default_rng(_LEMMA2_SEED)
    draws = np.empty(0)
    while draws.size < _LEMMA2_DRAWS:
        batch = rng.random(_LEMMA2_DRAWS)
        d = np.abs(batch[:, None] - s[None, :])
        clear = np.minimum(d, 1.0 - d).min(axis=1) > _LEMMA2_EXCLUSION
        draws = np.concatenate([draws, batch[clear]])
    draws = draws[:_LEMMA2_DRAWS]
    frac = (draws[:, None] - s[None, :]) % 1.0
    lhs = (0.5 - frac).sum(axis=1)
    rhs = np.searchsorted(s, draws, side="right") - s.size * draws
    err = float(np.abs(lhs - rhs).max())
    return CheckReport(
        "lemma2",
        err <= 1e-10,
        {"max_abs_err": err, "draws": float(_LEMMA2_DRAWS)},
        {"max_abs_err": 1e-10},
        "sawtooth pair-sum identity at fixed-seed uniform arguments",
    )


def fekete_check(N: int) -> CheckReport:
    """prod_{k<N} sin(pi k / N) == 2 N / 2^N."""
    if N < 1:
        raise ValueError(f"N must be >= 1: {N}")
    product = float(np.sin(np.pi * np.arange(1, N) / N).prod())
    reference = math.ldexp(float(N), 1 - N)
    rel = abs(product - reference) / reference
    return CheckReport(
        "fekete",
        rel <= 1e-10,
        {"product": product, "reference": reference, "rel_err": float(rel)},
        {"rel_err": 1e-10},
        f"sine product identity at N = {N}",
    )


def fekete_sweep_check(max_n: int = 50) -> CheckReport:
    """Worst relative error of the sine product identity over N = 1..max_n."""
    if max_n < 1:
        raise ValueError(f"max_n must be >= 1: {max_n}")
    worst = 0.0
    worst_n = 1
    for n in range(1, max_n + 1):
        rel = fekete_check(n).measured["rel_err"]
        if rel > worst:
            worst = rel
            worst_n = n
    return CheckReport(
        "fekete",
        worst <= 1e-10,
        {"max_rel_err": float(worst), "worst_n": float(worst_n),
         "max_n": float(max_n)},
        {"rel_err": 1e-10},
        f"sine product identity swept over N = 1..{max_n}",
    )


# -- robustness under manual injections ----------------------------------------


def stability_check(base: GreedyRun, perturbed: GreedyRun, N: int) -> CheckReport:
    """N d_l1(perturbed prefix N)/(log N)^2 at most twice the base value.

    The perturbed run must differ from base only by at most 8 manually
    injected points, all scheduled by count 64, and both runs must
    reach N.
    """
    if base.config.kernel is not perturbed.config.kernel:
        raise StateError("stability_check needs runs with the same kernel")
    if base.config.mode is not perturbed.config.mode:
        raise StateError("stability_check needs runs with the same mode")
    if tuple(base.seed.angles) != tuple(perturbed.seed.angles):
        raise StateError("stability_check needs runs from the same seed")
    if base.injections:
        raise StateError("stability_check needs an uninjected base run")
    injected = sum(len(batch) for _, batch in perturbed.injections)
    if injected > 8:
        raise StateError(f"at most 8 injected points allowed: {injected}")
    if any(at > 64 for at, _ in perturbed.injections):
        raise StateError("injections must happen by count 64")
    if N < 2:
        raise ValueError(f"N must be >= 2: {N}")
    for run, label in ((base, "base"), (perturbed, "perturbed")):
        if len(run.final) < N:
            raise StateError(f"{label} run has fewer than {N} points")

    def quantity(run: GreedyRun) -> float:
        s = np.sort(as_angles(run.final)[:N])
        return N * _d_l1_from_sorted(s) / math.log(N) ** 2

    q_base = quantity(base)
    q_pert = quantity(perturbed)
    factor = q_pert / q_base
    return CheckReport(
        "stability",
        factor <= 2.0,
        {"base": float(q_base), "perturbed": float(q_pert),
         "factor": float(factor), "N": float(N)},
        {"factor": 2.0},
        f"normalized averaged discrepancy after {injected} injected points",
    )
