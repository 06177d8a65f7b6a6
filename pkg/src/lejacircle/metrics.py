"""Exact regularity functionals for circle point sets.

Everything here is closed-form or certified quadrature:

* discrepancy norms integrate the piecewise-linear D_N segment by segment;
* F_N norms use the per-segment linear structure (L¹) and the pairwise
  Bernoulli identity sum_l cos(2 pi l d)/l² = pi² B₂({d}) (L²);
* log-potential norms use the same pairwise identity (L²) and the Clausen
  antiderivative between sign changes (L¹), with the sign changes located
  by bisection/Newton (at most two per gap: the potential is convex per
  gap and blows up at the gap ends);
* a_N reuses the greedy engine's per-gap minimization.

metrics_over_prefixes replays a run's insertion order, keeping the gap
minimizer cache and the dip roots warm from one prefix to the next, so an
all-prefix sweep costs a small constant times the generating run itself.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .greedy import GreedyRun, _GapEngine
from .kernels import KernelKind, kernel_antiderivative
from .pointset import StateError, _atomic_write_text, as_angles

__all__ = [
    "MetricsRow",
    "METRICS_CSV_HEADER",
    "ConvergenceError",
    "star_discrepancy_linf",
    "discrepancy_l1",
    "discrepancy_l2_sq",
    "fn_l1",
    "fn_l2_sq",
    "logpot_l2_sq",
    "logpot_l1",
    "erdos_a",
    "pair_energy",
    "metrics_over_prefixes",
    "metrics_over_sequence",
    "write_metrics_csv",
    "read_metrics_csv",
]

METRICS_CSV_HEADER = (
    "N",
    "d_l1",
    "d_l2_sq",
    "d_linf",
    "f_l1",
    "f_l2_sq",
    "logpot_l1",
    "logpot_l2_sq",
    "a_N",
    "pair_energy",
)

_POSITION_TOLERANCE = 1e-13
_PAIR_BLOCK = 512

# Dip roots only need to be accurate relative to their gap: the integrand
# vanishes at a root, so the integral error is second order in the root
# offset.  1e-6 of the gap keeps logpot_l1 good to ~1e-10 even at a
# thousand points while costing half the iterations a tight stop would.
_ROOT_RTOL = 1e-6


class ConvergenceError(RuntimeError):
    """Raised when a sign-change search fails; unreachable for distinct points."""


@dataclass(frozen=True)
class MetricsRow:
    N: int
    d_l1: float
    d_l2_sq: float
    d_linf: float
    f_l1: float
    f_l2_sq: float
    logpot_l1: float
    logpot_l2_sq: float
    a_N: float
    pair_energy: float

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError(f"N must be >= 1: {self.N}")
        for name in ("d_l1", "d_l2_sq", "d_linf", "f_l1", "f_l2_sq",
                     "logpot_l1", "logpot_l2_sq"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        if self.a_N <= 0.0:
            raise ValueError("a_N must be > 0")


def _sorted_angles(points) -> np.ndarray:
    angles = as_angles(points)
    if angles.size == 0:
        raise StateError("metric needs a nonempty set")
    return np.sort(angles)


# -- discrepancy D_N ---------------------------------------------------------


def star_discrepancy_linf(points) -> float:
    """sup_x |#{x_k <= x}/N - x|, from the sorted one-sided extremes."""
    s = _sorted_angles(points)
    n = s.size
    i = np.arange(1, n + 1)
    return float(
        np.maximum(np.abs(i / n - s), np.abs((i - 1) / n - s)).max()
    )


def _disc_segments(s: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-segment count level c and bounds [a, b]; D_N = c - x on each."""
    n = s.size
    bounds = np.concatenate(([0.0], s, [1.0]))
    c = np.arange(n + 1) / n
    return c, bounds[:-1], bounds[1:]


def _d_l1_from_sorted(s: np.ndarray) -> float:
    c, a, b = _disc_segments(s)
    ta, tb = c - a, c - b
    return float((0.5 * ta * np.abs(ta) - 0.5 * tb * np.abs(tb)).sum())


def discrepancy_l1(points) -> float:
    return _d_l1_from_sorted(_sorted_angles(points))


def discrepancy_l2_sq(points) -> float:
    c, a, b = _disc_segments(_sorted_angles(points))
    return float((((c - a) ** 3 - (c - b) ** 3) / 3.0).sum())


# -- F_N = (1/N) sum f(x - x_k), f(t) = 1/2 - {t} ----------------------------


def _fn_l1_from_sorted(s: np.ndarray) -> float:
    n = s.size
    total = float(s.sum())
    i = np.arange(1, n + 1)
    # value just after the i-th sorted point; F_N then falls with slope -1
    v = 0.5 - s + total / n - (n - i) / n
    length = np.empty(n)
    length[:-1] = np.diff(s)
    length[-1] = 1.0 - s[-1] + s[0]
    lo = v - length
    crossing = (v > 0.0) & (lo < 0.0)
    seg = np.where(
        crossing,
        0.5 * (v * v + lo * lo),
        0.5 * length * np.abs(v + lo),
    )
    return float(seg.sum())


def fn_l1(points) -> float:
    """Exact integral of |F_N| over one period."""
    return _fn_l1_from_sorted(_sorted_angles(points))


def _pairwise_b2_sum(angles: np.ndarray) -> float:
    """sum_{i,j} B2({x_i - x_j}), diagonal included (B2(0) = 1/6)."""
    n = angles.size
    total = 0.0
    for start in range(0, n, _PAIR_BLOCK):
        rows = angles[start:start + _PAIR_BLOCK, None] - angles[None, :]
        rows -= np.floor(rows)
        total += float((rows * (rows - 1.0) + 1.0 / 6.0).sum())
    return total


def fn_l2_sq(points) -> float:
    """Diaphony-type norm: (1/(2 N^2)) sum_{i,j} B2({x_i - x_j})."""
    angles = as_angles(points)
    if angles.size == 0:
        raise StateError("metric needs a nonempty set")
    n = angles.size
    return _pairwise_b2_sum(angles) / (2.0 * n * n)


def logpot_l2_sq(points) -> float:
    """(pi^2/2) sum_{i,j} B2({x_i - x_j}) = pi^2 N^2 fn_l2_sq."""
    angles = as_angles(points)
    if angles.size == 0:
        raise StateError("metric needs a nonempty set")
    return 0.5 * math.pi * math.pi * _pairwise_b2_sum(angles)


# -- log-potential L1 via dip roots ------------------------------------------


class _DipCache:
    """Dip-root positions and slopes carried between prefixes of a sweep.

    Arrays are gap-slot aligned (NaN where a gap has no dip or no history).
    insert and predict keep them usable across insertions: the roots of the
    split gap's halves inherit what stays valid, and every surviving root is
    moved by the first-order shift the new log term induces, which makes the
    next Newton solve a one-iteration confirmation for most gaps.
    """

    __slots__ = ("r1", "du1", "r2", "du2")

    def __init__(self, n: int) -> None:
        self.r1 = np.full(n, np.nan)
        self.du1 = np.full(n, np.nan)
        self.r2 = np.full(n, np.nan)
        self.du2 = np.full(n, np.nan)

    def insert(self, k: int) -> None:
        """Mirror an engine insert at sorted slot k (see insert_point)."""
        self.r1 = np.insert(self.r1, k, np.nan)
        self.du1 = np.insert(self.du1, k, np.nan)
        self.r2 = np.insert(self.r2, k, np.nan)
        self.du2 = np.insert(self.du2, k, np.nan)
        # the right half of the split gap inherits the parent's right root
        # and the left half keeps its left root; the two roots beside the
        # inserted point have no history
        self.r2[k] = self.r2[k - 1]
        self.du2[k] = self.du2[k - 1]
        self.r2[k - 1] = np.nan
        self.du2[k - 1] = np.nan

    def predict(self, x: float, lo: np.ndarray, hi: np.ndarray) -> None:
        """First-order root shift from a new point at angle x.

        The new term G(r - x) lifts U at each old root r, so the root moves
        by about -G/(du + G'); steps that are not clearly small stay
        unapplied (the solver's bracket checks cover those gaps anyway).
        """
        limit = 0.2 * (hi - lo)
        for r, du in ((self.r1, self.du1), (self.r2, self.du2)):
            t = r - x
            t -= np.floor(t)
            with np.errstate(divide="ignore", invalid="ignore"):
                g = -np.log(2.0 * np.sin(np.pi * t))
                tan = np.tan(np.pi * (t - 0.5))
                dup = du + np.pi * tan
                step = g / dup
            pred = r - step
            plift = np.where(pred < lo, pred + 1.0, pred)
            ok = (
                np.isfinite(step)
                & (np.abs(step) < limit)
                & (plift > lo)
                & (plift < hi)
            )
            r[ok] = pred[ok] % 1.0
            du[ok] = dup[ok]


def _dip_roots_cold(
    engine: _GapEngine,
    brack_lo: np.ndarray,
    brack_hi: np.ndarray,
    scale: np.ndarray,
    sign_lo_positive: np.ndarray,
) -> np.ndarray:
    """Bisection for the U sign change in (brack_lo, brack_hi).

    sign_lo_positive says whether U > 0 at the brack_lo side; callers know
    this structurally (gap ends sit at +inf, dip minimizers below zero), so
    no evaluation is spent on it.
    """
    lo = brack_lo.copy()
    hi = brack_hi.copy()
    stop = np.maximum(
        _ROOT_RTOL * np.maximum(scale, 1e-3),
        4.0 * np.spacing(np.maximum(np.abs(brack_lo), np.abs(brack_hi))),
    )
    for _ in range(64):
        width = np.abs(hi - lo)
        active = np.nonzero(width > stop)[0]
        if active.size == 0:
            break
        m = 0.5 * (lo[active] + hi[active])
        stalled = (m == lo[active]) | (m == hi[active])
        um = engine.value(m)
        toward_lo = (um > 0.0) == sign_lo_positive[active]
        lo[active[toward_lo & ~stalled]] = m[toward_lo & ~stalled]
        hi[active[~toward_lo & ~stalled]] = m[~toward_lo & ~stalled]
        if np.all(stalled):
            break
    return 0.5 * (lo + hi)


def _dip_roots_warm(
    engine: _GapEngine,
    roots: np.ndarray,
    brack_lo: np.ndarray,
    brack_hi: np.ndarray,
    scale: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Newton for U = 0 from start points, bisection-safeguarded.

    brack_lo must be the gap-end side (U positive there) and brack_hi the
    minimizer side (U negative); either order on the axis is fine.  U is
    monotone between the two, so this converges from any interior start,
    including a plain bracket midpoint for roots with no history.  Returns
    the roots and the last U' seen per row (feeds the next prediction).
    """
    lo = np.minimum(brack_lo, brack_hi).copy()
    hi = np.maximum(brack_lo, brack_hi).copy()
    # U is positive at the gap end, so at the lo end iff brack_lo is lo
    pos_is_lo = brack_lo < brack_hi
    x = np.clip(roots, lo, hi)
    slope = np.full(x.size, np.nan)
    tol = _ROOT_RTOL * np.maximum(scale, 1e-3)
    live = np.arange(x.size)
    for _ in range(16):
        if live.size == 0:
            break
        u, du = engine._eval(x[live], "value_deriv")
        slope[live] = du
        um_pos = u > 0.0
        to_lo = um_pos == pos_is_lo[live]
        lo[live[to_lo]] = x[live[to_lo]]
        hi[live[~to_lo]] = x[live[~to_lo]]
        with np.errstate(divide="ignore", invalid="ignore"):
            step = u / du
            prop = x[live] - step
        # sub-spacing steps are converged in place; see the greedy engine's
        # Newton for why they must skip the escape test
        settled = np.abs(step) <= 4.0 * np.spacing(np.abs(x[live]))
        prop[settled] = x[live][settled]
        bad = ~settled & (
            ~np.isfinite(prop) | (prop <= lo[live]) | (prop >= hi[live])
        )
        prop[bad] = 0.5 * (lo[live[bad]] + hi[live[bad]])
        delta = np.abs(prop - x[live])
        x[live] = prop
        live = live[
            ~settled
            & (delta > np.maximum(tol[live], 4.0 * np.spacing(np.abs(prop))))
        ]
    if live.size:
        # the loop above kept the lo-end sign invariant intact
        x[live] = _dip_roots_cold(
            engine, lo[live], hi[live], scale[live], pos_is_lo[live]
        )
    return x, slope


def _logpot_l1_from_engine(
    engine: _GapEngine,
    cache: _DipCache | None = None,
) -> tuple[float, _DipCache]:
    """Integral of |U| plus the refreshed dip cache.

    Uses the zero-mean of both kernels: integral of U over the circle is 0,
    so integral of |U| = -2 sum over dips of the signed dip integral, and
    each signed piece is the exact Clausen antiderivative sum.
    """
    lo, hi = engine.gap_bounds()
    n = lo.size
    mid = engine.cand_x.copy()
    mid = np.where(mid < lo, mid + 1.0, mid)
    dip = engine.cand_u < 0.0
    if cache is None:
        cache = _DipCache(n)
    out = _DipCache(n)
    idx = np.nonzero(dip)[0]
    if idx.size:
        scale = hi[idx] - lo[idx]
        for b_from, b_to, warm, out_r, out_du in (
            (lo[idx], mid[idx], cache.r1, out.r1, out.du1),
            (hi[idx], mid[idx], cache.r2, out.r2, out.du2),
        ):
            w = np.where(warm[idx] < lo[idx], warm[idx] + 1.0, warm[idx])
            inside = (
                np.isfinite(w)
                & (w > np.minimum(b_from, b_to))
                & (w < np.maximum(b_from, b_to))
            )
            # roots without a usable history start from the bracket midpoint;
            # the Newton solver handles both in one lockstep call
            start = np.where(inside, w, 0.5 * (b_from + b_to))
            roots, slopes = _dip_roots_warm(engine, start, b_from, b_to, scale)
            out_r[idx] = roots % 1.0
            out_du[idx] = slopes
    total = 0.0
    if idx.size:
        ends = np.concatenate([out.r2[idx], out.r1[idx]])
        signs = np.concatenate([np.ones(idx.size), -np.ones(idx.size)])
        for base in range(0, ends.size, _PAIR_BLOCK):
            block = slice(base, base + _PAIR_BLOCK)
            diffs = ends[block, None] - engine.pts[None, :]
            anti = kernel_antiderivative(engine.kernel, diffs)
            total += float((signs[block] * anti.sum(axis=1)).sum())
    return -2.0 * total, out


def logpot_l1(points) -> float:
    """Exact (to ~1e-9) integral of |sum_k log|2 sin(pi (x - x_k))||."""
    angles = as_angles(points)
    if angles.size == 0:
        raise StateError("metric needs a nonempty set")
    engine = _GapEngine(angles, KernelKind.LOG_SIN, _POSITION_TOLERANCE, threads=1)
    engine.refresh()
    value, _ = _logpot_l1_from_engine(engine)
    return value


def erdos_a(points) -> float:
    """max over the circle of prod |z - z_k| = exp(-min potential)."""
    angles = as_angles(points)
    if angles.size == 0:
        raise StateError("metric needs a nonempty set")
    engine = _GapEngine(angles, KernelKind.LOG_SIN, _POSITION_TOLERANCE, threads=1)
    engine.refresh()
    winner = int(np.argmin(engine.cand_u))
    glo, ghi = engine.gap_of(winner)
    x = engine._polish(glo, ghi)
    u = min(float(engine.cand_u.min()), float(engine.value(np.array([x]))[0]))
    return math.exp(-u)


def pair_energy(points) -> float:
    """sum over ordered pairs i != j of log|2 sin(pi (x_i - x_j))|."""
    angles = as_angles(points)
    if angles.size < 2:
        raise StateError("pair_energy needs at least 2 points")
    total = 0.0
    n = angles.size
    for start in range(0, n, _PAIR_BLOCK):
        rows = angles[start:start + _PAIR_BLOCK, None] - angles[None, :]
        rows -= np.floor(rows)
        with np.errstate(divide="ignore"):
            logs = np.log(2.0 * np.sin(np.pi * rows))
        # zero out the diagonal (t = 0 gives -inf)
        r = np.arange(start, min(start + _PAIR_BLOCK, n))
        logs[r - start, r] = 0.0
        total += float(logs.sum())
    return total


# -- prefix sweeps -----------------------------------------------------------


def _select_prefixes(total: int, which: str) -> list[int]:
    if which == "all":
        return list(range(1, total + 1))
    if which == "dyadic":
        out = [1]
        while out[-1] * 2 <= total:
            out.append(out[-1] * 2)
        return out
    raise ValueError(f"unknown prefix selector: {which!r}")


def metrics_over_sequence(angles: Sequence[float], which: str = "all") -> list[MetricsRow]:
    """One MetricsRow per selected prefix of the insertion-order sequence.

    The greedy gap cache, the dip roots, and the pairwise sums all carry
    over between prefixes, so a full sweep costs one insertion pass rather
    than a fresh computation per prefix.
    """
    angles = [float(a) for a in angles]
    if not angles:
        raise StateError("sweep needs a nonempty sequence")
    emit = set(_select_prefixes(len(angles), which))
    engine = _GapEngine(angles[:1], KernelKind.LOG_SIN, _POSITION_TOLERANCE)
    dips = _DipCache(1)
    b2 = 1.0 / 6.0
    pe = 0.0
    rows: list[MetricsRow] = []
    try:
        for n in range(1, len(angles) + 1):
            if n > 1:
                k = engine.insert_point(angles[n - 1])
                t = angles[n - 1] - engine.pts[:-1]
                t -= np.floor(t)
                b2 += 2.0 * float((t * (t - 1.0) + 1.0 / 6.0).sum()) + 1.0 / 6.0
                pe += 2.0 * float(np.log(2.0 * np.sin(np.pi * t)).sum())
                dips.insert(k)
                dips.predict(angles[n - 1], *engine.gap_bounds())
            if n not in emit:
                continue
            engine.refresh()
            s = np.sort(engine.pts)
            lp1, dips = _logpot_l1_from_engine(engine, dips)
            c, a, b = _disc_segments(s)
            ta, tb = c - a, c - b
            d1 = float((0.5 * ta * np.abs(ta) - 0.5 * tb * np.abs(tb)).sum())
            d2 = float(((ta ** 3 - tb ** 3) / 3.0).sum())
            i = np.arange(1, n + 1)
            dinf = float(np.maximum(np.abs(i / n - s), np.abs((i - 1) / n - s)).max())
            rows.append(MetricsRow(
                N=n,
                d_l1=d1,
                d_l2_sq=d2,
                d_linf=dinf,
                f_l1=_fn_l1_from_sorted(s),
                f_l2_sq=b2 / (2.0 * n * n),
                logpot_l1=lp1,
                logpot_l2_sq=0.5 * math.pi * math.pi * b2,
                a_N=math.exp(-float(engine.cand_u.min())),
                pair_energy=pe if n >= 2 else 0.0,
            ))
    finally:
        engine.close()
    return rows


def metrics_over_prefixes(run: GreedyRun, which: str = "all") -> list[MetricsRow]:
    """MetricsRows for the selected prefixes of a greedy run."""
    return metrics_over_sequence(run.final.angles, which)


# -- CSV ---------------------------------------------------------------------


def write_metrics_csv(rows: Iterable[MetricsRow], path: str) -> None:
    """17-significant-digit decimals, LF endings, atomic replace."""
    lines = [",".join(METRICS_CSV_HEADER)]
    for row in rows:
        lines.append(",".join(
            [str(row.N)]
            + [format(getattr(row, name), ".17g") for name in METRICS_CSV_HEADER[1:]]
        ))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_metrics_csv(path: str) -> list[MetricsRow]:
    rows: list[MetricsRow] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty metrics CSV")
        if tuple(header) != METRICS_CSV_HEADER:
            raise ValueError(f"{path}: line 1: bad header {header!r}")
        for lineno, record in enumerate(reader, start=2):
            if len(record) != len(METRICS_CSV_HEADER):
                raise ValueError(
                    f"{path}: line {lineno}: expected "
                    f"{len(METRICS_CSV_HEADER)} fields, got {len(record)}"
                )
            try:
                rows.append(MetricsRow(
                    N=int(record[0]),
                    **{
                        name: float(record[j + 1])
                        for j, name in enumerate(METRICS_CSV_HEADER[1:])
                    },
                ))
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from exc
    return rows
