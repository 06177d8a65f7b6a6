"""Greedy Leja construction on the circle.

Each step places the next point at the global minimizer of the potential
U(x) = sum_k G(dist(x, x_k)). Per gap between adjacent points U is smooth
and strictly convex (LogSin blows up at the gap ends; Bernoulli is a
parabola piece), so the global search decomposes into one unimodal search
per gap plus an order-independent reduction.

Search stages per gap:

* golden-section bracketing for gaps created by the previous insertion;
* safeguarded Newton refresh (on U') for surviving gaps, warm-started from
  their previous minimizer;
* a derivative-sign bisection "polish" of the winning gap. Value-based
  searches stall ~sqrt(eps) from a smooth minimum where the potential goes
  numerically flat; the sign of U' stays resolvable down to ~1e-13, and at
  exactly representable symmetric configurations the tan-form derivative
  cancels to exactly 0.0, which is what reproduces the van der Corput
  lattice bit-for-bit from seed {0}.

Symmetric mode places the winner together with its mirror 1 - x. When the
unconstrained winner lands within self_conjugate_exclusion of an axis point
(0 or 1/2), the step is redone with those closed neighborhoods excluded;
convexity puts the constrained minimum on the exclusion boundary, so the
mechanism emits a near-axis mirror pair instead of a degenerate duplicate.

The LEJA_THREADS environment variable caps worker threads for the matrix
evaluations. Rows are processed in fixed-size blocks whose contents never
depend on the thread count, so outputs are byte-identical at any setting.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .kernels import KernelKind, SingularityError, kernel_value, wrapped_distance
from .pointset import (
    DISTINCTNESS_TOLERANCE,
    CirclePointSet,
    DistinctnessError,
    Gap,
    Provenance,
    StateError,
    as_angles,
    insert,
    is_mirror_paired,
)

__all__ = [
    "Mode",
    "GreedyConfig",
    "StepRecord",
    "GreedyRun",
    "DegenerateGapError",
    "SymmetryError",
    "potential",
    "gap_minimize",
    "leja_step",
    "symmetric_leja_step",
    "inject_manual",
    "run",
    "parse_injection_schedule",
]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = 1.0 - _INVPHI

# Row-block size for matrix evaluations; fixed so that blocking (and hence
# every float) is independent of LEJA_THREADS.
_BLOCK_ROWS = 256

# room for cold midpoint starts to converge before the golden fallback
_NEWTON_MAX_ITER = 24
_AXES = (0.0, 0.5)


class DegenerateGapError(RuntimeError):
    """Raised when a gap is too short to search (< 4 * position_tolerance)."""


class SymmetryError(ValueError):
    """Raised when an operation requires mirror-paired input and got none."""


class Mode(enum.Enum):
    PLAIN = "plain"
    SYMMETRIC = "symmetric"


@dataclass(frozen=True)
class GreedyConfig:
    kernel: KernelKind
    mode: Mode
    target_count: int
    tie_tolerance: float = 1e-12
    position_tolerance: float = 1e-13
    self_conjugate_exclusion: float = 1e-9

    def __post_init__(self) -> None:
        if self.tie_tolerance <= 0.0 or self.position_tolerance <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.self_conjugate_exclusion <= 0.0:
            raise ValueError("self_conjugate_exclusion must be positive")
        if self.target_count < 1:
            raise ValueError(f"target_count must be >= 1: {self.target_count}")
        if self.mode is Mode.SYMMETRIC:
            if self.kernel is not KernelKind.LOG_SIN:
                raise ValueError("symmetric mode is defined for LogSin only")
            if self.target_count % 2 != 0:
                raise ValueError("symmetric mode needs an even target_count")


@dataclass(frozen=True)
class StepRecord:
    step_index: int
    placed: tuple[float, ...]
    potential_at_min: float
    chosen_gap: Gap
    tie_count: int
    self_conjugate_event: bool


@dataclass(frozen=True)
class GreedyRun:
    config: GreedyConfig
    seed: CirclePointSet
    steps: tuple[StepRecord, ...]
    final: CirclePointSet
    injections: tuple[tuple[int, tuple[float, ...]], ...] = field(default=())


def _thread_count() -> int:
    raw = os.environ.get("LEJA_THREADS", "").strip()
    if raw:
        try:
            value = int(raw)
        except ValueError as exc:
            raise ValueError(f"LEJA_THREADS must be an integer: {raw!r}") from exc
        if value < 1:
            raise ValueError(f"LEJA_THREADS must be >= 1: {value}")
        return value
    return os.cpu_count() or 1


def potential(points, kernel: KernelKind, x: float) -> float:
    """Total potential sum_k G(dist(x, x_k)) at angle x.

    Propagates SingularityError when x sits on an existing point under
    LogSin.
    """
    angles = as_angles(points)
    if angles.size == 0:
        raise StateError("potential needs a nonempty set")
    total = 0.0
    for a in angles:
        total += kernel_value(kernel, wrapped_distance(x, float(a)))
    return total


class _GapEngine:
    """Mutable search state: points, sorted order, per-gap minimizer cache.

    Gaps are indexed by their left endpoint's position in the sorted array;
    gap i runs from sorted[i] to sorted[i+1] (lifted by +1 on the wrap).
    cand_x/cand_u hold the cached per-gap minimizer and its potential, with
    cand_d2 the curvature there (NaN until a refresh has seen the gap);
    stale marks gaps whose cache must be rebuilt from scratch.
    """

    def __init__(self, angles: Sequence[float], kernel: KernelKind,
                 position_tolerance: float, threads: int | None = None):
        self.kernel = kernel
        self.postol = float(position_tolerance)
        self.pts = np.asarray(list(angles), dtype=float)
        if self.pts.size == 0:
            raise StateError("engine needs at least one point")
        self.order = np.argsort(self.pts, kind="stable")
        n = self.pts.size
        self.cand_x = np.zeros(n)
        self.cand_u = np.zeros(n)
        self.cand_d2 = np.full(n, np.nan)
        self.stale = np.ones(n, dtype=bool)
        self.threads = _thread_count() if threads is None else threads
        self._pool = (
            ThreadPoolExecutor(max_workers=self.threads)
            if self.threads > 1
            else None
        )

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    # -- geometry ---------------------------------------------------------

    def gap_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Left endpoints and lifted right endpoints of all gaps."""
        s = self.pts[self.order]
        lo = s
        hi = np.empty_like(s)
        hi[:-1] = s[1:]
        hi[-1] = s[0] + 1.0
        return lo, hi

    # -- kernel matrix evaluations ----------------------------------------

    def _eval_block(self, xs: np.ndarray, want: str, out: np.ndarray,
                    out2: np.ndarray | None) -> None:
        t = xs[:, None] - self.pts[None, :]
        t -= np.floor(t)
        if self.kernel is KernelKind.LOG_SIN:
            with np.errstate(divide="ignore", invalid="ignore"):
                if want == "value":
                    out[:] = -np.log(2.0 * np.sin(np.pi * t)).sum(axis=1)
                elif want == "deriv2":
                    # U' = pi sum tan(pi (t - 1/2)) = -pi sum cot(pi t);
                    # the tan form cancels exactly on symmetric lattices
                    g = np.tan(np.pi * (t - 0.5))
                    out[:] = np.pi * g.sum(axis=1)
                    out2[:] = (np.pi * np.pi) * (1.0 + g * g).sum(axis=1)
                elif want == "value_deriv":
                    s = np.sin(np.pi * t)
                    out[:] = -np.log(2.0 * s).sum(axis=1)
                    out2[:] = -np.pi * (np.cos(np.pi * t) / s).sum(axis=1)
                else:  # bare derivative, same tan form
                    out[:] = np.tan(np.pi * (t - 0.5)).sum(axis=1)
        else:
            if want == "value":
                out[:] = 0.25 * (t * (t - 1.0) + 1.0 / 6.0).sum(axis=1)
            elif want == "deriv2":
                out[:] = 0.25 * (2.0 * t - 1.0).sum(axis=1)
                out2[:] = np.full(t.shape[0], 0.5 * t.shape[1])
            elif want == "value_deriv":
                out[:] = 0.25 * (t * (t - 1.0) + 1.0 / 6.0).sum(axis=1)
                out2[:] = 0.25 * (2.0 * t - 1.0).sum(axis=1)
            else:
                out[:] = (t - 0.5).sum(axis=1)

    def _eval(self, xs: np.ndarray, want: str) -> tuple[np.ndarray, np.ndarray | None]:
        xs = np.ascontiguousarray(xs, dtype=float)
        m = xs.size
        out = np.empty(m)
        out2 = np.empty(m) if want in ("deriv2", "value_deriv") else None
        if m <= _BLOCK_ROWS:
            self._eval_block(xs, want, out, out2)
            return out, out2
        blocks = [
            slice(i, min(i + _BLOCK_ROWS, m)) for i in range(0, m, _BLOCK_ROWS)
        ]
        if self._pool is not None and len(blocks) > 1:
            futures = [
                self._pool.submit(
                    self._eval_block,
                    xs[b],
                    want,
                    out[b],
                    None if out2 is None else out2[b],
                )
                for b in blocks
            ]
            for f in futures:
                f.result()
        else:
            for b in blocks:
                self._eval_block(xs[b], want, out[b], None if out2 is None else out2[b])
        return out, out2

    def value(self, xs: np.ndarray) -> np.ndarray:
        return self._eval(xs, "value")[0]

    def deriv_sign_form(self, x: float) -> float:
        """U'(x) up to a positive factor, in the exactly-cancelling form."""
        out, _ = self._eval(np.array([x]), "deriv")
        return float(out[0])

    # -- per-gap searches ---------------------------------------------------

    def _golden(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Lockstep golden-section over [lo, hi] (lifted); returns positions."""
        lo = lo.copy()
        hi = hi.copy()
        h = hi - lo
        # iteration cap covers shrinking any unit gap to ulp spacing; the
        # stop width can otherwise sit below the local float resolution
        stop = self.postol * np.maximum(h, 1e-3)
        x1 = lo + _INVPHI2 * h
        x2 = lo + _INVPHI * h
        f1 = self.value(x1)
        f2 = self.value(x2)
        active = h > stop
        for _ in range(200):
            if not np.any(active):
                break
            sel = f1 < f2  # keep left bracket
            idx = np.nonzero(active)[0]
            s = sel[idx]
            left = idx[s]
            right = idx[~s]
            hi[left] = x2[left]
            x2[left] = x1[left]
            f2[left] = f1[left]
            x1[left] = lo[left] + _INVPHI2 * (hi[left] - lo[left])
            lo[right] = x1[right]
            x1[right] = x2[right]
            f1[right] = f2[right]
            x2[right] = lo[right] + _INVPHI * (hi[right] - lo[right])
            xeval = np.concatenate([x1[left], x2[right]])
            fe = self.value(xeval)
            f1[left] = fe[: left.size]
            f2[right] = fe[left.size:]
            shrunk = hi - lo
            # a bracket pinned at float spacing stops shrinking; drop it
            active = (shrunk > stop) & (shrunk < h)
            h = shrunk
        return np.where(f1 < f2, x1, x2)

    def _newton(
        self, warm: np.ndarray, lo: np.ndarray, hi: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """Safeguarded Newton on U' within (lo, hi), warm-started.

        Falls back to bisection on bracket escape and to golden section for
        rows that fail to converge.  Returns the minimizers and the last
        curvature seen per row (NaN on the golden path), which insert_point
        uses to predict how minimizers move.
        """
        x = warm.copy()
        blo = lo.copy()
        bhi = hi.copy()
        d2_out = np.full(x.size, np.nan)
        tol = 0.5 * self.postol * np.maximum(hi - lo, 1e-3)
        live = np.arange(x.size)
        for _ in range(_NEWTON_MAX_ITER):
            if live.size == 0:
                break
            d1, d2 = self._eval(x[live], "deriv2")
            d2_out[live] = d2
            pos = d1 > 0.0
            bhi[live[pos]] = x[live[pos]]
            blo[live[~pos]] = x[live[~pos]]
            with np.errstate(divide="ignore", invalid="ignore"):
                step = d1 / d2
                prop = x[live] - step
            # a sub-spacing step means the iterate is converged in place;
            # without this the proposal rounds onto the bracket end (just
            # set to x itself), trips the escape test, and the midpoint
            # fallback discards a finished row
            settled = np.abs(step) <= 4.0 * np.spacing(np.abs(x[live]))
            prop[settled] = x[live][settled]
            bad = ~settled & (
                ~np.isfinite(prop) | (prop <= blo[live]) | (prop >= bhi[live])
            )
            prop[bad] = 0.5 * (blo[live][bad] + bhi[live][bad])
            delta = np.abs(prop - x[live])
            x[live] = prop
            # the nominal tolerance can sit below float spacing on lifted
            # positions; steps at spacing scale are converged
            live = live[
                ~settled
                & (delta > np.maximum(tol[live], 4.0 * np.spacing(np.abs(prop))))
            ]
        if live.size:
            x[live] = self._golden(lo[live], hi[live])
            d2_out[live] = np.nan
        return x, d2_out

    def _polish(self, glo: float, ghi: float) -> float:
        """Bisection on the sign of U' over the whole gap (lifted bounds)."""
        lo, hi = glo, ghi
        stop = self.postol * max(hi - lo, 1e-3)
        while hi - lo > stop:
            m = 0.5 * (lo + hi)
            if m <= lo or m >= hi:
                break  # bracket has closed to adjacent floats
            g = self.deriv_sign_form(m)
            if g == 0.0:
                return m % 1.0
            if g > 0.0:
                hi = m
            else:
                lo = m
        return (0.5 * (lo + hi)) % 1.0

    # -- cache maintenance --------------------------------------------------

    def refresh(self) -> None:
        """Bring every gap's cached minimizer and value up to date."""
        lo, hi = self.gap_bounds()
        if np.any(hi - lo < 4.0 * self.postol):
            worst = int(np.argmin(hi - lo))
            raise DegenerateGapError(
                f"gap at {lo[worst]!r} has length {hi[worst] - lo[worst]!r}"
            )
        stale_idx = np.nonzero(self.stale)[0]
        warm_idx = np.nonzero(~self.stale)[0]
        if stale_idx.size:
            # fresh gaps have no cached minimizer; the per-gap potential is
            # strictly convex, so bracketed Newton from the midpoint lands in
            # a handful of evaluations (golden section needs ~60) and its
            # internal fallback still covers the stubborn rows
            slo = lo[stale_idx]
            shi = hi[stale_idx]
            sx, sd2 = self._newton(0.5 * (slo + shi), slo, shi)
            self.cand_x[stale_idx] = sx % 1.0
            self.cand_d2[stale_idx] = sd2
        if warm_idx.size:
            wx = self.cand_x[warm_idx]
            wlo = lo[warm_idx]
            lifted = np.where(wx < wlo, wx + 1.0, wx)
            nx, nd2 = self._newton(lifted, wlo, hi[warm_idx])
            self.cand_x[warm_idx] = nx % 1.0
            self.cand_d2[warm_idx] = nd2
        self.cand_u[:] = self.value(self.cand_x[: self.pts.size])
        self.stale[:] = False

    def insert_point(self, x: float) -> int:
        """Insert x; the split gap's halves become stale. Returns the
        sorted position of x, which is also where parallel per-gap arrays
        must insert their fresh slot."""
        diff = np.abs(self.pts - x)
        if np.minimum(diff, 1.0 - diff).min() < DISTINCTNESS_TOLERANCE:
            raise DistinctnessError(f"angle {x!r} collides with an existing point")
        n = self.pts.size
        s = self.pts[self.order]
        k = int(np.searchsorted(s, x))
        self.pts = np.append(self.pts, x)
        self.order = np.insert(self.order, k, n)
        # old gap j keeps slot j for j < k and moves to j+1 for j >= k, so
        # slots k-1 and k are the two halves of the gap x landed in (k-1
        # wraps to the last slot when x is the new smallest angle)
        self.cand_x = np.insert(self.cand_x, k, 0.0)
        self.cand_u = np.insert(self.cand_u, k, 0.0)
        self.cand_d2 = np.insert(self.cand_d2, k, np.nan)
        self.stale = np.insert(self.stale, k, True)
        self.stale[k - 1] = True
        self._predict_minimizers(x, np.insert(s, k, x))
        return k

    def _predict_minimizers(self, x: float, s: np.ndarray) -> None:
        """First-order shift of the warm minimizers from a new point at x.

        The new term moves each cached minimizer m by about -G'(m - x) over
        the updated curvature; applying that shift turns the next refresh
        into a one-iteration confirmation for most gaps.  Unsafe steps stay
        unapplied, which only costs the refresh an extra iteration.
        """
        glo = s
        ghi = np.append(s[1:], s[0] + 1.0)
        t = self.cand_x - x
        t -= np.floor(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kernel is KernelKind.LOG_SIN:
                tan = np.tan(np.pi * (t - 0.5))
                g1 = np.pi * tan
                g2 = (np.pi * np.pi) * (1.0 + tan * tan)
            else:
                g1 = 0.25 * (2.0 * t - 1.0)
                g2 = np.full(t.size, 0.5)
            d2p = self.cand_d2 + g2
            step = g1 / d2p
        pred = self.cand_x - step
        plift = np.where(pred < glo, pred + 1.0, pred)
        ok = (
            ~self.stale
            & np.isfinite(step)
            & (np.abs(step) < 0.2 * (ghi - glo))
            & (plift > glo)
            & (plift < ghi)
        )
        self.cand_x[ok] = pred[ok] % 1.0
        self.cand_d2[ok] = d2p[ok]

    def invalidate(self) -> None:
        self.stale[:] = True

    # -- step selection -----------------------------------------------------

    def select_winner(self, tie_tolerance: float) -> tuple[int, int]:
        """Index of the winning gap plus the tie count.

        Among gaps whose cached value is within tie_tolerance of the global
        minimum, the smallest candidate angle wins; the reduction is
        order-independent.
        """
        u = self.cand_u
        umin = float(u.min())
        tied = np.nonzero(u <= umin + tie_tolerance)[0]
        winner = int(tied[np.argmin(self.cand_x[tied])])
        return winner, int(tied.size)

    def gap_of(self, index: int) -> tuple[float, float]:
        lo, hi = self.gap_bounds()
        return float(lo[index]), float(hi[index])


def _require_gap_searchable(length: float, position_tolerance: float) -> None:
    if length < 4.0 * position_tolerance:
        raise DegenerateGapError(
            f"gap of length {length!r} is below 4*position_tolerance"
        )


def gap_minimize(
    points,
    kernel: KernelKind,
    gap: Gap,
    position_tolerance: float = 1e-13,
) -> tuple[float, float]:
    """Minimizer and minimum of the potential over one open gap.

    Golden-section bracketing followed by the derivative-sign polish; the
    returned position is within position_tolerance of the interior
    minimizer, and the value is evaluated through the public potential().
    """
    engine = _GapEngine(as_angles(points), kernel, position_tolerance, threads=1)
    lo = gap.left
    hi = gap.right if gap.right > gap.left else gap.right + 1.0
    _require_gap_searchable(hi - lo, position_tolerance)
    coarse = float(engine._golden(np.array([lo]), np.array([hi]))[0])
    x = engine._polish(lo, hi)
    u_coarse = float(engine.value(np.array([coarse % 1.0]))[0])
    u_polish = float(engine.value(np.array([x]))[0])
    # values agreeing to rounding must resolve to the polished position,
    # the one that actually carries the position_tolerance guarantee
    if u_polish <= u_coarse + 1e-12 * (1.0 + abs(u_coarse)):
        x_best = x
    else:
        x_best = coarse % 1.0
    return x_best, potential(points, kernel, x_best)


def _engine_for(points, config: GreedyConfig) -> _GapEngine:
    return _GapEngine(
        as_angles(points), config.kernel, config.position_tolerance
    )


def _recorded_gap(engine: _GapEngine, index: int) -> Gap:
    """The searched gap with both endpoints as original angles in [0, 1).

    Reducing the lifted right endpoint with % 1.0 would not round-trip
    (x + 1.0 - 1.0 != x for small x), misrecording a full-circle gap as a
    sliver.
    """
    lo = engine.gap_bounds()[0]
    return Gap(float(lo[index]), float(lo[(index + 1) % lo.size]))


def _plain_step(engine: _GapEngine, config: GreedyConfig, step_index: int) -> StepRecord:
    engine.refresh()
    winner, ties = engine.select_winner(config.tie_tolerance)
    glo, ghi = engine.gap_of(winner)
    x = engine._polish(glo, ghi)
    u = float(engine.value(np.array([x]))[0])
    return StepRecord(
        step_index=step_index,
        placed=(x,),
        potential_at_min=u,
        chosen_gap=_recorded_gap(engine, winner),
        tie_count=ties,
        self_conjugate_event=False,
    )


def _feasible_subintervals(
    glo: float, ghi: float, exclusion: float
) -> list[tuple[float, float]]:
    """Gap minus the closed axis neighborhoods, as lifted intervals."""
    cuts = [(glo, ghi)]
    for axis in (0.0, 0.5, 1.0, 1.5):
        zlo, zhi = axis - exclusion, axis + exclusion
        nxt: list[tuple[float, float]] = []
        for lo, hi in cuts:
            if zhi <= lo or zlo >= hi:
                nxt.append((lo, hi))
                continue
            if zlo > lo:
                nxt.append((lo, zlo))
            if zhi < hi:
                nxt.append((zhi, hi))
        cuts = nxt
    return [(lo, hi) for lo, hi in cuts if hi > lo]


def _symmetric_step(
    engine: _GapEngine, config: GreedyConfig, step_index: int
) -> StepRecord:
    engine.refresh()
    winner, ties = engine.select_winner(config.tie_tolerance)
    glo, ghi = engine.gap_of(winner)
    x = engine._polish(glo, ghi)
    excl = config.self_conjugate_exclusion
    on_axis = any(
        min(abs(x - axis), 1.0 - abs(x - axis)) <= excl for axis in _AXES
    )
    if not on_axis:
        u = float(engine.value(np.array([x]))[0])
        return StepRecord(
            step_index=step_index,
            placed=(x, (1.0 - x) % 1.0),
            potential_at_min=u,
            chosen_gap=_recorded_gap(engine, winner),
            tie_count=ties,
            self_conjugate_event=False,
        )
    # constrained redo: exclude the axis neighborhoods everywhere.  Each
    # gap's minimizer is polished first (the cache is only bracketing
    # quality, which is too fuzzy to classify against 1e-9 zones); by
    # convexity the constrained minimum on a feasible piece is either that
    # minimizer or the nearest exclusion boundary.
    lo_all, hi_all = engine.gap_bounds()
    cand_pos: list[float] = []
    cand_gap: list[int] = []
    for gi in range(lo_all.size):
        glo_i, ghi_i = float(lo_all[gi]), float(hi_all[gi])
        gx = glo_i + ((engine._polish(glo_i, ghi_i) - glo_i) % 1.0)
        for lo, hi in _feasible_subintervals(glo_i, ghi_i, excl):
            if lo < gx < hi:
                cand_pos.append(gx)
            else:
                boundary = lo if gx <= lo else hi
                # gap endpoints are existing points, not feasible candidates
                if boundary == glo_i or boundary == ghi_i:
                    continue
                cand_pos.append(boundary)
            cand_gap.append(gi)
    if not cand_pos:
        raise StateError("no feasible placement outside the axis exclusions")
    pos = np.asarray(cand_pos) % 1.0
    vals = engine.value(pos)
    vmin = float(vals.min())
    tied = np.nonzero(vals <= vmin + config.tie_tolerance)[0]
    best = int(tied[np.argmin(pos[tied])])
    gi = cand_gap[best]
    x_star = float(pos[best])
    u = float(engine.value(np.array([x_star]))[0])
    return StepRecord(
        step_index=step_index,
        placed=(x_star, (1.0 - x_star) % 1.0),
        potential_at_min=u,
        chosen_gap=_recorded_gap(engine, gi),
        tie_count=int(tied.size),
        self_conjugate_event=True,
    )


def leja_step(points: CirclePointSet, config: GreedyConfig) -> StepRecord:
    """One plain greedy step against the given set (cold search)."""
    if config.mode is not Mode.PLAIN:
        raise StateError("leja_step requires plain mode")
    if len(points) < 1:
        raise StateError("leja_step needs a nonempty set")
    engine = _engine_for(points, config)
    try:
        return _plain_step(engine, config, 0)
    finally:
        engine.close()


def symmetric_leja_step(points: CirclePointSet, config: GreedyConfig) -> StepRecord:
    """One symmetric step: winner plus mirror against the current even set."""
    if config.mode is not Mode.SYMMETRIC:
        raise StateError("symmetric_leja_step requires symmetric mode")
    if len(points) % 2 != 0 or not is_mirror_paired(points):
        raise StateError("symmetric step needs an even, mirror-paired set")
    engine = _engine_for(points, config)
    try:
        return _symmetric_step(engine, config, 0)
    finally:
        engine.close()


def inject_manual(
    points: CirclePointSet, xs: Iterable[float], symmetric: bool = False
) -> CirclePointSet:
    """Insert caller-chosen angles with manual provenance.

    With symmetric=True the batch must be closed under x -> 1 - x (the run
    stays mirror-paired afterwards).
    """
    xs = [float(x) for x in xs]
    if symmetric:
        for x in xs:
            mirror = (1.0 - x) % 1.0
            if not any(wrapped_distance(mirror, y) <= 1e-12 for y in xs):
                raise SymmetryError(
                    f"injection {x!r} lacks its mirror {mirror!r}"
                )
    out = points
    for x in xs:
        out = insert(out, x, Provenance.MANUAL)
    return out


def parse_injection_schedule(text: str) -> tuple[tuple[int, tuple[float, ...]], ...]:
    """Parse lines of the form `at_count:angle[,angle...]`."""
    schedule: list[tuple[int, tuple[float, ...]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        head, sep, tail = line.partition(":")
        if not sep or not tail.strip():
            raise ValueError(f"line {lineno}: expected at_count:angle[,angle...]")
        try:
            at_count = int(head)
            angles = tuple(float(s) for s in tail.split(","))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
        schedule.append((at_count, angles))
    schedule.sort(key=lambda item: item[0])
    return tuple(schedule)


def run(
    seed: CirclePointSet,
    config: GreedyConfig,
    injections: Iterable[tuple[int, Iterable[float]]] = (),
) -> GreedyRun:
    """Grow the seed to target_count, applying scheduled manual injections.

    Bit-deterministic for identical inputs regardless of LEJA_THREADS.
    """
    symmetric = config.mode is Mode.SYMMETRIC
    if len(seed) < 1:
        raise StateError("run needs a nonempty seed")
    if symmetric:
        if len(seed) % 2 != 0 or len(seed) < 2 or not is_mirror_paired(seed):
            raise StateError("symmetric mode needs an even mirror-paired seed")
    if config.target_count < len(seed):
        raise ValueError(
            f"target_count {config.target_count} is below seed size {len(seed)}"
        )
    schedule = sorted(
        ((int(at), tuple(float(a) for a in angles)) for at, angles in injections),
        key=lambda item: item[0],
    )
    for at, angles in schedule:
        if not angles:
            raise ValueError(f"injection at {at} has no angles")
        if at < len(seed):
            raise ValueError(f"injection at {at} predates the seed size {len(seed)}")
        if at >= config.target_count:
            raise ValueError(
                f"injection at {at} can never fire before target "
                f"{config.target_count}"
            )
        if symmetric and len(angles) % 2 != 0:
            raise SymmetryError(f"injection at {at} must be mirror-paired")

    current = seed
    engine = _GapEngine(seed.angles, config.kernel, config.position_tolerance)
    steps: list[StepRecord] = []
    pending = list(schedule)
    try:
        while len(current) < config.target_count:
            while pending and pending[0][0] <= len(current):
                at, angles = pending.pop(0)
                if len(current) + len(angles) > config.target_count:
                    raise ValueError(
                        f"injection at {at} would overshoot target_count "
                        f"{config.target_count}"
                    )
                current = inject_manual(current, angles, symmetric=symmetric)
                for a in angles:
                    engine.insert_point(float(a))
                engine.invalidate()
            if len(current) >= config.target_count:
                break
            if symmetric:
                record = _symmetric_step(engine, config, len(steps))
            else:
                record = _plain_step(engine, config, len(steps))
            for x in record.placed:
                current = insert(current, x, Provenance.GREEDY)
                engine.insert_point(x)
            steps.append(record)
    finally:
        engine.close()
    return GreedyRun(
        config=config,
        seed=seed,
        steps=tuple(steps),
        final=current,
        injections=tuple((at, angles) for at, angles in schedule),
    )
