"""Committed benchmark runs behind the regression baselines.

The growth-rate checks have no universal constants, so they compare
against ratios recorded from a known good build (the JSON files under
baselines/). These definitions pin exactly which runs those ratios came
from: seed angles, mode, kernel, and the counts the ratios are taken
at. The literals are frozen; changing any of them silently invalidates
every committed number, so regenerate the baselines if you must touch
them.

Three symmetric seeds (an axis-adjacent pair, an interior pair, and a
ten-point mirror-paired random draw) and three plain seeds (the origin,
a single interior point, and a five-point random draw). The random
literals were drawn once from a fixed generator and pasted in, so they
do not depend on the RNG stream staying stable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .greedy import GreedyConfig, GreedyRun, Mode, run
from .kernels import KernelKind
from .pointset import CirclePointSet

__all__ = ["BASELINE_COUNTS", "BENCHMARKS", "BenchmarkSpec", "benchmark_run"]

# Dyadic counts the committed ratio baselines are recorded at.
BASELINE_COUNTS = (64, 128, 256, 512, 1024)


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    mode: Mode
    seed_angles: tuple[float, ...]

    @property
    def ratio_check(self) -> str:
        """Which averaged-discrepancy ratio this run feeds."""
        return "theorem1" if self.mode is Mode.SYMMETRIC else "theorem2"


# numpy default_rng(577215664): five uniforms on (0.01, 0.49), sorted,
# each followed by its mirror.
_SYM_RANDOM = (
    0.22427787347732595, 0.775722126522674,
    0.2635766067415305, 0.7364233932584695,
    0.412423727366156, 0.587576272633844,
    0.4191332716863961, 0.580866728313604,
    0.4435943647455717, 0.5564056352544283,
)

# Five uniforms on [0, 1) from the same stream, sorted.
_PLAIN_RANDOM = (
    0.019955189728704803,
    0.26446303514996916,
    0.3601884695138209,
    0.7165460137920148,
    0.781114575330789,
)

BENCHMARKS = {spec.name: spec for spec in (
    BenchmarkSpec("sym-axis", Mode.SYMMETRIC, (0.125, 0.875)),
    BenchmarkSpec("sym-inner", Mode.SYMMETRIC, (0.3, 0.7)),
    BenchmarkSpec("sym-random", Mode.SYMMETRIC, _SYM_RANDOM),
    BenchmarkSpec("plain-origin", Mode.PLAIN, (0.0,)),
    BenchmarkSpec("plain-inner", Mode.PLAIN, (0.3,)),
    BenchmarkSpec("plain-random", Mode.PLAIN, _PLAIN_RANDOM),
)}


def benchmark_run(name: str, target_count: int = 1024) -> GreedyRun:
    """Grow the named benchmark with the LogSin kernel to target_count."""
    spec = BENCHMARKS[name]
    config = GreedyConfig(
        kernel=KernelKind.LOG_SIN,
        mode=spec.mode,
        target_count=target_count,
    )
    return run(CirclePointSet(spec.seed_angles), config)
