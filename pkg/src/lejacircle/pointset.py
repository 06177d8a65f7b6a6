"""Point configurations on the circle and the classical reference sequences.

A CirclePointSet is an immutable snapshot: angles in [0, 1) kept in insertion
order with per-point provenance, plus a sorted index. Distinctness is enforced
at 1e-12 wrapped distance so downstream gap searches never see degenerate
gaps.
"""

from __future__ import annotations

import csv
import enum
import math
import os
import tempfile
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .kernels import wrapped_distance

__all__ = [
    "Provenance",
    "CirclePointSet",
    "Gap",
    "DistinctnessError",
    "StateError",
    "insert",
    "gaps",
    "van_der_corput",
    "kronecker",
    "roots_of_unity",
    "is_symmetric",
    "is_mirror_paired",
    "write_sequence_csv",
    "read_sequence_csv",
]

DISTINCTNESS_TOLERANCE = 1e-12
SYMMETRY_TOLERANCE = 1e-12

SEQUENCE_CSV_HEADER = ("index", "angle", "provenance")


class DistinctnessError(ValueError):
    """Raised when a new angle lands within 1e-12 of an existing one."""


class StateError(RuntimeError):
    """Raised when an operation's precondition on the set state fails."""


class Provenance(enum.Enum):
    SEED = "seed"
    GREEDY = "greedy"
    MANUAL = "manual"


@dataclass(frozen=True)
class Gap:
    """Open arc between two cyclically adjacent points.

    right is the cyclic successor of left; the arc may wrap through 0, in
    which case right < left numerically.
    """

    left: float
    right: float

    @property
    def length(self) -> float:
        span = self.right - self.left
        return span if span > 0.0 else span + 1.0


class CirclePointSet:
    """Immutable ordered configuration of distinct angles in [0, 1)."""

    __slots__ = ("_angles", "_provenances", "_sorted_index")

    def __init__(
        self,
        angles: Iterable[float] = (),
        provenances: Iterable[Provenance] | None = None,
    ) -> None:
        angles = tuple(float(a) for a in angles)
        if provenances is None:
            provenances = tuple(Provenance.SEED for _ in angles)
        else:
            provenances = tuple(provenances)
        if len(provenances) != len(angles):
            raise ValueError("angles and provenances must have equal length")
        for a in angles:
            if not (0.0 <= a < 1.0) or math.isnan(a):
                raise ValueError(f"angle out of range [0, 1): {a!r}")
        order = tuple(sorted(range(len(angles)), key=angles.__getitem__))
        for i, j in zip(order, order[1:]):
            if wrapped_distance(angles[i], angles[j]) < DISTINCTNESS_TOLERANCE:
                raise DistinctnessError(
                    f"angles {angles[i]!r} and {angles[j]!r} are closer than "
                    f"{DISTINCTNESS_TOLERANCE}"
                )
        if len(order) >= 2:
            first, last = angles[order[0]], angles[order[-1]]
            if wrapped_distance(first, last) < DISTINCTNESS_TOLERANCE:
                raise DistinctnessError(
                    f"angles {last!r} and {first!r} are closer than "
                    f"{DISTINCTNESS_TOLERANCE} across the wrap"
                )
        self._angles = angles
        self._provenances = provenances
        self._sorted_index = order

    @property
    def angles(self) -> tuple[float, ...]:
        return self._angles

    @property
    def provenances(self) -> tuple[Provenance, ...]:
        return self._provenances

    @property
    def sorted_index(self) -> tuple[int, ...]:
        return self._sorted_index

    @property
    def sorted_angles(self) -> tuple[float, ...]:
        return tuple(self._angles[i] for i in self._sorted_index)

    def __len__(self) -> int:
        return len(self._angles)

    def __iter__(self) -> Iterator[float]:
        return iter(self._angles)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CirclePointSet):
            return NotImplemented
        return (
            self._angles == other._angles
            and self._provenances == other._provenances
        )

    def __hash__(self) -> int:
        return hash((self._angles, self._provenances))

    def __repr__(self) -> str:
        return f"CirclePointSet({list(self._angles)!r})"


def as_angles(points: "CirclePointSet | Sequence[float]") -> np.ndarray:
    """Insertion-order angle array from a point set or a plain sequence."""
    if isinstance(points, CirclePointSet):
        return np.asarray(points.angles, dtype=float)
    return np.asarray(list(points), dtype=float)


def insert(
    pointset: CirclePointSet, x: float, provenance: Provenance = Provenance.GREEDY
) -> CirclePointSet:
    """Return a new set with x appended; the original is untouched."""
    x = float(x)
    if not (0.0 <= x < 1.0) or math.isnan(x):
        raise ValueError(f"angle out of range [0, 1): {x!r}")
    for a in pointset.angles:
        if wrapped_distance(x, a) < DISTINCTNESS_TOLERANCE:
            raise DistinctnessError(
                f"angle {x!r} collides with existing {a!r} within "
                f"{DISTINCTNESS_TOLERANCE}"
            )
    return CirclePointSet(
        pointset.angles + (x,), pointset.provenances + (provenance,)
    )


def gaps(pointset: CirclePointSet) -> list[Gap]:
    """The N open arcs between cyclically adjacent points.

    A single point yields one full-circle gap (left == right).
    """
    if len(pointset) == 0:
        raise StateError("gaps() needs a nonempty set")
    s = pointset.sorted_angles
    return [Gap(s[i], s[(i + 1) % len(s)]) for i in range(len(s))]


def van_der_corput(n: int) -> float:
    """n-th element of the binary van der Corput sequence (n >= 1)."""
    if n < 1:
        raise ValueError(f"index must be >= 1: got {n!r}")
    x = 0.0
    scale = 0.5
    while n > 0:
        x += scale * (n & 1)
        n >>= 1
        scale *= 0.5
    return x


def kronecker(n: int, alpha: float = math.sqrt(2.0)) -> float:
    """Fractional part of n*alpha (n >= 1)."""
    if n < 1:
        raise ValueError(f"index must be >= 1: got {n!r}")
    return (n * alpha) % 1.0


def roots_of_unity(n: int) -> CirclePointSet:
    """Angles k/N for k = 0..N-1."""
    if n < 1:
        raise ValueError(f"N must be >= 1: got {n!r}")
    return CirclePointSet(tuple(k / n for k in range(n)))


def _mirror_matches(sorted_angles: np.ndarray) -> bool:
    """Every mirror 1 - x lands within tolerance of some point (wrapped)."""
    s = sorted_angles
    mirrors = (1.0 - s) % 1.0
    pos = np.searchsorted(s, mirrors)
    for m, p in zip(mirrors, pos):
        best = min(
            wrapped_distance(m % 1.0, s[q % len(s)])
            for q in (p - 1, p, p + 1)
        )
        if best > SYMMETRY_TOLERANCE:
            return False
    return True


def is_symmetric(points: "CirclePointSet | Sequence[float]") -> bool:
    """True iff the set is invariant under x -> 1 - x (mod 1).

    Points on the symmetry axis (0 or 1/2) are their own mirrors and keep
    the set symmetric here; roots of unity qualify. The pair-sum identities
    (Lemma-2-style) need the stricter is_mirror_paired below.
    """
    s = np.sort(as_angles(points))
    if s.size == 0:
        return True
    return _mirror_matches(s)


def is_mirror_paired(points: "CirclePointSet | Sequence[float]") -> bool:
    """True iff points split into mirror pairs (x, 1-x) with x != 1-x.

    Stricter than is_symmetric: even size and no point on the symmetry axis
    (0 or 1/2). The symmetric greedy construction produces exactly such
    sets, and the pair-sum identities (Sum x_k = N/2) need them: a lone
    axis point shifts the sum by 1/2 and silently breaks those identities.
    """
    s = np.sort(as_angles(points))
    if s.size == 0:
        return True
    if s.size % 2 == 1:
        return False
    for axis in (0.0, 0.5):
        d = np.abs(s - axis)
        if np.any(np.minimum(d, 1.0 - d) <= SYMMETRY_TOLERANCE):
            return False
    return _mirror_matches(s)


def _atomic_write_text(path: str, text: str) -> None:
    """Write text to path via a temp file and rename; never leaves partials."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=False)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_sequence_csv(path: str, pointset: CirclePointSet) -> None:
    """Sequence CSV: index,angle,provenance with round-trip-exact decimals."""
    lines = [",".join(SEQUENCE_CSV_HEADER)]
    for i, (a, p) in enumerate(zip(pointset.angles, pointset.provenances)):
        lines.append(f"{i},{a!r},{p.value}")
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_sequence_csv(path: str) -> CirclePointSet:
    """Parse a sequence CSV back into a point set (exact float round trip)."""
    angles: list[float] = []
    provenances: list[Provenance] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty file")
        if tuple(h.strip() for h in header) != SEQUENCE_CSV_HEADER:
            raise ValueError(f"{path}: line 1: bad header {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"{path}: line {lineno}: expected 3 fields")
            try:
                index = int(row[0])
                angle = float(row[1])
                provenance = Provenance(row[2])
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from exc
            if index != len(angles):
                raise ValueError(
                    f"{path}: line {lineno}: index {index} out of order"
                )
            angles.append(angle)
            provenances.append(provenance)
    if not angles:
        raise ValueError(f"{path}: no data rows")
    return CirclePointSet(angles, provenances)
