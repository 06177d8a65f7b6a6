"""Point-set container, reference sequences, symmetry predicates, CSV I/O."""

import math
import os

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from lejacircle import (
    CirclePointSet,
    DistinctnessError,
    Gap,
    Provenance,
    StateError,
    as_angles,
    gaps,
    insert,
    is_mirror_paired,
    is_symmetric,
    kronecker,
    read_sequence_csv,
    roots_of_unity,
    van_der_corput,
    write_sequence_csv,
)

angles = st.floats(min_value=0.0, max_value=1.0, exclude_max=True,
                   allow_nan=False)


def distinct_sets(min_size=1, max_size=12):
    return st.lists(angles, min_size=min_size, max_size=max_size,
                    unique=True).filter(_well_separated)


def _well_separated(values):
    if len(values) < 2:
        return True
    s = sorted(values)
    small = min(b - a for a, b in zip(s, s[1:]))
    return min(small, 1.0 - s[-1] + s[0]) > 1e-6


class TestCirclePointSet:
    def test_keeps_insertion_order_and_provenance(self):
        ps = CirclePointSet([0.5, 0.1, 0.9])
        assert ps.angles == (0.5, 0.1, 0.9)
        assert ps.provenances == (Provenance.SEED,) * 3
        assert ps.sorted_angles == (0.1, 0.5, 0.9)
        assert ps.sorted_index == (1, 0, 2)
        assert list(ps) == [0.5, 0.1, 0.9]
        assert len(ps) == 3

    @pytest.mark.parametrize("bad", [-0.1, 1.0, 1.5, float("nan")])
    def test_rejects_out_of_range(self, bad):
        with pytest.raises(ValueError):
            CirclePointSet([0.2, bad])

    def test_rejects_near_duplicates(self):
        with pytest.raises(DistinctnessError):
            CirclePointSet([0.2, 0.2 + 1e-13])

    def test_rejects_wraparound_near_duplicates(self):
        with pytest.raises(DistinctnessError):
            CirclePointSet([0.0, 1.0 - 1e-13, 0.5])

    def test_provenance_length_mismatch(self):
        with pytest.raises(ValueError):
            CirclePointSet([0.1, 0.2], [Provenance.SEED])

    def test_equality_and_hash(self):
        a = CirclePointSet([0.1, 0.6])
        b = CirclePointSet([0.1, 0.6])
        c = CirclePointSet([0.6, 0.1])
        assert a == b and hash(a) == hash(b)
        assert a != c

    def test_empty_set_allowed(self):
        assert len(CirclePointSet()) == 0


class TestInsert:
    def test_appends_with_greedy_provenance(self):
        base = CirclePointSet([0.25])
        grown = insert(base, 0.75)
        assert grown.angles == (0.25, 0.75)
        assert grown.provenances[-1] is Provenance.GREEDY
        assert base.angles == (0.25,)

    def test_manual_provenance(self):
        grown = insert(CirclePointSet([0.25]), 0.5, Provenance.MANUAL)
        assert grown.provenances == (Provenance.SEED, Provenance.MANUAL)

    def test_rejects_collision(self):
        with pytest.raises(DistinctnessError):
            insert(CirclePointSet([0.25]), 0.25 + 1e-14)


class TestGaps:
    @given(distinct_sets())
    def test_lengths_cover_the_circle(self, values):
        gs = gaps(CirclePointSet(values))
        assert len(gs) == len(values)
        assert sum(g.length for g in gs) == pytest.approx(1.0, abs=1e-12)

    def test_single_point_full_circle(self):
        (g,) = gaps(CirclePointSet([0.3]))
        assert g.left == g.right == 0.3
        assert g.length == pytest.approx(1.0)

    def test_wrap_gap_has_positive_length(self):
        gs = gaps(CirclePointSet([0.1, 0.9]))
        wrap = [g for g in gs if g.right < g.left]
        assert len(wrap) == 1
        assert wrap[0].length == pytest.approx(0.2)

    def test_empty_set_raises(self):
        with pytest.raises(StateError):
            gaps(CirclePointSet())


class TestAsAngles:
    def test_accepts_pointset_and_sequence(self):
        ps = CirclePointSet([0.5, 0.1])
        assert np.array_equal(as_angles(ps), [0.5, 0.1])
        assert np.array_equal(as_angles([0.5, 0.1]), [0.5, 0.1])


class TestReferenceSequences:
    def test_van_der_corput_first_values(self):
        got = [van_der_corput(n) for n in range(1, 9)]
        assert got == [0.5, 0.25, 0.75, 0.125, 0.625, 0.375, 0.875, 0.0625]

    def test_van_der_corput_is_bit_reversal(self):
        # n = 0b1011 reverses to 0.1101 in binary
        assert van_der_corput(0b1011) == 0.5 + 0.25 + 0.0625

    @pytest.mark.parametrize("fn", [van_der_corput, kronecker])
    def test_rejects_nonpositive_index(self, fn):
        with pytest.raises(ValueError):
            fn(0)

    @given(st.integers(min_value=1, max_value=10_000))
    def test_kronecker_fractional_part(self, n):
        assert kronecker(n) == (n * math.sqrt(2.0)) % 1.0
        assert 0.0 <= kronecker(n) < 1.0

    def test_kronecker_custom_alpha(self):
        assert kronecker(3, 0.25) == pytest.approx(0.75)

    @pytest.mark.parametrize("n", [1, 2, 5, 16])
    def test_roots_of_unity(self, n):
        ps = roots_of_unity(n)
        assert ps.angles == tuple(k / n for k in range(n))
        assert is_symmetric(ps)

    def test_roots_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            roots_of_unity(0)


class TestSymmetryPredicates:
    def test_mirror_pair_is_both(self):
        ps = CirclePointSet([0.3, 0.7])
        assert is_symmetric(ps)
        assert is_mirror_paired(ps)

    def test_axis_points_symmetric_but_not_paired(self):
        ps = CirclePointSet([0.0, 0.25, 0.5, 0.75])
        assert is_symmetric(ps)
        assert not is_mirror_paired(ps)

    def test_odd_size_never_paired(self):
        ps = CirclePointSet([0.2, 0.8, 0.5])
        assert is_symmetric(ps)
        assert not is_mirror_paired(ps)

    def test_asymmetric_is_neither(self):
        ps = CirclePointSet([0.3, 0.69])
        assert not is_symmetric(ps)
        assert not is_mirror_paired(ps)

    def test_empty_is_both(self):
        assert is_symmetric(CirclePointSet())
        assert is_mirror_paired(CirclePointSet())

    @given(st.lists(st.floats(min_value=0.001, max_value=0.499),
                    min_size=1, max_size=8, unique=True))
    def test_half_plus_mirrors_is_paired(self, halves):
        assume(_well_separated(halves))
        values = []
        for h in halves:
            values.extend([h, 1.0 - h])
        assert is_mirror_paired(CirclePointSet(values))


class TestSequenceCsv:
    @given(distinct_sets(max_size=8))
    def test_round_trip_is_exact(self, tmp_path_factory, values):
        path = str(tmp_path_factory.mktemp("seq") / "points.csv")
        original = CirclePointSet(
            values,
            [Provenance.SEED] + [Provenance.GREEDY] * (len(values) - 1),
        )
        write_sequence_csv(path, original)
        assert read_sequence_csv(path) == original

    def test_no_temp_files_left_behind(self, tmp_path):
        path = tmp_path / "points.csv"
        write_sequence_csv(str(path), CirclePointSet([0.5]))
        assert sorted(p.name for p in tmp_path.iterdir()) == ["points.csv"]

    def test_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("idx,angle,provenance\n0,0.5,seed\n")
        with pytest.raises(ValueError, match="bad header"):
            read_sequence_csv(str(path))

    def test_rejects_out_of_order_index(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("index,angle,provenance\n0,0.5,seed\n2,0.25,greedy\n")
        with pytest.raises(ValueError, match="out of order"):
            read_sequence_csv(str(path))

    def test_rejects_unknown_provenance(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("index,angle,provenance\n0,0.5,oracle\n")
        with pytest.raises(ValueError, match="line 2"):
            read_sequence_csv(str(path))

    def test_rejects_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="empty"):
            read_sequence_csv(str(path))

    def test_rejects_header_only(self, tmp_path):
        path = tmp_path / "only-header.csv"
        path.write_text("index,angle,provenance\n")
        with pytest.raises(ValueError, match="no data rows"):
            read_sequence_csv(str(path))

    def test_lf_line_endings(self, tmp_path):
        path = tmp_path / "points.csv"
        write_sequence_csv(str(path), CirclePointSet([0.5, 0.125]))
        raw = path.read_bytes()
        assert b"\r" not in raw
        assert raw.endswith(b"\n")
