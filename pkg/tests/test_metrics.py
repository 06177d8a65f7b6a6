"""Regularity metrics: oracle agreement, identities, sweeps, CSV round trip."""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lejacircle import (
    MetricsRow,
    StateError,
    clausen_cl2,
    discrepancy_l1,
    discrepancy_l2_sq,
    erdos_a,
    fn_l1,
    fn_l2_sq,
    logpot_l1,
    logpot_l2_sq,
    metrics_over_prefixes,
    metrics_over_sequence,
    pair_energy,
    read_metrics_csv,
    roots_of_unity,
    star_discrepancy_linf,
    van_der_corput,
    write_metrics_csv,
)
from lejacircle import CirclePointSet, GreedyConfig, KernelKind, Mode, run

import oracles as orc


def _random_set(rng, n):
    while True:
        pts = np.sort(rng.random(n))
        gaps = np.diff(np.concatenate([pts, [pts[0] + 1.0]]))
        if n == 1 or gaps.min() > 1e-4:
            return pts


FIXED_SETS = [_random_set(np.random.default_rng(100 + k), n)
              for k, n in enumerate([1, 2, 3, 5, 8, 12, 16])]


class TestOracleAgreement:
    @pytest.mark.parametrize("s", FIXED_SETS, ids=lambda s: f"n{s.size}")
    def test_polynomial_metrics(self, s):
        assert discrepancy_l1(s) == pytest.approx(orc.quad_d_l1(s), abs=1e-9)
        assert discrepancy_l2_sq(s) == pytest.approx(orc.quad_d_l2_sq(s), abs=1e-10)
        assert fn_l1(s) == pytest.approx(orc.quad_f_l1(s), abs=1e-9)
        assert fn_l2_sq(s) == pytest.approx(orc.quad_f_l2_sq(s), abs=1e-10)

    @pytest.mark.parametrize("s", FIXED_SETS, ids=lambda s: f"n{s.size}")
    def test_log_potential_metrics(self, s):
        assert logpot_l1(s) == pytest.approx(orc.quad_logpot_l1(s), abs=1e-8)
        assert logpot_l2_sq(s) == pytest.approx(orc.quad_logpot_l2_sq(s),
                                                abs=1e-8)

    @pytest.mark.parametrize("s", FIXED_SETS, ids=lambda s: f"n{s.size}")
    def test_star_discrepancy_vs_scan(self, s):
        scan = orc.scan_star_discrepancy(s)
        exact = star_discrepancy_linf(s)
        # the scan only undershoots, and by at most one grid cell
        assert scan <= exact + 1e-12
        assert exact - scan < 1e-4

    @pytest.mark.parametrize("s", FIXED_SETS[1:], ids=lambda s: f"n{s.size}")
    def test_erdos_vs_scan(self, s):
        values = orc.logsin_potential_values(s)
        _, umin = orc.scan_potential_min(s, values)
        assert erdos_a(s) == pytest.approx(math.exp(-umin), rel=1e-9)


class TestClosedForms:
    @pytest.mark.parametrize("n", [2, 3, 8, 32])
    def test_roots_of_unity_star_discrepancy(self, n):
        assert star_discrepancy_linf(roots_of_unity(n)) == pytest.approx(1.0 / n)

    @pytest.mark.parametrize("n", [1, 2, 5, 17, 64])
    def test_roots_of_unity_erdos_maximum(self, n):
        assert erdos_a(roots_of_unity(n)) == pytest.approx(2.0, abs=1e-9)

    @pytest.mark.parametrize("n", [2, 3, 16, 64])
    def test_roots_of_unity_energy_attains_bound(self, n):
        assert pair_energy(roots_of_unity(n)) == pytest.approx(
            n * math.log(n), rel=1e-12)

    def test_two_point_energy(self):
        d = 0.17
        assert pair_energy([0.2, 0.2 + d]) == pytest.approx(
            2.0 * math.log(2.0 * math.sin(math.pi * d)), rel=1e-13)

    @pytest.mark.parametrize("x0", [0.0, 0.37])
    def test_single_point_log_potential_norm(self, x0):
        # integral of |log(2 sin)| over the period, via the kernel's
        # antiderivative peak
        expect = 2.0 * clausen_cl2(math.pi / 3.0) / math.pi
        assert logpot_l1([x0]) == pytest.approx(expect, abs=1e-10)

    def test_van_der_corput_discrepancy_bound(self):
        angles = [van_der_corput(n) for n in range(1, 4097)]
        for n in (2, 3, 5, 16, 100, 481, 1024, 4096):
            d = star_discrepancy_linf(angles[:n])
            assert n * d <= 2.0 * math.log(n)


halves = st.lists(st.floats(min_value=0.01, max_value=0.49),
                  min_size=1, max_size=6, unique=True)


class TestIdentities:
    @given(halves)
    def test_sawtooth_l1_equals_discrepancy_l1_when_paired(self, hs):
        assume(min(abs(a - b) for a in hs for b in hs if a is not b) > 1e-3
               if len(hs) > 1 else True)
        values = [v for h in hs for v in (h, 1.0 - h)]
        ps = CirclePointSet(values)
        assert fn_l1(ps) == pytest.approx(discrepancy_l1(ps), abs=1e-12)

    @given(st.lists(st.floats(min_value=0.0, max_value=0.999),
                    min_size=1, max_size=8, unique=True))
    def test_l2_norms_are_proportional(self, values):
        assume(all(abs(a - b) > 1e-3 and abs(a - b) < 1.0 - 1e-3
                   for i, a in enumerate(values) for b in values[i + 1:]))
        n = len(values)
        assert logpot_l2_sq(values) == pytest.approx(
            math.pi ** 2 * n * n * fn_l2_sq(values), rel=1e-12)

    @pytest.mark.parametrize("metric", [
        fn_l1, fn_l2_sq, logpot_l1, logpot_l2_sq, pair_energy, erdos_a,
    ])
    def test_rotation_invariance(self, metric):
        s = FIXED_SETS[4]
        rotated = (s + 0.2718) % 1.0
        assert metric(rotated) == pytest.approx(metric(s), rel=1e-9,
                                                abs=1e-10)

    def test_anchored_metrics_are_not_rotation_invariant(self):
        s = FIXED_SETS[4]
        rotated = (s + 0.2718) % 1.0
        assert discrepancy_l1(rotated) != pytest.approx(discrepancy_l1(s),
                                                        rel=1e-6)


class TestValidation:
    def test_empty_set_raises_everywhere(self):
        for metric in (discrepancy_l1, discrepancy_l2_sq, fn_l1, fn_l2_sq,
                       logpot_l1, logpot_l2_sq, erdos_a,
                       star_discrepancy_linf):
            with pytest.raises(StateError):
                metric([])

    def test_pair_energy_needs_two(self):
        with pytest.raises(StateError):
            pair_energy([0.3])

    def test_row_validation(self):
        good = dict(N=4, d_l1=0.1, d_l2_sq=0.01, d_linf=0.2, f_l1=0.1,
                    f_l2_sq=0.01, logpot_l1=1.0, logpot_l2_sq=2.0, a_N=2.0,
                    pair_energy=-1.0)
        MetricsRow(**good)
        with pytest.raises(ValueError):
            MetricsRow(**{**good, "N": 0})
        with pytest.raises(ValueError):
            MetricsRow(**{**good, "d_l1": -0.1})
        with pytest.raises(ValueError):
            MetricsRow(**{**good, "a_N": 0.0})


class TestSweeps:
    def test_rows_match_standalone_metrics(self):
        rng = np.random.default_rng(42)
        angles = _random_set(rng, 24)
        rng.shuffle(angles)
        rows = metrics_over_sequence(angles)
        assert [r.N for r in rows] == list(range(1, 25))
        for row in rows:
            prefix = angles[:row.N]
            assert row.d_l1 == pytest.approx(discrepancy_l1(prefix), rel=1e-12)
            assert row.d_l2_sq == pytest.approx(discrepancy_l2_sq(prefix),
                                                rel=1e-12)
            assert row.d_linf == pytest.approx(
                star_discrepancy_linf(prefix), rel=1e-12)
            assert row.f_l1 == pytest.approx(fn_l1(prefix), rel=1e-12)
            assert row.f_l2_sq == pytest.approx(fn_l2_sq(prefix), rel=1e-9)
            assert row.logpot_l2_sq == pytest.approx(logpot_l2_sq(prefix),
                                                     rel=1e-9)
            assert row.logpot_l1 == pytest.approx(logpot_l1(prefix), rel=1e-8)
            assert row.a_N == pytest.approx(erdos_a(prefix), rel=1e-9)
            if row.N >= 2:
                assert row.pair_energy == pytest.approx(pair_energy(prefix),
                                                        rel=1e-9, abs=1e-9)
            else:
                assert row.pair_energy == 0.0

    def test_dyadic_rows_match_full_sweep(self):
        rng = np.random.default_rng(43)
        angles = _random_set(rng, 32)
        rng.shuffle(angles)
        full = {r.N: r for r in metrics_over_sequence(angles)}
        for row in metrics_over_sequence(angles, "dyadic"):
            ref = full[row.N]
            for name in ("d_l1", "d_l2_sq", "d_linf", "f_l1", "f_l2_sq",
                         "logpot_l2_sq", "a_N", "pair_energy"):
                assert getattr(row, name) == pytest.approx(
                    getattr(ref, name), rel=1e-12, abs=1e-12)
            assert row.logpot_l1 == pytest.approx(ref.logpot_l1, rel=1e-9)

    def test_dyadic_selector_emits_powers_of_two(self):
        rows = metrics_over_sequence(_random_set(np.random.default_rng(3), 11),
                                     "dyadic")
        assert [r.N for r in rows] == [1, 2, 4, 8]

    def test_prefix_helper_matches_sequence(self):
        cfg = GreedyConfig(kernel=KernelKind.LOG_SIN, mode=Mode.PLAIN,
                           target_count=12)
        result = run(CirclePointSet([0.3]), cfg)
        via_run = metrics_over_prefixes(result, "dyadic")
        direct = metrics_over_sequence(result.final.angles, "dyadic")
        assert via_run == direct

    def test_rejects_bad_selector_and_empty(self):
        with pytest.raises(ValueError):
            metrics_over_sequence([0.1], "odd")
        with pytest.raises(StateError):
            metrics_over_sequence([])


class TestMetricsCsv:
    def test_round_trip_exact(self, tmp_path):
        angles = _random_set(np.random.default_rng(5), 9)
        rows = metrics_over_sequence(angles)
        path = str(tmp_path / "metrics.csv")
        write_metrics_csv(rows, path)
        assert read_metrics_csv(path) == rows

    def test_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("N,d_l1\n1,0.5\n")
        with pytest.raises(ValueError, match="bad header"):
            read_metrics_csv(str(path))

    def test_rejects_short_record(self, tmp_path):
        rows = metrics_over_sequence([0.3, 0.8])
        path = tmp_path / "metrics.csv"
        write_metrics_csv(rows, str(path))
        text = path.read_text()
        path.write_text(text.rsplit(",", 1)[0] + "\n")
        with pytest.raises(ValueError, match="expected"):
            read_metrics_csv(str(path))

    def test_rejects_bad_value_with_line_number(self, tmp_path):
        rows = metrics_over_sequence([0.3, 0.8])
        path = tmp_path / "metrics.csv"
        write_metrics_csv(rows, str(path))
        lines = path.read_text().splitlines()
        lines[2] = lines[2].replace(lines[2].split(",")[1], "wat", 1)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValueError, match="line 3"):
            read_metrics_csv(str(path))
