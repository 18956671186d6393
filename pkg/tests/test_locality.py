from fractions import Fraction

import numpy as np
import pytest

from evscan.curves import CurveKind, generate, generate_hilbert, generate_peano, generate_reshape, generate_zorder
from evscan.locality import (
    HILBERT_SLR,
    closed_form_stats,
    empirical_slr,
    format_report,
    locality_rows,
    reshape_slr,
    segment_stats,
)
from reference import gilbert3d, slr_bruteforce


def brute_force_counts(points, ndim):
    """Loop-based Jump/Still counting; a jump crossing m>1 axes counts m-1 times."""
    jumps = 0
    still = [0] * ndim
    for p, q in zip(points, points[1:]):
        delta = [q[k] - p[k] for k in range(ndim)]
        moved = sum(1 for v in delta if v != 0)
        if sum(v * v for v in delta) > 1:
            jumps += max(moved - 1, 1)
        for k in range(ndim):
            still[k] += delta[k] == 0
    return jumps, still


def grid(n, d):
    return (n, n, n if d == 3 else 1)


class TestSegmentStats:
    def test_reshape_2x2(self):
        stats = segment_stats(generate_reshape((2, 2)))
        assert stats.total_segments == 3
        assert stats.jump_count == 1
        assert stats.jump_ratio == Fraction(1, 6)
        assert stats.still_ratio == Fraction(1, 3)

    @pytest.mark.parametrize("n", [2, 4, 8, 16])
    def test_hilbert_square_zero_jump_half_still(self, n):
        stats = segment_stats(generate_hilbert((n, n)))
        assert stats.jump_ratio == 0
        assert stats.still_ratio == Fraction(1, 2)

    @pytest.mark.parametrize("kind", [CurveKind.RESHAPE, CurveKind.HILBERT, CurveKind.ZORDER])
    @pytest.mark.parametrize("n,d", [(2, 2), (4, 2), (8, 2), (2, 3), (4, 3)])
    def test_matches_brute_force(self, kind, n, d):
        path = generate(kind, grid(n, d))
        stats = segment_stats(path)
        jumps, still = brute_force_counts(path.points.tolist(), d)
        assert stats.jump_count == jumps
        assert list(stats.still_count_per_dim) == still
        assert stats.jump_ratio == Fraction(jumps, d * (n**d - 1))
        assert stats.still_ratio == Fraction(sum(still), d * (n**d - 1))

    def test_jump_segments_use_euclidean_definition(self):
        # 2x2x2 row-major: three wraps, one of which crosses all three axes.
        stats = segment_stats(generate_reshape((2, 2, 2)))
        assert stats.jump_segments == 3
        assert stats.jump_count == 4

    def test_ratios_bounded(self):
        for kind, dims in [(CurveKind.ZORDER, (8, 8, 8)), (CurveKind.RESHAPE, (5, 3, 1)), (CurveKind.HILBERT, (7, 5, 3))]:
            stats = segment_stats(generate(kind, dims))
            assert 0 <= stats.jump_ratio <= 1
            assert 0 <= stats.still_ratio <= 1

    @pytest.mark.parametrize("dims", [(3, 3, 1), (9, 9, 1), (27, 27, 1), (9, 9, 9)])
    def test_peano_no_jumps(self, dims):
        assert segment_stats(generate_peano(dims)).jump_count == 0

    def test_single_point_rejected(self):
        with pytest.raises(ValueError):
            segment_stats(generate_hilbert((1, 1)))


class TestClosedForm:
    def test_reshape_2_2(self):
        assert closed_form_stats(2, 2, "reshape") == (Fraction(1, 6), Fraction(2 * 4 - 2 * 3, 2 * 3))

    @pytest.mark.parametrize("n", [2, 3, 4, 10])
    @pytest.mark.parametrize("d", [2, 3])
    def test_hilbert(self, n, d):
        jump, still = closed_form_stats(n, d, CurveKind.HILBERT)
        assert jump == 0
        assert still == Fraction(d - 1, d)

    def test_hilbert_4_2(self):
        assert closed_form_stats(4, 2, "hilbert")[1] == Fraction(1, 2)

    @pytest.mark.parametrize("kind", [CurveKind.RESHAPE, CurveKind.HILBERT])
    @pytest.mark.parametrize("n", [2, 4, 8, 16])
    @pytest.mark.parametrize("d", [2, 3])
    def test_measured_equals_closed_form(self, kind, n, d):
        stats = segment_stats(generate(kind, grid(n, d)))
        assert (stats.jump_ratio, stats.still_ratio) == closed_form_stats(n, d, kind)

    @pytest.mark.parametrize("n", [3, 5, 6])
    @pytest.mark.parametrize("d", [2, 3])
    def test_reshape_closed_form_other_sides(self, n, d):
        stats = segment_stats(generate_reshape(grid(n, d)))
        assert (stats.jump_ratio, stats.still_ratio) == closed_form_stats(n, d, "reshape")

    def test_errors(self):
        with pytest.raises(ValueError):
            closed_form_stats(4, 2, "zorder")
        with pytest.raises(ValueError):
            closed_form_stats(1, 2, "reshape")
        with pytest.raises(ValueError):
            closed_form_stats(4, 4, "hilbert")


# Exhaustive pair search with tests/reference.py::slr_bruteforce.
HILBERT_SLR_GOLDEN = {1: 1.0, 2: 2.5, 3: 3.625, 4: 121 / 27}
RESHAPE_SLR_GOLDEN = {1: 2.0, 2: 10.0, 3: 50.0, 4: 226.0}


class TestSlr:
    @pytest.mark.parametrize("order", [1, 2, 3, 4])
    def test_reshape_formula(self, order):
        n = 2**order
        assert reshape_slr(order) == RESHAPE_SLR_GOLDEN[order]
        assert empirical_slr(generate_reshape((n, n))).max_ratio == pytest.approx(reshape_slr(order), abs=1e-12)

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_matches_pairwise_oracle(self, order):
        n = 2**order
        for path in (generate_hilbert((n, n)), generate_reshape((n, n))):
            got = empirical_slr(path).max_ratio
            assert got == pytest.approx(slr_bruteforce(path.points.tolist(), n), abs=1e-12)

    @pytest.mark.parametrize("order", [1, 2, 3, 4])
    def test_hilbert_golden(self, order):
        n = 2**order
        assert empirical_slr(generate_hilbert((n, n))).max_ratio == pytest.approx(HILBERT_SLR_GOLDEN[order], abs=1e-12)

    def test_hilbert_bounded_and_nondecreasing(self):
        values = [empirical_slr(generate_hilbert((2**n, 2**n))).max_ratio for n in range(2, 7)]
        assert all(v <= HILBERT_SLR + 1e-9 for v in values)
        assert values == sorted(values)

    def test_argmax_pair(self):
        res = empirical_slr(generate_reshape((4, 4)))
        i, j = res.argmax_index
        assert i != j
        assert res.argmax_pair == (i / 16, j / 16)
        assert res.exhaustive

    def test_sampled_mode_is_deterministic_lower_bound(self):
        path = generate_hilbert((32, 32))
        full = empirical_slr(path)
        a = empirical_slr(path, pair_budget=50_000, seed=3)
        b = empirical_slr(path, pair_budget=50_000, seed=3)
        assert not a.exhaustive
        assert a.max_ratio == b.max_ratio
        assert a.max_ratio <= full.max_ratio + 1e-12
        assert a.max_ratio > 0.8 * full.max_ratio

    def test_3d_rejected(self):
        with pytest.raises(ValueError):
            empirical_slr(generate_hilbert((4, 4, 4)))


def test_report_csv():
    rows = locality_rows(["hilbert", "reshape"], [2, 4], dims=(2, 3))
    text = format_report(rows)
    lines = text.splitlines()
    assert lines[0] == "kind,N,D,jump_ratio,still_ratio,slr"
    assert len(lines) == 1 + 2 * 2 * 2
    hil = [l.split(",") for l in lines[1:] if l.startswith("hilbert")]
    assert all(cols[3] == "0" for cols in hil)
    assert [cols[5] for cols in hil if cols[2] == "3"] == ["", ""]
