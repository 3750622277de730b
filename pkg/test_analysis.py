#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""analysis 测试"""

from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

import analysis
from analysis import (AnalysisError, SearchBudgetExceeded, census, column_distance, count_cycles,
                      cycle_positions, cycle_r_labels, density_check, density_formula,
                      distance_profile, enumerate_cycles, first_period_region, free_distance,
                      girth, girth_stabilized, truncated_sliding_matrix)
from convcodes import (FAMILY_TI_HAT, FAMILY_TI_PRIME, FAMILY_TV, FAMILY_TV_TILDE,
                       ConstructionSpec, block_position, build_family, encode_systematic,
                       materialize)
from gf2sparse import SparseBinaryMatrix, is_cycle


def tanner_graph(H: SparseBinaryMatrix) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(H.n_cols + H.n_rows))
    graph.add_edges_from((c, H.n_cols + r) for r, c in H.triples())
    return graph


def oracle_counts(H: SparseBinaryMatrix, max_length: int, region=None):
    """networkx 枚举全部简单环，按长度统计与 region 相交的环"""
    region = set(range(H.n_cols)) if region is None else set(region)
    counts = {}
    for cycle in nx.simple_cycles(tanner_graph(H), length_bound=max_length):
        if region.intersection(cycle):
            counts[len(cycle)] = counts.get(len(cycle), 0) + 1
    return counts


def random_matrix(rng, rows, cols, p_one) -> SparseBinaryMatrix:
    return SparseBinaryMatrix.from_dense((rng.random((rows, cols)) < p_one).astype(np.uint8))


# ==================== 围长 ====================

def test_girth_of_all_ones():
    H = SparseBinaryMatrix.from_dense(np.ones((2, 2), dtype=np.uint8))
    report = girth(H)
    assert report.girth == 4
    assert report.witness == [(0, 0), (0, 1), (1, 1), (1, 0)]


def test_girth_of_identity_reports_no_cycle():
    report = girth(SparseBinaryMatrix.identity(6))
    assert not report.found
    assert report.to_dict()["girth"] == "no cycle found in window"


def test_girth_rejects_empty():
    with pytest.raises(AnalysisError):
        girth(SparseBinaryMatrix.zeros(0, 0))


def test_base_window_girth_is_six():
    window = materialize(ConstructionSpec(FAMILY_TV, 5, 3, 0), 3)
    report = girth(window.matrix)
    assert report.girth == 6
    assert len(report.witness) == 6
    assert is_cycle(window.matrix, report.witness)


def test_ti_prime_window_girth_is_six():
    window = materialize(ConstructionSpec(FAMILY_TI_PRIME, 5, 2), 4)
    assert girth(window.matrix).girth == 6


def test_girth_matches_networkx_on_small_windows():
    for spec, s in [(ConstructionSpec(FAMILY_TV, 3, 1, 0), 2),
                    (ConstructionSpec(FAMILY_TV, 5, 2, 0), 1),
                    (ConstructionSpec(FAMILY_TI_PRIME, 5, 3), 3)]:
        H = materialize(spec, s).matrix
        counts = oracle_counts(H, 12)
        expected = min(counts) if counts else None
        assert girth(H, search_limit=12).girth == expected


def test_girth_and_counts_match_networkx_on_random_matrices():
    rng = np.random.default_rng(11)
    for _ in range(8):
        H = random_matrix(rng, 6, 9, 0.3)
        counts = oracle_counts(H, 10)
        report = girth(H, search_limit=10)
        assert report.girth == (min(counts) if counts else None)
        for length in (4, 6, 8, 10):
            assert count_cycles(H, length) == counts.get(length, 0)


def test_girth_is_permutation_invariant():
    rng = np.random.default_rng(3)
    H = materialize(ConstructionSpec(FAMILY_TV, 5, 2, 0), 3).matrix
    dense = H.to_dense()
    for _ in range(3):
        shuffled = dense[rng.permutation(H.n_rows)][:, rng.permutation(H.n_cols)]
        P = SparseBinaryMatrix.from_dense(shuffled)
        assert girth(P).girth == girth(H).girth
        assert count_cycles(P, 6) == count_cycles(H, 6)


def test_girth_restricted_to_region():
    window = materialize(ConstructionSpec(FAMILY_TV, 5, 3, 0), 3)
    # 单位阵部分的列只有一个 1，不可能在环上
    identity_cols = [c for c in range(window.matrix.n_cols) if c % 10 >= 5]
    assert not girth(window.matrix, identity_cols).found
    with pytest.raises(AnalysisError):
        girth(window.matrix, [window.matrix.n_cols])


def two_short_cycles() -> SparseBinaryMatrix:
    """列 0 只在 6-环上，列 1、2 组成一个 4-环"""
    rows = [[0, 3], [3, 4], [0, 4], [1, 2], [1, 2]]
    return SparseBinaryMatrix(5, 5, rows)


def test_girth_scans_every_root_by_default():
    report = girth(two_short_cycles())
    assert report.girth == 4
    assert {c for _, c in report.witness} == {1, 2}
    assert girth(two_short_cycles(), [0]).girth == 6


def test_assumed_lower_bound_ends_search_early():
    assert girth(two_short_cycles(), lower_bound=6).girth == 6


def test_stabilized_girth_does_not_assume_construction_bound(monkeypatch):
    seen = []
    real_girth = analysis.girth

    def recording_girth(*args, **kwargs):
        seen.append(kwargs.get("lower_bound", 4))
        return real_girth(*args, **kwargs)

    monkeypatch.setattr(analysis, "girth", recording_girth)
    report = girth_stabilized(ConstructionSpec(FAMILY_TI_PRIME, 5, 2))
    assert seen and set(seen) == {4}
    assert report.girth == 6 and report.bound_attained


# ==================== 环计数 ====================

def test_identity_has_no_four_cycles():
    for n in (1, 4, 9):
        assert count_cycles(SparseBinaryMatrix.identity(n), 4) == 0


def test_window_counts_match_networkx():
    window = materialize(ConstructionSpec(FAMILY_TV, 3, 1, 0), 3)
    region = list(first_period_region(window))
    counts = oracle_counts(window.matrix, 10, region)
    for length in (4, 6, 8, 10):
        assert count_cycles(window.matrix, length, region) == counts.get(length, 0)


def test_counts_below_girth_are_zero():
    window = materialize(ConstructionSpec(FAMILY_TV, 5, 3, 0), 4)
    result = census(window.matrix, (4, 6), first_period_region(window), window_s=4)
    assert result.counts[4] == 0
    assert result.counts[6] >= 1
    assert result.restricted_to_first_period
    assert result.to_dict()["counts"] == {"4": 0, "6": result.counts[6]}


def test_lifted_window_has_no_six_cycles():
    window = materialize(ConstructionSpec(FAMILY_TV, 5, 3, 1), 4)
    assert count_cycles(window.matrix, 6, first_period_region(window)) == 0


def test_order_three_has_no_odd_half_length_cycles():
    window = materialize(ConstructionSpec(FAMILY_TV, 3, 1, 0), 6)
    counts = census(window.matrix, (6, 10), first_period_region(window)).counts
    assert counts == {6: 0, 10: 0}


def test_enumerated_cycles_are_canonical_and_real():
    H = materialize(ConstructionSpec(FAMILY_TV, 5, 2, 0), 2).matrix
    cycles = enumerate_cycles(H, 6)
    assert cycles == sorted(set(cycles))
    for cycle in cycles:
        assert cycle[0] == min(v for v in cycle if v < H.n_cols)
        assert cycle[1] < cycle[-1]
        assert is_cycle(H, cycle_positions(H, cycle))


def test_census_validates_length_and_budget():
    H = materialize(ConstructionSpec(FAMILY_TV, 5, 3, 0), 3).matrix
    with pytest.raises(AnalysisError):
        count_cycles(H, 5)
    with pytest.raises(AnalysisError):
        count_cycles(H, 14)
    with pytest.raises(SearchBudgetExceeded):
        count_cycles(H, 8, path_budget=10)


# ==================== r 标签 ====================

def test_explicit_cycle_labels():
    window = materialize(ConstructionSpec(FAMILY_TV, 5, 3, 0), 3)
    located = [(2, 0, 1, 3), (0, 2, 1, 1), (2, 2, 2, 1), (3, 1, 2, 1), (2, 1, 5, 1), (3, 0, 5, 3)]
    positions = [block_position(window, *item) for item in located]
    assert cycle_r_labels(positions, window) == [1, 3, 2]


def test_six_cycle_labels_are_adjacent_distinct():
    window = materialize(ConstructionSpec(FAMILY_TV, 5, 3, 0), 4)
    for cycle in enumerate_cycles(window.matrix, 6, first_period_region(window)):
        labels = cycle_r_labels(cycle_positions(window.matrix, cycle), window)
        assert len(labels) == 3
        assert all(labels[i] != labels[(i + 1) % 3] for i in range(3))


def test_eight_cycle_labels_after_one_lift_are_adjacent_distinct():
    window = materialize(ConstructionSpec(FAMILY_TV, 5, 3, 1), 4)
    for cycle in enumerate_cycles(window.matrix, 8, first_period_region(window)):
        r1, r2, r3, r4 = cycle_r_labels(cycle_positions(window.matrix, cycle), window)
        assert r1 != r2 and r2 != r3 and r3 != r4 and r4 != r1


def test_labels_need_slope_annotated_window():
    window = materialize(ConstructionSpec(FAMILY_TI_PRIME, 5, 2), 3)
    with pytest.raises(AnalysisError):
        cycle_r_labels([(0, 0), (0, 1)], window)


# ==================== 距离 ====================

@pytest.mark.parametrize("mu,expected", [(3, [2, 3, 4, 5, 5, 5]), (2, [2, 3, 4, 4, 4])])
def test_column_distances(mu, expected):
    spec = ConstructionSpec(FAMILY_TV, 5, mu, 0)
    assert [column_distance(spec, j) for j in range(len(expected))] == expected


def test_column_distance_cap_and_validation():
    spec = ConstructionSpec(FAMILY_TV, 5, 3, 0)
    assert column_distance(spec, 4, d_cap=4) is None
    with pytest.raises(AnalysisError):
        column_distance(spec, -1)
    with pytest.raises(AnalysisError):
        column_distance(spec, 0, d_cap=1)


@pytest.mark.parametrize("mu", [2, 3])
def test_free_distance_bounds_meet(mu):
    spec = ConstructionSpec(FAMILY_TV, 5, mu, 0)
    result = free_distance(spec)
    assert (result.lower, result.upper) == (mu + 2, mu + 2)
    assert not result.gap
    codeword = np.concatenate(result.witness)
    assert int(codeword.sum()) == mu + 2
    window = materialize(spec, len(result.witness) - 1 + result.start_offset)
    padded = np.concatenate([np.zeros(result.start_offset * spec.n, dtype=np.uint8), codeword])
    assert not window.matrix.matvec(padded).any()


def test_distance_profile_is_monotone():
    profile = distance_profile(ConstructionSpec(FAMILY_TV, 5, 3, 0), jmax=5)
    values = [profile.column_distances[j] for j in range(6)]
    assert values == sorted(values)
    assert profile.free.lower <= profile.free.upper
    assert profile.to_dict()["distances"]["5"] == 5


def test_free_distance_with_too_small_cap_reports_gap():
    spec = ConstructionSpec(FAMILY_TV, 5, 3, 0)
    result = free_distance(spec, d_cap=3, jmax=2)
    assert result.lower == 4
    assert result.gap
    assert result.to_dict()["gap"] is True


# ==================== 密度 ====================

def test_density_examples():
    check = density_check(ConstructionSpec(FAMILY_TV, 3, 1, 0), 5)
    assert check.measured == Fraction(1, 14) and check.match
    check = density_check(ConstructionSpec(FAMILY_TV, 5, 3, 1), 8)
    assert check.measured == Fraction(1, 120) and check.match
    assert check.specialization == Fraction(1, 120)


@pytest.mark.parametrize("spec,s", [
    (ConstructionSpec(FAMILY_TV, 3, 1, 0), 2),
    (ConstructionSpec(FAMILY_TV, 3, 1, 1), 4),
    (ConstructionSpec(FAMILY_TV, 5, 0, 0), 3),
    (ConstructionSpec(FAMILY_TV, 5, 2, 0), 7),
    (ConstructionSpec(FAMILY_TV, 5, 3, 1), 2),
    (ConstructionSpec(FAMILY_TV, 7, 4, 0), 5),
    (ConstructionSpec(FAMILY_TV_TILDE, 3, 1, 0), 3),
    (ConstructionSpec(FAMILY_TV_TILDE, 5, 2, 0), 2),
    (ConstructionSpec(FAMILY_TI_PRIME, 5, 2), 4),
    (ConstructionSpec(FAMILY_TI_PRIME, 7, 5), 2),
    (ConstructionSpec(FAMILY_TI_HAT, 5, 3, 0), 1),
    (ConstructionSpec(FAMILY_TI_HAT, 3, 1, 1), 2),
], ids=lambda v: v.key() if isinstance(v, ConstructionSpec) else f"s={v}")
def test_density_matches_formula(spec, s):
    assert density_check(spec, s).match


def test_tilde_density_equals_next_level():
    for m in (0, 1):
        for s in (2, 5):
            assert (density_formula(ConstructionSpec(FAMILY_TV_TILDE, 3, 1, m), s)
                    == density_formula(ConstructionSpec(FAMILY_TV, 3, 1, m + 1), s))


# ==================== 长时间校验 ====================

@pytest.mark.slow
def test_stabilized_base_girth():
    report = girth_stabilized(ConstructionSpec(FAMILY_TV, 5, 3, 0))
    assert report.girth == 6
    assert report.stabilized
    assert report.bound_attained


@pytest.mark.slow
def test_stabilized_lifted_girth_meets_bound():
    report = girth_stabilized(ConstructionSpec(FAMILY_TV, 5, 3, 1))
    assert report.bound_satisfied
    assert report.girth is None or report.girth >= 8


def test_stabilized_ti_prime_girth():
    report = girth_stabilized(ConstructionSpec(FAMILY_TI_PRIME, 5, 2))
    assert report.girth == 6
    assert report.stabilized
    assert report.windows_tried[0] == 18


@pytest.mark.slow
@pytest.mark.parametrize("spec,bound", [
    (ConstructionSpec(FAMILY_TV_TILDE, 5, 2, 2), 10),
    (ConstructionSpec(FAMILY_TV_TILDE, 3, 1, 3), 12),
], ids=lambda v: v.key() if isinstance(v, ConstructionSpec) else str(v))
def test_stabilized_tilde_girth(spec, bound):
    report = girth_stabilized(spec)
    assert report.girth_bound == bound
    assert report.bound_satisfied


@pytest.mark.slow
def test_no_ten_cycles_after_three_lifts():
    spec = ConstructionSpec(FAMILY_TV, 5, 2, 3)
    window = materialize(spec, (spec.p - 1) + 5 * spec.mu + 2)
    assert count_cycles(window.matrix, 10, first_period_region(window)) == 0


@pytest.mark.slow
def test_eight_cycle_labels_repeat_at_level_two():
    window = materialize(ConstructionSpec(FAMILY_TV, 5, 2, 2), 4)
    for cycle in enumerate_cycles(window.matrix, 8, first_period_region(window)):
        r1, r2, r3, r4 = cycle_r_labels(cycle_positions(window.matrix, cycle), window)
        assert r1 == r3 and r2 == r4


@pytest.mark.slow
def test_encoded_witness_has_zero_syndrome_for_lifted_code():
    spec = ConstructionSpec(FAMILY_TV, 5, 3, 1)
    info = [np.eye(spec.k, dtype=np.uint8)[0]]
    codeword = encode_systematic(spec, info)
    window = materialize(spec, len(codeword) - 1)
    assert not window.matrix.matvec(np.concatenate(codeword)).any()


def test_truncated_sliding_matrix_is_block_lower_triangular():
    family = build_family(ConstructionSpec(FAMILY_TV, 5, 3))
    h, n = family.n - family.k, family.n
    H = truncated_sliding_matrix(family, 2, 1)
    assert H.shape == (3 * h, 3 * n)
    dense = H.to_dense()
    for u in range(3):
        for v in range(3):
            block = dense[u * h:(u + 1) * h, v * n:(v + 1) * n]
            if v > u:
                assert not block.any()
            else:
                assert np.array_equal(block, family.block(u - v, 1 + v).to_dense())
