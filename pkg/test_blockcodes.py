#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""blockcodes 测试"""

import numpy as np
import pytest

from analysis import count_cycles, girth
from blockcodes import (CLASS_A, CLASS_D, CLASS_INERT, ROLE_IDENTITY, ROLE_P2, STAGE_BASE, STAGE_STEP1,
                        STAGE_STEP2, STAGE_STEP3, STAGE_STEP4, BlockCodeError, BlockCodeMatrix,
                        arrange, block_cycle_matrix, build_base, build_pipeline, classify_six_cycles,
                        fan_sum, group_into_M, halving_latin_square, lift_step, one_configuration,
                        stage_shape)
from gf2sparse import BlockLayout, SparseBinaryMatrix, from_blocks, permutation_matrix

I, P2, _ = ROLE_IDENTITY, ROLE_P2, ""

M1_ORDER_5 = [
    [I, _, _, I, P2],
    [P2, I, _, _, I],
    [I, P2, I, _, _],
    [_, I, P2, I, _],
    [_, _, I, P2, I],
]

M2_ORDER_5 = [
    [I, I, _, P2, _],
    [_, I, I, _, P2],
    [P2, _, I, I, _],
    [_, P2, _, I, I],
    [I, _, P2, _, I],
]


def test_halving_square():
    table = halving_latin_square(2)
    assert table[0][2] == 2
    for i in range(5):
        assert table[i][i] == i + 1
        for j in range(5):
            assert table[i][j] == table[j][i]
    for row in table:
        assert sorted(row) == [1, 2, 3, 4, 5]


def test_halving_square_inverts_doubling():
    for m in (1, 3, 5):
        q = 2 * m + 1
        table = halving_latin_square(m)
        for i in range(1, q + 1):
            for j in range(1, q + 1):
                assert (2 * table[i - 1][j - 1] - i - j) % q == 0


@pytest.mark.parametrize("m", range(1, 7))
def test_one_configuration_pairs(m):
    config = one_configuration(m)
    q = 2 * m + 1
    assert len(config.points) == 3 * q
    assert len(config.blocks) == 3 * q * m
    assert config.pair_multiplicity() <= 1


def test_base_matrix():
    base = build_base(2)
    assert base.matrix.shape == (15, 30)
    assert base.matrix.nnz() == 90
    assert set(base.matrix.col_weights()) == {3}
    assert set(base.matrix.row_weights()) == {6}
    assert girth(base.matrix).girth == 6


def test_grouping_matches_displayed_groups():
    arrangement = arrange(2)
    assert arrangement.group(1) == M1_ORDER_5
    assert arrangement.group(2) == M2_ORDER_5
    assert arrangement.base.matrix.shape == (15, 30)
    assert arrangement.base.matrix.nnz() == 90


def test_grouping_annotations():
    arrangement = arrange(3)
    q = 7
    for (br, bc), note in arrangement.annotations.items():
        assert note.row_label == br + 1
        assert bc == (note.ell - 1) * q + note.start - 1
        if note.role == ROLE_P2:
            assert note.row_label == (note.start + note.ell - 1) % q + 1
            assert not note.upper
    for bc in range(3 * q):
        uppers = [n for (_, c), n in arrangement.annotations.items() if c == bc and n.upper]
        assert len(uppers) == 1


def test_fan_sum_examples():
    assert fan_sum([0, 0, 0, 0, 0, 0], 3).has_cycle
    assert fan_sum([2, 2, 0, 0, 0, 0], 5).has_cycle
    assert not fan_sum([2, 0, 0, 0, 0, 0], 5).has_cycle
    assert fan_sum([1, 2, 3, 4, 0, 0], 7).residue == (1 - 2 + 3 - 4) % 7
    with pytest.raises(BlockCodeError):
        fan_sum([0, 0, 0], 3)


@pytest.mark.parametrize("order", [3, 5, 7])
def test_fan_sum_agrees_with_brute_force(order):
    rng = np.random.default_rng(order)
    for _ in range(500):
        exponents = [int(e) for e in rng.integers(0, order, 6)]
        H = block_cycle_matrix(exponents, order)
        assert fan_sum(exponents, order).has_cycle == (count_cycles(H, 6) > 0)


def test_pipeline_shapes():
    stages = build_pipeline(2)
    shapes = {stage: item.matrix.shape for stage, item in stages.items()}
    assert shapes == {
        STAGE_BASE: (15, 30),
        STAGE_STEP1: (25, 50),
        STAGE_STEP2: (125, 250),
        STAGE_STEP3: (250, 500),
        STAGE_STEP4: (1250, 2500),
    }
    for stage, item in stages.items():
        assert stage_shape(2, stage) == item.matrix.shape
        assert set(item.matrix.col_weights()) == {3}


def test_final_size_formula():
    for m in (1, 2, 3):
        q = 2 * m + 1
        assert stage_shape(m, STAGE_STEP4) == (25 * m * q * q, 25 * m * m * q * q)


def test_pipeline_stops_at_requested_stage():
    stages = build_pipeline(1, STAGE_STEP2)
    assert list(stages) == [STAGE_BASE, STAGE_STEP1, STAGE_STEP2]
    with pytest.raises(BlockCodeError):
        build_pipeline(1, "STEP9")


def test_lift_step_checks_stage_order():
    arrangement = arrange(1)
    with pytest.raises(BlockCodeError):
        lift_step(arrangement.base, 2, arrangement)


def test_six_cycle_classes():
    stages = build_pipeline(2, STAGE_STEP2)
    base = classify_six_cycles(stages[STAGE_BASE])
    assert base.carrying > 0
    step1 = classify_six_cycles(stages[STAGE_STEP1])
    assert step1.counts[CLASS_D] == 0
    assert sum(step1.counts.values()) == sum(base.counts.values())
    assert step1.to_dict()["counts"][CLASS_INERT] == step1.counts[CLASS_INERT]
    with pytest.raises(BlockCodeError):
        classify_six_cycles(stages[STAGE_STEP2])


def test_six_cycle_census_reads_block_exponents():
    step1 = build_pipeline(2, STAGE_STEP1)[STAGE_STEP1]
    layout = step1.layout
    cells = {layout.block_of(r, c) for r, c in step1.matrix.triples()}
    flat = from_blocks({cell: permutation_matrix(5, 0) for cell in cells},
                       [5] * layout.block_rows, [5] * layout.block_cols)
    census = classify_six_cycles(BlockCodeMatrix(2, STAGE_STEP1, flat, layout))
    total = sum(classify_six_cycles(step1).counts.values())
    assert census.counts[CLASS_A] == total
    assert census.counts[CLASS_INERT] == 0
    shifted = from_blocks({cell: permutation_matrix(5, 1) for cell in cells},
                          [5] * layout.block_rows, [5] * layout.block_cols)
    with pytest.raises(BlockCodeError):
        classify_six_cycles(BlockCodeMatrix(2, STAGE_BASE, shifted, layout))


def test_final_matrix_has_no_six_cycles():
    final = build_pipeline(2)[STAGE_STEP4].matrix
    assert count_cycles(final, 4) == 0
    assert count_cycles(final, 6) == 0


def test_parameter_validation():
    with pytest.raises(BlockCodeError):
        halving_latin_square(0)
    with pytest.raises(BlockCodeError):
        stage_shape(2, "FINAL")


@pytest.mark.slow
def test_final_girth_at_least_eight():
    final = build_pipeline(2)[STAGE_STEP4].matrix
    report = girth(final, with_witness=False)
    assert report.girth is None or report.girth >= 8


@pytest.mark.slow
def test_final_matrix_for_m3_has_no_six_cycles():
    final = build_pipeline(3)[STAGE_STEP4].matrix
    assert final.shape == (25 * 3 * 49, 25 * 9 * 49)
    assert count_cycles(final, 6) == 0


def test_grouping_is_a_column_permutation_and_idempotent():
    base = build_base(2)
    arrangement = group_into_M(2, base)
    assert len(arrangement.columns) == 10
    assert sorted(map(tuple, base.matrix.to_dense().T.tolist())) == \
        sorted(map(tuple, arrangement.base.matrix.to_dense().T.tolist()))
    again = group_into_M(2, arrangement.base)
    assert again.base.matrix == arrangement.base.matrix
    assert again.columns == arrangement.columns


def test_grouping_rejects_matrix_without_block_pattern():
    base = build_base(1)
    broken = BlockCodeMatrix(1, STAGE_BASE, SparseBinaryMatrix.identity(9),
                             BlockLayout.for_matrix(SparseBinaryMatrix.identity(9), 3))
    assert base.matrix.shape == (9, 9)
    with pytest.raises(BlockCodeError):
        group_into_M(1, broken)
