#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""latin 测试"""

import itertools

import numpy as np
import pytest

from latin import (LatinSquareError, common_positions, incidence, is_prime, latin_square,
                   modified_incidence, to_label)

PRIMES = [p for p in range(2, 14) if is_prime(p)]


def test_primes_up_to_13():
    assert PRIMES == [2, 3, 5, 7, 11, 13]
    assert not is_prime(1) and not is_prime(9)


def test_label_convention():
    assert to_label(0, 5) == 5
    assert to_label(-3, 5) == 2
    assert to_label(7, 5) == 2


def test_small_square_values():
    square = latin_square(5, 2)
    # L_2(a,b) = b - 2(a-1) mod 5
    assert square.value(1, 1) == 1
    assert square.value(2, 1) == 4
    assert square.value(3, 5) == 1
    assert square.value(2, 2) == 5


@pytest.mark.parametrize("p", PRIMES)
def test_all_squares_are_latin_and_mutually_orthogonal(p):
    squares = [latin_square(p, r) for r in range(1, p)]
    for square in squares:
        assert square.is_latin()
    for first, second in itertools.combinations(squares, 2):
        assert first.is_orthogonal(second)


@pytest.mark.parametrize("p", PRIMES)
def test_incidence_matrices_are_permutations(p):
    for r in range(1, p):
        total = np.zeros((p, p), dtype=np.int64)
        for i in range(1, p + 1):
            dense = incidence(p, r, i).matrix.to_dense()
            assert dense.sum(axis=0).tolist() == [1] * p
            assert dense.sum(axis=1).tolist() == [1] * p
            total += dense
        assert (total == 1).all()


def test_incidence_matches_square():
    p, r, i = 7, 3, 4
    square = latin_square(p, r)
    Q = incidence(p, r, i).matrix
    for a in range(1, p + 1):
        for b in range(1, p + 1):
            assert Q.has(a - 1, b - 1) == (square.value(a, b) == i)


def test_modified_incidence_is_deletion_of_first_row_and_column():
    for p in (3, 5, 7):
        for r in range(1, p):
            for i in range(1, p + 1):
                full = incidence(p, r, i).matrix.to_dense()
                reduced = modified_incidence(p, r, i).matrix.to_dense()
                assert np.array_equal(reduced, full[1:, 1:])


def test_modified_incidence_weight():
    # Q_1^r 的第一行第一列处为 1，删去后剩 p-1 个 1；其它标签删去两个 1
    p = 5
    assert modified_incidence(p, 2, 1).matrix.nnz() == p - 1
    assert modified_incidence(p, 2, 3).matrix.nnz() == p - 2


def test_common_positions_between_orthogonal_squares():
    # 不同斜率的 Q_i^r 和 Q_j^{r'} 恰好有一个公共位置
    p = 5
    for r1, r2 in itertools.combinations(range(1, p), 2):
        for i, j in itertools.product(range(1, p + 1), repeat=2):
            assert len(common_positions(incidence(p, r1, i), incidence(p, r2, j))) == 1


def test_parameter_validation():
    with pytest.raises(LatinSquareError):
        latin_square(6, 1)
    with pytest.raises(LatinSquareError):
        latin_square(5, 0)
    with pytest.raises(LatinSquareError):
        incidence(5, 1, 6)
