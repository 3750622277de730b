#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
拉丁方模块
素数阶正交拉丁方 L_r(a,b) = b - r(a-1) mod p 及其（修改的）关联矩阵

下标约定：对外接口使用 1 起始的 a, b 和标签 {1..p}（余数 0 写作 p），
内部运算使用 {0..p-1}。
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Set, Tuple

from gf2sparse import SparseBinaryMatrix


class LatinSquareError(ValueError):
    """拉丁方参数错误"""


def is_prime(n: int) -> bool:
    """试除法判断素数（p 只有几百以内）"""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def to_label(residue: int, order: int) -> int:
    """余数转标签：0 写作 order"""
    residue %= order
    return order if residue == 0 else residue


def _check_params(p: int, r: int):
    if not is_prime(p):
        raise LatinSquareError(f"p 必须是素数: {p}")
    if not 1 <= r <= p - 1:
        raise LatinSquareError(f"斜率 r 必须在 1..{p - 1} 之间: {r}")


def _check_label(p: int, i: int):
    if not 1 <= i <= p:
        raise LatinSquareError(f"标签 i 必须在 1..{p} 之间: {i}")


@dataclass(frozen=True)
class LatinSquare:
    """p 阶拉丁方 L_r，values[a-1][b-1] = L_r(a, b)"""
    p: int
    r: int
    values: Tuple[Tuple[int, ...], ...]

    def value(self, a: int, b: int) -> int:
        return self.values[a - 1][b - 1]

    def is_latin(self) -> bool:
        full = set(range(1, self.p + 1))
        rows_ok = all(set(row) == full for row in self.values)
        cols_ok = all(set(col) == full for col in zip(*self.values))
        return rows_ok and cols_ok

    def is_orthogonal(self, other: "LatinSquare") -> bool:
        """每个有序标签对恰好出现一次"""
        if other.p != self.p:
            return False
        pairs = {(self.values[a][b], other.values[a][b]) for a in range(self.p) for b in range(self.p)}
        return len(pairs) == self.p * self.p


@lru_cache(maxsize=None)
def latin_square(p: int, r: int) -> LatinSquare:
    """构造 L_r(a,b) = b - r(a-1) mod p，余数 0 记作 p"""
    _check_params(p, r)
    values = tuple(
        tuple(to_label(b - r * (a - 1), p) for b in range(1, p + 1))
        for a in range(1, p + 1)
    )
    return LatinSquare(p, r, values)


@dataclass(frozen=True)
class IncidenceMatrix:
    """Q_i^r：L_r 中标签 i 所在位置的置换矩阵"""
    p: int
    r: int
    i: int
    matrix: SparseBinaryMatrix


@dataclass(frozen=True)
class ModifiedIncidenceMatrix:
    """Q̃_i^r：Q_i^r 删去第一行和第一列后的 (p-1)×(p-1) 矩阵"""
    p: int
    r: int
    i: int
    matrix: SparseBinaryMatrix


@lru_cache(maxsize=None)
def incidence(p: int, r: int, i: int) -> IncidenceMatrix:
    """Q_i^r(a,b) = 1 当且仅当 L_r(a,b) = i

    第 a 行的 1 位于 b ≡ i + r(a-1) (mod p)，即 0 起始列 (i - 1 + r·a0) mod p。
    """
    _check_params(p, r)
    _check_label(p, i)
    rows = (((i - 1 + r * a0) % p,) for a0 in range(p))
    return IncidenceMatrix(p, r, i, SparseBinaryMatrix(p, p, rows, validate=False))


@lru_cache(maxsize=None)
def modified_incidence(p: int, r: int, i: int) -> ModifiedIncidenceMatrix:
    """Q̃_i^r(a,b) = 1 当且仅当 L_r(a+1,b+1) = i，a, b ∈ {1..p-1}"""
    _check_params(p, r)
    _check_label(p, i)
    square = latin_square(p, r)
    rows: List[List[int]] = []
    for a in range(1, p):
        rows.append([b - 1 for b in range(1, p) if square.value(a + 1, b + 1) == i])
    return ModifiedIncidenceMatrix(p, r, i, SparseBinaryMatrix(p - 1, p - 1, rows, validate=False))


def common_positions(first: IncidenceMatrix, second: IncidenceMatrix) -> Set[Tuple[int, int]]:
    """两个关联矩阵共同取 1 的位置（0 起始）"""
    return set(first.matrix.triples()) & set(second.matrix.triples())
