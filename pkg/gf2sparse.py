#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
GF(2) 稀疏矩阵模块
行邻接表存储的二元矩阵，提供 Tanner 图视图、分块组装、Kronecker 提升和 alist 文本格式
"""

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

Position = Tuple[int, int]


class MatrixFormatError(ValueError):
    """矩阵构造或文件格式错误"""


class SparseBinaryMatrix:
    """GF(2) 上的稀疏矩阵

    rows[r] 是第 r 行取 1 的列下标（严格递增）。列视图 cols 按需生成并缓存。
    构造后不可修改，可在线程间只读共享。
    """

    __slots__ = ("n_rows", "n_cols", "rows", "_cols", "_csr")

    def __init__(self, n_rows: int, n_cols: int, rows: Iterable[Iterable[int]], validate: bool = True):
        rows = tuple(tuple(r) for r in rows)
        if validate:
            if n_rows < 0 or n_cols < 0:
                raise MatrixFormatError(f"矩阵尺寸不能为负: {n_rows}x{n_cols}")
            if len(rows) != n_rows:
                raise MatrixFormatError(f"行数不一致: 声明 {n_rows}，实际 {len(rows)}")
            for r, row in enumerate(rows):
                prev = -1
                for c in row:
                    if c <= prev:
                        raise MatrixFormatError(f"第 {r} 行列下标未严格递增: {row}")
                    if c >= n_cols:
                        raise MatrixFormatError(f"第 {r} 行列下标越界: {c} >= {n_cols}")
                    prev = c
        object.__setattr__(self, "n_rows", n_rows)
        object.__setattr__(self, "n_cols", n_cols)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "_cols", None)
        object.__setattr__(self, "_csr", None)

    def __setattr__(self, name, value):
        raise AttributeError("SparseBinaryMatrix 不可修改")

    # ---------- 构造 ----------

    @classmethod
    def from_triples(cls, n_rows: int, n_cols: int, entries: Iterable[Position]) -> "SparseBinaryMatrix":
        """由 (row, col) 列表构造矩阵，重复或越界的条目会报错"""
        buckets: List[List[int]] = [[] for _ in range(n_rows)]
        seen = set()
        for r, c in entries:
            if not (0 <= r < n_rows and 0 <= c < n_cols):
                raise MatrixFormatError(f"条目越界: ({r}, {c}) 不在 {n_rows}x{n_cols} 内")
            if (r, c) in seen:
                raise MatrixFormatError(f"重复条目: ({r}, {c})")
            seen.add((r, c))
            buckets[r].append(c)
        return cls(n_rows, n_cols, (sorted(b) for b in buckets), validate=False)

    @classmethod
    def from_dense(cls, array) -> "SparseBinaryMatrix":
        """由 0/1 数组构造（非零即 1）"""
        dense = np.asarray(array)
        if dense.ndim != 2:
            raise MatrixFormatError(f"需要二维数组，实际维数 {dense.ndim}")
        n_rows, n_cols = dense.shape
        return cls(n_rows, n_cols, (np.flatnonzero(dense[r]).tolist() for r in range(n_rows)), validate=False)

    @classmethod
    def identity(cls, n: int) -> "SparseBinaryMatrix":
        return cls(n, n, ((r,) for r in range(n)), validate=False)

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int) -> "SparseBinaryMatrix":
        return cls(n_rows, n_cols, (() for _ in range(n_rows)), validate=False)

    # ---------- 视图 ----------

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n_rows, self.n_cols

    @property
    def cols(self) -> Tuple[Tuple[int, ...], ...]:
        """列视图：每列取 1 的行下标（递增）"""
        if self._cols is None:
            buckets: List[List[int]] = [[] for _ in range(self.n_cols)]
            for r, row in enumerate(self.rows):
                for c in row:
                    buckets[c].append(r)
            object.__setattr__(self, "_cols", tuple(tuple(b) for b in buckets))
        return self._cols

    def nnz(self) -> int:
        return sum(len(row) for row in self.rows)

    def triples(self) -> List[Position]:
        """按 (row, col) 升序返回所有 1 的位置"""
        return [(r, c) for r, row in enumerate(self.rows) for c in row]

    def has(self, r: int, c: int) -> bool:
        row = self.rows[r]
        i = bisect_left(row, c)
        return i < len(row) and row[i] == c

    def row_weights(self) -> List[int]:
        return [len(row) for row in self.rows]

    def col_weights(self) -> List[int]:
        return [len(col) for col in self.cols]

    def transpose(self) -> "SparseBinaryMatrix":
        return SparseBinaryMatrix(self.n_cols, self.n_rows, self.cols, validate=False)

    def submatrix(self, row_indices: Sequence[int], col_indices: Sequence[int]) -> "SparseBinaryMatrix":
        """按给定的行、列下标（保持给定顺序）抽取子矩阵"""
        col_map = {c: i for i, c in enumerate(col_indices)}
        rows = []
        for r in row_indices:
            rows.append(sorted(col_map[c] for c in self.rows[r] if c in col_map))
        return SparseBinaryMatrix(len(row_indices), len(col_indices), rows, validate=False)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n_rows, self.n_cols), dtype=np.uint8)
        for r, row in enumerate(self.rows):
            dense[r, list(row)] = 1
        return dense

    def to_scipy(self) -> sparse.csr_matrix:
        """scipy CSR 视图（缓存，调用方不得修改）"""
        if self._csr is None:
            indptr = np.zeros(self.n_rows + 1, dtype=np.int64)
            np.cumsum([len(row) for row in self.rows], out=indptr[1:])
            indices = np.fromiter((c for row in self.rows for c in row), dtype=np.int64,
                                  count=int(indptr[-1]))
            data = np.ones(len(indices), dtype=np.uint8)
            object.__setattr__(self, "_csr", sparse.csr_matrix((data, indices, indptr),
                                                               shape=(self.n_rows, self.n_cols)))
        return self._csr

    def matvec(self, vector) -> np.ndarray:
        """GF(2) 上的矩阵-向量乘积（校验子）"""
        v = np.asarray(vector, dtype=np.uint8).ravel()
        if v.shape[0] != self.n_cols:
            raise MatrixFormatError(f"向量长度 {v.shape[0]} 与列数 {self.n_cols} 不一致")
        return (self.to_scipy() @ v.astype(np.int64)).astype(np.int64) % 2

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseBinaryMatrix):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        return hash((self.n_rows, self.n_cols, self.rows))

    def __repr__(self) -> str:
        return f"SparseBinaryMatrix({self.n_rows}x{self.n_cols}, nnz={self.nnz()})"


def from_triples(n_rows: int, n_cols: int, entries: Iterable[Position]) -> SparseBinaryMatrix:
    return SparseBinaryMatrix.from_triples(n_rows, n_cols, entries)


@dataclass(frozen=True)
class BlockLayout:
    """矩阵的方块网格划分（p×p、(p-1)×(p-1)、5×5 等）"""
    block_rows: int
    block_cols: int
    block_size: int

    def __post_init__(self):
        if self.block_size <= 0:
            raise MatrixFormatError(f"块大小必须为正: {self.block_size}")

    @classmethod
    def for_matrix(cls, matrix: SparseBinaryMatrix, block_size: int) -> "BlockLayout":
        if matrix.n_rows % block_size or matrix.n_cols % block_size:
            raise MatrixFormatError(f"{matrix.n_rows}x{matrix.n_cols} 不能按 {block_size} 整除分块")
        return cls(matrix.n_rows // block_size, matrix.n_cols // block_size, block_size)

    def check(self, matrix: SparseBinaryMatrix) -> bool:
        return (self.block_rows * self.block_size == matrix.n_rows
                and self.block_cols * self.block_size == matrix.n_cols)

    def block_of(self, r: int, c: int) -> Position:
        return r // self.block_size, c // self.block_size

    def block(self, matrix: SparseBinaryMatrix, block_row: int, block_col: int) -> SparseBinaryMatrix:
        b = self.block_size
        return matrix.submatrix(range(block_row * b, (block_row + 1) * b),
                                range(block_col * b, (block_col + 1) * b))


@dataclass(frozen=True)
class PermutationPower:
    """P^i：单位阵的列向右循环移动 i 位，指数按模 D 计算"""
    order: int
    exponent: int

    def __post_init__(self):
        if self.order <= 0:
            raise MatrixFormatError(f"置换阵阶数必须为正: {self.order}")
        object.__setattr__(self, "exponent", self.exponent % self.order)

    def matrix(self) -> SparseBinaryMatrix:
        return permutation_matrix(self.order, self.exponent)

    def __mul__(self, other: "PermutationPower") -> "PermutationPower":
        if self.order != other.order:
            raise MatrixFormatError("置换阵阶数不一致")
        return PermutationPower(self.order, self.exponent + other.exponent)


@lru_cache(maxsize=None)
def permutation_matrix(order: int, exponent: int) -> SparseBinaryMatrix:
    """第 r 行的 1 位于第 (r + exponent) mod order 列"""
    return SparseBinaryMatrix(order, order, (((r + exponent) % order,) for r in range(order)), validate=False)


def from_blocks(blocks: Mapping[Position, SparseBinaryMatrix],
                row_sizes: Sequence[int], col_sizes: Sequence[int]) -> SparseBinaryMatrix:
    """按块网格组装矩阵，未给出的块视为零块

    Args:
        blocks: (块行, 块列) -> 子矩阵
        row_sizes: 每个块行的高度
        col_sizes: 每个块列的宽度
    """
    row_offsets = np.concatenate(([0], np.cumsum(row_sizes))).tolist()
    col_offsets = np.concatenate(([0], np.cumsum(col_sizes))).tolist()
    by_row: Dict[int, List[Tuple[int, SparseBinaryMatrix]]] = {}
    for (bu, bv), blk in blocks.items():
        if blk.shape != (row_sizes[bu], col_sizes[bv]):
            raise MatrixFormatError(
                f"块 ({bu}, {bv}) 尺寸 {blk.shape} 与网格 {(row_sizes[bu], col_sizes[bv])} 不一致")
        by_row.setdefault(bu, []).append((bv, blk))

    rows: List[List[int]] = []
    for bu, height in enumerate(row_sizes):
        entries = sorted(by_row.get(bu, []), key=lambda item: item[0])
        for x in range(height):
            row = []
            for bv, blk in entries:
                offset = col_offsets[bv]
                row.extend(offset + c for c in blk.rows[x])
            rows.append(row)
    return SparseBinaryMatrix(row_offsets[-1], col_offsets[-1], rows, validate=False)


def hstack(*parts: SparseBinaryMatrix) -> SparseBinaryMatrix:
    height = parts[0].n_rows
    return from_blocks({(0, i): part for i, part in enumerate(parts)},
                       [height], [part.n_cols for part in parts])


BlockRule = Union[Callable[[int, int], SparseBinaryMatrix], Mapping[Position, SparseBinaryMatrix]]


def kronecker_expand(base: SparseBinaryMatrix, rule: BlockRule,
                     block_size: Optional[int] = None) -> SparseBinaryMatrix:
    """把 base 中每个 1 替换为 rule 给出的方块，每个 0 替换为零块

    所有提升步骤（Q_a^r、Q_{rab}^r、P^i 替换）都通过这里完成。

    Args:
        base: 被提升的矩阵
        rule: (row, col) -> 方块，可以是函数或字典
        block_size: base 全零时必须显式给出块大小

    Returns:
        尺寸放大 block_size 倍的矩阵
    """
    if isinstance(rule, Mapping):
        lookup = lambda r, c: rule[(r, c)]
    else:
        lookup = rule
    blocks: Dict[Position, SparseBinaryMatrix] = {}
    for r, c in base.triples():
        blk = lookup(r, c)
        if blk.n_rows != blk.n_cols:
            raise MatrixFormatError(f"位置 ({r}, {c}) 的替换块不是方阵: {blk.shape}")
        if block_size is None:
            block_size = blk.n_rows
        elif blk.n_rows != block_size:
            raise MatrixFormatError(f"位置 ({r}, {c}) 的替换块大小 {blk.n_rows} != {block_size}")
        blocks[(r, c)] = blk
    if block_size is None:
        raise MatrixFormatError("base 没有任何 1，必须显式给出 block_size")

    b = block_size
    rows: List[List[int]] = []
    for r, base_row in enumerate(base.rows):
        for x in range(b):
            row = []
            for c in base_row:
                offset = c * b
                row.extend(offset + y for y in blocks[(r, c)].rows[x])
            rows.append(row)
    return SparseBinaryMatrix(base.n_rows * b, base.n_cols * b, rows, validate=False)


def density(matrix: SparseBinaryMatrix) -> Fraction:
    """1 的个数除以 n_rows·n_cols，精确有理数"""
    if matrix.n_rows == 0 or matrix.n_cols == 0:
        raise MatrixFormatError("空矩阵没有密度")
    return Fraction(matrix.nnz(), matrix.n_rows * matrix.n_cols)


def is_cycle(matrix: SparseBinaryMatrix, positions: Sequence[Position]) -> bool:
    """判断 positions 是否构成 Tanner 图中的一个环

    要求：全部是 1；相邻位置交替共享行和列；首尾闭合；行、列均不重复。
    """
    length = len(positions)
    if length < 4 or length % 2:
        return False
    if not all(matrix.has(r, c) for r, c in positions):
        return False
    if len(set(r for r, _ in positions)) != length // 2 or len(set(c for _, c in positions)) != length // 2:
        return False
    for phase in (0, 1):
        ok = True
        for i in range(length):
            a, b = positions[i], positions[(i + 1) % length]
            axis = (i + phase) % 2
            if a[axis] != b[axis] or a[1 - axis] == b[1 - axis]:
                ok = False
                break
        if ok:
            return True
    return False


# ---------- alist 文本格式 ----------

def to_alist(matrix: SparseBinaryMatrix) -> str:
    """导出为 alist 文本（不补零的非规则写法）"""
    col_w = matrix.col_weights()
    row_w = matrix.row_weights()
    lines = [
        f"{matrix.n_cols} {matrix.n_rows}",
        f"{max(col_w, default=0)} {max(row_w, default=0)}",
        " ".join(map(str, col_w)),
        " ".join(map(str, row_w)),
    ]
    lines.extend(" ".join(str(r + 1) for r in col) for col in matrix.cols)
    lines.extend(" ".join(str(c + 1) for c in row) for row in matrix.rows)
    return "\n".join(lines) + "\n"


def from_alist(text: str) -> SparseBinaryMatrix:
    """解析 alist 文本，补零和不补零两种写法都接受"""
    try:
        tokens = [int(x) for x in text.split()]
    except ValueError as e:
        raise MatrixFormatError(f"alist 含非整数内容: {e}") from e
    if len(tokens) < 4:
        raise MatrixFormatError("alist 头部不完整")

    n_cols, n_rows, max_cw, max_rw = tokens[:4]
    ptr = 4
    col_w = tokens[ptr:ptr + n_cols]
    ptr += n_cols
    row_w = tokens[ptr:ptr + n_rows]
    ptr += n_rows
    if len(col_w) != n_cols or len(row_w) != n_rows:
        raise MatrixFormatError("alist 权重行长度不足")

    remaining = len(tokens) - ptr
    unpadded = sum(col_w) + sum(row_w)
    padded = n_cols * max_cw + n_rows * max_rw
    if remaining == unpadded:
        col_slots, row_slots = col_w, row_w
    elif remaining == padded:
        col_slots, row_slots = [max_cw] * n_cols, [max_rw] * n_rows
    else:
        raise MatrixFormatError(f"alist 条目数 {remaining} 与权重不符（期望 {unpadded} 或 {padded}）")

    col_lists = []
    for c in range(n_cols):
        entries = [x for x in tokens[ptr:ptr + col_slots[c]] if x != 0]
        ptr += col_slots[c]
        if len(entries) != col_w[c]:
            raise MatrixFormatError(f"第 {c + 1} 列权重不符")
        col_lists.append(entries)
    rows = []
    for r in range(n_rows):
        entries = [x for x in tokens[ptr:ptr + row_slots[r]] if x != 0]
        ptr += row_slots[r]
        if len(entries) != row_w[r]:
            raise MatrixFormatError(f"第 {r + 1} 行权重不符")
        rows.append(sorted(x - 1 for x in entries))

    matrix = SparseBinaryMatrix(n_rows, n_cols, rows)
    if [sorted(x - 1 for x in col) for col in col_lists] != [list(col) for col in matrix.cols]:
        raise MatrixFormatError("alist 列段与行段不一致")
    return matrix
