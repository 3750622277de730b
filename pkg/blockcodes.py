#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
LDPC 分组码模块
由 2m+1 阶"折半"拉丁方得到的单一配置关联矩阵，按 M_ℓ 分组，
再经过四步提升消去全部 6-环

所有提升规则都以初始矩阵的块注记为准：块行标签、所属 M_ℓ、
单位阵还是 P²、以及单位阵在块列中位于较小还是较大的块行。
"""

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from gf2sparse import (BlockLayout, SparseBinaryMatrix, from_blocks, kronecker_expand,
                       permutation_matrix)
from logger_config import get_logger

logger = get_logger("BlockCodes")

STAGE_BASE = "BASE"
STAGE_STEP1 = "STEP1"
STAGE_STEP2 = "STEP2"
STAGE_STEP3 = "STEP3"
STAGE_STEP4 = "STEP4"
STAGES = (STAGE_BASE, STAGE_STEP1, STAGE_STEP2, STAGE_STEP3, STAGE_STEP4)

ROLE_IDENTITY = "I"
ROLE_P2 = "P2"

CLASS_A = "A"
CLASS_B = "B"
CLASS_C = "C"
CLASS_D = "D"
CLASS_INERT = "inert"


class BlockCodeError(ValueError):
    """分组码构造参数或注记错误"""


def _check_m(m: int):
    if m < 1:
        raise BlockCodeError(f"需要 m ≥ 1: {m}")


def _label(residue: int, order: int) -> int:
    residue %= order
    return order if residue == 0 else residue


def halving_latin_square(m: int) -> Tuple[Tuple[int, ...], ...]:
    """L(i,j) = (i+j)/2 mod (2m+1)，2 的逆元为 m+1，余数 0 记作 2m+1

    返回 1 起始的表：table[i-1][j-1] = L(i,j)
    """
    _check_m(m)
    q = 2 * m + 1
    return tuple(
        tuple(_label((i + j) * (m + 1), q) for j in range(1, q + 1))
        for i in range(1, q + 1)
    )


@dataclass(frozen=True)
class OneConfiguration:
    """点集 V = {1..2m+1}×{1,2,3}，块 {(i,a),(j,a),(L(i,j),a+1 mod 3)}"""
    m: int
    points: Tuple[Tuple[int, int], ...]
    blocks: Tuple[Tuple[Tuple[int, int], ...], ...]

    @property
    def order(self) -> int:
        return 2 * self.m + 1

    def point_index(self, point: Tuple[int, int]) -> int:
        i, a = point
        return 3 * (i - 1) + (a - 1)

    def pair_multiplicity(self) -> int:
        """任意两点共同出现的最大块数（单一配置要求 ≤ 1）"""
        seen: Dict[Tuple, int] = {}
        for block in self.blocks:
            for pair in itertools.combinations(sorted(block), 2):
                seen[pair] = seen.get(pair, 0) + 1
        return max(seen.values(), default=0)


def one_configuration(m: int) -> OneConfiguration:
    _check_m(m)
    q = 2 * m + 1
    table = halving_latin_square(m)
    points = tuple((i, a) for i in range(1, q + 1) for a in (1, 2, 3))
    blocks = []
    for i, j in itertools.combinations(range(1, q + 1), 2):
        for a in (1, 2, 3):
            blocks.append(((i, a), (j, a), (table[i - 1][j - 1], a % 3 + 1)))
    return OneConfiguration(m, points, tuple(blocks))


@dataclass(frozen=True)
class BlockAnnotation:
    """初始矩阵中一个非零 3×3 块的注记

    row_label: 块行标签 1..2m+1
    start: 该块列在 M_ℓ 中的下标 i（单位阵在 i 和 i+2ℓ，P² 在 i+ℓ）
    upper: 单位阵是否位于该块列中较小的块行
    """
    role: str
    row_label: int
    ell: int
    start: int
    upper: bool = False


@dataclass(frozen=True)
class BlockCodeMatrix:
    m: int
    stage: str
    matrix: SparseBinaryMatrix
    layout: BlockLayout

    def describe(self) -> Dict:
        return {
            "family": "block",
            "m": self.m,
            "stage": self.stage,
            "n_rows": self.matrix.n_rows,
            "n_cols": self.matrix.n_cols,
            "block_size": self.layout.block_size,
        }


@dataclass(frozen=True)
class Arrangement:
    """按 M_1 | … | M_m 排列的初始矩阵及其块注记"""
    m: int
    base: BlockCodeMatrix
    annotations: Dict[Tuple[int, int], BlockAnnotation]
    columns: Tuple[Tuple[int, int], ...]

    def group(self, ell: int) -> List[List[str]]:
        """M_ℓ 的块示意：每格为 "I"、"P2" 或空串"""
        q = 2 * self.m + 1
        grid = [[""] * q for _ in range(q)]
        offset = (ell - 1) * q
        for (row, col), note in self.annotations.items():
            if offset <= col < offset + q:
                grid[row][col - offset] = note.role
        return grid


def build_base(m: int) -> BlockCodeMatrix:
    """单一配置的关联矩阵 H(i,j) = 1 ⟺ v_i ∈ B_j，块列按 (i<j) 字典序"""
    config = one_configuration(m)
    rows: List[List[int]] = [[] for _ in config.points]
    for col, block in enumerate(config.blocks):
        for point in block:
            rows[config.point_index(point)].append(col)
    matrix = SparseBinaryMatrix(len(config.points), len(config.blocks), rows)
    logger.debug(f"初始矩阵 m={m}: {matrix.n_rows}x{matrix.n_cols}")
    return BlockCodeMatrix(m, STAGE_BASE, matrix, BlockLayout.for_matrix(matrix, 3))


def _block_role(block: SparseBinaryMatrix) -> Optional[str]:
    if block.nnz() == 0:
        return None
    if block == permutation_matrix(3, 0):
        return ROLE_IDENTITY
    if block == permutation_matrix(3, 2):
        return ROLE_P2
    raise BlockCodeError(f"3×3 块既不是 I 也不是 P²: {block.rows}")


def group_into_M(m: int, base: Optional[BlockCodeMatrix] = None) -> Arrangement:
    """把块列重排为 M_1 | … | M_m，每组按 i 递增

    M_ℓ 的第 i 个块列：单位阵在块行 i 和 i+2ℓ，P² 在块行 i+ℓ（均 mod 2m+1）。
    """
    if base is None:
        base = build_base(m)
    q = 2 * m + 1
    layout = base.layout
    placed: Dict[Tuple[int, int], int] = {}
    for bc in range(layout.block_cols):
        identities, p2_rows = [], []
        for br in range(layout.block_rows):
            role = _block_role(layout.block(base.matrix, br, bc))
            if role == ROLE_IDENTITY:
                identities.append(br + 1)
            elif role == ROLE_P2:
                p2_rows.append(br + 1)
        if len(identities) != 2 or len(p2_rows) != 1:
            raise BlockCodeError(f"块列 {bc} 不是两个 I 加一个 P² 的形式")
        x, y = identities
        d = y - x
        if d % 2 == 0:
            ell, start = d // 2, x
        else:
            ell, start = (q - d) // 2, y
        if not 1 <= ell <= m or _label(start + ell, q) != p2_rows[0]:
            raise BlockCodeError(f"块列 {bc} 无法归入任何 M_ℓ")
        placed[(ell, start)] = bc

    order = tuple(sorted(placed))
    if len(order) != m * q:
        raise BlockCodeError("M_ℓ 分组不完整")
    source_blocks = {}
    annotations = {}
    for new_bc, (ell, start) in enumerate(order):
        old_bc = placed[(ell, start)]
        first, second = start, _label(start + 2 * ell, q)
        for br in range(q):
            block = layout.block(base.matrix, br, old_bc)
            role = _block_role(block)
            if role is None:
                continue
            source_blocks[(br, new_bc)] = block
            label = br + 1
            upper = role == ROLE_IDENTITY and label == min(first, second)
            annotations[(br, new_bc)] = BlockAnnotation(role, label, ell, start, upper)

    matrix = from_blocks(source_blocks, [3] * q, [3] * (m * q))
    arranged = BlockCodeMatrix(m, STAGE_BASE, matrix, BlockLayout.for_matrix(matrix, 3))
    return Arrangement(m, arranged, annotations, order)


def arrange(m: int) -> Arrangement:
    return group_into_M(m, build_base(m))


# ==================== Fan sum ====================

@dataclass(frozen=True)
class FanSum:
    residue: int
    has_cycle: bool


def fan_sum(exponents: Sequence[int], order: int) -> FanSum:
    """i1 - i2 + i3 - i4 + i5 - i6 mod D；为零当且仅当块环中含有 6-环"""
    if order < 2:
        raise BlockCodeError(f"置换阵阶数至少为 2: {order}")
    if len(exponents) != 6:
        raise BlockCodeError(f"需要 6 个指数，实际 {len(exponents)}")
    residue = sum(e if k % 2 == 0 else -e for k, e in enumerate(exponents)) % order
    return FanSum(residue, residue == 0)


def block_cycle_matrix(exponents: Sequence[int], order: int) -> SparseBinaryMatrix:
    """把 6 个置换阵按块环排成 3D×3D 矩阵：(1,1),(1,2),(2,2),(2,3),(3,3),(3,1)"""
    cells = [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 0)]
    blocks = {cell: permutation_matrix(order, e) for cell, e in zip(cells, exponents)}
    return from_blocks(blocks, [order] * 3, [order] * 3)


# ==================== 提升 ====================

def stage_shape(m: int, stage: str) -> Tuple[int, int]:
    """各阶段矩阵尺寸：3q×3mq → 5q×5mq → ×q → ×m → ×5"""
    _check_m(m)
    if stage not in STAGES:
        raise BlockCodeError(f"未知阶段: {stage}")
    q = 2 * m + 1
    index = STAGES.index(stage)
    if index == 0:
        return 3 * q, 3 * m * q
    rows, cols = 5 * q, 5 * m * q
    for step in range(2, index + 1):
        rows, cols = rows * _step_factor(m, step), cols * _step_factor(m, step)
    return rows, cols


def _step_factor(m: int, step: int) -> int:
    return {1: 5, 2: 2 * m + 1, 3: m, 4: 5}[step]


def _base_block_scale(m: int, step: int) -> int:
    """第 step 步开始前，一个初始 3×3 块占据的边长"""
    scale = 5
    for earlier in range(2, step):
        scale *= _step_factor(m, earlier)
    return scale


def lift_step(current: BlockCodeMatrix, step: int, arrangement: Arrangement) -> BlockCodeMatrix:
    """按初始矩阵注记执行第 step 步提升

    Step 1: I_3 → I_5，P²_3 → P²_5
    Step 2: 单位阵中的 1 → I_q；块行 i 的 P² 中的 1 → P^i（阶 q）
    Step 3: 单位阵中的 1 → I_m；M_ℓ 中 P² 的 1 → P^ℓ（阶 m）
    Step 4: P² 中的 1 → I_5；较小块行的单位阵 → P（阶 5），较大块行 → P²（阶 5）
    """
    m = current.m
    if current.stage != STAGES[step - 1]:
        raise BlockCodeError(f"第 {step} 步需要 {STAGES[step - 1]} 阶段的矩阵，实际为 {current.stage}")
    annotations = arrangement.annotations
    q = 2 * m + 1

    if step == 1:
        blocks = {}
        for (br, bc), note in annotations.items():
            exponent = 0 if note.role == ROLE_IDENTITY else 2
            blocks[(br, bc)] = permutation_matrix(5, exponent)
        matrix = from_blocks(blocks, [5] * q, [5] * (m * q))
    else:
        scale = _base_block_scale(m, step)

        def note_of(r: int, c: int) -> BlockAnnotation:
            note = annotations.get((r // scale, c // scale))
            if note is None:
                raise BlockCodeError(f"位置 ({r}, {c}) 没有初始块注记")
            return note

        if step == 2:
            def rule(r, c):
                note = note_of(r, c)
                return permutation_matrix(q, 0 if note.role == ROLE_IDENTITY else note.row_label)
        elif step == 3:
            def rule(r, c):
                note = note_of(r, c)
                return permutation_matrix(m, 0 if note.role == ROLE_IDENTITY else note.ell)
        elif step == 4:
            def rule(r, c):
                note = note_of(r, c)
                if note.role == ROLE_P2:
                    return permutation_matrix(5, 0)
                return permutation_matrix(5, 1 if note.upper else 2)
        else:
            raise BlockCodeError(f"提升步骤必须在 1..4 之间: {step}")
        matrix = kronecker_expand(current.matrix, rule, block_size=_step_factor(m, step))

    stage = STAGES[step]
    if matrix.shape != stage_shape(m, stage):
        raise BlockCodeError(f"{stage} 尺寸 {matrix.shape} 与递推 {stage_shape(m, stage)} 不符")
    block = 5 if stage == STAGE_STEP1 else _step_factor(m, step)
    logger.debug(f"m={m} {stage}: {matrix.n_rows}x{matrix.n_cols}")
    return BlockCodeMatrix(m, stage, matrix, BlockLayout.for_matrix(matrix, block))


def build_pipeline(m: int, stage: str = STAGE_STEP4) -> Dict[str, BlockCodeMatrix]:
    """从 BASE 依次提升到 stage，返回每个阶段的矩阵"""
    if stage not in STAGES:
        raise BlockCodeError(f"未知阶段: {stage}，可选 {', '.join(STAGES)}")
    arrangement = arrange(m)
    stages = {STAGE_BASE: arrangement.base}
    current = arrangement.base
    for step in range(1, STAGES.index(stage) + 1):
        current = lift_step(current, step, arrangement)
        stages[current.stage] = current
    logger.info(f"✅ 分组码 m={m} 构造到 {stage}: {current.matrix.n_rows}x{current.matrix.n_cols}")
    return stages


# ==================== 6-环分类 ====================

@dataclass
class SixCycleCensus:
    stage: str
    counts: Dict[str, int]

    @property
    def carrying(self) -> int:
        """Fan sum 为零、会展开成标量 6-环的块环数目"""
        return sum(v for k, v in self.counts.items() if k != CLASS_INERT)

    def to_dict(self) -> Dict:
        return {"stage": self.stage, "counts": dict(self.counts), "carrying": self.carrying}


def classify_six_cycles(staged: BlockCodeMatrix) -> SixCycleCensus:
    """对 BASE（D=3）或 STEP1（D=5）阶段矩阵的块级 6-环分类

    每个非零块的指数直接从矩阵读出。只有 Fan sum 为零的块环会含有标量 6-环，
    按 P² 的个数和所在块行分为 A–D；其余块环计入 inert。
    """
    order = {STAGE_BASE: 3, STAGE_STEP1: 5}.get(staged.stage)
    if order is None:
        raise BlockCodeError(f"只支持 BASE 和 STEP1 粒度: {staged.stage}")
    layout = staged.layout
    if layout.block_size != order:
        raise BlockCodeError(f"{staged.stage} 的块大小应为 {order}，实际 {layout.block_size}")

    cells = {layout.block_of(r, c) for r, c in staged.matrix.triples()}
    exponents = {cell: _block_exponent(layout.block(staged.matrix, *cell), order) for cell in cells}
    by_col: Dict[int, List[int]] = {}
    for (br, bc) in sorted(exponents):
        by_col.setdefault(bc, []).append(br)

    counts = {CLASS_A: 0, CLASS_B: 0, CLASS_C: 0, CLASS_D: 0, CLASS_INERT: 0}
    for c1, c2, c3 in itertools.combinations(sorted(by_col), 3):
        for a, b, c in ((c1, c2, c3), (c1, c3, c2)):
            for r1 in by_col[a]:
                for r2 in by_col[b]:
                    for r3 in by_col[c]:
                        if len({r1, r2, r3}) < 3:
                            continue
                        cycle = [(r1, a), (r1, b), (r2, b), (r2, c), (r3, c), (r3, a)]
                        if any(cell not in exponents for cell in cycle):
                            continue
                        # 两种列顺序下同一块环各出现一次
                        if r1 > r3:
                            continue
                        counts[_classify(cycle, [exponents[cell] for cell in cycle], order)] += 1
    return SixCycleCensus(staged.stage, counts)


def _block_exponent(block: SparseBinaryMatrix, order: int) -> int:
    """块为 P^e（阶 order）时返回 e"""
    if block.nnz() == order and block.rows[0]:
        exponent = block.rows[0][0]
        if block == permutation_matrix(order, exponent):
            return exponent
    raise BlockCodeError(f"{order}×{order} 块不是置换阵: {block.rows}")


def _classify(cells, exponents: List[int], order: int) -> str:
    if not fan_sum(exponents, order).has_cycle:
        return CLASS_INERT
    p2_rows = [cell[0] for cell, e in zip(cells, exponents) if e != 0]
    if not p2_rows:
        return CLASS_A
    if len(p2_rows) == 2:
        return CLASS_B if p2_rows[0] == p2_rows[1] else CLASS_C
    if len(p2_rows) == 3:
        return CLASS_D
    raise BlockCodeError(f"无法分类的块环: {cells}")

