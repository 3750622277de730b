#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
分析模块
Tanner 图围长、短环计数与定位、列距离和自由距离、窗口密度校验

Tanner 图顶点编号：列 c 为顶点 c，行 r 为顶点 n_cols + r。
环的规范形式为顶点序列 (c1, r1, c2, r2, …)，从起始区域中最小的列出发，
方向取 r1 < r_ℓ；对应的位置序列为 (r1,c1),(r1,c2),(r2,c2),(r2,c3),…
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config import ANALYSIS_CONFIG
from convcodes import (FAMILY_TI_PRIME, FAMILY_TV, FAMILY_TV_TILDE,
                       ConstructionSpec, ConvFamily, SlidingWindow, build_family,
                       encode_systematic, girth_lower_bound, materialize)
from gf2sparse import SparseBinaryMatrix, density, from_blocks
from logger_config import get_logger

logger = get_logger("Analysis")

Position = Tuple[int, int]
Cycle = Tuple[int, ...]


class AnalysisError(ValueError):
    """分析请求不合法"""


class SearchBudgetExceeded(AnalysisError):
    """枚举超过配置的预算，拒绝给出可能不完整的结果"""


# ==================== 报告类型 ====================

@dataclass
class GirthReport:
    """围长报告

    girth 为 None 表示在搜索上限内没有找到环。
    """
    girth: Optional[int]
    window_s: Optional[int] = None
    stabilized: bool = False
    witness: List[Position] = field(default_factory=list)
    girth_bound: Optional[int] = None
    search_limit: Optional[int] = None
    windows_tried: List[int] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.girth is not None

    @property
    def bound_satisfied(self) -> Optional[bool]:
        if self.girth_bound is None:
            return None
        if self.girth is None:
            return self.search_limit is not None and self.search_limit + 2 >= self.girth_bound
        return self.girth >= self.girth_bound

    @property
    def bound_attained(self) -> Optional[bool]:
        if self.girth_bound is None or self.girth is None:
            return None
        return self.girth == self.girth_bound

    def to_dict(self) -> Dict:
        return {
            "girth": self.girth if self.found else "no cycle found in window",
            "window_s": self.window_s,
            "stabilized": self.stabilized,
            "girth_bound": self.girth_bound,
            "bound_satisfied": self.bound_satisfied,
            "bound_attained": self.bound_attained,
            "search_limit": self.search_limit,
            "windows_tried": list(self.windows_tried),
            "witness": [list(pos) for pos in self.witness],
        }


@dataclass
class CycleCensus:
    """各长度环的精确计数（只计与起始区域相交的环）"""
    counts: Dict[int, int]
    window_s: Optional[int] = None
    restricted_to_first_period: bool = False

    def to_dict(self) -> Dict:
        return {
            "counts": {str(k): v for k, v in sorted(self.counts.items())},
            "window_s": self.window_s,
            "restricted_to_first_period": self.restricted_to_first_period,
        }


@dataclass
class FreeDistance:
    """自由距离的上下界

    witness 是达到上界的码字（按块列出），gap 为 True 表示上下界未相遇。
    """
    lower: int
    upper: Optional[int]
    witness: List[np.ndarray] = field(default_factory=list)
    start_offset: int = 0

    @property
    def gap(self) -> bool:
        return self.upper is None or self.lower != self.upper

    def witness_support(self) -> List[int]:
        if not self.witness:
            return []
        return [int(i) for i in np.flatnonzero(np.concatenate(self.witness))]

    def to_dict(self) -> Dict:
        return {
            "lo": self.lower,
            "hi": self.upper,
            "gap": self.gap,
            "start_offset": self.start_offset,
            "witness_support": self.witness_support(),
        }


@dataclass
class DistanceProfile:
    """列距离 d_0^c … d_J^c 以及自由距离界，None 表示超过 d_cap"""
    column_distances: Dict[int, Optional[int]]
    free: FreeDistance
    d_cap: int

    def to_dict(self) -> Dict:
        return {
            "distances": {str(j): d if d is not None else f">{self.d_cap}"
                          for j, d in sorted(self.column_distances.items())},
            "d_free": self.free.to_dict(),
            "d_cap": self.d_cap,
        }


@dataclass
class DensityCheck:
    measured: Fraction
    formula: Fraction
    specialization: Optional[Fraction] = None

    @property
    def match(self) -> bool:
        return self.measured == self.formula and (
            self.specialization is None or self.specialization == self.measured)

    def to_dict(self) -> Dict:
        data = {
            "measured": str(self.measured),
            "formula": str(self.formula),
            "match": self.match,
        }
        if self.specialization is not None:
            data["specialization"] = str(self.specialization)
        return data


# ==================== Tanner 图工具 ====================

def _adjacency(H: SparseBinaryMatrix) -> List[Tuple[int, ...]]:
    n = H.n_cols
    return [tuple(n + r for r in col) for col in H.cols] + [tuple(row) for row in H.rows]


def _region(H: SparseBinaryMatrix, start_region) -> List[int]:
    if start_region is None:
        return list(range(H.n_cols))
    region = sorted(set(start_region))
    if region and (region[0] < 0 or region[-1] >= H.n_cols):
        raise AnalysisError(f"起始区域超出列范围 0..{H.n_cols - 1}")
    return region


def first_period_region(window: SlidingWindow) -> range:
    """窗口前 T 个块列对应的列下标"""
    return range(0, min(window.period, window.s + 1) * window.n)


def cycle_positions(H: SparseBinaryMatrix, vertices: Sequence[int]) -> List[Position]:
    """规范顶点序列 → 位置序列 (r1,c1),(r1,c2),(r2,c2),…"""
    n = H.n_cols
    length = len(vertices)
    positions = []
    for i in range(0, length, 2):
        c, r = vertices[i], vertices[i + 1] - n
        positions.append((r, c))
        positions.append((r, vertices[(i + 2) % length]))
    return positions


def _shortest_cycle_through(adj, root: int, best: int, limit: int) -> Optional[int]:
    """BFS 求经过 root 的最短环长，只报告小于 best 且不超过 limit 的环"""
    dist = {root: 0}
    branch = {root: -1}
    parent = {root: -1}
    frontier = [root]
    depth = 0
    while frontier:
        if 2 * depth + 2 >= best or 2 * depth + 2 > limit:
            return None
        following = []
        for x in frontier:
            bx = branch[x]
            for y in adj[x]:
                if y == parent[x]:
                    continue
                if y not in dist:
                    dist[y] = depth + 1
                    branch[y] = y if depth == 0 else bx
                    parent[y] = x
                    following.append(y)
                elif branch[y] != bx and y != root:
                    return dist[x] + dist[y] + 1
        frontier = following
        depth += 1
    return None


def _lex_first_cycle(adj, root: int, length: int, blocked) -> Optional[Cycle]:
    """按字典序深度优先找经过 root、长度为 length 的第一个环"""
    dist = {root: 0}
    frontier = [root]
    for depth in range(1, length // 2 + 1):
        following = []
        for x in frontier:
            for y in adj[x]:
                if y not in dist and not blocked(y):
                    dist[y] = depth
                    following.append(y)
        frontier = following

    path = [root]
    on_path = {root}

    def dfs(x: int) -> bool:
        depth = len(path)
        remaining = length - depth
        for y in adj[x]:
            if y == root:
                if remaining == 0 and depth >= 4:
                    return True
                continue
            if y in on_path or blocked(y) or dist.get(y, length) > remaining:
                continue
            path.append(y)
            on_path.add(y)
            if dfs(y):
                return True
            on_path.discard(path.pop())
        return False

    return tuple(path) if dfs(root) else None


# ==================== 围长 ====================

def girth(H: SparseBinaryMatrix, start_region: Optional[Iterable[int]] = None,
          search_limit: Optional[int] = None, lower_bound: int = 4,
          with_witness: bool = True) -> GirthReport:
    """经过起始区域中某一列的最短环

    start_region 为 None 时即整个矩阵的围长。lower_bound 是调用方保证成立的围长下界，
    当前最优值等于它时提前结束；此时结果只在下界成立时精确，
    要验证下界本身必须保留默认值 4。

    Args:
        H: 校验矩阵
        start_region: 起始列集合，None 表示全部列
        search_limit: 最大搜索环长，默认读取 ANALYSIS_CONFIG
        lower_bound: 已保证的下界（用于提前结束）
        with_witness: 是否给出字典序最小的规范环

    Returns:
        GirthReport
    """
    if H.n_rows == 0 or H.n_cols == 0:
        raise AnalysisError("空矩阵没有 Tanner 图")
    if search_limit is None:
        search_limit = ANALYSIS_CONFIG["girth_search_limit"]
    region = _region(H, start_region)
    adj = _adjacency(H)

    best = search_limit + 2
    for c in region:
        if len(adj[c]) < 2:
            continue
        found = _shortest_cycle_through(adj, c, best, search_limit)
        if found is not None:
            best = found
            if best <= lower_bound:
                break

    if best > search_limit:
        logger.debug(f"搜索上限 {search_limit} 内未找到环")
        return GirthReport(None, search_limit=search_limit)

    witness = []
    if with_witness:
        witness = cycle_positions(H, _witness(adj, H.n_cols, region, best))
    return GirthReport(best, witness=witness, search_limit=search_limit)


def _witness(adj, n_cols: int, region: List[int], length: int) -> Cycle:
    region_set = set(region)
    for c in region:
        if len(adj[c]) < 2:
            continue
        cycle = _lex_first_cycle(adj, c, length, lambda v: v < c and v < n_cols and v in region_set)
        if cycle is not None:
            return cycle
    raise AnalysisError(f"未能复现长度为 {length} 的环")


def girth_stabilized(spec: ConstructionSpec, rounds: Optional[int] = None,
                     max_windows: Optional[int] = None, search_limit: Optional[int] = None,
                     nnz_cap: Optional[int] = None) -> GirthReport:
    """在 s = s0, s0+T, s0+2T, … 的窗口上计算围长，直到连续 rounds 次不变

    s0 = 6(μ+1)，起始区域为前 T 个块列（带状矩阵的周期平移）。
    """
    if rounds is None:
        rounds = ANALYSIS_CONFIG["stabilize_rounds"]
    if max_windows is None:
        max_windows = ANALYSIS_CONFIG["stabilize_max_windows"]
    family = build_family(spec)
    bound = girth_lower_bound(spec)
    s = 6 * (family.mu + 1)
    period = family.period

    logger.info(f"🔍 开始围长稳定化: {spec.key()}，s0={s}，T={period}")
    tried: List[int] = []
    previous, unchanged = None, 0
    report = None
    for _ in range(max_windows):
        window = materialize(family, s, nnz_cap=nnz_cap)
        report = girth(window.matrix, first_period_region(window), search_limit=search_limit,
                       with_witness=False)
        tried.append(s)
        logger.info(f"   窗口 s={s}: girth={report.girth}")
        if tried[1:] and report.girth == previous:
            unchanged += 1
        else:
            unchanged = 0
        previous = report.girth
        if unchanged >= rounds:
            break
        s += period

    stabilized = unchanged >= rounds
    if not stabilized:
        logger.warning(f"⚠️ {spec.key()} 在 {len(tried)} 个窗口内未稳定")
    # 构造下界不作为提前结束条件
    final = girth(window.matrix, first_period_region(window), search_limit=search_limit)
    final.window_s = tried[-1]
    final.stabilized = stabilized
    final.girth_bound = bound
    final.windows_tried = tried
    logger.info(f"✅ {spec.key()} 围长 {final.girth}（下界 {bound}）")
    return final


# ==================== 环计数 ====================

def _check_length(length: int):
    max_length = ANALYSIS_CONFIG["max_census_length"]
    if length % 2 or not 4 <= length <= max_length:
        raise AnalysisError(f"环长必须是 4..{max_length} 之间的偶数: {length}")


def enumerate_cycles(H: SparseBinaryMatrix, length: int, start_region: Optional[Iterable[int]] = None,
                     path_budget: Optional[int] = None) -> List[Cycle]:
    """枚举与起始区域相交、长度为 length 的全部环（规范顶点序列）

    从每个根列出发枚举长度 ℓ 的半路径（不经过比根小的区域列），
    按终点分组后把内部不相交的两条拼成环，每个环只在其最小区域列处计数一次。
    """
    _check_length(length)
    if path_budget is None:
        path_budget = ANALYSIS_CONFIG["path_budget"]
    half = length // 2
    region = _region(H, start_region)
    region_set = set(region)
    n = H.n_cols
    adj = _adjacency(H)

    cycles: List[Cycle] = []
    used = 0
    for root in region:
        if len(adj[root]) < 2:
            continue
        by_end: Dict[int, List[Tuple[int, ...]]] = {}
        stack = [(root, (), {root})]
        while stack:
            x, path, seen = stack.pop()
            if len(path) == half:
                by_end.setdefault(x, []).append(path)
                used += 1
                if used > path_budget:
                    raise SearchBudgetExceeded(f"半路径数量超过预算 {path_budget}（环长 {length}）")
                continue
            for y in adj[x]:
                if y in seen or (y < n and y < root and y in region_set):
                    continue
                stack.append((y, path + (y,), seen | {y}))

        for end, paths in by_end.items():
            if len(paths) < 2:
                continue
            for a, b in itertools.combinations(paths, 2):
                if a[0] > b[0]:
                    a, b = b, a
                if a[0] == b[0] or not set(a[:-1]).isdisjoint(b[:-1]):
                    continue
                cycles.append((root,) + a + tuple(reversed(b[:-1])))
    cycles.sort()
    return cycles


def count_cycles(H: SparseBinaryMatrix, length: int, start_region: Optional[Iterable[int]] = None,
                 path_budget: Optional[int] = None) -> int:
    """与起始区域相交的长度为 length 的环的精确数目"""
    return len(enumerate_cycles(H, length, start_region, path_budget))


def census(H: SparseBinaryMatrix, lengths: Sequence[int] = (4, 6, 8, 10, 12),
           start_region: Optional[Iterable[int]] = None, window_s: Optional[int] = None,
           path_budget: Optional[int] = None) -> CycleCensus:
    for length in lengths:
        _check_length(length)
    region = None if start_region is None else list(start_region)
    counts = {}
    for length in lengths:
        counts[length] = count_cycles(H, length, region, path_budget)
        logger.debug(f"{length}-环: {counts[length]}")
    return CycleCensus(counts, window_s, region is not None)


def cycle_r_labels(cycle: Sequence[Position], window: SlidingWindow) -> List[int]:
    """环依次经过的每个列所在块列的拉丁方斜率 r_1 … r_ℓ"""
    if window.spec is None or window.family not in (FAMILY_TV, FAMILY_TV_TILDE):
        raise AnalysisError("只有带斜率标注的 tv / tv-tilde 窗口才有 r 标签")
    family = build_family(window.spec)
    columns: List[int] = []
    for _, c in cycle:
        if not columns or columns[-1] != c:
            columns.append(c)
    if len(columns) > 1 and columns[0] == columns[-1]:
        columns.pop()
    labels = []
    for c in columns:
        if c % window.n >= window.k:
            raise AnalysisError(f"环经过单位阵部分的列 {c}，窗口构造有误")
        labels.append(family.slope(c // window.n))
    return labels


# ==================== 距离 ====================

def truncated_sliding_matrix(family: ConvFamily, j: int, t: int) -> SparseBinaryMatrix:
    """H_j^c(t)：块 (u, v) = H_{u-v}(t+v)，0 ≤ v ≤ u ≤ j"""
    blocks = {}
    for u in range(j + 1):
        for v in range(u + 1):
            if u - v <= family.mu:
                blocks[(u, v)] = family.block(u - v, t + v)
    height = family.n - family.k
    return from_blocks(blocks, [height] * (j + 1), [family.n] * (j + 1))


def _column_masks(H: SparseBinaryMatrix) -> List[int]:
    masks = []
    for col in H.cols:
        mask = 0
        for r in col:
            mask |= 1 << r
        masks.append(mask)
    return masks


def _min_dependency(masks: List[int], targets: range, max_size: int) -> Optional[int]:
    """最小的 w：存在 w 个列（至少一个在 targets 中）在 GF(2) 上和为零

    对每个目标列求表示它的最少其它列数，子集按一半大小做中间相遇。
    """
    half = (max_size + 1) // 2
    table: Dict[int, List[Tuple[int, ...]]] = {}
    by_size: Dict[int, List[Tuple[Tuple[int, ...], int]]] = {0: [((), 0)]}
    for size in range(1, half + 1):
        entries = []
        for subset in itertools.combinations(range(len(masks)), size):
            mask = 0
            for i in subset:
                mask ^= masks[i]
            entries.append((subset, mask))
            table.setdefault(mask, []).append(subset)
        by_size[size] = entries

    best = None
    for target in targets:
        goal = masks[target]
        if goal == 0:
            return 1
        for s in range(1, max_size + 1):
            if best is not None and s + 1 >= best:
                break
            b = (s + 1) // 2
            a = s - b
            if _represent(goal, target, a, b, by_size, table):
                best = s + 1
                break
    return best


def _represent(goal: int, target: int, a: int, b: int, by_size, table) -> bool:
    for subset_b, mask_b in by_size[b]:
        if target in subset_b:
            continue
        need = goal ^ mask_b
        if a == 0:
            if need == 0:
                return True
            continue
        for subset_a in table.get(need, ()):
            if len(subset_a) == a and target not in subset_a and set(subset_a).isdisjoint(subset_b):
                return True
    return False


def _family_of(spec_or_family) -> ConvFamily:
    return spec_or_family if isinstance(spec_or_family, ConvFamily) else build_family(spec_or_family)


def column_distance(spec_or_family, j: int, d_cap: Optional[int] = None) -> Optional[int]:
    """第 j 列距离 d_j^c，对 t ∈ {0..T-1} 取最小；超过 d_cap 返回 None"""
    if d_cap is None:
        d_cap = ANALYSIS_CONFIG["d_cap"]
    if j < 0:
        raise AnalysisError(f"j 不能为负: {j}")
    if d_cap < 2:
        raise AnalysisError(f"d_cap 至少为 2: {d_cap}")
    family = _family_of(spec_or_family)
    best = None
    for t in range(family.period):
        masks = _column_masks(truncated_sliding_matrix(family, j, t))
        cap = d_cap if best is None else best - 1
        if cap < 2:
            break
        d = _min_dependency(masks, range(family.n), cap - 1)
        if d is not None and (best is None or d < best):
            best = d
    logger.debug(f"d_{j}^c = {best if best is not None else f'>{d_cap}'}")
    return best


def free_distance(spec_or_family, weight_cap: int = 2, span_cap: int = 2,
                  jmax: Optional[int] = None, d_cap: Optional[int] = None,
                  column_distances: Optional[Dict[int, Optional[int]]] = None) -> FreeDistance:
    """自由距离的下界（列距离最大值）与上界（枚举低重信息序列编码）

    Args:
        weight_cap: 信息序列的最大重量
        span_cap: 信息序列的最大块数
        jmax: 下界使用的最大 j，默认 μ+1
        column_distances: 已算好的列距离，避免重复计算
    """
    if weight_cap < 1 or span_cap < 1:
        raise AnalysisError("weight_cap 和 span_cap 必须为正")
    if d_cap is None:
        d_cap = ANALYSIS_CONFIG["d_cap"]
    family = _family_of(spec_or_family)
    if jmax is None:
        jmax = family.mu + 1
    if column_distances is None:
        column_distances = {j: column_distance(family, j, d_cap) for j in range(jmax + 1)}
    lower = max((d if d is not None else d_cap + 1) for d in column_distances.values())

    k = family.k
    upper, witness, offset = None, [], 0
    for t0 in range(family.period):
        for weight in range(1, weight_cap + 1):
            for support in itertools.combinations(range(span_cap * k), weight):
                if support[0] >= k:
                    break
                span = support[-1] // k + 1
                bits = np.zeros(span * k, dtype=np.uint8)
                bits[list(support)] = 1
                info = [np.zeros(k, dtype=np.uint8)] * t0 + list(bits.reshape(span, k))
                codeword = encode_systematic(family, info)
                w = int(sum(int(block.sum()) for block in codeword))
                if upper is None or w < upper:
                    upper, witness, offset = w, codeword, t0
            if upper is not None and upper == lower:
                break
        if upper is not None and upper == lower:
            break
    result = FreeDistance(lower, upper, witness, offset)
    if result.gap:
        logger.warning(f"⚠️ 自由距离上下界未相遇: {lower} ≤ d_free ≤ {upper}")
    return result


def distance_profile(spec_or_family, jmax: int, d_cap: Optional[int] = None,
                     weight_cap: int = 2, span_cap: int = 2) -> DistanceProfile:
    if d_cap is None:
        d_cap = ANALYSIS_CONFIG["d_cap"]
    family = _family_of(spec_or_family)
    distances = {j: column_distance(family, j, d_cap) for j in range(jmax + 1)}
    free = free_distance(family, weight_cap, span_cap, d_cap=d_cap, column_distances=distances)
    return DistanceProfile(distances, free, d_cap)


# ==================== 密度 ====================

def density_formula(spec: ConstructionSpec, s: int) -> Fraction:
    """窗口密度的闭式"""
    p, mu, m = spec.p, spec.mu, spec.m
    if spec.family == FAMILY_TV:
        return Fraction(mu + 2, 2 * p ** (m + 1) * (mu + s + 1))
    if spec.family == FAMILY_TV_TILDE:
        return Fraction(mu + 2, 2 * p ** (m + 2) * (mu + s + 1))
    if spec.family == FAMILY_TI_PRIME:
        return Fraction(mu + 2, 2 * (p - 1) * (mu + s + 1))
    return Fraction(mu + 2, 2 * (p - 1) * p ** (m + 1) * (s + 2))


def density_check(spec: ConstructionSpec, s: int) -> DensityCheck:
    """实测密度与闭式精确比较；tv 且 μ = p-2 时同时核对 1/(2p^m(p+s-1))"""
    window = materialize(spec, s)
    measured = density(window.matrix)
    specialization = None
    if spec.family == FAMILY_TV and spec.mu == spec.p - 2:
        specialization = Fraction(1, 2 * spec.p ** spec.m * (spec.p + s - 1))
    check = DensityCheck(measured, density_formula(spec, s), specialization)
    if not check.match:
        logger.error(f"❌ 密度不符: {spec.key()} s={s} 实测 {measured}，闭式 {check.formula}")
    return check

