#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
LDPC 卷积码构造模块
时变族 H^m（含两种提升）、时不变族 H′ 和 Ĥ、滑动窗口物化、系统编码器

块族按 (j, t mod T) 惰性生成并缓存，只有 materialize 才会拼出具体窗口。
提升时每个标量 1 的来源由两部分确定：所在块列的斜率 r(t) = t mod (p-1) + 1，
以及它在最内层 p×p 块中的位置 (R mod p, C mod p)。
"""

import threading
from dataclasses import dataclass, asdict
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import psutil

from config import WINDOW_CONFIG
from gf2sparse import BlockLayout, SparseBinaryMatrix, from_blocks, hstack, kronecker_expand
from latin import incidence, is_prime, modified_incidence, to_label
from logger_config import get_logger

logger = get_logger("ConvCodes")

FAMILY_TV = "tv"
FAMILY_TV_TILDE = "tv-tilde"
FAMILY_TI_PRIME = "ti-prime"
FAMILY_TI_HAT = "ti-hat"
FAMILIES = (FAMILY_TV, FAMILY_TV_TILDE, FAMILY_TI_PRIME, FAMILY_TI_HAT)

# 物化时每个非零元大约占用的内存（字节）
_BYTES_PER_ENTRY = 64


class ConstructionError(ValueError):
    """构造参数或内部一致性错误"""


class WindowTooLarge(ConstructionError):
    """窗口超过配置的非零元上限"""


@dataclass(frozen=True)
class ConstructionSpec:
    """一个卷积码构造的完整参数

    family: tv / tv-tilde / ti-prime / ti-hat
    mu: 源构造的记忆 μ ≤ p-2（ti-hat 包装后记忆为 1）
    m: 提升层数（tv、tv-tilde、ti-hat 使用）
    """
    family: str
    p: int
    mu: int
    m: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConstructionError(f"未知构造族: {self.family}，可选 {', '.join(FAMILIES)}")
        if not is_prime(self.p):
            raise ConstructionError(f"p 必须是素数: {self.p}")
        if not 0 <= self.mu <= self.p - 2:
            raise ConstructionError(f"需要 0 ≤ μ ≤ p-2，实际 μ={self.mu}, p={self.p}")
        if self.m < 0:
            raise ConstructionError(f"提升层数 m 不能为负: {self.m}")
        if self.family == FAMILY_TI_PRIME and self.m:
            raise ConstructionError("ti-prime 没有提升层数，m 必须为 0")

    @property
    def k(self) -> int:
        if self.family == FAMILY_TV:
            return self.p ** (self.m + 1)
        if self.family == FAMILY_TV_TILDE:
            return self.p ** (self.m + 2)
        if self.family == FAMILY_TI_PRIME:
            return self.p - 1
        return (self.p - 1) * self.p ** (self.m + 1)

    @property
    def n(self) -> int:
        return 2 * self.k

    @property
    def period(self) -> int:
        return self.p - 1 if self.family in (FAMILY_TV, FAMILY_TV_TILDE) else 1

    @property
    def memory(self) -> int:
        """滑动矩阵的实际记忆"""
        return 1 if self.family == FAMILY_TI_HAT else self.mu

    def key(self) -> str:
        if self.family == FAMILY_TI_PRIME:
            return f"{self.family}:p={self.p},mu={self.mu}"
        return f"{self.family}:p={self.p},mu={self.mu},m={self.m}"

    def to_dict(self) -> Dict:
        data = asdict(self)
        data.update({"n": self.n, "k": self.k, "T": self.period})
        return data

    @classmethod
    def parse(cls, text: str) -> "ConstructionSpec":
        """解析 "tv:p=5,mu=3,m=1" 形式的字符串"""
        family, _, rest = text.partition(":")
        params = {}
        for item in filter(None, rest.split(",")):
            key, sep, value = item.partition("=")
            if not sep:
                raise ConstructionError(f"参数格式错误: {item!r}")
            try:
                params[key.strip()] = int(value)
            except ValueError:
                raise ConstructionError(f"参数 {key} 不是整数: {value!r}") from None
        unknown = set(params) - {"p", "mu", "m"}
        if unknown:
            raise ConstructionError(f"未知参数: {', '.join(sorted(unknown))}")
        if "p" not in params or "mu" not in params:
            raise ConstructionError("构造参数必须包含 p 和 mu")
        return cls(family.strip(), params["p"], params["mu"], params.get("m", 0))


class ConvFamily:
    """时变块族 t ↦ (H_0(t), …, H_μ(t))，周期 T

    系统型族由 left_builder 给出左半部分 S_j(t)，完整块为
    H_0(t) = [S_0(t) | I] 和 H_j(t) = [S_j(t) | 0]；包装族直接给出完整块。
    块缓存由锁保护，可被多个线程并发读取。
    """

    def __init__(self, name: str, n: int, k: int, mu: int, period: int, *,
                 left_builder: Callable[[int, int], SparseBinaryMatrix] = None,
                 block_builder: Callable[[int, int], SparseBinaryMatrix] = None,
                 p: Optional[int] = None, level: int = 0,
                 slope_of: Optional[Callable[[int], int]] = None,
                 source: Optional["ConvFamily"] = None):
        if (left_builder is None) == (block_builder is None):
            raise ConstructionError("left_builder 和 block_builder 必须且只能给出一个")
        self.name = name
        self.n = n
        self.k = k
        self.mu = mu
        self.period = period
        self.p = p
        self.level = level
        self.source = source
        self._slope_of = slope_of
        self._left_builder = left_builder
        self._block_builder = block_builder
        self._left_cache: Dict[Tuple[int, int], SparseBinaryMatrix] = {}
        self._block_cache: Dict[Tuple[int, int], SparseBinaryMatrix] = {}
        self._lock = threading.RLock()

    @property
    def systematic(self) -> bool:
        return self._left_builder is not None

    def slope(self, t: int) -> Optional[int]:
        """块列 t 中所有 Q 矩阵共享的拉丁方斜率；无斜率标注的族返回 None"""
        return self._slope_of(t) if self._slope_of else None

    def _check_index(self, j: int):
        if not 0 <= j <= self.mu:
            raise ConstructionError(f"块下标 j={j} 超出 0..{self.mu}")

    def left(self, j: int, t: int) -> SparseBinaryMatrix:
        """系统部分 S_j(t)，大小 (n-k)×k"""
        if not self.systematic:
            raise ConstructionError(f"{self.name} 不是系统型族")
        self._check_index(j)
        key = (j, t % self.period)
        with self._lock:
            cached = self._left_cache.get(key)
            if cached is None:
                cached = self._left_builder(j, key[1])
                self._left_cache[key] = cached
        return cached

    def block(self, j: int, t: int) -> SparseBinaryMatrix:
        """H_j(t)，大小 (n-k)×n，满足 H_j(t) = H_j(t mod T)"""
        self._check_index(j)
        key = (j, t % self.period)
        with self._lock:
            cached = self._block_cache.get(key)
            if cached is None:
                if self.systematic:
                    right = (SparseBinaryMatrix.identity(self.n - self.k) if j == 0
                             else SparseBinaryMatrix.zeros(self.n - self.k, self.k))
                    cached = hstack(self.left(j, key[1]), right)
                else:
                    cached = self._block_builder(j, key[1])
                self._block_cache[key] = cached
        return cached

    def __repr__(self) -> str:
        return (f"ConvFamily({self.name}, n={self.n}, k={self.k}, mu={self.mu}, "
                f"T={self.period}, level={self.level})")


def _slope_function(p: int) -> Callable[[int], int]:
    return lambda t: t % (p - 1) + 1


def build_base_family(p: int, mu: int) -> ConvFamily:
    """H⁰：H_0(t) = [Q_1^{r(t)} | I_p]，H_i(t) = [Q_{i+1}^{r(t)} | 0]，r(t) = t mod (p-1) + 1"""
    ConstructionSpec(FAMILY_TV, p, mu)
    slope = _slope_function(p)
    return ConvFamily(
        FAMILY_TV, 2 * p, p, mu, p - 1,
        left_builder=lambda j, t: incidence(p, slope(t), j + 1).matrix,
        p=p, level=0, slope_of=slope,
    )


def _lift_with(family: ConvFamily, name: str, label_rule: Callable[[int, int, int], int]) -> ConvFamily:
    if family.name != FAMILY_TV or family.slope(0) is None or not family.systematic:
        raise ConstructionError(f"只有带斜率标注的 tv 族可以提升，实际为 {family.name}")
    p = family.p

    def build_left(j: int, t: int) -> SparseBinaryMatrix:
        r = family.slope(t)
        left = family.left(j, t)
        return kronecker_expand(
            left,
            lambda R, C: incidence(p, r, label_rule(r, R % p + 1, C % p + 1)).matrix,
            block_size=p,
        )

    return ConvFamily(
        name, family.n * p, family.k * p, family.mu, family.period,
        left_builder=build_left, p=p, level=family.level + 1, slope_of=family._slope_of,
    )


def lift(family: ConvFamily) -> ConvFamily:
    """H^{m-1} → H^m：Q_i^r 中位置 (a,b) 的 1 换成 Q_a^r，单位阵中的 1 换成 I_p"""
    lifted = _lift_with(family, FAMILY_TV, lambda r, a, b: a)
    logger.debug(f"提升到第 {lifted.level} 层: n={lifted.n}")
    return lifted


def tilde_lift(family: ConvFamily) -> ConvFamily:
    """H^m → H̃^m：Q_i^r 中位置 (a,b) 的 1 换成 Q_{rab mod p}^r（余数 0 记作 p）"""
    p = family.p
    lifted = _lift_with(family, FAMILY_TV_TILDE, lambda r, a, b: to_label(r * a * b, p))
    lifted.level = family.level
    return lifted


def build_ti_prime(p: int, mu: int) -> ConvFamily:
    """H′：H′_0 = [Q̃_1^1 | I_{p-1}]，H′_i = [Q̃_1^{i+1} | 0]，时不变"""
    ConstructionSpec(FAMILY_TI_PRIME, p, mu)
    return ConvFamily(
        FAMILY_TI_PRIME, 2 * (p - 1), p - 1, mu, 1,
        left_builder=lambda j, t: modified_incidence(p, j + 1, 1).matrix,
        p=p,
    )


def wrap_hat(family: ConvFamily) -> ConvFamily:
    """把周期 p-1 的族包装成记忆为 1 的时不变族 Ĥ

    Ĥ_0 是一个周期内的下三角块阵，Ĥ_1 是严格上三角的回绕部分。
    """
    p = family.p
    if p is None or family.period != p - 1:
        raise ConstructionError(f"wrap_hat 需要周期为 p-1 的族，实际 T={family.period}")
    if family.mu > p - 2:
        raise ConstructionError(f"wrap_hat 需要 μ ≤ p-2，实际 μ={family.mu}")
    T = family.period
    height, width = family.n - family.k, family.n

    def build(j: int, t: int) -> SparseBinaryMatrix:
        blocks = {}
        for u in range(T):
            for v in range(T):
                d = u + j * T - v
                if 0 <= d <= family.mu:
                    blocks[(u, v)] = family.block(d, v)
        return from_blocks(blocks, [height] * T, [width] * T)

    return ConvFamily(
        FAMILY_TI_HAT, T * family.n, T * family.k, 1, 1,
        block_builder=build, p=p, level=family.level, source=family,
    )


@lru_cache(maxsize=None)
def build_family(spec: ConstructionSpec) -> ConvFamily:
    """按构造参数生成（并缓存）块族"""
    if spec.family == FAMILY_TI_PRIME:
        return build_ti_prime(spec.p, spec.mu)
    if spec.family == FAMILY_TV:
        if spec.m == 0:
            return build_base_family(spec.p, spec.mu)
        return lift(build_family(ConstructionSpec(FAMILY_TV, spec.p, spec.mu, spec.m - 1)))
    source = build_family(ConstructionSpec(FAMILY_TV, spec.p, spec.mu, spec.m))
    if spec.family == FAMILY_TV_TILDE:
        return tilde_lift(source)
    return wrap_hat(source)


def girth_lower_bound(spec: ConstructionSpec) -> int:
    """构造所保证的围长下界"""
    if spec.family in (FAMILY_TV, FAMILY_TI_HAT):
        return 6 if spec.m == 0 else 8
    if spec.family == FAMILY_TV_TILDE:
        return {0: 6, 1: 8, 2: 10}.get(spec.m, 12)
    return 6


@dataclass(frozen=True)
class SlidingWindow:
    """有限窗口 H_{[0,s]}，大小 (μ+s+1)(n-k) × (s+1)n"""
    spec: Optional[ConstructionSpec]
    s: int
    matrix: SparseBinaryMatrix
    layout: BlockLayout
    family: str
    n: int
    k: int
    mu: int
    period: int

    def describe(self) -> Dict:
        """JSON 边车所需的全部参数"""
        data = {
            "family": self.family,
            "p": self.spec.p if self.spec else None,
            "mu": self.spec.mu if self.spec else self.mu,
            "m": self.spec.m if self.spec else None,
            "s": self.s,
            "T": self.period,
            "n": self.n,
            "k": self.k,
        }
        return data


def _resolve(spec_or_family) -> Tuple[Optional[ConstructionSpec], ConvFamily]:
    if isinstance(spec_or_family, ConvFamily):
        return None, spec_or_family
    return spec_or_family, build_family(spec_or_family)


def materialize(spec_or_family, s: int, nnz_cap: Optional[int] = None) -> SlidingWindow:
    """物化滑动窗口：块 (u, v) = H_{u-v}(v mod T)，当且仅当 0 ≤ u-v ≤ μ

    Args:
        spec_or_family: ConstructionSpec 或 ConvFamily
        s: 窗口长度（共 s+1 个块列）
        nnz_cap: 非零元上限，默认读取 WINDOW_CONFIG

    Returns:
        SlidingWindow
    """
    if s < 0:
        raise ConstructionError(f"窗口长度 s 不能为负: {s}")
    spec, family = _resolve(spec_or_family)
    if nnz_cap is None:
        nnz_cap = WINDOW_CONFIG["nnz_cap"]

    per_column = [sum(family.block(j, t).nnz() for j in range(family.mu + 1))
                  for t in range(family.period)]
    estimate = sum(per_column[v % family.period] for v in range(s + 1))
    if estimate > nnz_cap:
        raise WindowTooLarge(f"窗口 s={s} 约有 {estimate} 个非零元，超过上限 {nnz_cap}")
    available = psutil.virtual_memory().available
    if estimate * _BYTES_PER_ENTRY > available:
        logger.warning(f"⚠️ 窗口 s={s} 预计占用 {estimate * _BYTES_PER_ENTRY} 字节，可用内存 {available}")

    height, width, mu = family.n - family.k, family.n, family.mu
    rows: List[List[int]] = []
    for u in range(mu + s + 1):
        v_range = range(max(0, u - mu), min(u, s) + 1)
        blocks = [(v * width, family.block(u - v, v)) for v in v_range]
        for x in range(height):
            row = []
            for offset, blk in blocks:
                row.extend(offset + c for c in blk.rows[x])
            rows.append(row)
    matrix = SparseBinaryMatrix((mu + s + 1) * height, (s + 1) * width, rows, validate=False)
    layout = BlockLayout.for_matrix(matrix, height)
    logger.debug(f"物化窗口 {family.name} s={s}: {matrix.n_rows}x{matrix.n_cols}, nnz={matrix.nnz()}")
    return SlidingWindow(spec, s, matrix, layout, family.name, family.n, family.k, family.mu, family.period)


def block_position(window: SlidingWindow, j: int, v: int, a: int, b: int,
                   part: str = "left") -> Tuple[int, int]:
    """把"块列 v 中 H_j 的 (a,b) 位置"（1 起始）换算成窗口坐标（0 起始）

    part 为 "left" 时指系统部分 (Q 或 Q̃)，为 "identity" 时指右半部分。
    """
    height = window.n - window.k
    row = (v + j) * height + (a - 1)
    col = v * window.n + (b - 1) + (window.k if part == "identity" else 0)
    return row, col


def _as_blocks(info: Sequence, length: int) -> List[np.ndarray]:
    blocks = []
    for t, block in enumerate(info):
        arr = np.asarray(block, dtype=np.uint8).ravel()
        if arr.shape[0] != length:
            raise ConstructionError(f"第 {t} 个信息块长度 {arr.shape[0]} != k={length}")
        blocks.append(arr)
    return blocks


def encode_systematic(spec_or_family, info: Sequence, terminate: bool = True) -> List[np.ndarray]:
    """系统编码：v_t = (u_t, w_t)，w_t = Σ_{i=0}^{min(t,μ)} S_i(t-i)·u_{t-i}

    terminate=True 时在末尾补 μ 个零信息块，返回的码字位于完整滑动窗口的核中。

    Args:
        spec_or_family: ConstructionSpec 或 ConvFamily
        info: 长度为 k 的二元信息块序列

    Returns:
        长度为 n 的码字块列表
    """
    _, family = _resolve(spec_or_family)
    if family.source is not None:
        return _encode_wrapped(family, info, terminate)
    if not family.systematic:
        raise ConstructionError(f"{family.name} 不支持系统编码")

    k, mu = family.k, family.mu
    blocks = _as_blocks(info, k)
    if terminate:
        blocks.extend(np.zeros(k, dtype=np.uint8) for _ in range(mu))

    codeword = []
    for t, u in enumerate(blocks):
        w = np.zeros(family.n - family.k, dtype=np.int64)
        for i in range(min(t, mu) + 1):
            past = blocks[t - i]
            if past.any():
                w ^= family.left(i, t - i).matvec(past)
        codeword.append(np.concatenate([u, w.astype(np.uint8)]))
    return codeword


def _encode_wrapped(family: ConvFamily, info: Sequence, terminate: bool) -> List[np.ndarray]:
    """Ĥ 的窗口与源族逐项一致，按源族编码后重新分组"""
    source = family.source
    T = family.n // source.n
    blocks = _as_blocks(info, family.k)
    sub_blocks = [part for block in blocks for part in np.split(block, T)]
    total = len(blocks) + (1 if terminate else 0)
    sub_blocks.extend(np.zeros(source.k, dtype=np.uint8) for _ in range(total * T - len(sub_blocks)))
    encoded = encode_systematic(source, sub_blocks, terminate=False)
    return [np.concatenate(encoded[i * T:(i + 1) * T]) for i in range(total)]
