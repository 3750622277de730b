#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
仿真模块
二进制对称信道、对数域和积（BP）译码、Monte Carlo 误码率统计

随机数：numpy PCG64，每一帧的流由 SeedSequence(seed, spawn_key=(点序号, 帧序号)) 派生，
因此结果与线程调度无关，跨平台逐字节一致。
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from config import SIMULATION_CONFIG
from convcodes import ConstructionSpec, encode_systematic, materialize
from gf2sparse import SparseBinaryMatrix
from logger_config import get_logger

logger = get_logger("Simulate")

CHANNEL_BSC = "BSC"

# 随机码字模式下信息比特使用的子流
_INFO_STREAM = 1


class ChannelError(ValueError):
    """信道或仿真参数错误"""


@dataclass(frozen=True)
class ChannelModel:
    crossover: float
    seed: int = 0
    kind: str = CHANNEL_BSC

    def __post_init__(self):
        if self.kind != CHANNEL_BSC:
            raise ChannelError(f"只支持 BSC 信道: {self.kind}")
        if not 0.0 <= self.crossover < 0.5:
            raise ChannelError(f"交叉概率必须在 [0, 0.5) 内: {self.crossover}")
        if not 0 <= self.seed < 2 ** 64:
            raise ChannelError(f"种子必须是 64 位非负整数: {self.seed}")

    def generator(self, frame: int = 0, point: int = 0, stream: int = 0) -> np.random.Generator:
        key = (point, frame) if stream == 0 else (point, frame, stream)
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=key)))


def flip_mask(length: int, channel: ChannelModel, frame: int = 0, point: int = 0) -> np.ndarray:
    """第 frame 帧的翻转位置（布尔数组）"""
    return channel.generator(frame, point).random(length) < channel.crossover


def transmit(codeword, channel: ChannelModel, frame: int = 0, point: int = 0) -> np.ndarray:
    """每个比特以 crossover 概率独立翻转"""
    bits = np.asarray(codeword, dtype=np.uint8).ravel()
    return bits ^ flip_mask(bits.shape[0], channel, frame, point).astype(np.uint8)


def channel_llr(crossover: float, clamp: Optional[float] = None) -> float:
    """BSC 的信道 LLR 幅度 log((1-ε)/ε)，不超过 clamp"""
    if clamp is None:
        clamp = SIMULATION_CONFIG["llr_clamp"]
    if crossover <= 0.0:
        return clamp
    return min(math.log((1.0 - crossover) / crossover), clamp)


@dataclass
class DecodeResult:
    decoded: np.ndarray
    iterations: int
    syndrome_zero: bool
    clamped: bool = False


class BPDecoder:
    """泛洪调度的对数域和积译码器

    消息按边存放：边按行排序，行和列的聚合都用 bincount，空行（全零校验）无需特殊处理。
    """

    def __init__(self, H: SparseBinaryMatrix, max_iters: Optional[int] = None,
                 clamp: Optional[float] = None):
        self.H = H
        self.max_iters = max_iters if max_iters is not None else SIMULATION_CONFIG["max_iters"]
        self.clamp = clamp if clamp is not None else SIMULATION_CONFIG["llr_clamp"]
        if self.max_iters < 1:
            raise ChannelError(f"max_iters 至少为 1: {self.max_iters}")
        self.edge_row = np.fromiter((r for r, row in enumerate(H.rows) for _ in row),
                                    dtype=np.int64, count=H.nnz())
        self.edge_col = np.fromiter((c for row in H.rows for c in row), dtype=np.int64, count=H.nnz())

    def _phi(self, x: np.ndarray) -> np.ndarray:
        x = np.clip(x, 1e-12, self.clamp)
        return -np.log(np.tanh(x / 2.0))

    def syndrome(self, bits: np.ndarray) -> np.ndarray:
        counts = np.bincount(self.edge_row, weights=bits[self.edge_col], minlength=self.H.n_rows)
        return counts.astype(np.int64) % 2

    def decode(self, llr: np.ndarray) -> DecodeResult:
        n_rows, n_cols = self.H.shape
        llr = np.asarray(llr, dtype=np.float64)
        if llr.shape[0] != n_cols:
            raise ChannelError(f"LLR 长度 {llr.shape[0]} 与列数 {n_cols} 不一致")
        clamped = not np.all(np.isfinite(llr))
        llr = np.clip(np.nan_to_num(llr, posinf=self.clamp, neginf=-self.clamp), -self.clamp, self.clamp)

        v2c = llr[self.edge_col].copy()
        decided = (llr < 0).astype(np.uint8)
        for iteration in range(1, self.max_iters + 1):
            # 校验节点
            negative = (v2c < 0).astype(np.int64)
            parity = np.bincount(self.edge_row, weights=negative, minlength=n_rows).astype(np.int64) % 2
            magnitude = self._phi(np.abs(v2c))
            total = np.bincount(self.edge_row, weights=magnitude, minlength=n_rows)
            extrinsic = self._phi(np.maximum(total[self.edge_row] - magnitude, 0.0))
            sign = np.where((parity[self.edge_row] ^ negative) == 1, -1.0, 1.0)
            c2v = sign * extrinsic
            if not np.all(np.isfinite(c2v)):
                clamped = True
                c2v = np.nan_to_num(c2v, nan=0.0, posinf=self.clamp, neginf=-self.clamp)
            c2v = np.clip(c2v, -self.clamp, self.clamp)

            # 变量节点
            posterior = llr + np.bincount(self.edge_col, weights=c2v, minlength=n_cols)
            decided = (posterior < 0).astype(np.uint8)
            if not self.syndrome(decided).any():
                return DecodeResult(decided, iteration, True, clamped)
            v2c = np.clip(posterior[self.edge_col] - c2v, -self.clamp, self.clamp)

        return DecodeResult(decided, self.max_iters, False, clamped)


def bp_decode(H: SparseBinaryMatrix, received, llr_magnitude: float,
              max_iters: Optional[int] = None) -> DecodeResult:
    """对 BSC 接收字做 BP 译码，信道 LLR 为 ±llr_magnitude"""
    bits = np.asarray(received, dtype=np.uint8).ravel()
    llr = llr_magnitude * (1.0 - 2.0 * bits.astype(np.float64))
    return BPDecoder(H, max_iters).decode(llr)


@dataclass
class SimulationPoint:
    crossover: float
    frames: int
    bit_errors: int
    frame_errors: int
    total_iters: int
    n_bits: int

    @property
    def avg_iters(self) -> float:
        return self.total_iters / self.frames

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.n_bits)

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames

    def to_row(self) -> Dict:
        return {
            "crossover": self.crossover,
            "frames": self.frames,
            "bit_errors": self.bit_errors,
            "frame_errors": self.frame_errors,
            "avg_iters": f"{self.avg_iters:.6f}",
        }


def monte_carlo(source: Union[ConstructionSpec, SparseBinaryMatrix], s: Optional[int] = None,
                grid: Optional[Sequence[float]] = None, frames: Optional[int] = None,
                seed: int = 0, max_iters: Optional[int] = None, workers: Optional[int] = None,
                random_codeword: bool = False) -> List[SimulationPoint]:
    """Monte Carlo 误码统计

    默认发送全零码字；random_codeword=True 时用 encode_systematic 生成随机码字（需要 ConstructionSpec）。

    Args:
        source: 构造参数（配合窗口长度 s）或直接给出的校验矩阵
        grid: 交叉概率列表
        frames: 每个点的帧数
        seed: 64 位种子
        workers: 译码线程数

    Returns:
        每个信道点一个 SimulationPoint
    """
    grid = list(grid if grid is not None else SIMULATION_CONFIG["crossover_grid"])
    frames = frames if frames is not None else SIMULATION_CONFIG["frames"]
    workers = workers if workers is not None else SIMULATION_CONFIG["workers"]
    if frames < 1:
        raise ChannelError(f"帧数至少为 1: {frames}")
    if workers < 1:
        raise ChannelError(f"线程数至少为 1: {workers}")

    spec = None
    if isinstance(source, SparseBinaryMatrix):
        H = source
    else:
        if s is None:
            raise ChannelError("按构造参数仿真时必须给出窗口长度 s")
        spec = source
        H = materialize(spec, s).matrix
    if random_codeword and spec is None:
        raise ChannelError("随机码字模式需要构造参数")
    if random_codeword and s + 1 <= spec.memory:
        raise ChannelError(f"窗口 s={s} 太短，放不下带结尾的码字（记忆 {spec.memory}）")

    decoder = BPDecoder(H, max_iters)
    n_bits = H.n_cols
    zero = np.zeros(n_bits, dtype=np.uint8)

    def codeword_for(channel: ChannelModel, frame: int, point: int) -> np.ndarray:
        if not random_codeword:
            return zero
        rng = channel.generator(frame, point, _INFO_STREAM)
        n_info = s + 1 - spec.memory
        info = rng.integers(0, 2, size=(n_info, spec.k), dtype=np.uint8)
        return np.concatenate(encode_systematic(spec, list(info)))

    results = []
    for point, crossover in enumerate(grid):
        channel = ChannelModel(float(crossover), seed)
        magnitude = channel_llr(channel.crossover, decoder.clamp)

        def run(frame: int):
            codeword = codeword_for(channel, frame, point)
            received = transmit(codeword, channel, frame, point)
            llr = magnitude * (1.0 - 2.0 * received.astype(np.float64))
            outcome = decoder.decode(llr)
            errors = int(np.count_nonzero(outcome.decoded != codeword))
            return errors, outcome.iterations

        if workers == 1:
            tallies = [run(frame) for frame in range(frames)]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                tallies = list(pool.map(run, range(frames)))

        bit_errors = sum(e for e, _ in tallies)
        frame_errors = sum(1 for e, _ in tallies if e)
        total_iters = sum(i for _, i in tallies)
        sim = SimulationPoint(channel.crossover, frames, bit_errors, frame_errors, total_iters, n_bits)
        logger.info(f"📡 ε={channel.crossover}: BER={sim.ber:.3e} FER={sim.fer:.3e} 平均迭代 {sim.avg_iters:.2f}")
        results.append(sim)
    return results
