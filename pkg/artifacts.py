#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
产物读写模块
alist 矩阵文件、JSON 边车、CSV 表格和运行清单；所有写入先写临时文件再改名
"""

import csv
import hashlib
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

from config import TOOL
from gf2sparse import SparseBinaryMatrix, from_alist, to_alist
from logger_config import get_logger

logger = get_logger("Artifacts")


def atomic_write_text(path: str, text: str):
    """写入临时文件后 os.replace，读者不会看到写了一半的文件"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logger.debug(f"写入 {path}")


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def sidecar_path(path: str) -> str:
    return path + ".json"


def write_alist(path: str, matrix: SparseBinaryMatrix) -> str:
    """写 alist 文件，返回内容的 sha256"""
    text = to_alist(matrix)
    atomic_write_text(path, text)
    return sha256_text(text)


def read_alist(path: str) -> SparseBinaryMatrix:
    with open(path, "r", encoding="utf-8") as f:
        return from_alist(f.read())


def read_sidecar(path: str) -> Optional[Dict]:
    """读取 path 旁边的 JSON 边车，不存在时返回 None"""
    side = sidecar_path(path)
    if not os.path.exists(side):
        return None
    with open(side, "r", encoding="utf-8") as f:
        return json.load(f)


def write_json(path: str, data: Dict) -> str:
    text = canonical_json(data)
    atomic_write_text(path, text)
    return sha256_text(text)


def write_csv(path: str, rows: Iterable[Dict], fieldnames: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(fieldnames), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    text = buffer.getvalue()
    atomic_write_text(path, text)
    return sha256_text(text)


@dataclass
class RunManifest:
    """一次运行的完整参数、工具版本和输入/输出文件摘要

    不含时间戳，同一参数重复运行得到逐字节相同的清单。
    """
    subcommand: str
    parameters: Dict
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    tool: Dict = field(default_factory=lambda: dict(TOOL))

    def add_input(self, path: str):
        self.inputs[os.path.basename(path)] = sha256_file(path)

    def add_output(self, path: str, digest: str):
        self.outputs[os.path.basename(path)] = digest

    def to_dict(self) -> Dict:
        return {
            "subcommand": self.subcommand,
            "parameters": self.parameters,
            "tool": self.tool,
            "inputs": dict(sorted(self.inputs.items())),
            "outputs": dict(sorted(self.outputs.items())),
        }

    def digest(self) -> str:
        return sha256_text(canonical_json(self.to_dict()))


def write_with_sidecar(path: str, sidecar: Dict, manifest: RunManifest) -> List[str]:
    """在 path 旁写入 {"matrix"/"report": …, "manifest": …} 边车，返回写出的文件列表"""
    side = sidecar_path(path)
    write_json(side, dict(sidecar, manifest=manifest.to_dict()))
    return [path, side]
