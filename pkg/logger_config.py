#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
日志配置模块
所有组件共用 LatinLDPC 根 logger，组件通过 get_logger("Analysis") 取得子 logger，
日志同时写入轮转文件和控制台（stderr）
"""

import logging
import os
from logging.handlers import RotatingFileHandler
from typing import Optional, Union

from config import LOG_CONFIG

ROOT_LOGGER_NAME = "LatinLDPC"

LOG_FORMAT = "%(asctime)s - [%(levelname)s] - %(name)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

Level = Union[int, str]


def _resolve_level(level: Optional[Level]) -> int:
    if level is None:
        level = LOG_CONFIG["level"]
    if isinstance(level, int):
        return level
    return getattr(logging, str(level).upper(), logging.INFO)


def _rotating_file_handler(formatter: logging.Formatter, level: int) -> RotatingFileHandler:
    os.makedirs(LOG_CONFIG["dir"], exist_ok=True)
    handler = RotatingFileHandler(
        os.path.join(LOG_CONFIG["dir"], LOG_CONFIG["file"]),
        maxBytes=LOG_CONFIG["max_bytes"],
        backupCount=LOG_CONFIG["backup_count"],
        encoding='utf-8'
    )
    handler.setLevel(level)
    handler.setFormatter(formatter)
    return handler


def setup_logger(name: str = ROOT_LOGGER_NAME, level: Optional[Level] = None,
                 console_level: Optional[Level] = None) -> logging.Logger:
    """设置并返回 logger

    Args:
        name: logger 名称
        level: 文件日志级别，为 None 时读取 LOG_CONFIG（LDPC_LOG_LEVEL 可覆盖）
        console_level: 控制台日志级别，为 None 时与 level 相同

    Returns:
        配置好的 logger 对象
    """
    file_level = _resolve_level(level)
    stream_level = _resolve_level(console_level) if console_level is not None else file_level

    logger = logging.getLogger(name)
    logger.setLevel(min(file_level, stream_level))

    # 已配置过时只调整控制台级别
    if logger.handlers:
        for handler in logger.handlers:
            if not isinstance(handler, RotatingFileHandler):
                handler.setLevel(stream_level)
        return logger

    formatter = logging.Formatter(LOG_FORMAT, DATE_FORMAT)
    console_handler = logging.StreamHandler()
    console_handler.setLevel(stream_level)
    console_handler.setFormatter(formatter)

    logger.addHandler(_rotating_file_handler(formatter, file_level))
    logger.addHandler(console_handler)
    return logger


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """获取组件 logger：get_logger("Simulate") -> LatinLDPC.Simulate"""
    if name:
        return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")
    return logging.getLogger(ROOT_LOGGER_NAME)
