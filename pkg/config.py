#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
latin-ldpc 配置文件
包含所有固定的常量参数，部分参数可通过环境变量覆盖
"""

import os

# 工具信息（写入运行清单）
TOOL = {
    "name": "latin-ldpc",
    "version": "1.0.0",
}

# 滑动窗口物化配置
WINDOW_CONFIG = {
    # 单个窗口允许的非零元上限（环境变量 LDPC_WINDOW_CAP 可覆盖）
    "nnz_cap": 50_000_000,
}

# 分析配置
ANALYSIS_CONFIG = {
    # BFS 求围长时搜索的最大环长，超过则报告"窗口内未找到环"
    "girth_search_limit": 20,
    # 环计数时允许枚举的半路径数量上限
    "path_budget": 5_000_000,
    # 列距离搜索的默认上限
    "d_cap": 6,
    # 命令行允许的最大 d_cap
    "max_d_cap": 8,
    # 围长稳定判定需要连续不变的次数
    "stabilize_rounds": 2,
    # 稳定化过程中最多尝试的窗口数
    "stabilize_max_windows": 8,
    # 环计数支持的最大长度
    "max_census_length": 12,
}

# 仿真配置
SIMULATION_CONFIG = {
    "llr_clamp": 25.0,
    "max_iters": 50,
    "crossover_grid": [0.0, 0.01, 0.02, 0.05],
    "frames": 100,
    "workers": 1,
}

# 日志配置
LOG_CONFIG = {
    "dir": "logs",
    "file": "latin_ldpc.log",
    "level": "INFO",
    "max_bytes": 10 * 1024 * 1024,  # 10MB
    "backup_count": 5,
}

# 报告缓存数据库
DATABASE_CONFIG = {
    "path": "latin_ldpc_reports.db",
}

_SECTIONS = {
    "tool": TOOL,
    "window": WINDOW_CONFIG,
    "analysis": ANALYSIS_CONFIG,
    "simulation": SIMULATION_CONFIG,
    "log": LOG_CONFIG,
    "database": DATABASE_CONFIG,
}


def get_config(section: str, key: str = None):
    """获取配置项

    Args:
        section: 配置分组名，如 "window"、"analysis"
        key: 分组内的键，为 None 时返回整个分组

    Returns:
        配置值或配置字典
    """
    values = _SECTIONS.get(section)
    if values is None:
        raise KeyError(f"未知配置分组: {section}")
    if key is None:
        return values
    return values.get(key)


def update_config_from_env():
    """使用环境变量更新配置"""
    cap = os.environ.get("LDPC_WINDOW_CAP")
    if cap:
        WINDOW_CONFIG["nnz_cap"] = int(float(cap))

    level = os.environ.get("LDPC_LOG_LEVEL")
    if level:
        LOG_CONFIG["level"] = level.upper()

    db_path = os.environ.get("LDPC_DB_PATH")
    if db_path:
        DATABASE_CONFIG["path"] = db_path

    log_dir = os.environ.get("LDPC_LOG_DIR")
    if log_dir:
        LOG_CONFIG["dir"] = log_dir


# 在模块导入时自动读取环境变量
update_config_from_env()
