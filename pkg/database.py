#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
数据库模型和管理
使用 SQLite 存储分析报告缓存和运行历史
"""

import sqlite3
import json
from datetime import datetime, timezone
from typing import Optional, List, Dict
import threading

from config import DATABASE_CONFIG
from logger_config import get_logger

logger = get_logger("Database")

# 数据库连接（线程安全）
_local = threading.local()


def get_utc_time() -> str:
    """获取当前 UTC 时间字符串"""
    return datetime.now(timezone.utc).strftime('%Y-%m-%d %H:%M:%S')


def get_db():
    """获取线程安全的数据库连接，配置中的路径变化时重新连接"""
    path = DATABASE_CONFIG["path"]
    if getattr(_local, 'path', None) != path:
        close_db()
        _local.connection = sqlite3.connect(path, check_same_thread=False)
        _local.connection.row_factory = sqlite3.Row
        _local.path = path
    return _local.connection


def close_db():
    """关闭当前线程的连接"""
    conn = getattr(_local, 'connection', None)
    if conn is not None:
        conn.close()
    _local.connection = None
    _local.path = None


def init_database():
    """初始化数据库表"""
    conn = get_db()
    cursor = conn.cursor()

    # 分析报告缓存表
    cursor.execute('''
        CREATE TABLE IF NOT EXISTS report_cache (
            id INTEGER PRIMARY KEY AUTOINCREMENT,
            request_key TEXT NOT NULL UNIQUE,
            subject TEXT NOT NULL,
            report TEXT NOT NULL,
            tool_version TEXT,
            created_at TEXT NOT NULL,
            last_used_at TEXT NOT NULL,
            use_count INTEGER DEFAULT 0
        )
    ''')

    # 运行历史表
    cursor.execute('''
        CREATE TABLE IF NOT EXISTS run_history (
            id INTEGER PRIMARY KEY AUTOINCREMENT,
            subcommand TEXT NOT NULL,
            parameters TEXT NOT NULL,
            manifest_digest TEXT,
            exit_code INTEGER NOT NULL,
            duration_ms INTEGER,
            started_at TEXT NOT NULL
        )
    ''')

    conn.commit()
    logger.debug(f"数据库初始化完成: {DATABASE_CONFIG['path']}")


class ReportStore:
    """分析报告缓存管理器"""

    @staticmethod
    def get_by_key(request_key: str) -> Optional[Dict]:
        """根据请求键获取缓存的报告，命中时更新使用次数"""
        conn = get_db()
        cursor = conn.cursor()
        cursor.execute('''
            SELECT * FROM report_cache WHERE request_key = ?
        ''', (request_key,))
        row = cursor.fetchone()

        if row:
            cursor.execute('''
                UPDATE report_cache
                SET last_used_at = ?, use_count = use_count + 1
                WHERE id = ?
            ''', (get_utc_time(), row['id']))
            conn.commit()
            return {
                'id': row['id'],
                'subject': row['subject'],
                'report': json.loads(row['report']),
                'use_count': row['use_count'] + 1,
            }
        return None

    @staticmethod
    def save(request_key: str, subject: str, report: Dict, tool_version: str = None) -> int:
        """保存报告；同一请求键重复保存时覆盖报告内容"""
        conn = get_db()
        cursor = conn.cursor()
        now = get_utc_time()
        payload = json.dumps(report, sort_keys=True, ensure_ascii=False)
        try:
            cursor.execute('''
                INSERT INTO report_cache (request_key, subject, report, tool_version, created_at, last_used_at)
                VALUES (?, ?, ?, ?, ?, ?)
            ''', (request_key, subject, payload, tool_version, now, now))
            conn.commit()
            return cursor.lastrowid
        except sqlite3.IntegrityError:
            # 已存在，更新内容并返回现有 ID
            cursor.execute('''
                UPDATE report_cache SET report = ?, tool_version = ?, last_used_at = ?
                WHERE request_key = ?
            ''', (payload, tool_version, now, request_key))
            conn.commit()
            cursor.execute('SELECT id FROM report_cache WHERE request_key = ?', (request_key,))
            return cursor.fetchone()[0]

    @staticmethod
    def get_recent(limit: int = 20) -> List[Dict]:
        """获取最近使用的报告摘要"""
        conn = get_db()
        cursor = conn.cursor()
        cursor.execute('''
            SELECT id, request_key, subject, use_count, created_at, last_used_at
            FROM report_cache
            ORDER BY last_used_at DESC, id DESC
            LIMIT ?
        ''', (limit,))
        return [dict(row) for row in cursor.fetchall()]

    @staticmethod
    def get_stats() -> Dict:
        """获取缓存统计"""
        conn = get_db()
        cursor = conn.cursor()
        cursor.execute('''
            SELECT
                COUNT(*) as total,
                COALESCE(SUM(use_count), 0) as total_hits
            FROM report_cache
        ''')
        return dict(cursor.fetchone())


class RunHistory:
    """CLI 运行历史管理器"""

    @staticmethod
    def record(subcommand: str, parameters: Dict, exit_code: int,
               manifest_digest: str = None, duration_ms: int = None) -> int:
        conn = get_db()
        cursor = conn.cursor()
        cursor.execute('''
            INSERT INTO run_history (subcommand, parameters, manifest_digest, exit_code, duration_ms, started_at)
            VALUES (?, ?, ?, ?, ?, ?)
        ''', (subcommand, json.dumps(parameters, sort_keys=True, ensure_ascii=False),
              manifest_digest, exit_code, duration_ms, get_utc_time()))
        conn.commit()
        return cursor.lastrowid

    @staticmethod
    def get_recent(limit: int = 20, subcommand: Optional[str] = None) -> List[Dict]:
        """获取最近的运行记录"""
        conn = get_db()
        cursor = conn.cursor()
        if subcommand:
            cursor.execute('''
                SELECT * FROM run_history WHERE subcommand = ?
                ORDER BY id DESC LIMIT ?
            ''', (subcommand, limit))
        else:
            cursor.execute('''
                SELECT * FROM run_history ORDER BY id DESC LIMIT ?
            ''', (limit,))
        rows = []
        for row in cursor.fetchall():
            item = dict(row)
            item['parameters'] = json.loads(item['parameters'])
            rows.append(item)
        return rows
