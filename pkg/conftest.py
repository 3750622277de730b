#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""pytest 公共夹具：日志和数据库写到临时目录"""

import pytest

from config import DATABASE_CONFIG, LOG_CONFIG
from database import close_db


@pytest.fixture(autouse=True)
def isolated_storage(tmp_path, monkeypatch):
    monkeypatch.setitem(LOG_CONFIG, "dir", str(tmp_path / "logs"))
    monkeypatch.setitem(DATABASE_CONFIG, "path", str(tmp_path / "reports.db"))
    yield
    close_db()
