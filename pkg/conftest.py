"""
pytest のルート設定

- リポジトリのルートを sys.path に追加
- LP の解を元の制約へ代入し直す自己検査をセッション全体で有効化
- 受け入れ規模の検査は @pytest.mark.slow（--runslow で実行）
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from common import config as app_config  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="slow マークのテストも実行する")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 受け入れ規模の性質検査")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="--runslow を指定すると実行します")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def verify_lp_witnesses(monkeypatch):
    monkeypatch.setattr(app_config, "LP_VERIFY_WITNESS", True)
