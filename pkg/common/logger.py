# logger.py
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from common import config


class Logger:
    """反例ログ出力クラス

    合同性違反や性質検査の反例を JSON リスト形式のファイルへ追記する。
    """

    def __init__(self, log_dir: Optional[str] = None) -> None:
        # ログフォルダの作成
        self.log_folders = {
            "counterexample": log_dir or config.COUNTEREXAMPLE_LOG_DIR,
        }

        for folder in self.log_folders.values():
            if not os.path.exists(folder):
                os.makedirs(folder)

    def log_congruence_violation(self, violation_data: Dict[str, Any]) -> str:
        """合同性違反を記録し、書き込んだファイルパスを返す"""
        log_file = os.path.join(self.log_folders["counterexample"], config.CONGRUENCE_LOG_NAME)
        self._write_log(log_file, violation_data)
        return log_file

    def log_property_violation(self, violation_data: Dict[str, Any]) -> str:
        """性質検査の反例を記録し、書き込んだファイルパスを返す"""
        log_file = os.path.join(self.log_folders["counterexample"], config.PROPERTY_LOG_NAME)
        self._write_log(log_file, violation_data)
        return log_file

    def read_log(self, file_name: str) -> List[Dict[str, Any]]:
        """記録済みの反例を読み出す（ファイルがなければ空リスト）"""
        log_file = os.path.join(self.log_folders["counterexample"], file_name)
        if not os.path.exists(log_file):
            return []
        with open(log_file, "r", encoding="utf-8") as f:
            data = json.load(f)
        return data if isinstance(data, list) else []

    def _write_log(self, log_file: str, data: Dict[str, Any]) -> None:
        """内部ヘルパー：ログを書き込む"""
        try:
            if os.path.exists(log_file):
                with open(log_file, "r", encoding="utf-8") as f:
                    existing_data = json.load(f)
                    # 既存データがリスト形式でない場合は、新しいリストとして初期化
                    if not isinstance(existing_data, list):
                        existing_data = []
            else:
                existing_data = []

            existing_data.append(data)

            with open(log_file, "w", encoding="utf-8") as f:
                json.dump(existing_data, f, ensure_ascii=False, indent=4)

        except (OSError, json.JSONDecodeError) as e:
            logging.getLogger(__name__).error(f"[Logger._write_log] ログ出力エラー: {e}")


def configure_logging(verbose: bool = False) -> None:
    """診断メッセージを標準エラー出力へ送る（標準出力は JSON 専用）"""
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
