"""
PNTS 双模倣・実数値様相論理ツール - エントリポイント

使い方: python main.py <subcommand> ...
"""

import sys

from frontend.cli import main

if __name__ == "__main__":
    sys.exit(main())
