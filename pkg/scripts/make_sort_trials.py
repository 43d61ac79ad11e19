#!/usr/bin/env python3
"""Generate sorting trials for a model run: make_sort_trials.py --output trials.jsonl [--trials 200]"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.cli.main import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main(["sort-trials", *sys.argv[1:]]))
