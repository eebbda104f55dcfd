#!/usr/bin/env python3
"""Materialize the bundled synthetic email corpus as a maildir-style tree.

Usage:
    python3 scripts/make_mini_corpus.py --out work/corpus [--n 500] [--seed 42]
"""

from __future__ import annotations

import argparse
from pathlib import Path

from actionable.synth import write_mini_corpus


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="corpus root directory")
    parser.add_argument("--n", type=int, default=500, help="number of emails")
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()
    root = write_mini_corpus(Path(args.out), n_emails=args.n, seed=args.seed)
    files = sum(1 for p in root.rglob("*") if p.is_file())
    print(f"{files} emails -> {root}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
