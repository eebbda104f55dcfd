#!/usr/bin/env python3
"""Run the whole pipeline end to end on the synthetic corpus.

Generates a corpus, ingests it to sentences, builds the weak-labeled
dataset, trains both classifiers, and evaluates them on the test split.
Every stage goes through the same command-line entry points a user would
call, so this doubles as a smoke test of the installed package.

Usage:
    python3 scripts/run_pipeline.py --work work [--n 500] [--seed 42]
    python3 scripts/run_pipeline.py --work work --backend remote \
        --endpoint http://127.0.0.1:8231
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from actionable.cli import main as cli
from actionable.synth import write_mini_corpus


def run(argv: list[str]) -> None:
    print("+ actionable " + " ".join(argv))
    code = cli(argv)
    if code != 0:
        print(f"step failed with exit code {code}", file=sys.stderr)
        raise SystemExit(code)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--work", required=True, help="working directory for artifacts")
    parser.add_argument("--n", type=int, default=500, help="number of synthetic emails")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--backend", choices=["stub", "remote"], default="stub")
    parser.add_argument("--endpoint", default="", help="remote embedding service URL")
    args = parser.parse_args()

    work = Path(args.work)
    corpus = work / "corpus"
    sentences = work / "sentences.jsonl"
    dataset = work / "dataset.jsonl"

    write_mini_corpus(corpus, n_emails=args.n, seed=args.seed)
    run(["ingest", "--corpus", str(corpus), "--out", str(sentences)])
    run(
        [
            "build-dataset",
            "--sentences", str(sentences),
            "--seed", str(args.seed),
            "--out", str(dataset),
        ]
    )

    backend_flags = ["--backend", args.backend]
    if args.endpoint:
        backend_flags += ["--endpoint", args.endpoint]
    if args.backend == "remote":
        backend_flags += ["--cache", str(work / "embeddings.cache.jsonl")]

    run(
        ["train", "--dataset", str(dataset), "--model", "dense",
         "--seed", str(args.seed), "--out", str(work / "dense")] + backend_flags
    )
    run(
        ["train", "--dataset", str(dataset), "--model", "forest",
         "--seed", str(args.seed), "--out", str(work / "forest")]
    )
    run(
        ["eval", "--model", str(work / "dense" / "model.json"),
         "--dataset", str(dataset), "--split", "test",
         "--out", str(work / "dense" / "eval")] + backend_flags
    )
    run(
        ["eval", "--model", str(work / "forest" / "model.json"),
         "--dataset", str(dataset), "--split", "test",
         "--out", str(work / "forest" / "eval")]
    )
    print(f"artifacts under {work}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
