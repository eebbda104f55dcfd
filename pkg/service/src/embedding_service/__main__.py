"""Run the service: python3 -m embedding_service [--port N] [--model SPEC]."""

from __future__ import annotations

import argparse

import uvicorn

from .app import create_app
from .config import ServiceConfig


def main() -> int:
    parser = argparse.ArgumentParser(
        prog="embedding-service",
        description="serve frozen sentence embeddings over HTTP",
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8231)
    parser.add_argument(
        "--model",
        default="hashed:512",
        help="hashed[:dim[:seed]], st:<name>, or a path to a .npz word vector file",
    )
    parser.add_argument("--max-batch", type=int, default=256)
    args = parser.parse_args()

    config = ServiceConfig(port=args.port, model=args.model, max_batch=args.max_batch)
    uvicorn.run(create_app(config), host=args.host, port=config.port, log_level="info")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
