"""Run the model server: python -m govmine_server [--port 8731]."""

from __future__ import annotations

import argparse

import uvicorn

from .app import DEFAULT_MAX_BATCH, create_app


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(prog="govmine-model-server")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8731)
    parser.add_argument("--embed-dim", type=int, default=512)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-batch", type=int, default=DEFAULT_MAX_BATCH)
    args = parser.parse_args(argv)
    app = create_app(embed_dim=args.embed_dim, seed=args.seed,
                     max_batch=args.max_batch)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")


if __name__ == "__main__":
    main()
