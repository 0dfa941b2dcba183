import argparse

import uvicorn

from .app import create_app
from .config import ServiceConfig


def main() -> None:
    parser = argparse.ArgumentParser(description="emoaug model service")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8601)
    parser.add_argument("--proposer-model", default="stub")
    parser.add_argument("--embedder-model", default="stub")
    parser.add_argument("--top-k-cap", type=int, default=50)
    parser.add_argument("--batch-cap", type=int, default=64)
    args = parser.parse_args()
    config = ServiceConfig(
        host=args.host,
        port=args.port,
        proposer_model=args.proposer_model,
        embedder_model=args.embedder_model,
        top_k_cap=args.top_k_cap,
        batch_cap=args.batch_cap,
    )
    uvicorn.run(create_app(config), host=config.host, port=config.port)


if __name__ == "__main__":
    main()
