"""Server entry point.

    plotroom --port 8023 --data-dir ./data --provider scripted --script demo.script
    plotroom --provider http --config provider.json

The http provider reads its API key from the environment variable named
in the config file (``LLM_API_KEY`` by default).
"""

from __future__ import annotations

import argparse
import sys

from .service import BindFailure, ConfigError, ServiceConfig, build_provider, serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotroom",
        description="Run the narrative design and playtesting service.",
    )
    parser.add_argument("--host", default="127.0.0.1", help="bind address")
    parser.add_argument("--port", type=int, default=8023, help="bind port")
    parser.add_argument("--data-dir", default="./data", help="snapshot directory")
    parser.add_argument(
        "--provider",
        choices=["scripted", "http"],
        default="http",
        help="completion backend",
    )
    parser.add_argument("--script", help="script file for the scripted provider")
    parser.add_argument("--config", help="provider config file (JSON)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = ServiceConfig(
        host=args.host,
        port=args.port,
        data_dir=args.data_dir,
        provider_mode=args.provider,
        script_path=args.script,
        provider_config_path=args.config,
    )
    try:
        provider = build_provider(config)
        serve(config, provider)
    except (BindFailure, ConfigError, OSError) as exc:
        print(f"plotroom: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
