"""Command-line entry points: ``adapter serve`` and ``adapter finetune``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import AdapterConfig, ConfigError, load_config
from .corpus import CorpusError
from .finetune import finetune
from .serve import model_generator, serve_stdio, serve_tcp, stub_generator

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2


def _config(args: argparse.Namespace) -> AdapterConfig:
    cfg = load_config(args.config) if args.config else AdapterConfig()
    overrides = {
        name: getattr(args, name)
        for name in ("model", "epochs", "samples")
        if getattr(args, name, None) is not None
    }
    return replace(cfg, **overrides) if overrides else cfg


def cmd_serve(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if args.stub:
        generator = stub_generator(args.stub, cfg)
    elif cfg.model:
        generator = model_generator(cfg.model, cfg)
    else:
        print("serve needs --model/--stub or a model in the config", file=sys.stderr)
        return EXIT_CONFIG
    if args.tcp:
        host, _, port = args.tcp.rpartition(":")
        server = serve_tcp(generator, host or "127.0.0.1", int(port))
        print(f"listening on {server.server_address}", file=sys.stderr)
        try:
            server.serve_forever()
        finally:
            server.server_close()
    else:
        serve_stdio(generator)
    return EXIT_OK


def cmd_finetune(args: argparse.Namespace) -> int:
    cfg = _config(args)
    try:
        artifacts = finetune(args.train, args.out, cfg)
    except FileNotFoundError as e:
        print(f"training corpus not found: {e}", file=sys.stderr)
        return EXIT_DATA
    except CorpusError as e:
        print(f"bad training corpus: {e}", file=sys.stderr)
        return EXIT_DATA
    for direction, path in sorted(artifacts.items()):
        print(f"{direction}\t{path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adapter", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="answer generation requests")
    serve.add_argument("--config", help="flat key = value config file")
    serve.add_argument("--model", help="artifact root with nlg/ and nlu/ models")
    serve.add_argument("--samples", type=int, help="outputs per request")
    serve.add_argument("--tcp", metavar="[HOST:]PORT", help="listen on TCP instead of stdio")
    serve.add_argument("--stub", choices=["echo", "constant"],
                       help="bypass the model with a canned generator (testing)")
    serve.set_defaults(func=cmd_serve, epochs=None)

    tune = sub.add_parser("finetune", help="train both directions on a corpus file")
    tune.add_argument("--train", required=True, help="corpus file with paired blocks")
    tune.add_argument("--out", required=True, help="output root for model artifacts")
    tune.add_argument("--config", help="flat key = value config file")
    tune.add_argument("--epochs", type=int, help="override training epochs")
    tune.set_defaults(func=cmd_finetune, model=None, samples=None)

    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
