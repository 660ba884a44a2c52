"""Pipeline orchestrator CLI: prepare, tune, fit, test, serve.

Exit codes are a stable contract: 0 success, 2 usage or configuration
error, 3 domain error (bad windows, degenerate statistics, clustering
failures), 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import date

from .cluster import ClusteringError
from .config import ConfigError, RunConfig
from .dynamics import DynamicsError
from .embedstore import EmbeddingError
from .ingest import IngestError
from .persistence import PersistenceError, load_model
from .pipeline import run_fit, run_prepare, run_tune, run_window_test
from .represent import RepresentError
from .stats import DEFAULT_ALPHA, StatsError
from .tune import TuneError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_IO = 4

_DOMAIN_ERRORS = (
    StatsError,
    ClusteringError,
    DynamicsError,
    RepresentError,
    TuneError,
    EmbeddingError,
    ValueError,
)


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_config(path) -> RunConfig:
    return RunConfig.load(path)


def _parse_window(text: str, flag: str) -> tuple[date, date]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"{flag} must be start,end (ISO dates)")
    try:
        return date.fromisoformat(parts[0]), date.fromisoformat(parts[1])
    except ValueError as exc:
        raise ConfigError(f"{flag}: {exc}") from exc


def cmd_prepare(args) -> int:
    config = _load_config(args.config)
    corpus = run_prepare(config, args.out)
    print(json.dumps({"retained": len(corpus.records), "dropped": corpus.provenance}))
    return EXIT_OK


def cmd_tune(args) -> int:
    config = _load_config(args.config)
    if args.threads:
        config.data.setdefault("tune", {})["workers"] = args.threads
    if args.seed is not None:
        config.data["seed"] = args.seed
    summary = run_tune(config, args.corpus, args.emb, args.out)
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_fit(args) -> int:
    config = _load_config(args.config)
    if args.seed is not None:
        config.data["seed"] = args.seed
    model = run_fit(config, args.corpus, args.emb, args.out, force=args.force)
    print(
        json.dumps(
            {
                "documents": model.n_documents,
                "topics": model.n_topics,
                "vocabulary": model.vocabulary_size,
                "model_dir": str(args.out),
            }
        )
    )
    return EXIT_OK


def cmd_test(args) -> int:
    model = load_model(args.model)
    w1 = _parse_window(args.w1, "--w1")
    w2 = _parse_window(args.w2, "--w2")
    result = run_window_test(model, args.topic, w1, w2, args.bins, alpha=args.alpha)
    print(
        json.dumps(
            {
                "topic_id": args.topic,
                "bin_weeks": args.bins,
                "h": result.h,
                "df": result.df,
                "p_value": result.p_value,
                "significant": result.significant,
                "group_sizes": result.group_sizes,
                "rank_sums": result.rank_sums,
                "alpha": result.alpha,
                "windows_overlap": result.windows_overlap,
            },
            sort_keys=True,
        )
    )
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    bind = args.bind
    cors = args.cors.split(",") if args.cors else None
    if args.config:  # flags override config values
        config = _load_config(args.config)
        if bind is None:
            bind = config.get("serve.bind_addr")
        if cors is None:
            cors = config.get("serve.cors_origins")
    bind = bind or "127.0.0.1:8000"

    model = load_model(args.model)
    app = create_app(model, cors_origins=cors)
    host, _, port = bind.rpartition(":")
    if not host or not port.isdigit():
        return _fail(EXIT_USAGE, f"--bind must be host:port, got {bind!r}")

    # probe the address first: uvicorn would exit with its own code
    import socket

    try:
        with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as probe:
            probe.bind((host, int(port)))
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot bind {bind}: {exc}")

    try:
        uvicorn.run(app, host=host, port=int(port), log_level="warning")
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot bind {bind}: {exc}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topicflux", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="parse, filter, and deduplicate a corpus")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("tune", help="grid-search density parameters by DBCV")
    p.add_argument("--config", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--emb", required=True)
    p.add_argument("--out", required=True, help="trial table CSV path")
    p.add_argument("--threads", type=int, default=0)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("fit", help="fit the full model and save the artifact")
    p.add_argument("--config", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--emb", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("test", help="two-window Kruskal-Wallis test on a topic")
    p.add_argument("--model", required=True)
    p.add_argument("--topic", type=int, required=True)
    p.add_argument("--w1", required=True, help="start,end ISO dates")
    p.add_argument("--w2", required=True, help="start,end ISO dates")
    p.add_argument("--bins", type=int, default=2)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("serve", help="serve the query API over a model")
    p.add_argument("--model", required=True)
    p.add_argument("--bind", default=None)
    p.add_argument("--cors", default="")
    p.add_argument("--config", default=None, help="read serve.* defaults from a run config")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail(EXIT_USAGE, str(exc))
    except _DOMAIN_ERRORS as exc:
        return _fail(EXIT_DOMAIN, str(exc))
    except (FileNotFoundError, IsADirectoryError, NotADirectoryError) as exc:
        return _fail(EXIT_IO, f"{exc.strerror or 'not found'}: {exc.filename}")
    except (IngestError, PersistenceError, OSError) as exc:
        return _fail(EXIT_IO, str(exc))


if __name__ == "__main__":
    sys.exit(main())
