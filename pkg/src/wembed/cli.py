"""Command-line entry point: extract -> train -> eval -> query -> serve.

Exit codes: 0 success, 1 usage error, 2 runtime error. Diagnostics go to
stderr; data goes to stdout or to files. Every run echoes its resolved
configuration to stderr first, so runs are reproducible from their logs.
Precedence everywhere is flags > environment > defaults.
"""

from __future__ import annotations

import argparse
import bz2
import gzip
import json
import os
import sys
from contextlib import ExitStack

from . import __version__, corpus, evalws, ingest, store, trainer
from .service import MODEL_FORMAT_VERSION, ApiConfig, create_app


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit(2); remap to exit 1
        raise UsageError(f"{message}\n{self.format_usage()}")


def _open_maybe_compressed(path: str):
    if path == "-":
        return sys.stdin
    if path.endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8")
    if path.endswith(".bz2"):
        return bz2.open(path, "rt", encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def _echo_config(command: str, values: dict) -> None:
    print(f"wembed {command} config: {json.dumps(values, sort_keys=True)}", file=sys.stderr)


def _build_parser() -> _Parser:
    parser = _Parser(prog="wembed", description="Wikidata knowledge-graph embedding toolkit")
    parser.add_argument(
        "--version",
        action="version",
        version=f"wembed {__version__} (model format {MODEL_FORMAT_VERSION})",
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("extract", help="extract item-property-item triples from an N-Triples dump")
    p.add_argument("--input", required=True, help="N-Triples file (.gz/.bz2 ok, '-' for stdin)")
    p.add_argument("--output", required=True, help="triple text file to write")
    p.add_argument("--stats", help="write extraction stats JSON here (default: stdout)")

    p = sub.add_parser("train", help="train an embedding over an extracted triple file")
    p.add_argument("--triples", required=True)
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--dim", type=int, default=trainer.DEFAULT_DIM)
    p.add_argument("--window", type=int, default=trainer.DEFAULT_WINDOW)
    p.add_argument("--min-count", type=int, default=trainer.DEFAULT_MIN_COUNT)
    p.add_argument("--algorithm", choices=["cbow", "sg"], default="cbow")
    p.add_argument("--negative", type=int, default=trainer.DEFAULT_NEGATIVE)
    p.add_argument("--epochs", type=int, default=trainer.DEFAULT_EPOCHS)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--sample", type=float, default=trainer.DEFAULT_SUBSAMPLE_T,
                   help="subsampling threshold (0 disables)")
    p.add_argument("--lr-initial", type=float, default=trainer.DEFAULT_LR_INITIAL)
    p.add_argument("--lr-min", type=float, default=trainer.DEFAULT_LR_MIN)
    p.add_argument("--vocab-out", help="also write the vocabulary (token<TAB>count)")

    p = sub.add_parser("eval", help="evaluate a model against word-pair relatedness ratings")
    p.add_argument("--model", required=True)
    p.add_argument("--wordsim", help="word-pair file (default: packaged fixture)")
    p.add_argument("--mapping", help="word->item mapping file (default: packaged)")
    p.add_argument("--report", choices=["json", "text"], default="text")

    p = sub.add_parser("query", help="query a model from the command line")
    p.add_argument("--model", required=True)
    qsub = p.add_subparsers(dest="query_command")
    q = qsub.add_parser("most-similar")
    q.add_argument("entity")
    q.add_argument("-k", type=int, default=10)
    q.add_argument("--labels", action="store_true", help="resolve labels via the live Wikidata API")
    q.add_argument("--language", default="en")
    q = qsub.add_parser("similarity")
    q.add_argument("entity1")
    q.add_argument("entity2")

    p = sub.add_parser("serve", help="serve the REST API (and optional web UI)")
    p.add_argument("--model", help="model file (or env WEMBED_MODEL_PATH)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, help="TCP port (or env PORT; default 8000)")
    p.add_argument("--static", help="directory with the web UI bundle")

    return parser


def _cmd_extract(args) -> int:
    _echo_config("extract", {"input": args.input, "output": args.output, "stats": args.stats})
    with ExitStack() as stack:
        lines = _open_maybe_compressed(args.input)
        if lines is not sys.stdin:
            stack.enter_context(lines)
        out = stack.enter_context(open(args.output, "w", encoding="utf-8", newline="\n"))
        stats = ingest.extract_triples(lines, lambda t: out.write(f"{t}\n"))
    if args.stats:
        with open(args.stats, "w", encoding="utf-8") as fh:
            fh.write(stats.to_json() + "\n")
    else:
        print(stats.to_json())
    print(
        f"extracted {stats.triples_emitted} triples from {stats.lines_read} lines",
        file=sys.stderr,
    )
    return 0


def _cmd_train(args) -> int:
    config = trainer.TrainingConfig(
        dim=args.dim,
        window=args.window,
        min_count=args.min_count,
        algorithm=args.algorithm,
        negative=args.negative,
        epochs=args.epochs,
        seed=args.seed,
        workers=args.workers,
        subsample_t=args.sample,
        lr_initial=args.lr_initial,
        lr_min=args.lr_min,
    )
    _echo_config(
        "train",
        {
            "triples": args.triples,
            "out": args.out,
            "backend": trainer.kernel_backend(),
            **{k: (v.value if hasattr(v, "value") else v) for k, v in vars(config).items()},
        },
    )
    vocab, vstats = corpus.build_vocabulary(ingest.read_triples(args.triples), config.min_count)
    print(
        f"vocabulary: {len(vocab)} tokens ({vstats.n_items} items, {vstats.n_properties} properties)",
        file=sys.stderr,
    )
    if len(vocab) == 0:
        raise ValueError("vocabulary is empty; lower --min-count or check the triple file")
    sentences = corpus.TripleFileCorpus(args.triples)

    def report(epoch: int, loss: float, lr: float) -> None:
        print(f"epoch {epoch}/{config.epochs}: mean pair loss {loss:.6f}, lr {lr:.6f}", file=sys.stderr)

    model = trainer.train(sentences, config, vocab, progress=report)
    store.save_text(model, args.out)
    if args.vocab_out:
        vocab.save(args.vocab_out)
    print(f"model written to {args.out}", file=sys.stderr)
    return 0


def _cmd_eval(args) -> int:
    wordsim_path = args.wordsim or str(evalws.packaged_wordsim_path())
    mapping_path = args.mapping or str(evalws.packaged_mapping_path())
    _echo_config(
        "eval",
        {"model": args.model, "wordsim": wordsim_path, "mapping": mapping_path, "report": args.report},
    )
    model = store.load_text(args.model)
    pairs = evalws.load_wordsim(wordsim_path)
    mapping = evalws.load_mapping(mapping_path)
    report = evalws.evaluate(model, pairs, mapping)
    if args.report == "json":
        print(report.to_json())
    else:
        print(f"pairs: {report.n_total} total, {report.n_used} used, {len(report.skipped)} skipped")
        print(f"pearson:  {report.pearson:+.4f}")
        print(f"spearman: {report.spearman:+.4f}")
    return 0


def _cmd_query(args) -> int:
    if not args.query_command:
        raise UsageError("query needs a subcommand: most-similar or similarity")
    _echo_config("query", {k: v for k, v in vars(args).items() if k != "command"})
    model = store.load_text(args.model)
    if args.query_command == "most-similar":
        hits = store.most_similar(model, args.entity, args.k)
        payload = {
            "query": args.entity,
            "n": args.k,
            "most_similar": [{"item": str(h.entity), "similarity": round(h.score, 6)} for h in hits],
        }
        if args.labels:
            from .wdclient import WikidataClient

            labels = WikidataClient().get_labels([h.entity for h in hits], language=args.language)
            for entry in payload["most_similar"]:
                entry["label"] = labels[entry["item"]]
        print(json.dumps(payload))
    else:
        score = store.similarity(model, args.entity1, args.entity2)
        print(
            json.dumps(
                {"entity1": args.entity1, "entity2": args.entity2, "similarity": round(score, 6)}
            )
        )
    return 0


def _cmd_serve(args) -> int:
    model_path = args.model or os.environ.get("WEMBED_MODEL_PATH")
    if not model_path:
        raise UsageError("serve needs --model or WEMBED_MODEL_PATH")
    port = args.port if args.port is not None else int(os.environ.get("PORT", "8000"))
    config = ApiConfig(host=args.host, port=port, model_path=model_path, static_dir=args.static)
    _echo_config(
        "serve",
        {"model": model_path, "host": args.host, "port": port, "static": args.static},
    )
    import uvicorn

    app = create_app(config=config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


_COMMANDS = {
    "extract": _cmd_extract,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "query": _cmd_query,
    "serve": _cmd_serve,
}


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError(parser.format_usage())
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --version/--help
        code = exc.code
        return code if isinstance(code, int) else 0
    except KeyboardInterrupt:
        raise
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"wembed {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
