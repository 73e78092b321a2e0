"""Command-line interface: annotate, train, evaluate, models, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .conllu import parse_conllu, read_conllu_file, serialize_corpus
from .corpus import concat_documents
from .evaluate import align_and_score, score_ner
from .pipeline import PROCESSOR_ORDER, PipelineConfig, PipelineError, build_pipeline
from .registry import ModelRegistry, RegistryError, fetch_models, pack_archive
from .training import (
    TRAINABLE,
    train_charlm_processor,
    train_conllu_processor,
    train_ner_processor,
)
from .wire import canonical_json, document_to_wire


def _load_config(path) -> dict:
    if not path:
        return {}
    return json.loads(Path(path).read_text(encoding="utf-8"))


def cmd_annotate(args) -> int:
    if args.input and args.input != "-":
        text = Path(args.input).read_text(encoding="utf-8")
    else:
        text = sys.stdin.read()
    config = PipelineConfig.from_spec(
        language=args.lang, processors=args.processors, registry_root=args.registry)
    try:
        pipeline = build_pipeline(config)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    doc = pipeline.run(text)
    if args.output == "json":
        print(canonical_json(document_to_wire(doc, language=args.lang)))
    else:
        sys.stdout.write(serialize_corpus([doc]))
    return 0


def cmd_train(args) -> int:
    config = _load_config(args.config)
    log = (lambda msg: print(msg, file=sys.stderr)) if not args.quiet else None
    if args.processor == "ner":
        result = train_ner_processor(
            args.train_file, args.eval_file, args.gold_file, args.output_file,
            config=config, charlm_fwd=args.charlm_fwd, charlm_bwd=args.charlm_bwd,
            save_model=args.save_model, log=log)
        if result.ner_score is not None:
            s = result.ner_score
            print(f"entity micro-F1: P {s.precision:.2f} R {s.recall:.2f} F1 {s.f1:.2f}")
    elif args.processor == "charlm":
        result = train_charlm_processor(
            args.train_file, args.direction, args.eval_file,
            config=config, save_model=args.save_model, log=log)
        print(f"perplexity: {result.perplexity:.3f}")
    else:
        result = train_conllu_processor(
            args.processor, args.train_file, args.eval_file, args.gold_file,
            args.output_file, config=config, save_model=args.save_model, log=log)
        if result.report is not None:
            print(result.report.to_text())
    return 0


def cmd_evaluate(args) -> int:
    if args.ner:
        from .bio import bio_corpus_to_document, parse_bio
        system = bio_corpus_to_document(
            parse_bio(Path(args.system).read_text(encoding="utf-8")))
        gold = bio_corpus_to_document(
            parse_bio(Path(args.gold).read_text(encoding="utf-8")))
        score = score_ner(list(system.entities), list(gold.entities))
        if args.format == "json":
            print(json.dumps({"precision": round(score.precision, 2),
                              "recall": round(score.recall, 2),
                              "f1": round(score.f1, 2)}))
        else:
            print(f"Entities   |{score.precision:10.2f} |{score.recall:10.2f} "
                  f"|{score.f1:10.2f}")
        return 0
    system = concat_documents(read_conllu_file(args.system))
    gold = concat_documents(read_conllu_file(args.gold))
    report = align_and_score(system, gold)
    if args.format == "json":
        print(json.dumps(report.to_json(), indent=1, sort_keys=True))
    else:
        print(report.to_text())
    return 0


def cmd_models(args) -> int:
    registry = ModelRegistry(args.registry)
    try:
        if args.models_command == "fetch":
            installed = fetch_models(args.lang, args.source, registry)
            print(f"installed {args.lang}: {', '.join(installed)}")
        elif args.models_command == "list":
            languages = registry.languages()
            if not languages:
                print(f"no models installed under {registry.root}")
            for language in languages:
                print(f"{language}: {', '.join(registry.available(language))}")
        elif args.models_command == "verify":
            status = registry.verify(args.lang)
            for processor, ok in sorted(status.items()):
                print(f"{args.lang}/{processor}: {'ok' if ok else 'CORRUPT'}")
            return 0 if all(status.values()) else 1
        elif args.models_command == "pack":
            files = {}
            for item in args.model:
                processor, _, path = item.partition("=")
                if not path:
                    raise RegistryError(f"--model needs processor=path, got {item!r}")
                files[processor] = Path(path)
            pack_archive(args.lang, files, args.out)
            print(f"wrote {args.out}")
    except RegistryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_serve(args) -> int:
    from .server import serve

    preload = []
    for item in args.preload or []:
        lang, _, procs = item.partition(":")
        preload.append((lang, tuple(p for p in procs.split(",") if p)))
    return serve(port=args.port, registry_root=args.registry, preload=preload,
                 max_text_bytes=args.max_text_bytes, timeout_ms=args.timeout_ms)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="annopipe",
        description="Trainable neural NLP pipeline: raw text to tokens, tags, "
                    "lemmas, dependency trees and entities.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("annotate", help="run the pipeline over text")
    p.add_argument("--lang", required=True)
    p.add_argument("--processors", default=None,
                   help=f"comma list from: {','.join(PROCESSOR_ORDER)} (default: all available)")
    p.add_argument("--input", default="-", help="input file, - for stdin")
    p.add_argument("--output", choices=("conllu", "json"), default="conllu")
    p.add_argument("--registry", default=None, help="model registry root")
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("train", help="train one processor")
    p.add_argument("processor", choices=TRAINABLE)
    p.add_argument("--train_file", required=True)
    p.add_argument("--eval_file", default=None,
                   help="dev data; default: hold out 20%% of training sentences")
    p.add_argument("--gold_file", default=None)
    p.add_argument("--output_file", default=None)
    p.add_argument("--config", default=None, help="JSON file of hyperparameters")
    p.add_argument("--save_model", default=None, help="where to write the model container")
    p.add_argument("--charlm_fwd", default=None, help="ner: forward char-LM model")
    p.add_argument("--charlm_bwd", default=None, help="ner: backward char-LM model")
    p.add_argument("--direction", choices=("forward", "backward"), default="forward",
                   help="charlm: reading direction")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score system output against gold")
    p.add_argument("--system", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--ner", action="store_true", help="inputs are BIO files")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("models", help="manage the model registry")
    msub = p.add_subparsers(dest="models_command", required=True)
    for name in ("fetch", "list", "verify", "pack"):
        mp = msub.add_parser(name)
        mp.add_argument("--registry", default=None)
        if name in ("fetch", "verify", "pack"):
            mp.add_argument("--lang", required=True)
        if name == "fetch":
            mp.add_argument("--source", required=True, help="archive path or URL")
        if name == "pack":
            mp.add_argument("--model", action="append", required=True,
                            help="processor=model-file (repeatable)")
            mp.add_argument("--out", required=True)
        mp.set_defaults(func=cmd_models)

    p = sub.add_parser("serve", help="run the annotation HTTP server")
    p.add_argument("--port", type=int, default=9000)
    p.add_argument("--registry", default=None)
    p.add_argument("--preload", action="append", default=None,
                   help="lang:proc1,proc2 to load at startup (repeatable)")
    p.add_argument("--max-text-bytes", type=int, default=1 << 20)
    p.add_argument("--timeout-ms", type=int, default=30_000)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
