"""Command-line entry points: train, predict, evaluate, gen-synth.

Exit codes: 0 success, 1 runtime error, 2 usage/validation error.
Every command writes a run manifest next to its primary output.
"""

import argparse
import dataclasses
import hashlib
import json
import logging
import sys
import time

from arglink import __version__, corpus, decoder, evaluation, synth, training
from arglink.config import ConfigError, ModelConfig, load_config
from arglink.corpus import CorpusError
from arglink.ontology import OntologyError, load_ontology

logger = logging.getLogger("arglink")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_path, command: str, config: dict, inputs: list,
                    seed, started: float):
    manifest = {
        "command": command,
        "config": config,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "seed": seed,
        "version": __version__,
        "timings": {"wall_seconds": round(time.time() - started, 3)},
    }
    with open(f"{out_path}.manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_overrides(pairs) -> dict:
    from arglink.config import _coerce
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise UsageError(f"--set expects key=value, got {pair!r}")
        key, _, raw = pair.partition("=")
        overrides[key.strip()] = _coerce(key.strip(), raw.strip())
    return overrides


def _load_model_config(args) -> ModelConfig:
    overrides = _parse_overrides(getattr(args, "set", None))
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if args.config:
        return load_config(args.config, overrides)
    return ModelConfig.from_dict(overrides)


def cmd_train(args) -> int:
    started = time.time()
    config = _load_model_config(args)
    ontology = load_ontology(args.ontology)
    train_docs = corpus.load_jsonl(args.data, ontology)
    dev_docs = corpus.load_jsonl(args.dev, ontology)
    init = training.load_checkpoint(args.init_checkpoint) if args.init_checkpoint else None
    contextual = (training.directory_contextual_loader(args.contextual_dir)
                  if args.contextual_dir else None)
    result = training.train(train_docs, dev_docs, config, ontology,
                            init_checkpoint=init, contextual=contextual)
    training.save_checkpoint(result.checkpoint, args.out)
    inputs = [args.data, args.dev, args.ontology]
    if args.config:
        inputs.append(args.config)
    if args.init_checkpoint:
        inputs.append(args.init_checkpoint)
    _write_manifest(args.out, "train", result.checkpoint.config.to_dict(),
                    inputs, config.seed, started)
    print(json.dumps({
        "best_dev_f1": result.checkpoint.best_dev_f1,
        "best_epoch": result.checkpoint.epoch,
        "epochs_run": len(result.history),
        "dev_f1_history": result.history,
    }, indent=2))
    return EXIT_OK


def cmd_predict(args) -> int:
    started = time.time()
    ontology = load_ontology(args.ontology)
    ckpt = training.load_checkpoint(args.model)
    model = training.model_from_checkpoint(ckpt, ontology)
    docs = corpus.load_jsonl(args.data, ontology)
    if args.decoding == "tcd":
        for doc in docs:
            if any(e.gold_type is None for e in doc.events):
                raise UsageError(
                    f"{doc.doc_id}: --decoding tcd requires gold event types in the data")
    contextual = (training.directory_contextual_loader(args.contextual_dir)
                  if args.contextual_dir else None)
    preds = training.predict_corpus(model, docs, args.decoding,
                                    ontology=ontology, contextual=contextual)
    decoder.write_predictions(preds, args.out)
    _write_manifest(args.out, "predict", {"decoding": args.decoding},
                    [args.model, args.data, args.ontology], ckpt.config.seed, started)
    print(f"wrote {len(preds)} predictions to {args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    started = time.time()
    preds = decoder.read_predictions(args.pred)
    docs = corpus.load_jsonl(args.gold)
    report = evaluation.evaluate(
        preds, docs,
        breakdown=args.breakdown == "distance",
        confusion=args.confusion is not None,
    )
    if args.confusion:
        evaluation.write_confusion_csv(report.confusion, args.confusion)
    if args.similarity:
        if not args.model:
            raise UsageError("--similarity requires --model for the role embeddings")
        ckpt = training.load_checkpoint(args.model)
        table = ckpt.params["event_role.role_embeddings.weight"]
        sim, _ = evaluation.role_similarity(table)
        labels = [r for r, _ in sorted(ckpt.role_index.items(), key=lambda kv: kv[1])]
        evaluation.write_similarity_csv(sim, labels, args.similarity)
    payload = json.dumps(report.to_json(), indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
        _write_manifest(args.out, "evaluate", {"breakdown": args.breakdown},
                        [args.pred, args.gold], None, started)
    print(payload)
    return EXIT_OK


def cmd_gensynth(args) -> int:
    started = time.time()
    values = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                key, _, raw = line.partition("=")
                key = key.strip()
                if key == "sentence_offset_range":
                    lo, _, hi = raw.strip().partition("..")
                    values[key] = (int(lo), int(hi))
                else:
                    values[key] = int(raw.strip())
    if args.seed is not None:
        values["seed"] = args.seed
    config = synth.SynthConfig(**values)
    docs = synth.generate_synthetic(config)
    corpus.write_jsonl(docs, args.out)
    if args.ontology_out:
        synth.write_ontology_tsv(config, args.ontology_out)
    _write_manifest(args.out, "gen-synth", dataclasses.asdict(config),
                    [args.config] if args.config else [], config.seed, started)
    print(f"wrote {len(docs)} documents to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arglink",
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model")
    p.add_argument("--data", required=True, help="training JSONL")
    p.add_argument("--dev", required=True, help="development JSONL")
    p.add_argument("--ontology", required=True, help="ontology TSV")
    p.add_argument("--config", help="key=value model config file")
    p.add_argument("--out", required=True, help="output checkpoint path")
    p.add_argument("--init-checkpoint", help="checkpoint to fine-tune from")
    p.add_argument("--contextual-dir", help="directory of per-document CTXE files")
    p.add_argument("--seed", type=int)
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="config override (repeatable; wins over --config)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="decode predictions from a checkpoint")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--ontology", required=True)
    p.add_argument("--decoding", choices=["argmax", "greedy", "tcd"],
                   default="greedy")
    p.add_argument("--contextual-dir")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions against gold")
    p.add_argument("--pred", required=True, help="predictions JSONL")
    p.add_argument("--gold", required=True, help="gold documents JSONL")
    p.add_argument("--breakdown", choices=["distance"])
    p.add_argument("--confusion", metavar="OUT_CSV")
    p.add_argument("--similarity", metavar="OUT_CSV")
    p.add_argument("--model", help="checkpoint (needed for --similarity)")
    p.add_argument("--out", help="write the report JSON here as well")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gen-synth", help="generate a synthetic corpus")
    p.add_argument("--config", help="key=value synthetic config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--ontology-out", help="also write the matching ontology TSV")
    p.set_defaults(func=cmd_gensynth)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, CorpusError, OntologyError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (training.TrainingError, training.CheckpointError,
            decoder.DecoderError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
