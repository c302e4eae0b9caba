#!/usr/bin/env python3
"""Long-running full-corpus reproduction (not part of the test gate).

Trains the full-size model on the public RAMS release with the reference
hyperparameters (recurrent size 200 x 3 layers, k=10, lexical dropout 0.5,
Adam at 0.001 with 0.999-per-100-steps decay, patience 10) and evaluates
greedy decoding on the dev split. The reference target is dev F1 within
+-3 of 69.9. Expect multiple hours on CPU; contextual vectors, if used,
must be precomputed into per-document .ctxe files (see the encoder module
for the file format) since no language model runs in-process.

Usage:
    python3 scripts/reproduce_rams.py \
        --train /path/to/train.jsonlines --dev /path/to/dev.jsonlines \
        --ontology src/arglink/data/aida_ontology.tsv --out rams.ckpt \
        [--contextual-dir ctxe/] [--layers 4 --dim 768]

The split files are consumed in the RAMS release format via import_rams;
use `arglink predict` / `arglink evaluate` on the resulting checkpoint for
the decoding comparisons and the distance breakdown.
"""

import argparse
import json
import time

from arglink.config import ModelConfig
from arglink.corpus import import_rams
from arglink.ontology import load_ontology
from arglink.training import directory_contextual_loader, save_checkpoint, train


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--train", required=True, help="RAMS train split")
    parser.add_argument("--dev", required=True, help="RAMS dev split")
    parser.add_argument("--ontology", required=True)
    parser.add_argument("--out", required=True, help="checkpoint output path")
    parser.add_argument("--contextual-dir",
                        help="directory of per-document .ctxe layer stacks")
    parser.add_argument("--layers", type=int, default=0,
                        help="contextual layer count (e.g. 4 for layers 9-12)")
    parser.add_argument("--dim", type=int, default=0,
                        help="contextual vector dimensionality")
    parser.add_argument("--seed", type=int, default=13)
    args = parser.parse_args()

    ontology = load_ontology(args.ontology)
    train_docs = import_rams(args.train, ontology)
    dev_docs = import_rams(args.dev, ontology)
    print(f"loaded {len(train_docs)} train / {len(dev_docs)} dev examples")

    config = ModelConfig(seed=args.seed, contextual_layers=args.layers,
                         contextual_dim=args.dim)
    contextual = (directory_contextual_loader(args.contextual_dir)
                  if args.contextual_dir else None)

    started = time.time()
    result = train(train_docs, dev_docs, config, ontology,
                   contextual=contextual)
    save_checkpoint(result.checkpoint, args.out)
    print(json.dumps({
        "best_dev_f1": result.checkpoint.best_dev_f1,
        "best_epoch": result.checkpoint.epoch,
        "epochs_run": len(result.history),
        "wall_seconds": round(time.time() - started, 1),
        "reference_target": "dev F1 within +-3 of 69.9 (greedy decoding)",
    }, indent=2))


if __name__ == "__main__":
    main()
