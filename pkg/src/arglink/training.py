"""Training loop, checkpointing, early stopping, and fine-tuning."""

import copy
import io
import json
import logging
import os
import random
import zipfile
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch

from arglink import decoder as decoding
from arglink.config import ModelConfig
from arglink.corpus import Document
from arglink.encoder import build_char_vocab, build_vocab, read_context_file
from arglink.evaluation import gold_triples, score_triples
from arglink.model import ArgLinkingModel
from arglink.ontology import Ontology

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


class TrainingError(Exception):
    pass


class CheckpointError(Exception):
    pass


@dataclass
class Checkpoint:
    config: ModelConfig
    role_index: Dict[str, int]
    vocab: Dict[str, int]
    char_vocab: Dict[str, int]
    params: Dict[str, np.ndarray]
    best_dev_f1: float
    epoch: int


def save_checkpoint(ckpt: Checkpoint, path):
    manifest = {
        "format_version": CHECKPOINT_VERSION,
        "config": ckpt.config.to_dict(),
        "role_index": ckpt.role_index,
        "vocab": ckpt.vocab,
        "char_vocab": ckpt.char_vocab,
        "best_dev_f1": ckpt.best_dev_f1,
        "epoch": ckpt.epoch,
        "params": [
            {"name": name, "shape": list(arr.shape)}
            for name, arr in ckpt.params.items()
        ],
    }
    payload = io.BytesIO()
    for arr in ckpt.params.values():
        payload.write(np.asarray(arr, dtype="<f4").tobytes(order="C"))
    with zipfile.ZipFile(path, "w") as zf:
        zf.writestr("manifest.json", json.dumps(manifest, sort_keys=True))
        zf.writestr("params.bin", payload.getvalue())


def load_checkpoint(path) -> Checkpoint:
    try:
        with zipfile.ZipFile(path) as zf:
            manifest = json.loads(zf.read("manifest.json"))
            blob = zf.read("params.bin")
    except (zipfile.BadZipFile, KeyError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: unreadable checkpoint ({exc})") from exc
    version = manifest.get("format_version")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"{path}: checkpoint format version {version}, expected {CHECKPOINT_VERSION}")
    params: Dict[str, np.ndarray] = {}
    offset = 0
    for entry in manifest["params"]:
        count = int(np.prod(entry["shape"])) if entry["shape"] else 1
        end = offset + 4 * count
        if end > len(blob):
            raise CheckpointError(f"{path}: truncated parameter payload")
        params[entry["name"]] = np.frombuffer(
            blob[offset:end], dtype="<f4").reshape(entry["shape"]).copy()
        offset = end
    if offset != len(blob):
        raise CheckpointError(f"{path}: parameter payload size mismatch")
    return Checkpoint(
        config=ModelConfig.from_dict(manifest["config"]),
        role_index={k: int(v) for k, v in manifest["role_index"].items()},
        vocab={k: int(v) for k, v in manifest["vocab"].items()},
        char_vocab={k: int(v) for k, v in manifest["char_vocab"].items()},
        params=params,
        best_dev_f1=float(manifest["best_dev_f1"]),
        epoch=int(manifest["epoch"]),
    )


def checkpoint_from_model(model: ArgLinkingModel, best_dev_f1: float,
                          epoch: int) -> Checkpoint:
    params = {
        name: tensor.detach().cpu().numpy().astype(np.float32)
        for name, tensor in model.state_dict().items()
    }
    return Checkpoint(
        config=model.config,
        role_index=dict(model.ontology.role_index),
        vocab=dict(model.embedder.vocab),
        char_vocab=dict(model.embedder.char_cnn.char_vocab)
        if model.embedder.char_cnn is not None else {},
        params=params,
        best_dev_f1=best_dev_f1,
        epoch=epoch,
    )


def model_from_checkpoint(ckpt: Checkpoint, ontology: Ontology) -> ArgLinkingModel:
    if dict(ontology.role_index) != ckpt.role_index:
        raise CheckpointError(
            "checkpoint role map does not match the supplied ontology")
    model = ArgLinkingModel(ckpt.config, ontology, ckpt.vocab, ckpt.char_vocab)
    state = {name: torch.from_numpy(arr) for name, arr in ckpt.params.items()}
    model.load_state_dict(state)
    return model


def truncate_document(doc: Document, max_tokens: int) -> Optional[Document]:
    """Training-only truncation at sentence boundaries. Returns None if the
    document retains no event."""
    if len(doc.tokens) <= max_tokens:
        return doc
    keep = 0
    for s in range(doc.n_sentences):
        _, last = doc.sentence_bounds(s)
        if last + 1 > max_tokens:
            break
        keep = last + 1
    if keep == 0:
        return None
    starts = tuple(s for s in doc.sentence_starts if s < keep)
    events = tuple(e for e in doc.events if e.trigger.end < keep)
    if not events:
        return None
    ids = {e.event_id for e in events}
    links = tuple(g for g in doc.gold_links
                  if g.event_id in ids and g.argument.end < keep)
    given = None
    if doc.given_arguments is not None:
        given = tuple(s for s in doc.given_arguments if s.end < keep)
    return Document(doc.doc_id, doc.tokens[:keep], starts, events, links, given)


def decayed_learning_rate(config: ModelConfig, step: int) -> float:
    """Step decay: the base rate is multiplied by `decay` once per
    `decay_steps` optimizer steps."""
    return config.learning_rate * config.decay ** (step // config.decay_steps)


ContextualLoader = Callable[[str], Optional[torch.Tensor]]


def directory_contextual_loader(directory) -> ContextualLoader:
    def load(doc_id: str) -> Optional[torch.Tensor]:
        path = os.path.join(directory, f"{doc_id}.ctxe")
        return torch.from_numpy(read_context_file(path))
    return load


def predict_corpus(model: ArgLinkingModel, docs: Sequence[Document],
                   strategy: str, ontology: Optional[Ontology] = None,
                   contextual: Optional[ContextualLoader] = None
                   ) -> List[decoding.LinkPrediction]:
    preds: List[decoding.LinkPrediction] = []
    for doc in docs:
        ctx = contextual(doc.doc_id) if contextual is not None else None
        table = model.predict(doc, contextual=ctx)
        if strategy == "argmax":
            preds.extend(decoding.decode_argmax(table))
        elif strategy == "greedy":
            preds.extend(decoding.decode_greedy(table))
        elif strategy == "tcd":
            gold_types = {e.event_id: e.gold_type for e in doc.events}
            if any(t is None for t in gold_types.values()):
                raise TrainingError(
                    f"{doc.doc_id}: type-constrained decoding needs gold event types")
            greedy = decoding.decode_greedy(table)
            preds.extend(decoding.decode_type_constrained(
                greedy, ontology or model.ontology, gold_types))
        else:
            raise TrainingError(f"unknown decoding strategy {strategy!r}")
    return preds


def dev_f1(model: ArgLinkingModel, docs: Sequence[Document], strategy: str,
           contextual: Optional[ContextualLoader] = None) -> float:
    preds = predict_corpus(model, docs, strategy, contextual=contextual)
    _, _, f1 = score_triples(preds, gold_triples(docs))
    return f1


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    history: List[float]  # dev F1 per epoch


def train(train_docs: Sequence[Document], dev_docs: Sequence[Document],
          config: ModelConfig, ontology: Ontology,
          init_checkpoint: Optional[Checkpoint] = None,
          contextual: Optional[ContextualLoader] = None) -> TrainResult:
    """Adam with per-step learning-rate decay and patience-based early
    stopping on dev F1. Deterministic given the config seed."""
    torch.manual_seed(config.seed)
    torch.set_num_threads(1)
    shuffle_rng = random.Random(config.seed)

    if init_checkpoint is not None:
        # Fine-tuning keeps the checkpoint's architecture; only optimization
        # and decoding settings come from the new config. All parameters are
        # updated (nothing frozen).
        model = model_from_checkpoint(init_checkpoint, ontology)
        merged = copy.deepcopy(model.config)
        for name in ("learning_rate", "decay", "decay_steps", "patience",
                     "max_epochs", "max_train_tokens", "grad_clip",
                     "dev_decoding", "seed", "lambda_a", "top_k"):
            setattr(merged, name, getattr(config, name))
        config = merged
        model.config = config
    else:
        vocab = build_vocab(train_docs)
        char_vocab = build_char_vocab(train_docs)
        model = ArgLinkingModel(config, ontology, vocab, char_vocab)

    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    global_step = 0

    prepared = []
    for doc in train_docs:
        truncated = truncate_document(doc, config.max_train_tokens)
        if truncated is None:
            logger.warning("%s: dropped by training truncation", doc.doc_id)
        else:
            prepared.append(truncated)
    if not prepared:
        raise TrainingError("no usable training documents")

    best_f1 = float("-inf")
    best_state = None
    best_epoch = 0
    history: List[float] = []
    since_improvement = 0

    for epoch in range(1, config.max_epochs + 1):
        model.train()
        order = list(prepared)
        shuffle_rng.shuffle(order)
        for doc in order:
            ctx = contextual(doc.doc_id) if contextual is not None else None
            loss = model.loss(doc, contextual=ctx)
            if loss is None:
                continue
            if not torch.isfinite(loss):
                raise TrainingError(
                    f"non-finite loss at epoch {epoch}, step {global_step}, "
                    f"doc {doc.doc_id}")
            optimizer.zero_grad()
            loss.backward()
            if config.grad_clip is not None:
                torch.nn.utils.clip_grad_norm_(model.parameters(), config.grad_clip)
            optimizer.step()
            global_step += 1
            lr = decayed_learning_rate(config, global_step)
            for group in optimizer.param_groups:
                group["lr"] = lr

        f1 = dev_f1(model, dev_docs, config.dev_decoding, contextual=contextual)
        history.append(f1)
        logger.info("epoch %d: dev F1 %.2f", epoch, f1)
        if f1 > best_f1:
            best_f1 = f1
            best_state = copy.deepcopy(model.state_dict())
            best_epoch = epoch
            since_improvement = 0
        else:
            since_improvement += 1
            if since_improvement >= config.patience:
                logger.info("early stop: no improvement for %d epochs", config.patience)
                break

    if best_state is not None:
        model.load_state_dict(best_state)
    ckpt = checkpoint_from_model(model, best_f1, best_epoch)
    return TrainResult(ckpt, history)
