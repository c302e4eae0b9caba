"""Token embedding sources, sentence-level recurrent encoding, and span
representations.

Contextualized vectors are consumed from precomputed per-document files;
no pretrained language model runs in-process.
"""

import struct
from typing import Dict, List, Optional, Sequence

import numpy as np
import torch
from torch import nn
from torch.nn import functional as F

from arglink.corpus import Document, Span

CTXE_MAGIC = b"CTXE"
CTXE_VERSION = 1

UNK = "<unk>"
PAD_CHAR = "\x00"

# Span width buckets: 1, 2, 3, 4, 5-7, 8-15, 16-31, 32+
_WIDTH_EDGES = (1, 2, 3, 4, 7, 15, 31)
N_WIDTH_BUCKETS = 8


class EncoderError(Exception):
    """Raised on shape/alignment errors in encoder inputs."""


def bucket_width(width: int) -> int:
    for i, edge in enumerate(_WIDTH_EDGES):
        if width <= edge:
            return i
    return N_WIDTH_BUCKETS - 1


def write_context_file(path, stack: np.ndarray):
    """Write an L x n x d float32 layer stack in the CTXE binary format."""
    stack = np.asarray(stack, dtype="<f4")
    if stack.ndim != 3:
        raise EncoderError(f"expected L x n x d stack, got shape {stack.shape}")
    L, n, d = stack.shape
    with open(path, "wb") as fh:
        fh.write(CTXE_MAGIC)
        fh.write(struct.pack("<HHII", CTXE_VERSION, L, n, d))
        fh.write(stack.tobytes(order="C"))


def read_context_file(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) < 16 or header[:4] != CTXE_MAGIC:
            raise EncoderError(f"{path}: not a CTXE file")
        version, L, n, d = struct.unpack("<HHII", header[4:])
        if version != CTXE_VERSION:
            raise EncoderError(f"{path}: unsupported CTXE version {version}")
        data = fh.read(4 * L * n * d)
        if len(data) != 4 * L * n * d:
            raise EncoderError(f"{path}: truncated CTXE payload")
    return np.frombuffer(data, dtype="<f4").reshape(L, n, d).copy()


def load_word_vectors(path) -> Dict[str, np.ndarray]:
    """Read a whitespace-separated word-vector text file."""
    vectors: Dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.rstrip().split(" ")
            if len(parts) < 2:
                continue
            if dim is None and len(parts) == 2 and parts[1].isdigit():
                continue  # word2vec-style count header
            vec = np.asarray([float(x) for x in parts[1:]], dtype=np.float32)
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise EncoderError(f"{path}: inconsistent vector dimension for {parts[0]!r}")
            vectors[parts[0]] = vec
    if not vectors:
        raise EncoderError(f"{path}: no vectors found")
    return vectors


class ScalarMixture(nn.Module):
    """Learned softmax-weighted combination of L contextual layers, scaled."""

    def __init__(self, n_layers: int):
        super().__init__()
        if n_layers < 1:
            raise EncoderError("scalar mixture needs at least one layer")
        self.weights = nn.Parameter(torch.zeros(n_layers))
        self.scale = nn.Parameter(torch.ones(1))

    def forward(self, stack: torch.Tensor) -> torch.Tensor:
        if stack.dim() != 3 or stack.shape[0] != self.weights.shape[0]:
            raise EncoderError(
                f"layer stack shape {tuple(stack.shape)} does not match "
                f"{self.weights.shape[0]} mixture weights"
            )
        alpha = torch.softmax(self.weights, dim=0)
        return self.scale * torch.einsum("l,lnd->nd", alpha, stack)


class CharCNN(nn.Module):
    """Character convolutions: 50 filters each of widths 3, 4, 5 over 8-dim
    character embeddings, max-pooled over time."""

    def __init__(self, char_vocab: Dict[str, int], char_dim: int = 8,
                 n_filters: int = 50, widths: Sequence[int] = (3, 4, 5)):
        super().__init__()
        self.char_vocab = dict(char_vocab)
        self.widths = tuple(widths)
        self.embedding = nn.Embedding(len(self.char_vocab) + 1, char_dim)  # +1 for unknown chars
        self.convs = nn.ModuleList(
            nn.Conv1d(char_dim, n_filters, w) for w in self.widths
        )

    @property
    def output_dim(self) -> int:
        return sum(c.out_channels for c in self.convs)

    def _char_ids(self, token: str) -> List[int]:
        unk_id = len(self.char_vocab)
        return [self.char_vocab.get(ch, unk_id) for ch in token]

    def forward(self, tokens: Sequence[str]) -> torch.Tensor:
        max_w = max(self.widths)
        width = max(max_w, max(len(t) for t in tokens))
        pad_id = self.char_vocab.get(PAD_CHAR, 0)
        ids = torch.tensor(
            [self._char_ids(t) + [pad_id] * (width - len(t)) for t in tokens],
            dtype=torch.long,
        )
        emb = self.embedding(ids).transpose(1, 2)  # tokens x char_dim x width
        pooled = [conv(emb).max(dim=2).values for conv in self.convs]
        return torch.cat(pooled, dim=1)


def build_vocab(docs: Sequence[Document]) -> Dict[str, int]:
    """Word vocabulary from a corpus; index 0 is the unknown-word slot."""
    vocab = {UNK: 0}
    for doc in docs:
        for tok in doc.tokens:
            vocab.setdefault(tok, len(vocab))
    return vocab


def build_char_vocab(docs: Sequence[Document]) -> Dict[str, int]:
    chars = {PAD_CHAR: 0}
    for doc in docs:
        for tok in doc.tokens:
            for ch in tok:
                chars.setdefault(ch, len(chars))
    return chars


class TokenEmbedder(nn.Module):
    """Concatenation of word lookup, character convolutions, and an optional
    scalar mixture of precomputed contextual layers. In training mode each
    source is dropped whole-vector per token (lexical dropout)."""

    def __init__(self, vocab: Dict[str, int], char_vocab: Dict[str, int],
                 word_dim: int, lexical_dropout: float = 0.5,
                 pretrained: Optional[Dict[str, np.ndarray]] = None,
                 use_char_cnn: bool = True,
                 char_dim: int = 8, char_filters: int = 50,
                 contextual_layers: int = 0, contextual_dim: int = 0):
        super().__init__()
        self.vocab = dict(vocab)
        self.lexical_dropout = lexical_dropout
        self.word_embedding = nn.Embedding(len(self.vocab), word_dim)
        if pretrained is not None:
            with torch.no_grad():
                for word, idx in self.vocab.items():
                    if word in pretrained:
                        vec = pretrained[word]
                        if vec.shape[0] != word_dim:
                            raise EncoderError(
                                f"pretrained dimension {vec.shape[0]} != word_dim {word_dim}"
                            )
                        self.word_embedding.weight[idx] = torch.from_numpy(vec)
        self.char_cnn = (
            CharCNN(char_vocab, char_dim=char_dim, n_filters=char_filters)
            if use_char_cnn else None
        )
        self.mixture = ScalarMixture(contextual_layers) if contextual_layers > 0 else None
        self.contextual_dim = contextual_dim

    @property
    def output_dim(self) -> int:
        dim = self.word_embedding.embedding_dim
        if self.char_cnn is not None:
            dim += self.char_cnn.output_dim
        if self.mixture is not None:
            dim += self.contextual_dim
        return dim

    def _lex_drop(self, x: torch.Tensor) -> torch.Tensor:
        if not self.training or self.lexical_dropout <= 0:
            return x
        keep = torch.bernoulli(
            torch.full((x.shape[0], 1), 1.0 - self.lexical_dropout, device=x.device)
        )
        return x * keep / (1.0 - self.lexical_dropout)

    def forward(self, tokens: Sequence[str],
                contextual: Optional[torch.Tensor] = None) -> torch.Tensor:
        n = len(tokens)
        ids = torch.tensor([self.vocab.get(t, 0) for t in tokens], dtype=torch.long)
        sources = [self._lex_drop(self.word_embedding(ids))]
        if self.char_cnn is not None:
            sources.append(self._lex_drop(self.char_cnn(tokens)))
        if self.mixture is not None:
            if contextual is None:
                raise EncoderError("model expects a contextual layer stack, none given")
            if contextual.shape[1] != n:
                raise EncoderError(
                    f"contextual file has {contextual.shape[1]} tokens, document has {n}"
                )
            sources.append(self._lex_drop(self.mixture(contextual)))
        elif contextual is not None:
            raise EncoderError("contextual stack supplied but model has no mixture")
        return torch.cat(sources, dim=1)


class SentenceEncoder(nn.Module):
    """Bidirectional LSTM over each sentence independently; no information
    crosses sentence boundaries."""

    def __init__(self, input_dim: int, hidden: int = 200, layers: int = 3,
                 dropout: float = 0.4):
        super().__init__()
        self.lstm = nn.LSTM(
            input_dim, hidden, num_layers=layers, bidirectional=True,
            dropout=dropout if layers > 1 else 0.0, batch_first=True,
        )

    @property
    def output_dim(self) -> int:
        return 2 * self.lstm.hidden_size

    def forward(self, embeddings: torch.Tensor,
                sentence_starts: Sequence[int]) -> torch.Tensor:
        n = embeddings.shape[0]
        bounds = list(sentence_starts) + [n]
        outputs = []
        for a, b in zip(bounds, bounds[1:]):
            out, _ = self.lstm(embeddings[a:b].unsqueeze(0))
            outputs.append(out.squeeze(0))
        return torch.cat(outputs, dim=0)


class SpanEncoder(nn.Module):
    """Span representation: [h_start; h_end; attention head over the span's
    token embeddings; width-bucket embedding]."""

    def __init__(self, hidden_dim: int, token_dim: int, width_dim: int = 20):
        super().__init__()
        self.attn_score = nn.Linear(hidden_dim, 1)
        self.width_embedding = nn.Embedding(N_WIDTH_BUCKETS, width_dim)
        self.hidden_dim = hidden_dim
        self.token_dim = token_dim
        self.width_dim = width_dim

    @property
    def output_dim(self) -> int:
        return 2 * self.hidden_dim + self.token_dim + self.width_dim

    def forward(self, hidden: torch.Tensor, token_embeddings: torch.Tensor,
                spans: Sequence[Span]) -> torch.Tensor:
        scores = self.attn_score(hidden).squeeze(-1)
        reprs = []
        for span in spans:
            sl = slice(span.start, span.end + 1)
            alpha = torch.softmax(scores[sl], dim=0)
            head = alpha @ token_embeddings[sl]
            width = self.width_embedding(
                torch.tensor(bucket_width(span.width), dtype=torch.long)
            )
            reprs.append(torch.cat([hidden[span.start], hidden[span.end], head, width]))
        return torch.stack(reprs) if reprs else torch.zeros(0, self.output_dim)

    def attention_weights(self, hidden: torch.Tensor, span: Span) -> torch.Tensor:
        scores = self.attn_score(hidden).squeeze(-1)
        return torch.softmax(scores[span.start:span.end + 1], dim=0)
