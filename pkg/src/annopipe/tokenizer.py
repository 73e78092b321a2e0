"""Joint tokenization, sentence segmentation and MWT detection.

Modeled as 5-way tagging over characters: for each character the model
predicts inside / token end / sentence end, with MWT variants of the two end
labels marking tokens that need expansion.  A single softmax keeps decoding
unambiguous (a sentence end is a token end by construction).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .doc import Document, DocumentError, Sentence, Token, Word
from .nn import autodiff as ad
from .nn.autodiff import Tensor
from .nn.layers import BiLSTM, Embedding, Linear, ParamSet
from .nn.modelio import load_model, save_model
from .nn.optim import Adam
from .nn.vocab import UNK, Vocab

INSIDE = 0
TOKEN_END = 1
SENT_END = 2
MWT_TOKEN_END = 3
MWT_SENT_END = 4

N_LABELS = 5

_END_LABELS = {TOKEN_END, SENT_END, MWT_TOKEN_END, MWT_SENT_END}
_SENT_LABELS = {SENT_END, MWT_SENT_END}
_MWT_LABELS = {MWT_TOKEN_END, MWT_SENT_END}


@dataclass(frozen=True)
class LabeledCharSequence:
    text: str
    labels: tuple[int, ...]

    def __post_init__(self):
        if len(self.text) != len(self.labels):
            raise DocumentError("labels must cover every character")


@dataclass
class TokenizerConfig:
    char_dim: int = 16
    hidden: int = 32
    layers: int = 1
    epochs: int = 80
    lr: float = 0.003
    dropout: float = 0.33
    seed: int = 13
    max_chunk_chars: int = 400
    allow_space_inside: bool = False  # whitespace forces a token end by default

    def to_json(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_json(cls, data: dict) -> "TokenizerConfig":
        return cls(**data)


def derive_char_labels(sentence: Sentence, raw: str) -> LabeledCharSequence:
    """Gold labels for the characters a sentence spans in ``raw``.

    The character at each token's ``end_char - 1`` is a token end (MWT
    variant for flagged tokens); the last token's end becomes a sentence
    end; everything else, including whitespace, is inside.
    """
    base = sentence.start_char
    labels = [INSIDE] * (sentence.end_char - base)
    for index, token in enumerate(sentence.tokens):
        if raw[token.start_char:token.end_char] != token.surface:
            raise DocumentError(
                f"token {token.surface!r} does not match raw text at "
                f"[{token.start_char}, {token.end_char})")
        mwt = token.is_mwt or token.mwt_flag
        last = index == len(sentence.tokens) - 1
        if last:
            label = MWT_SENT_END if mwt else SENT_END
        else:
            label = MWT_TOKEN_END if mwt else TOKEN_END
        labels[token.end_char - 1 - base] = label
    return LabeledCharSequence(raw[base:sentence.end_char], tuple(labels))


def document_char_labels(doc: Document) -> LabeledCharSequence:
    """Gold labels over the entire document text (inter-sentence gaps inside)."""
    labels = [INSIDE] * len(doc.text)
    for sentence in doc.sentences:
        seq = derive_char_labels(sentence, doc.text)
        labels[sentence.start_char:sentence.end_char] = seq.labels
    return LabeledCharSequence(doc.text, tuple(labels))


def decode_labels(raw: str, labels, offset: int = 0,
                  allow_space_inside: bool = False) -> list[Sentence]:
    """Reconstruct sentences/tokens from per-character labels.

    Whitespace can never sit inside a token (unless configured otherwise)
    and never starts one; trailing unterminated material becomes a final
    token and sentence.  ``offset`` shifts the produced character spans.
    """
    if len(raw) != len(labels):
        raise DocumentError("labels must cover every character")
    sentences: list[Sentence] = []
    tokens: list[tuple[int, int, bool]] = []  # start, end, mwt within raw
    token_start: Optional[int] = None

    def close_token(end: int, mwt: bool):
        nonlocal token_start
        if token_start is not None:
            tokens.append((token_start, end, mwt))
            token_start = None

    def close_sentence():
        nonlocal tokens
        if not tokens:
            return
        sent_tokens = []
        words = []
        for start, end, mwt in tokens:
            wid = len(words) + 1
            surface = raw[start:end]
            sent_tokens.append(Token(
                id_range=(wid, wid), surface=surface,
                start_char=offset + start, end_char=offset + end, mwt_flag=mwt))
            words.append(Word(id=wid, form=surface))
        sentences.append(Sentence(tokens=tuple(sent_tokens), words=tuple(words)))
        tokens = []

    for i, char in enumerate(raw):
        if char.isspace() and not allow_space_inside:
            close_token(i, False)
            continue
        if token_start is None:
            if char.isspace():
                continue
            token_start = i
        label = labels[i]
        if label in _END_LABELS:
            close_token(i + 1, label in _MWT_LABELS)
            if label in _SENT_LABELS:
                close_sentence()
    close_token(len(raw), False)
    close_sentence()
    return sentences


class TokenizerModel:
    """Character BiLSTM with a 5-way output layer."""

    KIND = "tokenizer"

    def __init__(self, config: TokenizerConfig, vocab: Vocab, produces_mwt: bool):
        self.config = config
        self.vocab = vocab
        self.produces_mwt = produces_mwt
        self.params = ParamSet()
        rng = np.random.default_rng(config.seed)
        self.embed = Embedding(self.params, rng, "char_embed", len(vocab), config.char_dim)
        self.encoder = BiLSTM(self.params, rng, "encoder",
                              config.char_dim, config.hidden, config.layers)
        self.out = Linear(self.params, rng, "out", 2 * config.hidden, N_LABELS)

    def logits(self, text: str, rng=None, train=False) -> Tensor:
        ids = self.vocab.encode_all(list(text))
        embedded = self.embed(ids)
        if train and self.config.dropout > 0:
            embedded = ad.dropout(embedded, self.config.dropout, rng, train=True)
        return self.out(self.encoder(embedded))

    def predict_labels(self, text: str) -> list[int]:
        if not text:
            return []
        return [int(i) for i in np.argmax(self.logits(text).data, axis=1)]

    def save(self, path):
        save_model(
            path, self.KIND,
            config=self.config.to_json(),
            vocabs={"char": self.vocab.to_json(), "produces_mwt": self.produces_mwt},
            arrays=self.params.state_arrays(),
        )

    @classmethod
    def load(cls, path) -> "TokenizerModel":
        _, config, vocabs, arrays, _ = load_model(path, expect_kind=cls.KIND)
        model = cls(TokenizerConfig.from_json(config), Vocab.from_json(vocabs["char"]),
                    vocabs["produces_mwt"])
        model.params.load_arrays(arrays)
        return model


def _training_chunks(doc: Document, max_chars: int) -> list[tuple[str, tuple[int, ...]]]:
    """Split a labeled document at sentence boundaries to bound memory."""
    seq = document_char_labels(doc)
    chunks = []
    start = 0
    end = 0
    for i, sentence in enumerate(doc.sentences):
        next_start = (doc.sentences[i + 1].start_char
                      if i + 1 < len(doc.sentences) else len(doc.text))
        if end > start and next_start - start > max_chars:
            chunks.append((seq.text[start:end], seq.labels[start:end]))
            start = sentence.start_char
        end = next_start
    if end > start:
        chunks.append((seq.text[start:end], seq.labels[start:end]))
    return chunks


def train_tokenizer(corpus: list[Document], config: TokenizerConfig | None = None,
                    log=None) -> TokenizerModel:
    """Fit the character tagger; returns the model with the lowest-loss epoch kept last.

    The per-character cross-entropy over the training labels decreases on a
    learnable corpus; callers wanting a dev split handle it upstream.
    """
    config = config or TokenizerConfig()
    if not corpus:
        raise ValueError("empty training corpus")
    chars = sorted({c for doc in corpus for c in doc.text})
    vocab = Vocab.build(chars)
    produces_mwt = any(
        token.is_mwt or token.mwt_flag
        for doc in corpus for sentence in doc.sentences for token in sentence.tokens)
    model = TokenizerModel(config, vocab, produces_mwt)
    chunks = []
    for doc in corpus:
        chunks.extend(_training_chunks(doc, config.max_chunk_chars))
    optimizer = Adam(model.params.all(), lr=config.lr)
    rng = np.random.default_rng(config.seed + 1)
    for epoch in range(config.epochs):
        total = 0.0
        count = 0
        for text, labels in chunks:
            loss = ad.cross_entropy(model.logits(text, rng, train=True), list(labels))
            loss.backward()
            optimizer.step()
            total += loss.item()
            count += len(labels)
        if log:
            log(f"tokenizer epoch {epoch}: loss/char {total / max(count, 1):.4f}")
    return model


def tokenize(model: TokenizerModel, raw: str) -> Document:
    """Segment raw text into a tokenized Document (total on any string).

    Inference runs per paragraph (split at blank lines); sentences never
    cross a paragraph break.
    """
    sentences: list[Sentence] = []
    offset = 0
    for piece in raw.split("\n\n"):
        if piece.strip():
            labels = model.predict_labels(piece)
            sentences.extend(decode_labels(
                piece, labels, offset=offset,
                allow_space_inside=model.config.allow_space_inside))
        offset += len(piece) + 2
    return Document(text=raw, sentences=tuple(sentences))
