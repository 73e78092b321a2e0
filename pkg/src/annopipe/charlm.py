"""Character-level LSTM language models for contextual string features.

A forward model reads text left to right, a backward model reads the
reversed stream; they share nothing.  At tagging time their hidden states at
word boundaries are read off as frozen features.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn import autodiff as ad
from .nn.autodiff import Tensor
from .nn.layers import Embedding, Linear, LSTM, ParamSet
from .nn.modelio import load_model, save_model
from .nn.optim import Adam
from .nn.vocab import BOS, UNK, Vocab

FORWARD = "forward"
BACKWARD = "backward"


@dataclass
class CharLMConfig:
    char_dim: int = 16
    hidden: int = 32
    epochs: int = 10
    lr: float = 0.003
    seed: int = 37
    chunk_len: int = 80

    def to_json(self):
        return dict(self.__dict__)

    @classmethod
    def from_json(cls, data):
        return cls(**data)


class CharLM:
    KIND = "charlm"

    def __init__(self, config: CharLMConfig, vocab: Vocab, direction: str):
        if direction not in (FORWARD, BACKWARD):
            raise ValueError(f"direction must be forward or backward, got {direction!r}")
        self.config = config
        self.vocab = vocab
        self.direction = direction
        self.params = ParamSet()
        rng = np.random.default_rng(config.seed + (0 if direction == FORWARD else 1))
        self.embed = Embedding(self.params, rng, "embed", len(vocab), config.char_dim)
        self.lstm = LSTM(self.params, rng, "lstm", config.char_dim, config.hidden)
        self.out = Linear(self.params, rng, "out", config.hidden, len(vocab))

    def stream(self, text: str) -> str:
        """The character order this model consumes."""
        return text if self.direction == FORWARD else text[::-1]

    def chunk_loss(self, chunk: str) -> Tensor:
        """Next-character cross-entropy over one already-oriented chunk."""
        ids = self.vocab.encode_all(list(chunk))
        inputs = [self.vocab.encode(BOS)] + ids[:-1]
        states, _ = self.lstm.run(self.embed(inputs))
        return ad.cross_entropy(self.out(states), ids)

    def states(self, text: str) -> np.ndarray:
        """Hidden state per original character position.

        Row i is the state after the model has consumed character i (and, for
        the backward model, everything after it).  No gradients are kept.
        """
        if not text:
            return np.zeros((0, self.config.hidden))
        oriented = self.stream(text)
        ids = [self.vocab.encode(BOS)] + self.vocab.encode_all(list(oriented))
        states, _ = self.lstm.run(self.embed(ids))
        data = states.data[1:]  # drop the BOS step
        return data if self.direction == FORWARD else data[::-1].copy()

    def perplexity(self, text: str) -> float:
        oriented = self.stream(text)
        total = 0.0
        count = 0
        for i in range(0, len(oriented), self.config.chunk_len):
            chunk = oriented[i:i + self.config.chunk_len]
            if not chunk:
                continue
            total += self.chunk_loss(chunk).item()
            count += len(chunk)
        return float(np.exp(total / max(count, 1)))

    def save(self, path):
        save_model(path, self.KIND, config=self.config.to_json(),
                   vocabs={"char": self.vocab.to_json(), "direction": self.direction},
                   arrays=self.params.state_arrays())

    @classmethod
    def load(cls, path) -> "CharLM":
        _, config, vocabs, arrays, _ = load_model(path, expect_kind=cls.KIND)
        model = cls(CharLMConfig.from_json(config), Vocab.from_json(vocabs["char"]),
                    vocabs["direction"])
        model.params.load_arrays(arrays)
        return model


def train_charlm(text: str, direction: str, config: CharLMConfig | None = None,
                 log=None) -> CharLM:
    config = config or CharLMConfig()
    if not text:
        raise ValueError("empty corpus")
    vocab = Vocab.build(sorted(set(text)), specials=(UNK, BOS))
    model = CharLM(config, vocab, direction)
    oriented = model.stream(text)
    chunks = [oriented[i:i + config.chunk_len]
              for i in range(0, len(oriented), config.chunk_len)]
    optimizer = Adam(model.params.all(), lr=config.lr)
    for epoch in range(config.epochs):
        total = 0.0
        count = 0
        for chunk in chunks:
            loss = model.chunk_loss(chunk)
            loss.backward()
            optimizer.step()
            total += loss.item()
            count += len(chunk)
        if log:
            log(f"charlm[{direction}] epoch {epoch}: loss/char {total / count:.4f}")
    return model
