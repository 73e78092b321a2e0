"""Multi-word token expansion: frequency lexicon first, seq2seq fallback.

Tokens whose exact surface was observed as an MWT in training always expand
from the lexicon; a lowercased second lookup handles casing variants; only
then does the neural model run, with an identity fallback guarding against
degenerate decodes.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace

import numpy as np

from .doc import Document, Sentence, Token, Word
from .nn import autodiff as ad
from .nn.layers import ParamSet
from .nn.modelio import load_model, save_model
from .nn.optim import Adam
from .nn.vocab import BOS, EOS, SEP, UNK, Vocab
from .seq2seq import Seq2Seq


@dataclass
class MWTConfig:
    char_dim: int = 16
    hidden: int = 24
    epochs: int = 40
    lr: float = 0.002
    seed: int = 17

    def to_json(self):
        return dict(self.__dict__)

    @classmethod
    def from_json(cls, data):
        return cls(**data)


class ExpansionLexicon:
    """Most frequent expansion per observed MWT surface (ties: first seen)."""

    def __init__(self, exact: dict[str, tuple[str, ...]],
                 lower: dict[str, tuple[str, ...]]):
        self.exact = exact
        self.lower = lower

    def to_json(self):
        return {"exact": {k: list(v) for k, v in self.exact.items()},
                "lower": {k: list(v) for k, v in self.lower.items()}}

    @classmethod
    def from_json(cls, data):
        return cls({k: tuple(v) for k, v in data["exact"].items()},
                   {k: tuple(v) for k, v in data["lower"].items()})


def _most_frequent(counts: Counter, first_seen: dict) -> dict:
    """Pick the winner per key: highest count, earliest first occurrence on ties."""
    best: dict = {}
    for (key, expansion), count in counts.items():
        current = best.get(key)
        candidate = (-count, first_seen[(key, expansion)], expansion)
        if current is None or candidate < current:
            best[key] = candidate
    return {key: value[2] for key, value in best.items()}


def mwt_pairs(corpus: list[Document]):
    """(surface, expansion) for every expanded MWT token in corpus order."""
    for doc in corpus:
        for sentence in doc.sentences:
            for token in sentence.tokens:
                if token.is_mwt:
                    first, last = token.id_range
                    expansion = tuple(w.form for w in sentence.words[first - 1:last])
                    yield token.surface, expansion


def build_lexicon(corpus: list[Document]) -> ExpansionLexicon:
    exact_counts: Counter = Counter()
    lower_counts: Counter = Counter()
    first_seen: dict = {}
    order = 0
    for surface, expansion in mwt_pairs(corpus):
        exact_counts[(surface, expansion)] += 1
        lowered = (surface.lower(), tuple(f.lower() for f in expansion))
        lower_counts[lowered] += 1
        for key in ((surface, expansion), lowered):
            if key not in first_seen:
                first_seen[key] = order
                order += 1
    return ExpansionLexicon(_most_frequent(exact_counts, first_seen),
                            _most_frequent(lower_counts, first_seen))


class MWTModel:
    KIND = "mwt"

    def __init__(self, config: MWTConfig, vocab: Vocab, lexicon: ExpansionLexicon,
                 trained: bool = False):
        self.config = config
        self.vocab = vocab
        self.lexicon = lexicon
        self.trained = trained
        self.params = ParamSet()
        rng = np.random.default_rng(config.seed)
        self.seq2seq = Seq2Seq(self.params, rng, "s2s", vocab,
                               config.char_dim, config.hidden)

    def save(self, path):
        save_model(
            path, self.KIND,
            config=self.config.to_json(),
            vocabs={"char": self.vocab.to_json(), "lexicon": self.lexicon.to_json(),
                    "trained": self.trained},
            arrays=self.params.state_arrays(),
        )

    @classmethod
    def load(cls, path) -> "MWTModel":
        _, config, vocabs, arrays, _ = load_model(path, expect_kind=cls.KIND)
        model = cls(MWTConfig.from_json(config), Vocab.from_json(vocabs["char"]),
                    ExpansionLexicon.from_json(vocabs["lexicon"]), vocabs["trained"])
        model.params.load_arrays(arrays)
        return model


def train_mwt(corpus: list[Document], config: MWTConfig | None = None, log=None) -> MWTModel:
    config = config or MWTConfig()
    pairs = list(mwt_pairs(corpus))
    lexicon = build_lexicon(corpus)
    chars = sorted({c for surface, expansion in pairs
                    for c in surface + "".join(expansion)})
    vocab = Vocab.build(chars, specials=(UNK, BOS, EOS, SEP))
    model = MWTModel(config, vocab, lexicon, trained=bool(pairs) and config.epochs > 0)
    if not model.trained:
        return model
    optimizer = Adam(model.params.all(), lr=config.lr)
    for epoch in range(config.epochs):
        total = 0.0
        for surface, expansion in pairs:
            target: list[str] = []
            for i, word in enumerate(expansion):
                if i:
                    target.append(SEP)
                target.extend(word)
            enc_states, summary = model.seq2seq.encode(list(surface))
            loss = model.seq2seq.loss(enc_states, summary, target)
            loss.backward()
            optimizer.step()
            total += loss.item()
        if log:
            log(f"mwt epoch {epoch}: loss {total / len(pairs):.4f}")
    return model


def _recase(expansion: tuple[str, ...], surface: str) -> list[str]:
    words = list(expansion)
    if surface[:1].isupper() and words and words[0]:
        words[0] = words[0][0].upper() + words[0][1:]
    return words


def expand(token: Token, lexicon: ExpansionLexicon, model: MWTModel | None) -> list[str]:
    """Word forms for one MWT-flagged token; never empty, deterministic."""
    surface = token.surface
    if surface in lexicon.exact:
        return list(lexicon.exact[surface])
    if surface.lower() in lexicon.lower:
        return _recase(lexicon.lower[surface.lower()], surface)
    if model is None or not model.trained:
        return [surface]
    enc_states, summary = model.seq2seq.encode(list(surface))
    cap = max(20, 3 * len(surface))
    symbols, terminated = model.seq2seq.greedy(enc_states, summary, cap)
    if not terminated:
        return [surface]
    words: list[str] = []
    current: list[str] = []
    for symbol in symbols:
        if symbol == SEP:
            words.append("".join(current))
            current = []
        else:
            current.append(symbol)
    words.append("".join(current))
    words = [w for w in words if w]
    return words or [surface]


def expand_document(model: MWTModel, doc: Document) -> Document:
    """Pipeline stage: expand every flagged, not-yet-expanded token."""
    sentences = []
    for sentence in doc.sentences:
        tokens = []
        words: list[Word] = []
        for token in sentence.tokens:
            old_first, old_last = token.id_range
            if token.is_mwt:
                forms = [w.form for w in sentence.words[old_first - 1:old_last]]
            elif token.mwt_flag:
                forms = expand(token, model.lexicon, model)
                if len(forms) == 1:
                    # a one-word "expansion" is no expansion: keep the surface
                    # so the non-MWT token/word-form invariant holds
                    forms = [token.surface]
            else:
                forms = [token.surface]
            first = len(words) + 1
            if token.is_mwt:
                for offset, old_word in enumerate(sentence.words[old_first - 1:old_last]):
                    words.append(replace(old_word, id=first + offset))
            elif len(forms) == 1 and forms[0] == token.surface:
                words.append(replace(sentence.words[old_first - 1], id=first))
            else:
                for offset, form in enumerate(forms):
                    words.append(Word(id=first + offset, form=form))
            tokens.append(replace(token, id_range=(first, len(words))))
        sentences.append(Sentence(tokens=tuple(tokens), words=tuple(words),
                                  comments=sentence.comments,
                                  empty_nodes=sentence.empty_nodes))
    return Document(text=doc.text, sentences=tuple(sentences))
