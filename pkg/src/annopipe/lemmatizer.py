"""Lemmatization: training dictionary, then a seq2seq with shortcut classifier.

The dictionary (keyed on (form, UPOS), falling back to form alone) covers
every training pair exactly.  Unseen words route through a 3-way classifier
on the seq2seq encoder summary: identity copy, lowercase, or a full greedy
decode.  The shortcut paths keep long inputs such as URLs robust.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace

import numpy as np

from .doc import Document, Word
from .nn import autodiff as ad
from .nn.layers import Linear, ParamSet
from .nn.modelio import load_model, save_model
from .nn.optim import Adam
from .nn.vocab import BOS, EOS, UNK, Vocab

from .seq2seq import Seq2Seq

IDENTITY = 0
LOWERCASE = 1
SEQ2SEQ = 2


@dataclass
class LemmatizerConfig:
    char_dim: int = 16
    hidden: int = 24
    epochs: int = 30
    lr: float = 0.002
    seed: int = 19

    def to_json(self):
        return dict(self.__dict__)

    @classmethod
    def from_json(cls, data):
        return cls(**data)


class LemmaDictionary:
    def __init__(self, by_form_upos: dict, by_form: dict):
        self.by_form_upos = by_form_upos
        self.by_form = by_form

    def lookup(self, form: str, upos) -> str | None:
        hit = self.by_form_upos.get((form, upos))
        if hit is not None:
            return hit
        return self.by_form.get(form)

    def to_json(self):
        return {
            "by_form_upos": [[f, u, l] for (f, u), l in self.by_form_upos.items()],
            "by_form": dict(self.by_form),
        }

    @classmethod
    def from_json(cls, data):
        return cls({(f, u): l for f, u, l in data["by_form_upos"]}, dict(data["by_form"]))


def lemma_pairs(corpus: list[Document]):
    for doc in corpus:
        for word in doc.iter_words():
            if word.lemma is not None:
                yield word.form, word.upos, word.lemma


def build_lemma_dict(corpus: list[Document]) -> LemmaDictionary:
    """Most frequent lemma per key; ties break to the first occurrence."""
    pair_counts: Counter = Counter()
    form_counts: Counter = Counter()
    first_seen: dict = {}
    order = 0
    for form, upos, lemma in lemma_pairs(corpus):
        pair_counts[((form, upos), lemma)] += 1
        form_counts[(form, lemma)] += 1
        for key in (((form, upos), lemma), (form, lemma)):
            if key not in first_seen:
                first_seen[key] = order
                order += 1

    def winners(counts):
        best = {}
        for (key, lemma), count in counts.items():
            candidate = (-count, first_seen[(key, lemma)], lemma)
            if key not in best or candidate < best[key]:
                best[key] = candidate
        return {key: value[2] for key, value in best.items()}

    return LemmaDictionary(winners(pair_counts), winners(form_counts))


def edit_label(form: str, lemma: str) -> int:
    if lemma == form:
        return IDENTITY
    if lemma == form.lower():
        return LOWERCASE
    return SEQ2SEQ


def _upos_symbol(upos) -> str:
    return f"<upos:{upos or '_'}>"


class LemmatizerModel:
    KIND = "lemmatizer"

    def __init__(self, config: LemmatizerConfig, vocab: Vocab,
                 dictionary: LemmaDictionary, trained: bool = False):
        self.config = config
        self.vocab = vocab
        self.dictionary = dictionary
        self.trained = trained
        self.params = ParamSet()
        rng = np.random.default_rng(config.seed)
        self.seq2seq = Seq2Seq(self.params, rng, "s2s", vocab,
                               config.char_dim, config.hidden)
        self.edit_head = Linear(self.params, rng, "edit", 2 * config.hidden, 3)

    def encode_form(self, form: str, upos):
        # UPOS rides along as a conditioning pseudo-symbol before the characters.
        return self.seq2seq.encode([_upos_symbol(upos)] + list(form))

    def classify_edit(self, summary) -> int:
        logits = self.edit_head(summary)
        return int(np.argmax(logits.data))

    def save(self, path):
        save_model(
            path, self.KIND,
            config=self.config.to_json(),
            vocabs={"char": self.vocab.to_json(), "dict": self.dictionary.to_json(),
                    "trained": self.trained},
            arrays=self.params.state_arrays(),
        )

    @classmethod
    def load(cls, path) -> "LemmatizerModel":
        _, config, vocabs, arrays, _ = load_model(path, expect_kind=cls.KIND)
        model = cls(LemmatizerConfig.from_json(config), Vocab.from_json(vocabs["char"]),
                    LemmaDictionary.from_json(vocabs["dict"]), vocabs["trained"])
        model.params.load_arrays(arrays)
        return model


def train_lemmatizer(corpus: list[Document], config: LemmatizerConfig | None = None,
                     log=None) -> LemmatizerModel:
    """Joint loss: edit-classifier CE plus teacher-forced seq2seq CE."""
    config = config or LemmatizerConfig()
    pairs = sorted(set(lemma_pairs(corpus)), key=lambda p: (p[0], p[1] or "", p[2]))
    dictionary = build_lemma_dict(corpus)
    chars = {c for form, _, lemma in pairs for c in form + lemma}
    upos_symbols = sorted({_upos_symbol(u) for _, u, _ in pairs} | {_upos_symbol(None)})
    vocab = Vocab.build(sorted(chars) + upos_symbols, specials=(UNK, BOS, EOS))
    model = LemmatizerModel(config, vocab, dictionary,
                            trained=bool(pairs) and config.epochs > 0)
    if not model.trained:
        return model
    optimizer = Adam(model.params.all(), lr=config.lr)
    for epoch in range(config.epochs):
        total = 0.0
        for form, upos, lemma in pairs:
            enc_states, summary = model.encode_form(form, upos)
            loss = model.seq2seq.loss(enc_states, summary, list(lemma))
            edit_logits = ad.reshape(model.edit_head(summary), (3,))
            loss = ad.add(loss, ad.cross_entropy(edit_logits, edit_label(form, lemma)))
            loss.backward()
            optimizer.step()
            total += loss.item()
        if log:
            log(f"lemmatizer epoch {epoch}: loss {total / len(pairs):.4f}")
    return model


def lemmatize(dictionary: LemmaDictionary, model: LemmatizerModel | None,
              form: str, upos=None) -> str:
    """Lemma for one word; total (dictionary, shortcut, decode, then identity)."""
    if not form:
        raise ValueError("empty form")
    hit = dictionary.lookup(form, upos)
    if hit is not None:
        return hit
    if model is None or not model.trained:
        return form
    enc_states, summary = model.encode_form(form, upos)
    verdict = model.classify_edit(summary)
    if verdict == IDENTITY:
        return form
    if verdict == LOWERCASE:
        return form.lower()
    symbols, terminated = model.seq2seq.greedy(
        enc_states, summary, max(20, 2 * len(form)))
    lemma = "".join(symbols)
    return lemma if terminated and lemma else form


def lemmatize_document(model: LemmatizerModel, doc: Document) -> Document:
    sentences = []
    for sentence in doc.sentences:
        words = tuple(
            replace(word, lemma=lemmatize(model.dictionary, model, word.form, word.upos))
            for word in sentence.words)
        sentences.append(replace(sentence, words=words))
    return Document(text=doc.text, sentences=tuple(sentences))
