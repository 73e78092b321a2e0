"""UPOS / XPOS / UFeats tagging with UPOS-conditioned prediction.

One sentence BiLSTM feeds three kinds of heads: a plain softmax for UPOS,
and biaffine heads for XPOS and for each morphological attribute, each
combining the word state with an embedding of the UPOS tag (gold during
training, predicted at inference).  UFeats is factored per attribute with an
explicit NONE value per inventory.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .doc import Document, MorphFeatures, Sentence
from .nn import autodiff as ad
from .nn.autodiff import Tensor
from .nn.layers import Biaffine, BiLSTM, Embedding, Linear, ParamSet
from .nn.modelio import load_model, save_model
from .nn.optim import Adam
from .nn.vocab import UNK, Vocab

NONE_VALUE = "<none>"


@dataclass
class TaggerConfig:
    word_dim: int = 24
    char_dim: int = 12
    char_hidden: int = 12
    hidden: int = 32
    upos_dim: int = 12
    epochs: int = 40
    lr: float = 0.002
    dropout: float = 0.33
    seed: int = 23
    # CoNLL-U cannot distinguish "no features" from "unannotated"; treating
    # blank FEATS as gold-empty lets the model learn NONE for e.g. punctuation.
    train_empty_feats: bool = True

    def to_json(self):
        return dict(self.__dict__)

    @classmethod
    def from_json(cls, data):
        return cls(**data)


def _feats_value(feats: MorphFeatures | None, attr: str) -> str:
    if feats is None:
        return NONE_VALUE
    values = feats.get(attr)
    return ",".join(values) if values else NONE_VALUE


class TaggerModel:
    KIND = "tagger"

    def __init__(self, config: TaggerConfig, word_vocab: Vocab, char_vocab: Vocab,
                 upos_vocab: Vocab, xpos_vocab: Vocab | None,
                 feat_vocabs: dict[str, Vocab]):
        self.config = config
        self.word_vocab = word_vocab
        self.char_vocab = char_vocab
        self.upos_vocab = upos_vocab
        self.xpos_vocab = xpos_vocab
        self.feat_vocabs = dict(sorted(feat_vocabs.items()))
        self.params = ParamSet()
        rng = np.random.default_rng(config.seed)
        c = config
        self.word_embed = Embedding(self.params, rng, "word_embed",
                                    len(word_vocab), c.word_dim)
        self.char_encoder = BiLSTM(self.params, rng, "char_enc", c.char_dim, c.char_hidden)
        self.char_embed = Embedding(self.params, rng, "char_embed",
                                    len(char_vocab), c.char_dim)
        enc_in = c.word_dim + 2 * c.char_hidden
        self.encoder = BiLSTM(self.params, rng, "encoder", enc_in, c.hidden)
        state_dim = 2 * c.hidden
        self.upos_head = Linear(self.params, rng, "upos_head", state_dim, len(upos_vocab))
        self.upos_embed = Embedding(self.params, rng, "upos_embed",
                                    len(upos_vocab), c.upos_dim)
        self.xpos_head = (Biaffine(self.params, rng, "xpos_head", state_dim,
                                   c.upos_dim, len(xpos_vocab))
                          if xpos_vocab is not None else None)
        self.feat_heads = {
            attr: Biaffine(self.params, rng, f"feat_head.{attr}", state_dim,
                           c.upos_dim, len(vocab))
            for attr, vocab in self.feat_vocabs.items()
        }

    def _char_summary(self, form: str) -> Tensor:
        states = self.char_encoder(self.char_embed(self.char_vocab.encode_all(list(form))))
        n = states.data.shape[0]
        h = self.config.char_hidden
        fwd_last = ad.narrow(ad.narrow(states, 0, n - 1, 1), 1, 0, h)
        bwd_first = ad.narrow(ad.narrow(states, 0, 0, 1), 1, h, h)
        return ad.concat([fwd_last, bwd_first], axis=1)

    def encode(self, forms: list[str], rng=None, train=False) -> Tensor:
        if not forms:
            raise ValueError("empty sentence")
        rows = []
        for form in forms:
            word = self.word_embed([self.word_vocab.encode(form)])
            rows.append(ad.concat([word, self._char_summary(form)], axis=1))
        stacked = ad.concat(rows, axis=0)
        if train and self.config.dropout > 0:
            stacked = ad.dropout(stacked, self.config.dropout, rng, train=True)
        return self.encoder(stacked)

    def conditioned_logits(self, state: Tensor, upos_index: int):
        """XPOS and per-attribute logits for one word state, conditioned on a
        UPOS tag through the biaffine heads."""
        flat = ad.reshape(state, (state.data.shape[1],))
        upos_vec = ad.reshape(self.upos_embed([upos_index]), (self.config.upos_dim,))
        xpos = self.xpos_head(flat, upos_vec) if self.xpos_head else None
        feats = {attr: head(flat, upos_vec) for attr, head in self.feat_heads.items()}
        return xpos, feats

    def save(self, path):
        save_model(
            path, self.KIND,
            config=self.config.to_json(),
            vocabs={
                "word": self.word_vocab.to_json(),
                "char": self.char_vocab.to_json(),
                "upos": self.upos_vocab.to_json(),
                "xpos": self.xpos_vocab.to_json() if self.xpos_vocab else None,
                "feats": {a: v.to_json() for a, v in self.feat_vocabs.items()},
            },
            arrays=self.params.state_arrays(),
        )

    @classmethod
    def load(cls, path) -> "TaggerModel":
        _, config, vocabs, arrays, _ = load_model(path, expect_kind=cls.KIND)
        model = cls(
            TaggerConfig.from_json(config),
            Vocab.from_json(vocabs["word"]),
            Vocab.from_json(vocabs["char"]),
            Vocab.from_json(vocabs["upos"]),
            Vocab.from_json(vocabs["xpos"]) if vocabs["xpos"] else None,
            {a: Vocab.from_json(v) for a, v in vocabs["feats"].items()},
        )
        model.params.load_arrays(arrays)
        return model


def sentence_loss(model: TaggerModel, forms: list[str], gold: list[tuple],
                  rng=None, train=False) -> Tensor:
    """Joint loss: UPOS CE + XPOS CE + per-attribute UFeats CE.

    ``gold`` rows are (upos, xpos, feats); unannotated xpos/feats are skipped.
    Conditioning uses the gold UPOS (teacher forcing).
    """
    states = model.encode(forms, rng, train)
    upos_gold = [model.upos_vocab.encode(u) for u, _, _ in gold]
    loss = ad.cross_entropy(model.upos_head(states), upos_gold)
    for i, (upos, xpos, feats) in enumerate(gold):
        state = ad.narrow(states, 0, i, 1)
        xpos_logits, feat_logits = model.conditioned_logits(
            state, model.upos_vocab.encode(upos))
        if xpos is not None and model.xpos_head is not None and xpos in model.xpos_vocab:
            loss = ad.add(loss, ad.cross_entropy(xpos_logits, model.xpos_vocab.encode(xpos)))
        if feats is not None or model.config.train_empty_feats:
            for attr, logits in feat_logits.items():
                value = _feats_value(feats, attr)
                vocab = model.feat_vocabs[attr]
                if value in vocab:
                    loss = ad.add(loss, ad.cross_entropy(logits, vocab.encode(value)))
    return loss


def train_tagger(corpus: list[Document], config: TaggerConfig | None = None,
                 log=None) -> TaggerModel:
    config = config or TaggerConfig()
    sentences = [s for doc in corpus for s in doc.sentences]
    rows = [(w.form, (w.upos, w.xpos, w.feats))
            for s in sentences for w in s.words if w.upos is not None]
    if not rows:
        raise ValueError("no gold UPOS in training corpus")
    word_vocab = Vocab.build((f for f, _ in rows))
    char_vocab = Vocab.build((c for f, _ in rows for c in f))
    upos_vocab = Vocab.build((g[0] for _, g in rows), specials=(), unk=None)
    xpos_values = sorted({g[1] for _, g in rows if g[1] is not None})
    xpos_vocab = Vocab(xpos_values) if xpos_values else None
    attrs: dict[str, set] = {}
    for _, (_, _, feats) in rows:
        if feats is not None:
            for attr, values in feats.items:
                attrs.setdefault(attr, set()).add(",".join(values))
    feat_vocabs = {attr: Vocab([NONE_VALUE] + sorted(values), unk=None)
                   for attr, values in attrs.items()}
    model = TaggerModel(config, word_vocab, char_vocab, upos_vocab, xpos_vocab, feat_vocabs)
    optimizer = Adam(model.params.all(), lr=config.lr)
    rng = np.random.default_rng(config.seed + 1)
    for epoch in range(config.epochs):
        total = 0.0
        count = 0
        for sentence in sentences:
            tagged = [w for w in sentence.words if w.upos is not None]
            if not tagged:
                continue
            forms = [w.form for w in tagged]
            gold = [(w.upos, w.xpos, w.feats) for w in tagged]
            loss = sentence_loss(model, forms, gold, rng, train=True)
            loss.backward()
            optimizer.step()
            total += loss.item()
            count += len(forms)
        if log:
            log(f"tagger epoch {epoch}: loss/word {total / max(count, 1):.4f}")
    return model


def tag(model: TaggerModel, forms: list[str]) -> list[tuple]:
    """(upos, xpos, feats) per word; predicted UPOS feeds the conditioning."""
    states = model.encode(forms)
    upos_ids = [int(i) for i in np.argmax(model.upos_head(states).data, axis=1)]
    out = []
    for i, upos_id in enumerate(upos_ids):
        state = ad.narrow(states, 0, i, 1)
        xpos_logits, feat_logits = model.conditioned_logits(state, upos_id)
        xpos = (model.xpos_vocab.decode(int(np.argmax(xpos_logits.data)))
                if xpos_logits is not None else None)
        mapping = {}
        for attr, logits in feat_logits.items():
            value = model.feat_vocabs[attr].decode(int(np.argmax(logits.data)))
            if value != NONE_VALUE:
                mapping[attr] = value.split(",")
        feats = MorphFeatures.from_dict(mapping) or None
        out.append((model.upos_vocab.decode(upos_id), xpos, feats))
    return out


def tag_document(model: TaggerModel, doc: Document) -> Document:
    sentences = []
    for sentence in doc.sentences:
        if not sentence.words:
            sentences.append(sentence)
            continue
        tagged = tag(model, [w.form for w in sentence.words])
        words = tuple(
            replace(word, upos=u, xpos=x, feats=f)
            for word, (u, x, f) in zip(sentence.words, tagged))
        sentences.append(replace(sentence, words=words))
    return Document(text=doc.text, sentences=tuple(sentences))
