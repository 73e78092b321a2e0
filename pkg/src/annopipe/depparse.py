"""Deep biaffine dependency parsing with single-root MST decoding.

Words embed as form + UPOS + feature-bundle vectors into a BiLSTM; separate
head/dependent projections feed a bilinear arc scorer over all pairs and a
per-relation biaffine label scorer.  Two auxiliary training objectives shape
the encoder: predicting whether a dependent follows its head (linearization)
and the bucketed linear distance between them.  Both are losses only; decoding
stays exact MST over the arc scores.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .doc import Document, MorphFeatures, ROOT_DEPREL
from .mst import decode_mst
from .nn import autodiff as ad
from .nn.autodiff import Tensor
from .nn.layers import (
    Biaffine,
    BiLSTM,
    Embedding,
    Linear,
    PairBilinear,
    ParamSet,
    transpose,
)
from .nn.modelio import load_model, save_model
from .nn.optim import Adam
from .nn.vocab import UNK, Vocab

NEG = -1e30

# |d - h| buckets: 1, 2, 3, 4, 5-8, 9+
_BUCKET_EDGES = (1, 2, 3, 4, 8)


def distance_bucket(distance: int) -> int:
    for i, edge in enumerate(_BUCKET_EDGES):
        if distance <= edge:
            return i if distance < 5 else 4
    return 5


@dataclass
class ParserConfig:
    word_dim: int = 24
    upos_dim: int = 12
    feats_dim: int = 8
    hidden: int = 32
    arc_dim: int = 24
    label_dim: int = 16
    aux_weight: float = 0.1
    epochs: int = 60
    lr: float = 0.002
    dropout: float = 0.33
    seed: int = 29

    def to_json(self):
        return dict(self.__dict__)

    @classmethod
    def from_json(cls, data):
        return cls(**data)


@dataclass
class ArcScoreMatrix:
    """Dense decoder input: arc[h][d] over nodes 0..n, labels[h][d-1][r]."""

    arc: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        m = self.arc.shape[0]
        if self.arc.shape != (m, m) or self.labels.shape[:2] != (m, m - 1):
            raise ValueError("inconsistent score matrix shapes")


def _feats_key(feats: MorphFeatures | None) -> str:
    return str(feats) if feats else "_"


class ParserModel:
    KIND = "parser"

    def __init__(self, config: ParserConfig, word_vocab: Vocab, upos_vocab: Vocab,
                 feats_vocab: Vocab, rel_vocab: Vocab):
        self.config = config
        self.word_vocab = word_vocab
        self.upos_vocab = upos_vocab
        self.feats_vocab = feats_vocab
        self.rel_vocab = rel_vocab
        self.params = ParamSet()
        rng = np.random.default_rng(config.seed)
        c = config
        self.word_embed = Embedding(self.params, rng, "word_embed", len(word_vocab), c.word_dim)
        self.upos_embed = Embedding(self.params, rng, "upos_embed", len(upos_vocab), c.upos_dim)
        self.feats_embed = Embedding(self.params, rng, "feats_embed", len(feats_vocab), c.feats_dim)
        enc_in = c.word_dim + c.upos_dim + c.feats_dim
        self.encoder = BiLSTM(self.params, rng, "encoder", enc_in, c.hidden)
        state_dim = 2 * c.hidden
        self.root_state = self.params.new("root_state", rng.uniform(-0.1, 0.1, (1, state_dim)))
        self.arc_head = Linear(self.params, rng, "arc_head", state_dim, c.arc_dim)
        self.arc_dep = Linear(self.params, rng, "arc_dep", state_dim, c.arc_dim)
        self.label_head = Linear(self.params, rng, "label_head", state_dim, c.label_dim)
        self.label_dep = Linear(self.params, rng, "label_dep", state_dim, c.label_dim)
        self.arc_scorer = PairBilinear(self.params, rng, "arc_scorer", c.arc_dim, c.arc_dim)
        self.label_scorer = Biaffine(self.params, rng, "label_scorer",
                                     c.label_dim, c.label_dim, len(rel_vocab))
        self.lin_scorer = Biaffine(self.params, rng, "lin_scorer", c.arc_dim, c.arc_dim, 2)
        self.dist_scorer = Biaffine(self.params, rng, "dist_scorer", c.arc_dim, c.arc_dim, 6)

    def encode(self, rows: list[tuple], rng=None, train=False):
        """rows: (form, upos, feats).  Returns projections over nodes 0..n."""
        if not rows:
            raise ValueError("empty sentence")
        word_ids = [self.word_vocab.encode(f) for f, _, _ in rows]
        upos_ids = [self.upos_vocab.encode(u or UNK) for _, u, _ in rows]
        feats_ids = [self.feats_vocab.encode(_feats_key(fe)) for _, _, fe in rows]
        stacked = ad.concat([
            self.word_embed(word_ids),
            self.upos_embed(upos_ids),
            self.feats_embed(feats_ids),
        ], axis=1)
        if train and self.config.dropout > 0:
            stacked = ad.dropout(stacked, self.config.dropout, rng, train=True)
        states = self.encoder(stacked)
        with_root = ad.concat([self.root_state, states], axis=0)  # node 0 first
        # tanh projections: smooth, so finite-difference checks hold everywhere
        head_repr = ad.tanh(self.arc_head(with_root))     # (n+1, arc_dim)
        dep_repr = ad.tanh(self.arc_dep(states))          # (n, arc_dim)
        label_head = ad.tanh(self.label_head(with_root))
        label_dep = ad.tanh(self.label_dep(states))
        return head_repr, dep_repr, label_head, label_dep

    def arc_logits(self, head_repr, dep_repr) -> Tensor:
        """(n+1, n) pairwise scores with self-arcs masked to a large negative."""
        raw = self.arc_scorer(head_repr, dep_repr)
        n = dep_repr.data.shape[0]
        mask = np.zeros((n + 1, n))
        for d in range(1, n + 1):
            mask[d, d - 1] = NEG
        return ad.add(raw, Tensor(mask))

    def save(self, path):
        save_model(
            path, self.KIND,
            config=self.config.to_json(),
            vocabs={"word": self.word_vocab.to_json(), "upos": self.upos_vocab.to_json(),
                    "feats": self.feats_vocab.to_json(), "rel": self.rel_vocab.to_json()},
            arrays=self.params.state_arrays(),
        )

    @classmethod
    def load(cls, path) -> "ParserModel":
        _, config, vocabs, arrays, _ = load_model(path, expect_kind=cls.KIND)
        model = cls(ParserConfig.from_json(config), Vocab.from_json(vocabs["word"]),
                    Vocab.from_json(vocabs["upos"]), Vocab.from_json(vocabs["feats"]),
                    Vocab.from_json(vocabs["rel"]))
        model.params.load_arrays(arrays)
        return model


def aux_losses(model: ParserModel, head_repr, dep_repr, gold_heads: list[int]) -> Tensor:
    """Linearization (does the dependent follow its head?) and bucketed
    distance cross-entropies, summed over gold arcs."""
    arc_dim = model.config.arc_dim
    total = None
    for d, h in enumerate(gold_heads, start=1):
        h_vec = ad.reshape(ad.narrow(head_repr, 0, h, 1), (arc_dim,))
        d_vec = ad.reshape(ad.narrow(dep_repr, 0, d - 1, 1), (arc_dim,))
        lin_target = 1 if h < d else 0  # 1: dependent after head
        lin = ad.cross_entropy(model.lin_scorer(h_vec, d_vec), lin_target)
        dist = ad.cross_entropy(model.dist_scorer(h_vec, d_vec),
                                distance_bucket(abs(d - h)))
        piece = ad.add(lin, dist)
        total = piece if total is None else ad.add(total, piece)
    return total


def sentence_loss(model: ParserModel, rows: list[tuple], gold_heads: list[int],
                  gold_rels: list[str], rng=None, train=False) -> Tensor:
    """Arc CE (per dependent over heads) + label CE + weighted aux losses."""
    head_repr, dep_repr, label_head, label_dep = model.encode(rows, rng, train)
    logits = model.arc_logits(head_repr, dep_repr)  # (n+1, n)
    arc_loss = ad.cross_entropy(transpose(logits), gold_heads)
    label_dim = model.config.label_dim
    label_loss = None
    for d, (h, rel) in enumerate(zip(gold_heads, gold_rels), start=1):
        h_vec = ad.reshape(ad.narrow(label_head, 0, h, 1), (label_dim,))
        d_vec = ad.reshape(ad.narrow(label_dep, 0, d - 1, 1), (label_dim,))
        piece = ad.cross_entropy(model.label_scorer(h_vec, d_vec),
                                 model.rel_vocab.encode(rel))
        label_loss = piece if label_loss is None else ad.add(label_loss, piece)
    loss = ad.add(arc_loss, label_loss)
    if model.config.aux_weight > 0:
        loss = ad.add(loss, ad.scale(
            aux_losses(model, head_repr, dep_repr, gold_heads), model.config.aux_weight))
    return loss


def score_arcs(model: ParserModel, rows: list[tuple]) -> ArcScoreMatrix:
    """Dense arc and label scores for decoding (no gradients kept)."""
    head_repr, dep_repr, label_head, label_dep = model.encode(rows)
    n = len(rows)
    arc = np.full((n + 1, n + 1), -np.inf)
    arc[:, 1:] = model.arc_logits(head_repr, dep_repr).data
    for d in range(1, n + 1):
        arc[d, d] = -np.inf
    # label scores via the biaffine parameters directly (numpy, all pairs)
    lh = label_head.data        # (n+1, L)
    ld = label_dep.data         # (n, L)
    U = model.label_scorer.U.data      # (R, L, L)
    W = model.label_scorer.W.data      # (2L, R)
    b = model.label_scorer.b.data      # (R,)
    bilinear = np.einsum("hl,rlm,dm->hdr", lh, U, ld)
    linear = lh @ W[:lh.shape[1]] + b  # (n+1, R)
    linear = linear[:, None, :] + (ld @ W[lh.shape[1]:])[None, :, :]
    labels = bilinear + linear
    return ArcScoreMatrix(arc=arc, labels=labels)


def assign_labels(label_scores: np.ndarray, heads: list[int], rel_vocab: Vocab) -> list[str]:
    """argmax relation per (head, dependent); head 0 forces the root label,
    other heads exclude it."""
    root_index = rel_vocab.encode(ROOT_DEPREL) if ROOT_DEPREL in rel_vocab else None
    rels = []
    for d, h in enumerate(heads, start=1):
        if h == 0:
            rels.append(ROOT_DEPREL)
            continue
        scores = label_scores[h, d - 1].copy()
        if root_index is not None:
            scores[root_index] = -np.inf
        rels.append(rel_vocab.decode(int(np.argmax(scores))))
    return rels


def parse_sentence(model: ParserModel, rows: list[tuple]) -> tuple[list[int], list[str]]:
    matrix = score_arcs(model, rows)
    heads = decode_mst(matrix.arc)
    return heads, assign_labels(matrix.labels, heads, model.rel_vocab)


def train_parser(corpus: list[Document], config: ParserConfig | None = None,
                 log=None) -> ParserModel:
    config = config or ParserConfig()
    sentences = [s for doc in corpus for s in doc.sentences
                 if s.words and all(w.head is not None for w in s.words)]
    if not sentences:
        raise ValueError("no fully head-annotated sentences in training corpus")
    rows_of = lambda s: [(w.form, w.upos, w.feats) for w in s.words]
    word_vocab = Vocab.build((w.form for s in sentences for w in s.words))
    upos_vocab = Vocab.build((w.upos or UNK for s in sentences for w in s.words))
    feats_vocab = Vocab.build((_feats_key(w.feats) for s in sentences for w in s.words))
    rel_vocab = Vocab.build((w.deprel for s in sentences for w in s.words),
                            specials=(), unk=None)
    model = ParserModel(config, word_vocab, upos_vocab, feats_vocab, rel_vocab)
    optimizer = Adam(model.params.all(), lr=config.lr)
    rng = np.random.default_rng(config.seed + 1)
    for epoch in range(config.epochs):
        total = 0.0
        count = 0
        for sentence in sentences:
            gold_heads = [w.head for w in sentence.words]
            gold_rels = [w.deprel for w in sentence.words]
            loss = sentence_loss(model, rows_of(sentence), gold_heads, gold_rels,
                                 rng, train=True)
            loss.backward()
            optimizer.step()
            total += loss.item()
            count += len(sentence.words)
        if log:
            log(f"parser epoch {epoch}: loss/word {total / max(count, 1):.4f}")
    return model


def parse_document(model: ParserModel, doc: Document) -> Document:
    sentences = []
    for sentence in doc.sentences:
        if not sentence.words:
            sentences.append(sentence)
            continue
        rows = [(w.form, w.upos, w.feats) for w in sentence.words]
        heads, rels = parse_sentence(model, rows)
        words = tuple(
            replace(word, head=h, deprel=r)
            for word, h, r in zip(sentence.words, heads, rels))
        sentences.append(replace(sentence, words=words))
    return Document(text=doc.text, sentences=tuple(sentences))
