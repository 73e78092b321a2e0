"""Named entity recognition: char-LM features, BiLSTM encoder, CRF decoding.

Word representations concatenate, in fixed order: the forward LM state just
after the word, the backward LM state just before it, and a trainable word
embedding.  The language models are frozen features.  Tags use the BIOES
scheme internally (converted from BIO input); decoding is Viterbi followed
by deterministic repair and span extraction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .bio import bio_to_bioes, bio_to_entities
from .charlm import BACKWARD, FORWARD, CharLM, CharLMConfig
from .crf import TagLattice, crf_nll, crf_viterbi
from .doc import Document, Entity, Sentence, Word
from .nn import autodiff as ad
from .nn.autodiff import Tensor
from .nn.layers import BiLSTM, Embedding, Linear, ParamSet
from .nn.modelio import load_model, save_model
from .nn.optim import Adam
from .nn.vocab import UNK, Vocab


@dataclass
class NERConfig:
    word_dim: int = 20
    hidden: int = 24
    epochs: int = 40
    lr: float = 0.003
    dropout: float = 0.33
    seed: int = 41

    def to_json(self):
        return dict(self.__dict__)

    @classmethod
    def from_json(cls, data):
        return cls(**data)


def sentence_chars(forms: list[str]) -> tuple[str, list[tuple[int, int]]]:
    """Join forms with single spaces, padded so every word has a neighbor
    character on both sides; returns (chars, per-word end-exclusive spans)."""
    chars = " "
    spans = []
    for i, form in enumerate(forms):
        if i:
            chars += " "
        spans.append((len(chars), len(chars) + len(form)))
        chars += form
    chars += " "
    return chars, spans


def contextual_embed(fwd: CharLM, bwd: CharLM, chars: str,
                     spans: list[tuple[int, int]],
                     word_vectors: np.ndarray | None = None) -> np.ndarray:
    """Per-word features: [fwd state after the word; bwd state before it;
    word embedding], concatenated in that fixed order."""
    for start, end in spans:
        if not (1 <= start <= end < len(chars)):
            raise ValueError(f"word span ({start}, {end}) out of range for the sentence")
    fwd_states = fwd.states(chars)
    bwd_states = bwd.states(chars)
    rows = []
    for i, (start, end) in enumerate(spans):
        parts = [fwd_states[end], bwd_states[start - 1]]
        if word_vectors is not None:
            parts.append(word_vectors[i])
        rows.append(np.concatenate(parts))
    return np.stack(rows)


class NERModel:
    KIND = "ner"

    def __init__(self, config: NERConfig, word_vocab: Vocab, tag_vocab: Vocab,
                 fwd_lm: CharLM, bwd_lm: CharLM, charlm_hashes: dict | None = None):
        self.config = config
        self.word_vocab = word_vocab
        self.tag_vocab = tag_vocab  # BIOES inventory
        self.fwd_lm = fwd_lm
        self.bwd_lm = bwd_lm
        self.charlm_hashes = charlm_hashes or {}
        self.params = ParamSet()
        rng = np.random.default_rng(config.seed)
        k = len(tag_vocab)
        feat_dim = fwd_lm.config.hidden + bwd_lm.config.hidden + config.word_dim
        self.word_embed = Embedding(self.params, rng, "word_embed",
                                    len(word_vocab), config.word_dim)
        self.encoder = BiLSTM(self.params, rng, "encoder", feat_dim, config.hidden)
        self.emit = Linear(self.params, rng, "emit", 2 * config.hidden, k)
        self.transitions = self.params.new("transitions", rng.uniform(-0.1, 0.1, (k, k)))
        self.begin = self.params.new("begin", rng.uniform(-0.1, 0.1, k))
        self.end = self.params.new("end", rng.uniform(-0.1, 0.1, k))

    def lattice(self, forms: list[str], rng=None, train=False) -> TagLattice:
        chars, spans = sentence_chars(forms)
        frozen = contextual_embed(self.fwd_lm, self.bwd_lm, chars, spans)
        words = self.word_embed([self.word_vocab.encode(f) for f in forms])
        features = ad.concat([Tensor(frozen), words], axis=1)
        if train and self.config.dropout > 0:
            features = ad.dropout(features, self.config.dropout, rng, train=True)
        emissions = self.emit(self.encoder(features))
        return TagLattice(emissions, self.transitions, self.begin, self.end)

    def predict_tags(self, forms: list[str]) -> list[str]:
        if not forms:
            return []
        path = crf_viterbi(self.lattice(forms))
        return [self.tag_vocab.decode(i) for i in path]

    def save(self, path):
        arrays = {f"ner.{k}": v for k, v in self.params.state_arrays().items()}
        arrays.update({f"fwd.{k}": v for k, v in self.fwd_lm.params.state_arrays().items()})
        arrays.update({f"bwd.{k}": v for k, v in self.bwd_lm.params.state_arrays().items()})
        save_model(
            path, self.KIND,
            config=self.config.to_json(),
            vocabs={
                "word": self.word_vocab.to_json(),
                "tag": self.tag_vocab.to_json(),
                "fwd_config": self.fwd_lm.config.to_json(),
                "fwd_char": self.fwd_lm.vocab.to_json(),
                "bwd_config": self.bwd_lm.config.to_json(),
                "bwd_char": self.bwd_lm.vocab.to_json(),
            },
            arrays=arrays,
            meta={"charlm_hashes": self.charlm_hashes},
        )

    @classmethod
    def load(cls, path) -> "NERModel":
        _, config, vocabs, arrays, meta = load_model(path, expect_kind=cls.KIND)
        fwd = CharLM(CharLMConfig.from_json(vocabs["fwd_config"]),
                     Vocab.from_json(vocabs["fwd_char"]), FORWARD)
        bwd = CharLM(CharLMConfig.from_json(vocabs["bwd_config"]),
                     Vocab.from_json(vocabs["bwd_char"]), BACKWARD)
        fwd.params.load_arrays({k[4:]: v for k, v in arrays.items() if k.startswith("fwd.")})
        bwd.params.load_arrays({k[4:]: v for k, v in arrays.items() if k.startswith("bwd.")})
        model = cls(NERConfig.from_json(config), Vocab.from_json(vocabs["word"]),
                    Vocab.from_json(vocabs["tag"]), fwd, bwd,
                    meta.get("charlm_hashes", {}))
        model.params.load_arrays({k[4:]: v for k, v in arrays.items() if k.startswith("ner.")})
        return model


def train_ner(sentences: list[tuple[list[str], list[str]]], fwd_lm: CharLM,
              bwd_lm: CharLM, config: NERConfig | None = None,
              charlm_hashes: dict | None = None, log=None) -> NERModel:
    """Maximize CRF log likelihood of BIOES-converted gold tags.

    ``sentences`` are (forms, BIO-or-BIOES tags) pairs; char LMs stay frozen.
    """
    config = config or NERConfig()
    if not sentences:
        raise ValueError("empty training corpus")
    converted = [(forms, bio_to_bioes(tags)) for forms, tags in sentences]
    tag_vocab = Vocab.build((t for _, tags in converted for t in tags),
                            specials=(), unk=None)
    word_vocab = Vocab.build((f for forms, _ in converted for f in forms))
    model = NERModel(config, word_vocab, tag_vocab, fwd_lm, bwd_lm, charlm_hashes)
    optimizer = Adam(model.params.all(), lr=config.lr)
    rng = np.random.default_rng(config.seed + 1)
    for epoch in range(config.epochs):
        total = 0.0
        for forms, tags in converted:
            gold = [tag_vocab.encode(t) for t in tags]
            loss = crf_nll(model.lattice(forms, rng, train=True), gold)
            loss.backward()
            optimizer.step()
            total += loss.item()
        if log:
            log(f"ner epoch {epoch}: nll/sentence {total / len(converted):.4f}")
    return model


def predict_entities(model: NERModel, sentence: Sentence,
                     doc_text: str) -> tuple[Entity, ...]:
    tags = model.predict_tags([w.form for w in sentence.words])
    return tuple(bio_to_entities(sentence.words, tags, sentence, doc_text))


def tag_document(model: NERModel, doc: Document) -> Document:
    sentences = []
    for sentence in doc.sentences:
        if not sentence.words:
            sentences.append(sentence)
            continue
        entities = predict_entities(model, sentence, doc.text)
        sentences.append(replace(sentence, entities=entities))
    return Document(text=doc.text, sentences=tuple(sentences))
