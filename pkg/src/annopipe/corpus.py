"""Document surgery: re-offsetting, concatenation, deterministic dev splits."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .doc import Document, Entity, Sentence, Token

DEV_SPLIT_SEED = 1234


def shift_sentence(sentence: Sentence, delta: int) -> Sentence:
    tokens = tuple(replace(t, start_char=t.start_char + delta,
                           end_char=t.end_char + delta) for t in sentence.tokens)
    entities = tuple(replace(e, start_char=e.start_char + delta,
                             end_char=e.end_char + delta) for e in sentence.entities)
    return replace(sentence, tokens=tokens, entities=entities)


def document_from_sentences(pairs: list[tuple[str, Sentence]]) -> Document:
    """Lay out (sentence text, sentence) pairs left to right, one space apart."""
    text = ""
    sentences = []
    for sent_text, sentence in pairs:
        if text:
            text += " "
        delta = len(text) - sentence.start_char
        sentences.append(shift_sentence(sentence, delta))
        text += sent_text
    return Document(text=text, sentences=tuple(sentences))


def sentence_pairs(doc: Document):
    for sentence in doc.sentences:
        yield doc.text[sentence.start_char:sentence.end_char], sentence


def concat_documents(docs: list[Document]) -> Document:
    """One document holding every sentence (for corpus-level evaluation)."""
    pairs = [pair for doc in docs for pair in sentence_pairs(doc)]
    return document_from_sentences(pairs)


def split_dev(docs: list[Document], fraction: float = 0.2,
              seed: int = DEV_SPLIT_SEED) -> tuple[list[Document], list[Document]]:
    """Hold out a deterministic fraction of sentences as development data.

    Training documents keep their surviving sentences grouped (re-laid out);
    each held-out sentence becomes its own document.
    """
    indexed = [(di, si) for di, doc in enumerate(docs)
               for si in range(len(doc.sentences))]
    if len(indexed) < 2 or fraction <= 0:
        return docs, []
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(indexed))
    n_dev = max(1, int(round(len(indexed) * fraction)))
    n_dev = min(n_dev, len(indexed) - 1)  # never empty the training side
    dev_keys = {tuple(indexed[i]) for i in order[:n_dev]}

    train_docs = []
    dev_docs = []
    for di, doc in enumerate(docs):
        kept = []
        for si, pair in enumerate(sentence_pairs(doc)):
            if (di, si) in dev_keys:
                dev_docs.append(document_from_sentences([pair]))
            else:
                kept.append(pair)
        if kept:
            train_docs.append(document_from_sentences(kept))
    return train_docs, dev_docs
