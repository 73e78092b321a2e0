"""BIO / BIOES column files and span decoding for entity annotations."""

from __future__ import annotations

import re
from typing import Optional, Sequence

from .doc import Document, Entity, Sentence, Token, Word

_TAG = re.compile(r"^(O|[BIES]-\S+)$")


class BioError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def parse_bio(text: str) -> list[tuple[list[str], list[str]]]:
    """Parse two-column (form, tag) files into per-sentence (forms, tags).

    Accepts both the BIO and BIOES tag alphabets; blank lines separate
    sentences.
    """
    sentences: list[tuple[list[str], list[str]]] = []
    forms: list[str] = []
    tags: list[str] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip()
        if not line:
            if forms:
                sentences.append((forms, tags))
                forms, tags = [], []
            continue
        parts = line.split()
        if len(parts) != 2:
            raise BioError(line_no, f"expected two columns, got {len(parts)}")
        form, tag = parts
        if not _TAG.match(tag):
            raise BioError(line_no, f"bad tag {tag!r}")
        forms.append(form)
        tags.append(tag)
    if forms:
        sentences.append((forms, tags))
    return sentences


def serialize_bio(sentences: Sequence[tuple[Sequence[str], Sequence[str]]]) -> str:
    blocks = []
    for forms, tags in sentences:
        blocks.append("\n".join(f"{f}\t{t}" for f, t in zip(forms, tags)))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def bio_to_bioes(tags: Sequence[str]) -> list[str]:
    """Convert BIO tags to BIOES; already-BIOES input passes through."""
    out = []
    for i, tag in enumerate(tags):
        if tag == "O" or tag[0] in ("S", "E"):
            out.append(tag)
            continue
        kind, etype = tag.split("-", 1)
        nxt = tags[i + 1] if i + 1 < len(tags) else "O"
        continues = nxt.startswith("I-") and nxt[2:] == etype
        if kind == "B":
            out.append(("B-" if continues else "S-") + etype)
        else:  # I
            out.append(("I-" if continues else "E-") + etype)
    return out


def bioes_to_bio(tags: Sequence[str]) -> list[str]:
    out = []
    for tag in tags:
        if tag == "O":
            out.append(tag)
        else:
            kind, etype = tag.split("-", 1)
            out.append({"S": "B", "B": "B", "E": "I", "I": "I"}[kind] + "-" + etype)
    return out


def repair_tags(tags: Sequence[str]) -> list[str]:
    """Left-to-right repair of malformed sequences.

    ``I-X`` or ``E-X`` without an open ``X`` span becomes ``B-X`` / ``S-X``.
    Valid sequences pass through unchanged (repair is idempotent).
    """
    out = []
    open_type: Optional[str] = None
    for tag in tags:
        if tag == "O":
            out.append(tag)
            open_type = None
            continue
        kind, etype = tag.split("-", 1)
        if kind in ("I", "E") and open_type != etype:
            kind = {"I": "B", "E": "S"}[kind]
        out.append(f"{kind}-{etype}")
        open_type = etype if kind in ("B", "I") else None
    return out


def _spans(tags: Sequence[str]) -> list[tuple[int, int, str]]:
    """Maximal spans (start, end inclusive, type) over repaired tags."""
    spans = []
    start: Optional[int] = None
    open_type: Optional[str] = None

    def close(end: int):
        nonlocal start, open_type
        if open_type is not None:
            spans.append((start, end, open_type))
        start, open_type = None, None

    for i, tag in enumerate(repair_tags(tags)):
        if tag == "O":
            close(i - 1)
            continue
        kind, etype = tag.split("-", 1)
        if kind == "B":
            close(i - 1)
            start, open_type = i, etype
        elif kind == "S":
            close(i - 1)
            spans.append((i, i, etype))
        elif kind == "I":
            pass  # repair guarantees open_type == etype
        elif kind == "E":
            close(i)
    close(len(tags) - 1)
    return spans


def bio_to_entities(
    words: Sequence[Word],
    tags: Sequence[str],
    sentence: Optional[Sentence] = None,
    doc_text: Optional[str] = None,
) -> list[Entity]:
    """Decode tags over words into entities, repairing malformed sequences.

    With ``sentence``/``doc_text`` given, character offsets come from the
    covering tokens; otherwise offsets are over the forms joined with single
    spaces (local, deterministic).
    """
    if len(words) != len(tags):
        raise ValueError(f"{len(tags)} tags for {len(words)} words")
    entities = []
    resolved = sentence is not None and doc_text is not None
    if not resolved:
        starts = []
        pos = 0
        for word in words:
            starts.append(pos)
            pos += len(word.form) + 1
        local_text = " ".join(w.form for w in words)
    for first, last, etype in _spans(tags):
        if resolved:
            start = sentence.token_of(words[first].id).start_char
            end = sentence.token_of(words[last].id).end_char
            text = doc_text[start:end]
        else:
            start = starts[first]
            end = starts[last] + len(words[last].form)
            text = local_text[start:end]
        entities.append(Entity(
            type=etype, start_char=start, end_char=end, text=text,
            word_span=(words[first].id, words[last].id),
        ))
    return entities


def entities_to_bio(sentence: Sentence) -> list[str]:
    """Inverse of span decoding: per-word BIO tags from sentence entities."""
    tags = ["O"] * len(sentence.words)
    for entity in sentence.entities:
        first, last = entity.word_span
        tags[first - 1] = "B-" + entity.type
        for wid in range(first + 1, last + 1):
            tags[wid - 1] = "I-" + entity.type
    return tags


def bio_corpus_to_document(sentences: list[tuple[list[str], list[str]]]) -> Document:
    """Materialize a BIO corpus as a Document with synthetic raw text.

    Forms are joined with single spaces, sentences likewise; entity offsets
    then refer to the synthetic text, which keeps NER training and scoring on
    the same honest offset space.
    """
    text_parts: list[str] = []
    doc_sentences: list[Sentence] = []
    pos = 0
    for si, (forms, tags) in enumerate(sentences):
        if si > 0:
            text_parts.append(" ")
            pos += 1
        tokens = []
        words = []
        for wi, form in enumerate(forms, start=1):
            if wi > 1:
                text_parts.append(" ")
                pos += 1
            tokens.append(Token(
                id_range=(wi, wi), surface=form, start_char=pos, end_char=pos + len(form)))
            words.append(Word(id=wi, form=form))
            text_parts.append(form)
            pos += len(form)
        sentence = Sentence(tokens=tuple(tokens), words=tuple(words))
        doc_sentences.append(sentence)
    text = "".join(text_parts)
    final = []
    for (forms, tags), sentence in zip(sentences, doc_sentences):
        entities = bio_to_entities(sentence.words, tags, sentence, text)
        final.append(Sentence(
            tokens=sentence.tokens, words=sentence.words, entities=tuple(entities)))
    return Document(text=text, sentences=tuple(final))
