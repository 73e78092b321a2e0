"""The JSON wire schema shared by the CLI, the annotation server, and clients.

Schema (version 1), field names fixed:

    {"schema_version": 1, "language": str|null, "text": str,
     "sentences": [
        {"tokens": [{"id": [first, last], "text": str,
                     "start_char": int, "end_char": int, "mwt": bool}],
         "words":  [{"id": int, "form": str, "lemma": str|null,
                     "upos": str|null, "xpos": str|null, "feats": str|null,
                     "head": int|null, "deprel": str|null}],
         "entities": [{"type": str, "start_char": int, "end_char": int,
                       "text": str, "words": [first, last]}]}]}

``feats`` is the canonical sorted ``Attr=Val|...`` string.  Canonical JSON
(sorted keys, no spaces, UTF-8) makes server responses byte-comparable with
in-process annotation.
"""

from __future__ import annotations

import json

from .doc import Document, Entity, MorphFeatures, Sentence, Token, Word

SCHEMA_VERSION = 1


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def document_to_wire(doc: Document, language: str | None = None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "language": language,
        "text": doc.text,
        "sentences": [
            {
                "tokens": [
                    {
                        "id": [token.id_range[0], token.id_range[1]],
                        "text": token.surface,
                        "start_char": token.start_char,
                        "end_char": token.end_char,
                        "mwt": token.is_mwt or token.mwt_flag,
                    }
                    for token in sentence.tokens
                ],
                "words": [
                    {
                        "id": word.id,
                        "form": word.form,
                        "lemma": word.lemma,
                        "upos": word.upos,
                        "xpos": word.xpos,
                        "feats": str(word.feats) if word.feats else None,
                        "head": word.head,
                        "deprel": word.deprel,
                    }
                    for word in sentence.words
                ],
                "entities": [
                    {
                        "type": entity.type,
                        "start_char": entity.start_char,
                        "end_char": entity.end_char,
                        "text": entity.text,
                        "words": [entity.word_span[0], entity.word_span[1]],
                    }
                    for entity in sentence.entities
                ],
            }
            for sentence in doc.sentences
        ],
    }


def wire_to_document(data: dict) -> Document:
    """Rebuild a Document from wire JSON (used for lossless round-trips)."""
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {data.get('schema_version')!r}")
    sentences = []
    for sent in data["sentences"]:
        tokens = tuple(
            Token(id_range=(t["id"][0], t["id"][1]), surface=t["text"],
                  start_char=t["start_char"], end_char=t["end_char"],
                  mwt_flag=t["mwt"])
            for t in sent["tokens"])
        words = tuple(
            Word(id=w["id"], form=w["form"], lemma=w["lemma"], upos=w["upos"],
                 xpos=w["xpos"],
                 feats=MorphFeatures.parse(w["feats"]) if w["feats"] else None,
                 head=w["head"], deprel=w["deprel"])
            for w in sent["words"])
        entities = tuple(
            Entity(type=e["type"], start_char=e["start_char"], end_char=e["end_char"],
                   text=e["text"], word_span=(e["words"][0], e["words"][1]))
            for e in sent["entities"])
        sentences.append(Sentence(tokens=tokens, words=words, entities=entities))
    return Document(text=data["text"], sentences=tuple(sentences))
