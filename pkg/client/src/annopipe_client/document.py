"""Native mirror of the annotation server's wire schema (version 1).

Deliberately standalone: the client shares no code with the server package,
only the documented JSON schema.  ``ClientDocument.from_wire`` is lossless:
re-serializing yields the received body canonically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

SCHEMA_VERSION = 1


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


@dataclass(frozen=True)
class ClientToken:
    first_word: int
    last_word: int
    text: str
    start_char: int
    end_char: int
    mwt: bool


@dataclass(frozen=True)
class ClientWord:
    id: int
    form: str
    lemma: Optional[str]
    upos: Optional[str]
    xpos: Optional[str]
    feats: Optional[str]
    head: Optional[int]
    deprel: Optional[str]


@dataclass(frozen=True)
class ClientEntity:
    type: str
    start_char: int
    end_char: int
    text: str
    first_word: int
    last_word: int


@dataclass(frozen=True)
class ClientSentence:
    tokens: tuple[ClientToken, ...]
    words: tuple[ClientWord, ...]
    entities: tuple[ClientEntity, ...]

    @property
    def text(self) -> str:
        return " ".join(w.form for w in self.words)


@dataclass(frozen=True)
class ClientDocument:
    text: str
    language: Optional[str]
    sentences: tuple[ClientSentence, ...]

    @classmethod
    def from_wire(cls, data: dict) -> "ClientDocument":
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(
                f"unsupported schema_version {data.get('schema_version')!r}; "
                f"this client speaks version {SCHEMA_VERSION}")
        sentences = []
        for sent in data["sentences"]:
            tokens = tuple(ClientToken(
                first_word=t["id"][0], last_word=t["id"][1], text=t["text"],
                start_char=t["start_char"], end_char=t["end_char"], mwt=t["mwt"],
            ) for t in sent["tokens"])
            words = tuple(ClientWord(
                id=w["id"], form=w["form"], lemma=w["lemma"], upos=w["upos"],
                xpos=w["xpos"], feats=w["feats"], head=w["head"], deprel=w["deprel"],
            ) for w in sent["words"])
            entities = tuple(ClientEntity(
                type=e["type"], start_char=e["start_char"], end_char=e["end_char"],
                text=e["text"], first_word=e["words"][0], last_word=e["words"][1],
            ) for e in sent["entities"])
            sentences.append(ClientSentence(tokens=tokens, words=words, entities=entities))
        return cls(text=data["text"], language=data.get("language"),
                   sentences=tuple(sentences))

    def to_wire(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "language": self.language,
            "text": self.text,
            "sentences": [
                {
                    "tokens": [
                        {"id": [t.first_word, t.last_word], "text": t.text,
                         "start_char": t.start_char, "end_char": t.end_char,
                         "mwt": t.mwt}
                        for t in sentence.tokens
                    ],
                    "words": [
                        {"id": w.id, "form": w.form, "lemma": w.lemma,
                         "upos": w.upos, "xpos": w.xpos, "feats": w.feats,
                         "head": w.head, "deprel": w.deprel}
                        for w in sentence.words
                    ],
                    "entities": [
                        {"type": e.type, "start_char": e.start_char,
                         "end_char": e.end_char, "text": e.text,
                         "words": [e.first_word, e.last_word]}
                        for e in sentence.entities
                    ],
                }
                for sentence in self.sentences
            ],
        }

    def canonical(self) -> str:
        return canonical_json(self.to_wire())

    @property
    def entities(self) -> tuple[ClientEntity, ...]:
        return tuple(e for s in self.sentences for e in s.entities)
