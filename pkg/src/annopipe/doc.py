"""Hierarchical annotation containers: Document > Sentence > Token > Word.

Tokens are contiguous character spans of the raw text; words are syntactic
units.  The two coincide except at multi-word tokens (MWTs), where one token
expands into several words.  All containers are immutable; pipeline stages
build updated copies via ``dataclasses.replace``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional


ROOT_DEPREL = "root"


class DocumentError(ValueError):
    """An annotation container violates a structural invariant."""


@dataclass(frozen=True)
class MorphFeatures:
    """Canonicalized morphological feature bundle.

    Attributes are kept sorted case-insensitively; each attribute maps to a
    sorted tuple of values.  Serializes as ``Attr1=Val1|Attr2=Val2`` and an
    empty bundle as ``_``.
    """

    items: tuple[tuple[str, tuple[str, ...]], ...] = ()

    @classmethod
    def from_dict(cls, mapping: dict[str, Iterable[str]]) -> "MorphFeatures":
        items = tuple(
            (attr, tuple(sorted(set(map(str, values)))))
            for attr, values in sorted(mapping.items(), key=lambda kv: (kv[0].lower(), kv[0]))
            if values
        )
        return cls(items)

    @classmethod
    def parse(cls, text: str) -> "MorphFeatures":
        """Parse a CoNLL-U FEATS value; ``_`` yields the empty bundle."""
        if text in ("_", ""):
            return cls()
        mapping: dict[str, set[str]] = {}
        for item in text.split("|"):
            if "=" not in item:
                raise DocumentError(f"malformed feature item {item!r}")
            attr, values = item.split("=", 1)
            mapping.setdefault(attr, set()).update(v for v in values.split(",") if v)
        return cls.from_dict({a: sorted(vs) for a, vs in mapping.items()})

    def get(self, attr: str) -> tuple[str, ...]:
        for name, values in self.items:
            if name == attr:
                return values
        return ()

    def __bool__(self) -> bool:
        return bool(self.items)

    def __str__(self) -> str:
        if not self.items:
            return "_"
        return "|".join(f"{attr}={','.join(values)}" for attr, values in self.items)


@dataclass(frozen=True)
class Word:
    """One syntactic word; ``id`` is 1-based within its sentence."""

    id: int
    form: str
    lemma: Optional[str] = None
    upos: Optional[str] = None
    xpos: Optional[str] = None
    feats: Optional[MorphFeatures] = None
    head: Optional[int] = None
    deprel: Optional[str] = None
    deps: Optional[str] = None  # enhanced graph, preserved opaquely
    misc: Optional[str] = None  # unmanaged MISC payload, preserved opaquely

    def __post_init__(self):
        if self.id < 1:
            raise DocumentError(f"word id must be >= 1, got {self.id}")
        if self.head is not None:
            if self.head == self.id:
                raise DocumentError(f"word {self.id} cannot head itself")
            if (self.head == 0) != (self.deprel == ROOT_DEPREL):
                raise DocumentError(
                    f"word {self.id}: head={self.head} requires deprel "
                    f"{ROOT_DEPREL!r} iff head is 0 (got {self.deprel!r})"
                )


@dataclass(frozen=True)
class Token:
    """A surface token covering ``surface == text[start_char:end_char]``.

    ``id_range`` gives the first and last word ids the token covers.  A token
    is an MWT exactly when the range covers more than one word.  ``mwt_flag``
    marks tokens the tokenizer flagged for expansion; it stays set after
    expansion and is how a not-yet-expanded MWT candidate is represented.
    """

    id_range: tuple[int, int]
    surface: str
    start_char: int
    end_char: int
    mwt_flag: bool = False
    misc: Optional[str] = None

    def __post_init__(self):
        first, last = self.id_range
        if not (1 <= first <= last):
            raise DocumentError(f"bad token id range {self.id_range}")
        if self.start_char < 0 or self.end_char < self.start_char:
            raise DocumentError(f"bad token span [{self.start_char}, {self.end_char})")
        if not self.surface:
            raise DocumentError("token surface must be non-empty")

    @property
    def is_mwt(self) -> bool:
        return self.id_range[1] > self.id_range[0]


@dataclass(frozen=True)
class Entity:
    """A named entity mention with document-level character offsets."""

    type: str
    start_char: int
    end_char: int
    text: str
    word_span: tuple[int, int]


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    words: tuple[Word, ...]
    entities: tuple[Entity, ...] = ()
    comments: tuple[str, ...] = ()  # preserved CoNLL-U comments (sans "# text")
    empty_nodes: tuple["EmptyNode", ...] = ()

    @property
    def start_char(self) -> int:
        return self.tokens[0].start_char

    @property
    def end_char(self) -> int:
        return self.tokens[-1].end_char

    def token_of(self, word_id: int) -> Token:
        for token in self.tokens:
            if token.id_range[0] <= word_id <= token.id_range[1]:
                return token
        raise DocumentError(f"no token covers word id {word_id}")

    def text(self, doc_text: str) -> str:
        return doc_text[self.start_char:self.end_char]


@dataclass(frozen=True)
class EmptyNode:
    """An ``i.j`` node line, preserved verbatim and never interpreted."""

    after_word: int
    sub_index: int
    columns: tuple[str, ...]


@dataclass(frozen=True)
class Document:
    text: str
    sentences: tuple[Sentence, ...] = ()

    @property
    def entities(self) -> tuple[Entity, ...]:
        return tuple(e for s in self.sentences for e in s.entities)

    def iter_words(self):
        for sentence in self.sentences:
            yield from sentence.words


def validate_document(doc: Document) -> None:
    """Check the structural invariants; raise DocumentError on violation.

    Enforced: sentence spans strictly increasing and non-overlapping; token
    spans nested in their sentence and matching the raw text; word ids 1..n
    exactly covered by token ranges; at most one root per sentence with
    head/deprel consistency; entity text matching its offsets.
    """
    prev_end = 0
    for si, sentence in enumerate(doc.sentences):
        if not sentence.tokens:
            raise DocumentError(f"sentence {si} has no tokens")
        if sentence.start_char < prev_end:
            raise DocumentError(f"sentence {si} overlaps the previous sentence")
        prev_end = sentence.end_char

        next_word = 1
        tok_end = 0
        for token in sentence.tokens:
            if token.id_range[0] != next_word:
                raise DocumentError(
                    f"sentence {si}: token range {token.id_range} does not "
                    f"continue at word {next_word}"
                )
            next_word = token.id_range[1] + 1
            if not (sentence.start_char <= token.start_char and token.end_char <= sentence.end_char):
                raise DocumentError(f"sentence {si}: token span escapes the sentence span")
            if token.start_char < tok_end:
                raise DocumentError(f"sentence {si}: overlapping token spans")
            tok_end = token.end_char
            if doc.text[token.start_char:token.end_char] != token.surface:
                raise DocumentError(
                    f"sentence {si}: token surface {token.surface!r} does not match "
                    f"text[{token.start_char}:{token.end_char}] "
                    f"({doc.text[token.start_char:token.end_char]!r})"
                )
        if next_word - 1 != len(sentence.words):
            raise DocumentError(
                f"sentence {si}: token ranges cover {next_word - 1} words, "
                f"got {len(sentence.words)}"
            )
        for wi, word in enumerate(sentence.words, start=1):
            if word.id != wi:
                raise DocumentError(f"sentence {si}: word ids not contiguous at {wi}")
            if word.head is not None and word.head > len(sentence.words):
                raise DocumentError(f"sentence {si}: head {word.head} out of range")
        heads = [w.head for w in sentence.words if w.head is not None]
        if heads and sum(1 for h in heads if h == 0) != 1:
            raise DocumentError(f"sentence {si}: exactly one word must have head 0")
        for token in sentence.tokens:
            if not token.is_mwt:
                word = sentence.words[token.id_range[0] - 1]
                if word.form != token.surface:
                    raise DocumentError(
                        f"sentence {si}: non-MWT token surface {token.surface!r} "
                        f"differs from word form {word.form!r}"
                    )
        for entity in sentence.entities:
            if doc.text[entity.start_char:entity.end_char] != entity.text:
                raise DocumentError(
                    f"sentence {si}: entity text {entity.text!r} does not match its offsets"
                )


def replace_sentence(doc: Document, index: int, sentence: Sentence) -> Document:
    sentences = list(doc.sentences)
    sentences[index] = sentence
    return replace(doc, sentences=tuple(sentences))
