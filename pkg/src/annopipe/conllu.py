"""CoNLL-U reading and writing with multi-word token and offset handling.

Columns: ID FORM LEMMA UPOS XPOS FEATS HEAD DEPREL DEPS MISC, tab separated,
``_`` for unset, UTF-8, LF line endings.  Character offsets are 0-based and
end-exclusive; the writer records them in MISC as ``start_char=i|end_char=j``
together with inter-token whitespace (``SpaceAfter=No`` for none,
``SpacesAfter=...`` for anything other than a single space), which makes
``parse_conllu(serialize_conllu(doc))`` reproduce the document exactly,
including its raw text.

Files without explicit offsets are supported: when a ``# text`` comment is
present, offsets are reconstructed by greedy left-to-right matching of token
surfaces against it; otherwise the raw text itself is reconstructed by
joining forms with single spaces (honoring recorded whitespace).
"""

from __future__ import annotations

import dataclasses
import io
import re
from dataclasses import dataclass, field
from typing import Optional

from .doc import (
    Document,
    DocumentError,
    EmptyNode,
    MorphFeatures,
    Sentence,
    Token,
    Word,
    validate_document,
)

N_COLUMNS = 10

_RANGE_ID = re.compile(r"^(\d+)-(\d+)$")
_EMPTY_ID = re.compile(r"^(\d+)\.(\d+)$")

# Managed MISC keys; everything else is preserved opaquely.
_MANAGED = {"start_char", "end_char", "SpaceAfter", "SpacesAfter", "SpacesBefore", "MWT"}

_ESCAPE = {"\\": "\\\\", " ": "\\s", "\n": "\\n", "\t": "\\t", "\r": "\\r", "|": "\\p"}
_UNESCAPE = {"\\": "\\", "s": " ", "n": "\n", "t": "\t", "r": "\r", "p": "|"}


class ConlluError(DocumentError):
    """Malformed CoNLL-U input; carries the offending 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _escape_gap(gap: str) -> str:
    return "".join(_ESCAPE.get(c, c) for c in gap)


def _unescape_gap(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        if text[i] == "\\" and i + 1 < len(text) and text[i + 1] in _UNESCAPE:
            out.append(_UNESCAPE[text[i + 1]])
            i += 2
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


@dataclass
class _RawToken:
    id_range: tuple[int, int]
    surface: str
    mwt_flag: bool = False
    misc: Optional[str] = None
    start_char: Optional[int] = None
    end_char: Optional[int] = None
    gap_after: Optional[str] = None  # None = unspecified (single space default)
    gap_before: Optional[str] = None


@dataclass
class _RawSentence:
    comments: list[str] = field(default_factory=list)
    text: Optional[str] = None
    tokens: list[_RawToken] = field(default_factory=list)
    words: list[Word] = field(default_factory=list)
    empty_nodes: list[EmptyNode] = field(default_factory=list)


def _split_misc(misc: str, line_no: int):
    """Split a MISC cell into managed annotations and an opaque leftover."""
    managed: dict[str, str] = {}
    leftover: list[str] = []
    if misc != "_":
        for item in misc.split("|"):
            key = item.split("=", 1)[0]
            if key in _MANAGED:
                managed[key] = item.split("=", 1)[1] if "=" in item else ""
            else:
                leftover.append(item)
    start = end = None
    if "start_char" in managed:
        try:
            start = int(managed["start_char"])
        except ValueError:
            raise ConlluError(line_no, f"bad start_char {managed['start_char']!r}")
    if "end_char" in managed:
        try:
            end = int(managed["end_char"])
        except ValueError:
            raise ConlluError(line_no, f"bad end_char {managed['end_char']!r}")
    gap: Optional[str] = None
    if managed.get("SpaceAfter") == "No":
        gap = ""
    if "SpacesAfter" in managed:
        gap = _unescape_gap(managed["SpacesAfter"])
    gap_before = _unescape_gap(managed["SpacesBefore"]) if "SpacesBefore" in managed else None
    mwt = managed.get("MWT") == "Yes"
    return start, end, gap, gap_before, mwt, ("|".join(leftover) or None)


def _opt(value: str) -> Optional[str]:
    return None if value == "_" else value


def _parse_word(columns: list[str], word_id: int, line_no: int) -> Word:
    head: Optional[int] = None
    if columns[6] != "_":
        try:
            head = int(columns[6])
        except ValueError:
            raise ConlluError(line_no, f"HEAD is not an integer: {columns[6]!r}")
        if head < 0:
            raise ConlluError(line_no, "HEAD cannot be negative")
    try:
        feats = MorphFeatures.parse(columns[5]) or None
        return Word(
            id=word_id,
            form=columns[1],
            lemma=_opt(columns[2]),
            upos=_opt(columns[3]),
            xpos=_opt(columns[4]),
            feats=feats,
            head=head,
            deprel=_opt(columns[7]),
            deps=_opt(columns[8]),
            misc=None,
        )
    except DocumentError as exc:
        raise ConlluError(line_no, str(exc)) from exc


def _finish_sentence(raw: _RawSentence, line_no: int) -> _RawSentence:
    covered = 0
    for token in raw.tokens:
        first, last = token.id_range
        if first != covered + 1:
            raise ConlluError(line_no, f"token range {first}-{last} overlaps or skips word ids")
        covered = last
    if covered != len(raw.words):
        raise ConlluError(line_no, f"token ranges cover {covered} words, found {len(raw.words)}")
    return raw


def _parse_raw(stream, on_newdoc) -> list[list[_RawSentence]]:
    docs: list[list[_RawSentence]] = [[]]
    current: Optional[_RawSentence] = None
    pending_range: Optional[tuple[int, int]] = None  # words still owed to an MWT line
    line_no = 0
    for line in stream:
        line_no += 1
        line = line.rstrip("\n").rstrip("\r")
        if not line:
            if current is not None:
                if pending_range is not None:
                    raise ConlluError(line_no, "MWT range not fully covered by word lines")
                docs[-1].append(_finish_sentence(current, line_no))
                current = None
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body == "newdoc" or body.startswith("newdoc "):
                if current is not None:
                    raise ConlluError(line_no, "# newdoc inside a sentence")
                if docs[-1] or on_newdoc.seen:
                    docs.append([])
                on_newdoc.seen = True
                continue
            if current is None:
                current = _RawSentence()
            match = re.match(r"text\s*=\s?(.*)$", body)
            if match:
                current.text = match.group(1)
            else:
                current.comments.append(line)
            continue
        columns = line.split("\t")
        if len(columns) != N_COLUMNS:
            raise ConlluError(line_no, f"expected {N_COLUMNS} tab-separated columns, got {len(columns)}")
        if current is None:
            current = _RawSentence()

        range_match = _RANGE_ID.match(columns[0])
        empty_match = _EMPTY_ID.match(columns[0])
        if range_match:
            first, last = int(range_match.group(1)), int(range_match.group(2))
            if last <= first:
                raise ConlluError(line_no, f"degenerate MWT range {columns[0]}")
            if pending_range is not None or first <= len(current.words):
                raise ConlluError(line_no, f"overlapping MWT range {columns[0]}")
            if first != len(current.words) + 1:
                raise ConlluError(line_no, f"MWT range {columns[0]} skips word ids")
            start, end, gap, gap_before, _mwt, leftover = _split_misc(columns[9], line_no)
            current.tokens.append(_RawToken(
                id_range=(first, last), surface=columns[1], mwt_flag=True,
                misc=leftover, start_char=start, end_char=end,
                gap_after=gap, gap_before=gap_before,
            ))
            pending_range = (first, last)
        elif empty_match:
            current.empty_nodes.append(EmptyNode(
                after_word=int(empty_match.group(1)),
                sub_index=int(empty_match.group(2)),
                columns=tuple(columns),
            ))
        else:
            try:
                word_id = int(columns[0])
            except ValueError:
                raise ConlluError(line_no, f"unparseable word id {columns[0]!r}")
            if word_id != len(current.words) + 1:
                raise ConlluError(
                    line_no, f"non-contiguous word id {word_id}, expected {len(current.words) + 1}")
            word = _parse_word(columns, word_id, line_no)
            if pending_range is not None:
                # Word inside an MWT: MISC is opaque word payload, no offsets.
                if columns[9] != "_":
                    word = dataclasses.replace(word, misc=columns[9])
                current.words.append(word)
                if word_id == pending_range[1]:
                    pending_range = None
            else:
                start, end, gap, gap_before, mwt, leftover = _split_misc(columns[9], line_no)
                if leftover is not None:
                    word = dataclasses.replace(word, misc=leftover)
                current.words.append(word)
                current.tokens.append(_RawToken(
                    id_range=(word_id, word_id), surface=columns[1], mwt_flag=mwt,
                    misc=None, start_char=start, end_char=end,
                    gap_after=gap, gap_before=gap_before,
                ))
    if current is not None:
        if pending_range is not None:
            raise ConlluError(line_no, "MWT range not fully covered by word lines")
        docs[-1].append(_finish_sentence(current, line_no))
    if not docs[-1] and len(docs) > 1:
        docs.pop()
    return docs


def _layout_document(raw_sentences: list[_RawSentence]) -> Document:
    """Assign character offsets and assemble the document text.

    Explicit offsets on every token win; otherwise each sentence is laid out
    from its ``# text`` comment (greedy matching) or reconstructed from the
    forms, and sentences are separated by the recorded whitespace (default a
    single space).
    """
    tokens_flat = [t for s in raw_sentences for t in s.tokens]
    explicit = bool(tokens_flat) and all(
        t.start_char is not None and t.end_char is not None for t in tokens_flat)

    if explicit:
        cursor = 0
        for token in tokens_flat:
            if token.start_char < cursor or token.end_char - token.start_char != len(token.surface):
                raise DocumentError(
                    f"inconsistent explicit offsets for token {token.surface!r}")
            cursor = token.end_char
        last = tokens_flat[-1]
        total = last.end_char + len(last.gap_after or "")
        chars = [" "] * total
        first = tokens_flat[0]
        if first.gap_before is not None and len(first.gap_before) == first.start_char:
            chars[:first.start_char] = list(first.gap_before)
        for i, token in enumerate(tokens_flat):
            chars[token.start_char:token.end_char] = list(token.surface)
            if token.gap_after is None:
                continue
            # Recorded whitespace overrides the space filler when it fits.
            gap_end = token.end_char + len(token.gap_after)
            next_start = tokens_flat[i + 1].start_char if i + 1 < len(tokens_flat) else total
            if gap_end == next_start:
                chars[token.end_char:gap_end] = list(token.gap_after)
        text = "".join(chars)
        offset_of = {id(t): (t.start_char, t.end_char) for t in tokens_flat}
    else:
        text_parts: list[str] = []
        offset_of = {}
        pos = 0
        for si, raw in enumerate(raw_sentences):
            if si > 0:
                prev_last = raw_sentences[si - 1].tokens[-1]
                gap = prev_last.gap_after if prev_last.gap_after is not None else " "
                text_parts.append(gap)
                pos += len(gap)
            if raw.text is not None:
                sent_text = raw.text
                local = 0
                for token in raw.tokens:
                    idx = sent_text.find(token.surface, local)
                    if idx < 0:
                        raise DocumentError(
                            f"token {token.surface!r} not found in '# text' of sentence {si}")
                    offset_of[id(token)] = (pos + idx, pos + idx + len(token.surface))
                    local = idx + len(token.surface)
                text_parts.append(sent_text)
                pos += len(sent_text)
            else:
                for ti, token in enumerate(raw.tokens):
                    if ti > 0:
                        prev = raw.tokens[ti - 1]
                        gap = prev.gap_after if prev.gap_after is not None else " "
                        text_parts.append(gap)
                        pos += len(gap)
                    offset_of[id(token)] = (pos, pos + len(token.surface))
                    text_parts.append(token.surface)
                    pos += len(token.surface)
        last = raw_sentences[-1].tokens[-1] if raw_sentences and raw_sentences[-1].tokens else None
        if last is not None and last.gap_after:
            text_parts.append(last.gap_after)
        text = "".join(text_parts)

    sentences = []
    for raw in raw_sentences:
        tokens = []
        for t in raw.tokens:
            start, end = offset_of[id(t)]
            tokens.append(Token(
                id_range=t.id_range, surface=t.surface,
                start_char=start, end_char=end,
                mwt_flag=t.mwt_flag, misc=t.misc,
            ))
        sentences.append(Sentence(
            tokens=tuple(tokens), words=tuple(raw.words),
            comments=tuple(raw.comments), empty_nodes=tuple(raw.empty_nodes),
        ))
    doc = Document(text=text, sentences=tuple(sentences))
    validate_document(doc)
    return doc


def parse_conllu(source) -> list[Document]:
    """Parse CoNLL-U text (string or line iterable) into documents.

    Documents split at ``# newdoc``; input without the marker yields a single
    document.  Empty input yields an empty list.
    """
    if isinstance(source, str):
        source = io.StringIO(source)

    class _Flag:
        seen = False

    raw_docs = _parse_raw(source, _Flag)
    return [_layout_document(sents) for sents in raw_docs if sents]


def read_conllu_file(path) -> list[Document]:
    with open(path, encoding="utf-8") as handle:
        return parse_conllu(handle)


def _misc_cell(parts: list[str]) -> str:
    return "|".join(parts) if parts else "_"


def _word_columns(word: Word) -> list[str]:
    return [
        str(word.id),
        word.form,
        word.lemma if word.lemma is not None else "_",
        word.upos if word.upos is not None else "_",
        word.xpos if word.xpos is not None else "_",
        str(word.feats) if word.feats else "_",
        str(word.head) if word.head is not None else "_",
        word.deprel if word.deprel is not None else "_",
        word.deps if word.deps is not None else "_",
        word.misc if word.misc is not None else "_",
    ]


def serialize_conllu(doc: Document) -> str:
    """Render one document; inverse of :func:`parse_conllu` (single document)."""
    lines: list[str] = []
    all_tokens = [t for s in doc.sentences for t in s.tokens]
    for si, sentence in enumerate(doc.sentences):
        lines.extend(sentence.comments)
        lines.append("# text = " + " ".join(sentence.text(doc.text).split()))
        empty_by_anchor: dict[int, list[EmptyNode]] = {}
        for node in sentence.empty_nodes:
            empty_by_anchor.setdefault(node.after_word, []).append(node)
        for node in empty_by_anchor.get(0, []):
            lines.append("\t".join(node.columns))
        flat_index = {id(t): i for i, t in enumerate(all_tokens)}
        for token in sentence.tokens:
            idx = flat_index[id(token)]
            managed = [f"start_char={token.start_char}", f"end_char={token.end_char}"]
            if idx + 1 < len(all_tokens):
                gap = doc.text[token.end_char:all_tokens[idx + 1].start_char]
            else:
                gap = doc.text[token.end_char:]
            if gap == "":
                if idx + 1 < len(all_tokens):
                    managed.append("SpaceAfter=No")
            elif gap != " " or idx + 1 >= len(all_tokens):
                managed.append("SpacesAfter=" + _escape_gap(gap))
            if idx == 0 and token.start_char > 0:
                managed.append("SpacesBefore=" + _escape_gap(doc.text[:token.start_char]))
            if token.mwt_flag and not token.is_mwt:
                managed.append("MWT=Yes")

            first, last = token.id_range
            if token.is_mwt:
                if token.misc is not None:
                    managed.append(token.misc)
                lines.append("\t".join(
                    [f"{first}-{last}", token.surface] + ["_"] * 7 + [_misc_cell(managed)]))
                for word in sentence.words[first - 1:last]:
                    lines.append("\t".join(_word_columns(word)))
                    for node in empty_by_anchor.get(word.id, []):
                        lines.append("\t".join(node.columns))
            else:
                word = sentence.words[first - 1]
                columns = _word_columns(word)
                parts = list(managed)
                if word.misc is not None:
                    parts.append(word.misc)
                columns[9] = _misc_cell(parts)
                lines.append("\t".join(columns))
                for node in empty_by_anchor.get(word.id, []):
                    lines.append("\t".join(node.columns))
        lines.append("")
    return "\n".join(lines) + ("\n" if lines else "")


def serialize_corpus(docs: list[Document]) -> str:
    """Render multiple documents, separated by ``# newdoc`` markers."""
    parts = []
    for doc in docs:
        parts.append("# newdoc\n" + serialize_conllu(doc))
    return "".join(parts)


def write_conllu_file(path, docs) -> None:
    text = serialize_corpus(docs) if len(docs) != 1 else serialize_conllu(docs[0])
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)
