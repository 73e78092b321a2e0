"""Alignment-based evaluation over whitespace-free character streams.

Both documents are flattened to the concatenation of their token surfaces
with whitespace removed; the streams must match exactly.  Tokens and
sentences score by exact span identity.  Words align 1:1 inside identically
spanned non-MWT tokens; inside multi-word regions they align by longest
common subsequence of lowercased forms (leftmost match).  Attribute metrics
(UPOS, XPOS, UFeats, Lemmas) and attachment metrics (UAS, LAS) are computed
over aligned words.  All scores are percentages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .doc import Document, Entity, Word

METRICS = ("Tokens", "Sentences", "Words", "UPOS", "XPOS",
           "UFeats", "Lemmas", "UAS", "LAS")

_ROOT = object()    # shared sentinel: parent of the root word
_UNSET = object()   # attribute/head not annotated


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class Score:
    precision: float  # percent
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, correct: int, system_total: int, gold_total: int) -> "Score":
        p = 100.0 * correct / system_total if system_total else 0.0
        r = 100.0 * correct / gold_total if gold_total else 0.0
        f = 200.0 * correct / (system_total + gold_total) if system_total + gold_total else 0.0
        return cls(p, r, f)


@dataclass(frozen=True)
class MetricReport:
    scores: dict[str, Score]

    def __getitem__(self, metric: str) -> Score:
        return self.scores[metric]

    def to_json(self) -> dict:
        return {m: {"precision": round(s.precision, 2), "recall": round(s.recall, 2),
                    "f1": round(s.f1, 2)}
                for m, s in self.scores.items()}

    def to_text(self) -> str:
        lines = ["Metric     | Precision |    Recall |  F1 Score",
                 "-----------+-----------+-----------+----------"]
        for metric in METRICS:
            s = self.scores[metric]
            lines.append(f"{metric:11}|{s.precision:10.2f} |{s.recall:10.2f} |{s.f1:10.2f}")
        return "\n".join(lines)


@dataclass
class _Unit:
    """One word as seen by the aligner."""

    start: int
    end: int
    is_mwt: bool
    form: str
    word: Word
    parent: object = _UNSET  # _ROOT, another _Unit, or _UNSET


@dataclass
class _Flat:
    chars: str = ""
    token_spans: list = field(default_factory=list)
    sentence_spans: list = field(default_factory=list)
    units: list = field(default_factory=list)


def _strip_ws(text: str) -> str:
    return "".join(c for c in text if not c.isspace())


def _flatten(doc: Document) -> _Flat:
    flat = _Flat()
    pos = 0
    for sentence in doc.sentences:
        sent_start = pos
        sent_units: list[_Unit] = []
        for token in sentence.tokens:
            surface = _strip_ws(token.surface)
            if not surface:
                raise EvaluationError(f"token {token.surface!r} is whitespace-only")
            span = (pos, pos + len(surface))
            flat.chars += surface
            flat.token_spans.append(span)
            first, last = token.id_range
            for word in sentence.words[first - 1:last]:
                sent_units.append(_Unit(
                    start=span[0], end=span[1], is_mwt=token.is_mwt,
                    form=_strip_ws(word.form).lower(), word=word))
            pos = span[1]
        for unit in sent_units:
            head = unit.word.head
            if head is None:
                unit.parent = _UNSET
            elif head == 0:
                unit.parent = _ROOT
            else:
                unit.parent = sent_units[head - 1]
        flat.units.extend(sent_units)
        flat.sentence_spans.append((sent_start, pos))
    return flat


def _spans_score(gold_spans, system_spans) -> Score:
    correct = 0
    gi = si = 0
    while gi < len(gold_spans) and si < len(system_spans):
        if system_spans[si][0] < gold_spans[gi][0]:
            si += 1
        elif gold_spans[gi][0] < system_spans[si][0]:
            gi += 1
        else:
            correct += gold_spans[gi][1] == system_spans[si][1]
            gi += 1
            si += 1
    return Score.from_counts(correct, len(system_spans), len(gold_spans))


def _beyond_end(units, i, span_end) -> bool:
    if i >= len(units):
        return True
    if units[i].is_mwt:
        return units[i].start >= span_end
    return units[i].end > span_end


def _find_multiword_span(gold, system, gi, si):
    """Minimal region covering every MWT token that overlaps it (both sides)."""
    if gold[gi].is_mwt:
        span_end = gold[gi].end
        if not system[si].is_mwt and system[si].start < gold[gi].start:
            si += 1
    else:
        span_end = system[si].end
        if not gold[gi].is_mwt and gold[gi].start < system[si].start:
            gi += 1
    gs, ss = gi, si
    while not _beyond_end(gold, gi, span_end) or not _beyond_end(system, si, span_end):
        if gi < len(gold) and (si >= len(system) or gold[gi].start <= system[si].start):
            if gold[gi].is_mwt and gold[gi].end > span_end:
                span_end = gold[gi].end
            gi += 1
        else:
            if system[si].is_mwt and system[si].end > span_end:
                span_end = system[si].end
            si += 1
    return gs, ss, gi, si


def _lcs_align(gold, system, gs, gi, ss, si, pairs):
    """Leftmost-match LCS on lowercased forms within one multiword region."""
    g_n, s_n = gi - gs, si - ss
    lcs = [[0] * (s_n + 1) for _ in range(g_n + 1)]
    for g in range(g_n - 1, -1, -1):
        for s in range(s_n - 1, -1, -1):
            lcs[g][s] = max(
                lcs[g + 1][s + 1] + (gold[gs + g].form == system[ss + s].form),
                lcs[g + 1][s],
                lcs[g][s + 1],
            )
    g = s = 0
    while g < g_n and s < s_n:
        if gold[gs + g].form == system[ss + s].form:
            pairs.append((gold[gs + g], system[ss + s]))
            g += 1
            s += 1
        elif lcs[g][s] == lcs[g + 1][s]:
            g += 1
        else:
            s += 1


def _align_words(gold_units, system_units):
    pairs: list[tuple[_Unit, _Unit]] = []
    gi = si = 0
    while gi < len(gold_units) and si < len(system_units):
        if gold_units[gi].is_mwt or system_units[si].is_mwt:
            gs, ss, gi, si = _find_multiword_span(gold_units, system_units, gi, si)
            if gi > gs and si > ss:
                _lcs_align(gold_units, system_units, gs, gi, ss, si, pairs)
        else:
            g, s = gold_units[gi], system_units[si]
            if (g.start, g.end) == (s.start, s.end):
                pairs.append((g, s))
                gi += 1
                si += 1
            elif g.start <= s.start:
                gi += 1
            else:
                si += 1
    return pairs


def _feats_key(word: Word) -> str:
    return str(word.feats) if word.feats else "_"


def align_and_score(system: Document, gold: Document) -> MetricReport:
    """The nine UD metrics; raises EvaluationError when the whitespace-free
    character streams differ (with the first divergence offset)."""
    gold_flat = _flatten(gold)
    system_flat = _flatten(system)
    if gold_flat.chars != system_flat.chars:
        limit = min(len(gold_flat.chars), len(system_flat.chars))
        offset = next((i for i in range(limit)
                       if gold_flat.chars[i] != system_flat.chars[i]), limit)
        raise EvaluationError(
            f"token character streams differ at offset {offset}: "
            f"gold ...{gold_flat.chars[offset:offset + 20]!r} vs "
            f"system ...{system_flat.chars[offset:offset + 20]!r}")

    pairs = _align_words(gold_flat.units, system_flat.units)
    gold_of = {id(s): g for g, s in pairs}

    def attribute_score(key) -> Score:
        correct = sum(1 for g, s in pairs if key(g.word) == key(s.word))
        return Score.from_counts(correct, len(system_flat.units), len(gold_flat.units))

    def mapped_parent(unit: _Unit):
        if unit.parent is _ROOT or unit.parent is _UNSET:
            return unit.parent
        return gold_of.get(id(unit.parent), "unaligned")

    def attachment_correct(g: _Unit, s: _Unit, labeled: bool) -> bool:
        if mapped_parent(s) is not g.parent:  # identity: sentinels or the same unit
            return False
        return not labeled or g.word.deprel == s.word.deprel

    uas = sum(attachment_correct(g, s, False) for g, s in pairs)
    las = sum(attachment_correct(g, s, True) for g, s in pairs)
    n_sys, n_gold = len(system_flat.units), len(gold_flat.units)
    return MetricReport({
        "Tokens": _spans_score(gold_flat.token_spans, system_flat.token_spans),
        "Sentences": _spans_score(gold_flat.sentence_spans, system_flat.sentence_spans),
        "Words": Score.from_counts(len(pairs), n_sys, n_gold),
        "UPOS": attribute_score(lambda w: w.upos),
        "XPOS": attribute_score(lambda w: w.xpos),
        "UFeats": attribute_score(_feats_key),
        "Lemmas": attribute_score(lambda w: w.lemma),
        "UAS": Score.from_counts(uas, n_sys, n_gold),
        "LAS": Score.from_counts(las, n_sys, n_gold),
    })


def score_ner(system_entities: list[Entity], gold_entities: list[Entity]) -> Score:
    """Micro-averaged entity F1: correct iff (type, start, end) all match."""
    def keys(entities):
        return [(e.type, e.start_char, e.end_char) for e in entities]

    gold_keys = keys(gold_entities)
    remaining = dict()
    for key in gold_keys:
        remaining[key] = remaining.get(key, 0) + 1
    correct = 0
    for key in keys(system_entities):
        if remaining.get(key, 0) > 0:
            remaining[key] -= 1
            correct += 1
    return Score.from_counts(correct, len(system_entities), len(gold_keys))


def macro_average(reports: list[MetricReport]) -> MetricReport:
    """Unweighted mean of every metric across reports."""
    if not reports:
        raise ValueError("cannot macro-average zero reports")
    out = {}
    for metric in METRICS:
        out[metric] = Score(
            precision=sum(r[metric].precision for r in reports) / len(reports),
            recall=sum(r[metric].recall for r in reports) / len(reports),
            f1=sum(r[metric].f1 for r in reports) / len(reports),
        )
    return MetricReport(out)
