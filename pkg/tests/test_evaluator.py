import pytest
from hypothesis import given, settings

from annopipe.conllu import parse_conllu
from annopipe.doc import Document, Entity, Sentence, Token, Word
from annopipe.evaluate import (
    METRICS,
    EvaluationError,
    MetricReport,
    Score,
    align_and_score,
    macro_average,
    score_ner,
)
from annopipe.toycorpus import toy_treebank

from .strategies import documents


def doc_from_tokens(token_groups, text=None):
    """token_groups: list of sentences, each a list of either strings or
    (surface, [word forms]) MWT specs; heads form a left-branching chain."""
    sentences = []
    pieces = []
    pos = 0
    for group in token_groups:
        tokens = []
        words = []
        for item in group:
            if pieces:
                pieces.append(" ")
                pos += 1
            surface, forms = item if isinstance(item, tuple) else (item, [item])
            first = len(words) + 1
            for form in forms:
                wid = len(words) + 1
                head = 0 if wid == 1 else wid - 1
                words.append(Word(id=wid, form=form, lemma=form.lower(), upos="X",
                                  head=head, deprel="root" if head == 0 else "dep"))
            tokens.append(Token(id_range=(first, len(words)), surface=surface,
                                start_char=pos, end_char=pos + len(surface),
                                mwt_flag=len(forms) > 1))
            pieces.append(surface)
            pos += len(surface)
        sentences.append(Sentence(tokens=tuple(tokens), words=tuple(words)))
    return Document(text=text or "".join(pieces), sentences=tuple(sentences))


class TestIdentity:
    def test_identity_scores_100_everywhere(self):
        doc = toy_treebank(6, seed=0)[0]
        report = align_and_score(doc, doc)
        for metric in METRICS:
            assert report[metric].f1 == pytest.approx(100.0)
            assert report[metric].precision == pytest.approx(100.0)
            assert report[metric].recall == pytest.approx(100.0)

    def test_self_evaluation_of_parsed_gold_file(self):
        from annopipe.conllu import serialize_conllu
        doc = toy_treebank(5, seed=1)[0]
        reparsed, = parse_conllu(serialize_conllu(doc))
        report = align_and_score(reparsed, doc)
        assert all(report[m].f1 == pytest.approx(100.0) for m in METRICS)

    @given(documents())
    @settings(max_examples=30)
    def test_random_document_self_scores_100(self, doc):
        report = align_and_score(doc, doc)
        assert all(report[m].f1 == pytest.approx(100.0) for m in METRICS)


class TestTokenizationMismatch:
    def test_merged_tokens_score_zero(self):
        # gold tokens [ab][c]; system [abc]: P=0/1, R=0/2, F1=0; Words likewise.
        gold = doc_from_tokens([["ab", "c"]])
        system = doc_from_tokens([["abc"]], text="ab c")
        report = align_and_score(system, gold)
        assert report["Tokens"].precision == 0.0
        assert report["Tokens"].recall == 0.0
        assert report["Tokens"].f1 == 0.0
        assert report["Words"].f1 == 0.0

    def test_partial_token_overlap(self):
        gold = doc_from_tokens([["ab", "c", "d"]])
        system = doc_from_tokens([["ab", "cd"]], text="ab c d")
        report = align_and_score(system, gold)
        # "ab" matches; "cd" vs "c","d" do not
        assert report["Tokens"].precision == pytest.approx(100 * 1 / 2)
        assert report["Tokens"].recall == pytest.approx(100 * 1 / 3)

    def test_character_stream_mismatch_reports_offset(self):
        gold = doc_from_tokens([["abc"]])
        system = doc_from_tokens([["abd"]])
        with pytest.raises(EvaluationError, match="offset 2"):
            align_and_score(system, gold)

    def test_whitespace_differences_ignored(self):
        gold = doc_from_tokens([["ab", "c"]])
        system = doc_from_tokens([["ab", "c"]], text="ab  c")
        # system built over different raw text but same token stream
        sys2 = Document(text="ab  c", sentences=(Sentence(
            tokens=(Token(id_range=(1, 1), surface="ab", start_char=0, end_char=2),
                    Token(id_range=(2, 2), surface="c", start_char=4, end_char=5)),
            words=gold.sentences[0].words), ))
        report = align_and_score(sys2, gold)
        assert report["Tokens"].f1 == pytest.approx(100.0)


class TestMWTAlignment:
    GOLD = """\
# text = la table parle des chiens
1\tla\tle\tDET\t_\t_\t2\tdet\t_\t_
2\ttable\ttable\tNOUN\t_\t_\t3\tnsubj\t_\t_
3\tparle\tparler\tVERB\t_\t_\t0\troot\t_\t_
4-5\tdes\t_\t_\t_\t_\t_\t_\t_\t_
4\tde\tde\tADP\t_\t_\t6\tcase\t_\t_
5\tles\tle\tDET\t_\t_\t6\tdet\t_\t_
6\tchiens\tchien\tNOUN\t_\t_\t3\tobl\t_\t_
"""
    SYSTEM_PLAIN = GOLD.replace(
        "4-5\tdes\t_\t_\t_\t_\t_\t_\t_\t_\n"
        "4\tde\tde\tADP\t_\t_\t6\tcase\t_\t_\n"
        "5\tles\tle\tDET\t_\t_\t6\tdet\t_\t_\n"
        "6\tchiens\tchien\tNOUN\t_\t_\t3\tobl\t_\t_\n",
        "4\tdes\tdes\tDET\t_\t_\t5\tdet\t_\t_\n"
        "5\tchiens\tchien\tNOUN\t_\t_\t3\tobl\t_\t_\n")

    def test_unexpanded_mwt_words_unaligned(self):
        gold, = parse_conllu(self.GOLD)
        system, = parse_conllu(self.SYSTEM_PLAIN)
        report = align_and_score(system, gold)
        # tokens identical (same spans), but gold has 6 words vs system 5;
        # "des" aligns with neither "de" nor "les"
        assert report["Tokens"].f1 == pytest.approx(100.0)
        assert report["Words"].precision == pytest.approx(100 * 4 / 5)
        assert report["Words"].recall == pytest.approx(100 * 4 / 6)

    def test_mwt_with_matching_forms_aligns_by_lcs(self):
        gold, = parse_conllu(self.GOLD)
        # system expands "des" to de+des (second form wrong)
        system_text = self.GOLD.replace(
            "5\tles\tle\tDET\t_\t_\t6\tdet\t_\t_", "5\tdes\tle\tDET\t_\t_\t6\tdet\t_\t_")
        system, = parse_conllu(system_text)
        report = align_and_score(system, gold)
        assert report["Words"].precision == pytest.approx(100 * 5 / 6)


class TestAttachment:
    def test_three_of_four_heads_gives_uas_75(self):
        gold = doc_from_tokens([["a", "b", "c", "d"]])
        words = list(gold.sentences[0].words)
        words[3] = Word(id=4, form="d", lemma="d", upos="X", head=1, deprel="dep")
        system = Document(text=gold.text, sentences=(Sentence(
            tokens=gold.sentences[0].tokens, words=tuple(words)),))
        report = align_and_score(system, gold)
        assert report["UAS"].f1 == pytest.approx(75.0)

    def test_root_matches_root(self):
        gold = doc_from_tokens([["a", "b"]])
        report = align_and_score(gold, gold)
        assert report["UAS"].f1 == pytest.approx(100.0)

    def test_las_requires_deprel_match(self):
        gold = doc_from_tokens([["a", "b"]])
        words = list(gold.sentences[0].words)
        words[1] = Word(id=2, form="b", lemma="b", upos="X", head=1, deprel="amod")
        system = Document(text=gold.text, sentences=(Sentence(
            tokens=gold.sentences[0].tokens, words=tuple(words)),))
        report = align_and_score(system, gold)
        assert report["UAS"].f1 == pytest.approx(100.0)
        assert report["LAS"].f1 == pytest.approx(50.0)


class TestMetricProperties:
    def test_token_symmetry_swaps_precision_recall(self):
        gold = doc_from_tokens([["ab", "c", "d"]])
        system = doc_from_tokens([["ab", "cd"]], text="ab c d")
        fwd = align_and_score(system, gold)
        rev = align_and_score(gold, system)
        assert fwd["Tokens"].precision == pytest.approx(rev["Tokens"].recall)
        assert fwd["Tokens"].recall == pytest.approx(rev["Tokens"].precision)

    def test_upos_monotone_under_corruption(self):
        doc = toy_treebank(4, seed=2)[0]
        previous = 100.0
        words = list(doc.sentences[0].words)
        for i in range(len(words)):
            corrupted = words.copy()
            for j in range(i + 1):
                corrupted[j] = Word(**{**corrupted[j].__dict__, "upos": "WRONG"})
            system = Document(text=doc.text, sentences=(
                Sentence(tokens=doc.sentences[0].tokens, words=tuple(corrupted)),
                *doc.sentences[1:]))
            f1 = align_and_score(system, doc)["UPOS"].f1
            assert f1 <= previous + 1e-9
            previous = f1

    def test_ufeats_compared_canonically(self):
        from annopipe.doc import MorphFeatures
        gold = doc_from_tokens([["x"]])
        gw = Word(id=1, form="x", upos="X", head=0, deprel="root",
                  feats=MorphFeatures.parse("Number=Plur|Case=Nom"))
        sw = Word(id=1, form="x", upos="X", head=0, deprel="root",
                  feats=MorphFeatures.parse("Case=Nom|Number=Plur"))
        gold = Document(text="x", sentences=(Sentence(
            tokens=gold.sentences[0].tokens, words=(gw,)),))
        system = Document(text="x", sentences=(Sentence(
            tokens=gold.sentences[0].tokens, words=(sw,)),))
        assert align_and_score(system, gold)["UFeats"].f1 == pytest.approx(100.0)


class TestNERScore:
    def ent(self, etype, start, end):
        return Entity(type=etype, start_char=start, end_char=end,
                      text="x" * (end - start), word_span=(1, 1))

    def test_exact_match_is_100(self):
        gold = [self.ent("PER", 0, 5), self.ent("LOC", 10, 14)]
        score = score_ner(list(gold), gold)
        assert score.f1 == pytest.approx(100.0)

    def test_two_of_three_plus_spurious(self):
        gold = [self.ent("PER", 0, 5), self.ent("LOC", 10, 14), self.ent("ORG", 20, 24)]
        system = [gold[0], gold[1], self.ent("PER", 30, 33)]
        score = score_ner(system, gold)
        assert score.precision == pytest.approx(100 * 2 / 3)
        assert score.recall == pytest.approx(100 * 2 / 3)
        assert round(score.f1, 2) == 66.67

    def test_empty_system_zero(self):
        gold = [self.ent("PER", 0, 5)]
        assert score_ner([], gold).f1 == 0.0

    def test_type_must_match(self):
        gold = [self.ent("PER", 0, 5)]
        system = [self.ent("LOC", 0, 5)]
        assert score_ner(system, gold).f1 == 0.0


class TestMacroAverage:
    def test_single_report_identity(self):
        doc = toy_treebank(2, seed=3)[0]
        report = align_and_score(doc, doc)
        assert macro_average([report]).to_json() == report.to_json()

    def test_80_60_averages_to_70(self):
        def fake(f1):
            return MetricReport({m: Score(f1, f1, f1) for m in METRICS})

        avg = macro_average([fake(80.0), fake(60.0)])
        assert all(avg[m].f1 == pytest.approx(70.0) for m in METRICS)

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError):
            macro_average([])


class TestReportFormatting:
    def test_two_decimal_text_table(self):
        doc = toy_treebank(2, seed=4)[0]
        text = align_and_score(doc, doc).to_text()
        assert "Tokens" in text and "100.00" in text
        assert len(text.splitlines()) == 2 + len(METRICS)
