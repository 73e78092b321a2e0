import pytest
from hypothesis import given

from annopipe.doc import (
    Document,
    DocumentError,
    MorphFeatures,
    Sentence,
    Token,
    Word,
    validate_document,
)

from .strategies import documents, feats


def simple_doc(text="Hi.", spans=((0, 2), (2, 3))):
    tokens = tuple(
        Token(id_range=(i + 1, i + 1), surface=text[a:b], start_char=a, end_char=b)
        for i, (a, b) in enumerate(spans)
    )
    words = tuple(Word(id=i + 1, form=t.surface) for i, t in enumerate(tokens))
    return Document(text=text, sentences=(Sentence(tokens=tokens, words=words),))


class TestMorphFeatures:
    def test_sorted_serialization(self):
        mf = MorphFeatures.from_dict({"Number": ["Plur"], "Case": ["Nom"]})
        assert str(mf) == "Case=Nom|Number=Plur"

    def test_empty_serializes_as_underscore(self):
        assert str(MorphFeatures()) == "_"
        assert not MorphFeatures()

    def test_case_insensitive_attribute_order(self):
        mf = MorphFeatures.from_dict({"number": ["Plur"], "Case": ["Nom"]})
        assert str(mf) == "Case=Nom|number=Plur"

    def test_multi_values_sorted(self):
        mf = MorphFeatures.parse("Case=Nom,Gen")
        assert str(mf) == "Case=Gen,Nom"

    def test_parse_rejects_garbage(self):
        with pytest.raises(DocumentError):
            MorphFeatures.parse("NumberPlur")

    @given(feats)
    def test_parse_str_roundtrip(self, mf):
        assert MorphFeatures.parse(str(mf)) == mf


class TestWord:
    def test_head_equals_id_rejected(self):
        with pytest.raises(DocumentError):
            Word(id=1, form="a", head=1, deprel="dep")

    def test_root_deprel_iff_head_zero(self):
        with pytest.raises(DocumentError):
            Word(id=1, form="a", head=0, deprel="det")
        with pytest.raises(DocumentError):
            Word(id=2, form="a", head=1, deprel="root")
        Word(id=1, form="a", head=0, deprel="root")  # fine


class TestToken:
    def test_is_mwt_iff_range_spans_words(self):
        assert not Token(id_range=(1, 1), surface="a", start_char=0, end_char=1).is_mwt
        assert Token(id_range=(1, 2), surface="du", start_char=0, end_char=2).is_mwt

    def test_rejects_bad_span(self):
        with pytest.raises(DocumentError):
            Token(id_range=(1, 1), surface="a", start_char=3, end_char=1)


class TestValidation:
    def test_valid_doc_passes(self):
        validate_document(simple_doc())

    def test_surface_mismatch_rejected(self):
        doc = simple_doc()
        bad = Token(id_range=(1, 1), surface="XX", start_char=0, end_char=2)
        sent = doc.sentences[0]
        doc = Document(text=doc.text, sentences=(
            Sentence(tokens=(bad, sent.tokens[1]), words=sent.words),))
        with pytest.raises(DocumentError):
            validate_document(doc)

    def test_word_count_must_match_ranges(self):
        sent = simple_doc().sentences[0]
        doc = Document(text="Hi.", sentences=(
            Sentence(tokens=sent.tokens, words=sent.words[:1]),))
        with pytest.raises(DocumentError):
            validate_document(doc)

    def test_two_roots_rejected(self):
        words = (
            Word(id=1, form="Hi", head=0, deprel="root"),
            Word(id=2, form=".", head=0, deprel="root"),
        )
        sent = simple_doc().sentences[0]
        doc = Document(text="Hi.", sentences=(Sentence(tokens=sent.tokens, words=words),))
        with pytest.raises(DocumentError):
            validate_document(doc)

    @given(documents())
    def test_generated_documents_are_valid(self, doc):
        validate_document(doc)

    @given(documents())
    def test_word_token_consistency(self, doc):
        for sentence in doc.sentences:
            covered = sum(t.id_range[1] - t.id_range[0] + 1 for t in sentence.tokens)
            assert covered == len(sentence.words)

    @given(documents())
    def test_offset_fidelity(self, doc):
        for sentence in doc.sentences:
            for token in sentence.tokens:
                assert doc.text[token.start_char:token.end_char] == token.surface
