import itertools

import numpy as np
import pytest

from annopipe.doc import Document, Sentence, Token, Word
from annopipe.mwt import (
    MWTConfig,
    MWTModel,
    build_lexicon,
    expand,
    expand_document,
    train_mwt,
)
from annopipe.toycorpus import toy_treebank


def mwt_doc(cases):
    """One-sentence-per-case documents; each case is (surface, expansion)."""
    docs = []
    for surface, expansion in cases:
        words = tuple(Word(id=i + 1, form=f) for i, f in enumerate(expansion))
        token = Token(id_range=(1, len(expansion)), surface=surface,
                      start_char=0, end_char=len(surface),
                      mwt_flag=len(expansion) > 1)
        docs.append(Document(text=surface, sentences=(
            Sentence(tokens=(token,), words=words),)))
    return docs


def flagged(surface):
    return Token(id_range=(1, 1), surface=surface, start_char=0,
                 end_char=len(surface), mwt_flag=True)


class TestLexicon:
    def test_most_frequent_expansion_wins(self):
        docs = mwt_doc([("des", ("de", "les"))] * 3 + [("des", ("de", "le"))])
        lex = build_lexicon(docs)
        assert lex.exact["des"] == ("de", "les")

    def test_plain_word_occurrences_never_enter(self):
        # "des" also occurs as an ordinary single word; only MWTs count.
        docs = mwt_doc([("des", ("de", "les"))] * 3)
        plain = Document(text="des", sentences=(Sentence(
            tokens=(Token(id_range=(1, 1), surface="des", start_char=0, end_char=3),),
            words=(Word(id=1, form="des"),)),))
        lex = build_lexicon(docs + [plain])
        assert lex.exact["des"] == ("de", "les")
        assert set(lex.exact) == {"des"}

    def test_empty_corpus_empty_lexicon(self):
        lex = build_lexicon([])
        assert lex.exact == {} and lex.lower == {}

    def test_tie_breaks_to_first_seen(self):
        docs = mwt_doc([("aux", ("à", "les")), ("aux", ("a", "les"))])
        lex = build_lexicon(docs)
        assert lex.exact["aux"] == ("à", "les")

    def test_lowercase_map(self):
        docs = mwt_doc([("Du", ("de", "le"))])
        lex = build_lexicon(docs)
        assert lex.lower["du"] == ("de", "le")


class TestExpand:
    def test_exact_hit(self):
        lex = build_lexicon(mwt_doc([("des", ("de", "les"))] * 3))
        assert expand(flagged("des"), lex, None) == ["de", "les"]

    def test_lowercase_hit_recased(self):
        lex = build_lexicon(mwt_doc([("du", ("de", "le"))]))
        assert expand(flagged("Du"), lex, None) == ["De", "le"]

    def test_exact_hit_never_routes_to_seq2seq(self):
        lex = build_lexicon(mwt_doc([("des", ("de", "les"))]))

        class Exploding:
            trained = True

            @property
            def seq2seq(self):
                raise AssertionError("lexicon hit must not reach the model")

        assert expand(flagged("des"), lex, Exploding()) == ["de", "les"]

    def test_untrained_model_identity_fallback(self):
        model = train_mwt([], MWTConfig(epochs=0))
        assert not model.trained
        assert expand(flagged("unseen"), model.lexicon, model) == ["unseen"]

    def test_expansion_never_empty(self):
        model = train_mwt(mwt_doc([("du", ("de", "le"))]), MWTConfig(epochs=1))
        for surface in ["du", "Du", "zq", "x"]:
            result = expand(flagged(surface), model.lexicon, model)
            assert len(result) >= 1 and all(result)

    def test_deterministic(self):
        model = train_mwt(mwt_doc([("du", ("de", "le"))]), MWTConfig(epochs=2))
        token = flagged("zzz")
        assert expand(token, model.lexicon, model) == expand(token, model.lexicon, model)


@pytest.fixture(scope="module")
def grammar_model():
    alphabet = "abc"
    parts = [''.join(p) for n in (1, 2) for p in itertools.product(alphabet, repeat=n)]
    cases = [(l + "+" + r, (l, "+" + r)) for l in parts for r in parts]
    rng = np.random.default_rng(5)
    rng.shuffle(cases)
    held_out = cases[:4]
    training = cases[4:]
    model = train_mwt(mwt_doc(training), MWTConfig(epochs=30, seed=11))
    return model, held_out


class TestSeq2SeqToyGrammar:
    """Pattern language: "<left>+<right>" expands to ("<left>", "+<right>")."""

    def test_held_out_tokens_split_correctly(self, grammar_model):
        model, held_out = grammar_model
        for surface, expansion in held_out:
            assert surface not in model.lexicon.exact
            got = expand(flagged(surface), model.lexicon, model)
            assert got == list(expansion), (surface, got)


@pytest.fixture(scope="module")
def model():
    return train_mwt(toy_treebank(30, seed=2), MWTConfig(epochs=3))


class TestExpandDocument:
    def test_flagged_tokens_expanded_and_renumbered(self, model):
        doc = Document(text="parle du chat", sentences=(Sentence(
            tokens=(
                Token(id_range=(1, 1), surface="parle", start_char=0, end_char=5),
                Token(id_range=(2, 2), surface="du", start_char=6, end_char=8, mwt_flag=True),
                Token(id_range=(3, 3), surface="chat", start_char=9, end_char=13),
            ),
            words=(Word(id=1, form="parle"), Word(id=2, form="du"), Word(id=3, form="chat")),
        ),))
        out = expand_document(model, doc)
        sent = out.sentences[0]
        assert [w.form for w in sent.words] == ["parle", "de", "le", "chat"]
        assert sent.tokens[1].id_range == (2, 3)
        assert sent.tokens[1].is_mwt
        assert sent.tokens[2].id_range == (4, 4)

    def test_already_expanded_tokens_kept(self, model):
        doc = toy_treebank(6, seed=4)[0]
        out = expand_document(model, doc)
        assert [w.form for w in out.sentences[0].words] == \
            [w.form for w in doc.sentences[0].words]

    def test_save_load_roundtrip(self, model, tmp_path):
        path = tmp_path / "mwt.apm"
        model.save(path)
        loaded = MWTModel.load(path)
        assert loaded.lexicon.exact == model.lexicon.exact
        token = flagged("des")
        assert expand(token, loaded.lexicon, loaded) == expand(token, model.lexicon, model)
