import numpy as np
import pytest

from annopipe.doc import Document, Sentence, Token, Word
from annopipe.lemmatizer import (
    IDENTITY,
    LOWERCASE,
    SEQ2SEQ,
    LemmatizerConfig,
    LemmatizerModel,
    build_lemma_dict,
    edit_label,
    lemmatize,
    lemmatize_document,
    train_lemmatizer,
)
from annopipe.toycorpus import toy_treebank


def lemma_doc(triples):
    """One single-word sentence per (form, upos, lemma) triple."""
    sentences = []
    text_parts = []
    pos = 0
    for form, upos, lemma in triples:
        if text_parts:
            text_parts.append(" ")
            pos += 1
        token = Token(id_range=(1, 1), surface=form, start_char=pos,
                      end_char=pos + len(form))
        word = Word(id=1, form=form, lemma=lemma, upos=upos)
        sentences.append(Sentence(tokens=(token,), words=(word,)))
        text_parts.append(form)
        pos += len(form)
    return [Document(text="".join(text_parts), sentences=tuple(sentences))]


class TestDictionary:
    def test_did_do(self):
        d = build_lemma_dict(lemma_doc([("did", "VERB", "do")]))
        assert d.lookup("did", "VERB") == "do"

    def test_empty_corpus(self):
        d = build_lemma_dict([])
        assert d.by_form_upos == {} and d.by_form == {}

    def test_ambiguous_form_distinct_per_upos(self):
        d = build_lemma_dict(lemma_doc([
            ("left", "VERB", "leave"), ("left", "ADJ", "left")]))
        assert d.lookup("left", "VERB") == "leave"
        assert d.lookup("left", "ADJ") == "left"

    def test_form_upos_consulted_before_form(self):
        d = build_lemma_dict(lemma_doc([
            ("saw", "VERB", "see"), ("saw", "NOUN", "saw"), ("saw", "NOUN", "saw")]))
        # form-only map prefers the 2x NOUN reading, but the pair map wins
        assert d.by_form["saw"] == "saw"
        assert d.lookup("saw", "VERB") == "see"

    def test_most_frequent_wins_ties_first_seen(self):
        d = build_lemma_dict(lemma_doc([
            ("x", "NOUN", "a"), ("x", "NOUN", "b"), ("x", "NOUN", "b")]))
        assert d.lookup("x", "NOUN") == "b"
        tied = build_lemma_dict(lemma_doc([("y", "NOUN", "p"), ("y", "NOUN", "q")]))
        assert tied.lookup("y", "NOUN") == "p"

    def test_unseen_upos_falls_back_to_form_map(self):
        d = build_lemma_dict(lemma_doc([("did", "VERB", "do")]))
        assert d.lookup("did", "AUX") == "do"


class TestEditLabels:
    def test_mechanical_derivation(self):
        assert edit_label("run", "run") == IDENTITY
        assert edit_label("The", "the") == LOWERCASE
        assert edit_label("did", "do") == SEQ2SEQ
        # lowercase equal to form counts as identity, not lowercase
        assert edit_label("the", "the") == IDENTITY


@pytest.fixture(scope="module")
def routing_model():
    """URL-shaped forms train as identity, capitalized forms as lowercase,
    inflected verbs as full decodes."""
    triples = []
    urls = ["http://a.bc", "http://x.yz", "www.qq.fr", "http://ab.cd/e",
            "www.ab.xy", "http://c.de"]
    triples += [(u, "X", u) for u in urls]
    caps = ["Le", "La", "Les", "Des", "Tables", "Chats", "Maisons", "Pommes"]
    triples += [(c, "NOUN", c.lower()) for c in caps]
    verbs = [("mange", "manger"), ("parle", "parler"), ("aime", "aimer"),
             ("voit", "voir"), ("donne", "donner"), ("pense", "penser")]
    triples += [(f, "VERB", l) for f, l in verbs]
    return train_lemmatizer(lemma_doc(triples), LemmatizerConfig(epochs=60, seed=3))


class TestLemmatize:
    def test_dictionary_hit_is_absolute(self, routing_model):
        # even with a trained model attached, the dictionary answer wins
        d = build_lemma_dict(lemma_doc([("did", "VERB", "do")]))
        assert lemmatize(d, routing_model, "did", "VERB") == "do"

    def test_unseen_url_routes_identity(self, routing_model):
        url = "https://example.com/x"
        assert url not in routing_model.dictionary.by_form
        assert lemmatize(routing_model.dictionary, routing_model, url, "X") == url

    def test_unseen_capitalized_routes_lowercase(self, routing_model):
        assert lemmatize(routing_model.dictionary, routing_model, "Tes", "NOUN") == "tes"

    def test_training_pairs_exact_via_dictionary(self, routing_model):
        # dictionary path: every training pair resolves with no neural call
        for (form, upos), lemma in routing_model.dictionary.by_form_upos.items():
            assert lemmatize(routing_model.dictionary, None, form, upos) == lemma

    def test_empty_form_rejected(self, routing_model):
        with pytest.raises(ValueError):
            lemmatize(routing_model.dictionary, routing_model, "", "NOUN")

    def test_untrained_model_copies(self):
        model = train_lemmatizer([], LemmatizerConfig(epochs=0))
        assert not model.trained
        assert lemmatize(model.dictionary, model, "Anything", "X") == "Anything"

    def test_output_nonempty_for_random_forms(self, routing_model):
        rng = np.random.default_rng(0)
        alphabet = "abcxyz."
        for _ in range(20):
            form = "".join(rng.choice(list(alphabet), size=rng.integers(1, 8)))
            out = lemmatize(routing_model.dictionary, routing_model, form, "NOUN")
            assert isinstance(out, str) and out

    def test_save_load_identical(self, routing_model, tmp_path):
        path = tmp_path / "lemma.apm"
        routing_model.save(path)
        loaded = LemmatizerModel.load(path)
        for form, upos in [("Tes", "NOUN"), ("https://e.co", "X"), ("zzz", "VERB")]:
            assert (lemmatize(loaded.dictionary, loaded, form, upos)
                    == lemmatize(routing_model.dictionary, routing_model, form, upos))


class TestLemmatizeDocument:
    def test_toy_treebank_training_lemmas_exact(self):
        corpus = toy_treebank(20, seed=6)
        model = train_lemmatizer(corpus, LemmatizerConfig(epochs=0))
        model.trained = False  # dictionary alone must already be exact
        for doc in corpus:
            stripped = Document(text=doc.text, sentences=tuple(
                Sentence(tokens=s.tokens,
                         words=tuple(Word(id=w.id, form=w.form, upos=w.upos)
                                     for w in s.words))
                for s in doc.sentences))
            out = lemmatize_document(model, stripped)
            got = [w.lemma for w in out.iter_words()]
            gold = [w.lemma for w in doc.iter_words()]
            assert got == gold
