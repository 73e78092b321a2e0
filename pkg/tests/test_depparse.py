import numpy as np
import pytest

from annopipe.depparse import (
    ArcScoreMatrix,
    ParserConfig,
    ParserModel,
    assign_labels,
    aux_losses,
    distance_bucket,
    parse_document,
    parse_sentence,
    score_arcs,
    sentence_loss,
    train_parser,
)
from annopipe.mst import is_arborescence
from annopipe.nn.gradcheck import max_relative_error
from annopipe.nn.vocab import Vocab
from annopipe.toycorpus import toy_treebank

TINY = ParserConfig(word_dim=5, upos_dim=3, feats_dim=2, hidden=4, arc_dim=4,
                    label_dim=3, epochs=0, dropout=0.0, seed=2)


@pytest.fixture(scope="module")
def trained():
    corpus = toy_treebank(n_sentences=50, seed=14)
    config = ParserConfig(epochs=40, dropout=0.0, seed=31,
                          word_dim=16, upos_dim=8, feats_dim=6, hidden=24,
                          arc_dim=16, label_dim=12)
    return corpus, train_parser(corpus, config)


class TestDistanceBuckets:
    def test_bucket_edges(self):
        assert distance_bucket(1) == 0
        assert distance_bucket(2) == 1
        assert distance_bucket(3) == 2
        assert distance_bucket(4) == 3
        assert distance_bucket(5) == 4
        assert distance_bucket(6) == 4  # 5-8 bucket
        assert distance_bucket(8) == 4
        assert distance_bucket(9) == 5
        assert distance_bucket(40) == 5


class TestAuxTargets:
    def test_linearization_target_after(self):
        # gold arc with h < d: dependent follows its head.
        corpus = toy_treebank(2, seed=1)
        model = train_parser(corpus, TINY)
        sent = corpus[0].sentences[0]
        rows = [(w.form, w.upos, w.feats) for w in sent.words]
        head_repr, dep_repr, _, _ = model.encode(rows)
        # smoke: aux loss evaluates and is positive for a non-degenerate model
        loss = aux_losses(model, head_repr, dep_repr, [w.head for w in sent.words])
        assert loss.item() > 0


class TestAssignLabels:
    def test_root_head_forces_root_label(self):
        vocab = Vocab(["det", "nsubj", "root"], unk=None)
        scores = np.zeros((3, 2, 3))
        scores[0, 0, 0] = 100.0  # would prefer "det" if not forced
        rels = assign_labels(scores, [0, 1], vocab)
        assert rels[0] == "root"

    def test_nonroot_head_excludes_root_label(self):
        vocab = Vocab(["det", "root"], unk=None)
        scores = np.zeros((3, 2, 2))
        scores[1, 1, 1] = 100.0  # "root" has the best score but is masked
        rels = assign_labels(scores, [0, 1], vocab)
        assert rels[1] == "det"

    def test_tie_breaks_to_lowest_index(self):
        vocab = Vocab(["amod", "det", "root"], unk=None)
        scores = np.zeros((3, 2, 3))  # all tied: lowest index wins
        rels = assign_labels(scores, [0, 1], vocab)
        assert rels == ["root", "amod"]


class TestTraining:
    def test_rejects_unheaded_corpus(self):
        from annopipe.bio import bio_corpus_to_document
        doc = bio_corpus_to_document([(["a"], ["O"])])
        with pytest.raises(ValueError):
            train_parser([doc])

    def test_overfits_uas_95(self, trained):
        corpus, model = trained
        correct = total = 0
        for doc in corpus:
            for sentence in doc.sentences:
                rows = [(w.form, w.upos, w.feats) for w in sentence.words]
                heads, _ = parse_sentence(model, rows)
                for word, head in zip(sentence.words, heads):
                    correct += word.head == head
                    total += 1
        assert correct / total >= 0.95

    def test_las_overfits_too(self, trained):
        corpus, model = trained
        correct = total = 0
        for doc in corpus:
            for sentence in doc.sentences:
                rows = [(w.form, w.upos, w.feats) for w in sentence.words]
                heads, rels = parse_sentence(model, rows)
                for word, head, rel in zip(sentence.words, heads, rels):
                    correct += (word.head == head and word.deprel == rel)
                    total += 1
        assert correct / total >= 0.90


class TestDecoding:
    def test_output_is_always_valid_tree(self, trained):
        _, model = trained
        rng = np.random.default_rng(0)
        forms = ["le", "chat", "mange", "la", "pomme", ".", "zz"]
        for _ in range(10):
            n = int(rng.integers(1, len(forms) + 1))
            rows = [(f, None, None) for f in rng.choice(forms, size=n)]
            heads, rels = parse_sentence(model, rows)
            assert is_arborescence([0] + heads)
            for d, (h, r) in enumerate(zip(heads, rels), start=1):
                assert (h == 0) == (r == "root")

    def test_score_matrix_shape_and_masking(self, trained):
        _, model = trained
        rows = [("le", "DET", None), ("chat", "NOUN", None)]
        matrix = score_arcs(model, rows)
        assert matrix.arc.shape == (3, 3)
        assert matrix.labels.shape == (3, 2, len(model.rel_vocab))
        assert np.isneginf(matrix.arc[1, 1]) and np.isneginf(matrix.arc[2, 2])
        assert np.isneginf(matrix.arc[:, 0]).all()
        off = matrix.arc[np.isfinite(matrix.arc)]
        assert off.size == 4  # (0,1),(0,2),(1,2),(2,1)

    def test_label_scores_match_biaffine_head(self, trained):
        # the dense einsum path must agree with the Biaffine layer itself
        import annopipe.nn.autodiff as ad
        _, model = trained
        rows = [("le", "DET", None), ("chat", "NOUN", None), (".", "PUNCT", None)]
        head_repr, dep_repr, label_head, label_dep = model.encode(rows)
        matrix = score_arcs(model, rows)
        L = model.config.label_dim
        for h in range(4):
            for d in range(3):
                h_vec = ad.reshape(ad.narrow(label_head, 0, h, 1), (L,))
                d_vec = ad.reshape(ad.narrow(label_dep, 0, d, 1), (L,))
                expected = model.label_scorer(h_vec, d_vec).data
                np.testing.assert_allclose(matrix.labels[h, d], expected, atol=1e-9)

    def test_document_roundtrip_annotations(self, trained):
        _, model = trained
        doc = toy_treebank(3, seed=15)[0]
        from dataclasses import replace
        bare = doc
        parsed = parse_document(model, bare)
        assert parsed.text == doc.text
        for sentence in parsed.sentences:
            heads = [w.head for w in sentence.words]
            assert is_arborescence([0] + heads)


class TestGradients:
    @pytest.mark.parametrize("seed", range(3))
    def test_full_loss_with_aux_matches_finite_differences(self, seed):
        corpus = toy_treebank(n_sentences=3, seed=40 + seed)
        model = train_parser(corpus, TINY)
        sentence = corpus[0].sentences[0]
        words = sentence.words[:3]
        rows = [(w.form, w.upos, w.feats) for w in words]
        # re-head the 3-word prefix into a small valid tree
        heads = [0, 1, 1]
        rels = [w.deprel for w in words]
        rels[0] = "root"

        def loss():
            return sentence_loss(model, rows, heads, rels)

        err = max_relative_error(loss, model.params.all())
        assert err < 1e-4, err


class TestSaveLoad:
    def test_roundtrip(self, trained, tmp_path):
        _, model = trained
        path = tmp_path / "parser.apm"
        model.save(path)
        loaded = ParserModel.load(path)
        rows = [("le", "DET", None), ("chat", "NOUN", None)]
        assert parse_sentence(loaded, rows) == parse_sentence(model, rows)
