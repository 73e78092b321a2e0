import pytest
from hypothesis import given, settings

from annopipe.corpus import concat_documents, document_from_sentences, split_dev
from annopipe.doc import validate_document
from annopipe.toycorpus import toy_treebank

from .strategies import documents


class TestConcat:
    def test_concat_preserves_sentences_and_validity(self):
        docs = toy_treebank(10, seed=0)
        merged = concat_documents(docs)
        validate_document(merged)
        assert len(merged.sentences) == sum(len(d.sentences) for d in docs)
        forms = [w.form for w in merged.iter_words()]
        assert forms == [w.form for d in docs for w in d.iter_words()]

    @given(documents(max_sentences=3))
    @settings(max_examples=25)
    def test_concat_random_documents_valid(self, doc):
        merged = concat_documents([doc, doc])
        validate_document(merged)


class TestSplitDev:
    def test_deterministic(self):
        docs = toy_treebank(20, seed=1)
        a = split_dev(docs, 0.2, seed=99)
        b = split_dev(docs, 0.2, seed=99)
        assert [d.text for d in a[0]] == [d.text for d in b[0]]
        assert [d.text for d in a[1]] == [d.text for d in b[1]]

    def test_fraction_honored(self):
        docs = toy_treebank(20, seed=1)
        train, dev = split_dev(docs, 0.2)
        assert len(dev) == 4  # 20% of 20 sentences
        assert sum(len(d.sentences) for d in train) == 16

    def test_all_parts_valid_and_disjoint(self):
        docs = toy_treebank(15, seed=2)
        train, dev = split_dev(docs, 0.2)
        for doc in train + dev:
            validate_document(doc)
        train_texts = [doc.text[s.start_char:s.end_char]
                       for doc in train for s in doc.sentences]
        dev_texts = [d.text for d in dev]
        assert len(train_texts) + len(dev_texts) == 15

    def test_single_sentence_corpus_keeps_training_side(self):
        docs = toy_treebank(1, seed=3)
        train, dev = split_dev(docs, 0.2)
        assert train == docs and dev == []

    def test_different_seeds_differ(self):
        docs = toy_treebank(20, seed=1)
        _, dev_a = split_dev(docs, 0.2, seed=1)
        _, dev_b = split_dev(docs, 0.2, seed=2)
        assert [d.text for d in dev_a] != [d.text for d in dev_b]
