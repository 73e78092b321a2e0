import json
import os
from dataclasses import dataclass
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=(HealthCheck.too_slow,),
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@dataclass
class ToyModels:
    """A fully trained toy registry shared across integration tests."""

    registry_root: Path
    language: str
    treebank: list       # gold Documents the models were trained on
    ner_sentences: list  # (forms, tags) pairs
    model_files: dict    # processor -> Path (pre-registry copies)


@pytest.fixture(scope="session")
def toy_models(tmp_path_factory) -> ToyModels:
    from annopipe import charlm as charlm_mod
    from annopipe.charlm import train_charlm
    from annopipe.depparse import ParserConfig, train_parser
    from annopipe.lemmatizer import LemmatizerConfig, train_lemmatizer
    from annopipe.mwt import MWTConfig, train_mwt
    from annopipe.ner import NERConfig, train_ner
    from annopipe.registry import ModelRegistry, fetch_models, pack_archive
    from annopipe.tagger import TaggerConfig, train_tagger
    from annopipe.tokenizer import TokenizerConfig, train_tokenizer
    from annopipe.toycorpus import toy_charlm_text, toy_ner_sentences, toy_treebank

    work = tmp_path_factory.mktemp("toy-models")
    treebank = toy_treebank(n_sentences=50, seed=0)
    ner_sentences = toy_ner_sentences(n_sentences=30, seed=2)

    files = {}
    tok = train_tokenizer(treebank, TokenizerConfig(
        epochs=35, hidden=24, char_dim=12, dropout=0.0, seed=7))
    files["tokenize"] = work / "tokenize.apm"
    tok.save(files["tokenize"])

    mwt_model = train_mwt(treebank, MWTConfig(epochs=5, seed=17))
    files["mwt"] = work / "mwt.apm"
    mwt_model.save(files["mwt"])

    tagger_model = train_tagger(treebank, TaggerConfig(
        epochs=35, dropout=0.0, seed=5, word_dim=16, char_dim=8,
        char_hidden=8, hidden=24, upos_dim=8))
    files["pos"] = work / "pos.apm"
    tagger_model.save(files["pos"])

    lemma_model = train_lemmatizer(treebank, LemmatizerConfig(epochs=8, seed=19))
    files["lemma"] = work / "lemma.apm"
    lemma_model.save(files["lemma"])

    parser_model = train_parser(treebank, ParserConfig(
        epochs=45, dropout=0.0, seed=31, word_dim=16, upos_dim=8, feats_dim=6,
        hidden=24, arc_dim=16, label_dim=12))
    files["depparse"] = work / "depparse.apm"
    parser_model.save(files["depparse"])

    lm_config = charlm_mod.CharLMConfig(char_dim=8, hidden=10, epochs=4, lr=0.005, seed=5)
    text = toy_charlm_text(seed=0, n_sentences=40)
    fwd = train_charlm(text, charlm_mod.FORWARD, lm_config)
    bwd = train_charlm(text, charlm_mod.BACKWARD, lm_config)
    ner_model = train_ner(ner_sentences, fwd, bwd, NERConfig(
        word_dim=12, hidden=16, epochs=30, dropout=0.0, seed=9))
    files["ner"] = work / "ner.apm"
    ner_model.save(files["ner"])

    archive = pack_archive("fx", files, work / "fx-models.tgz")
    registry_root = tmp_path_factory.mktemp("registry")
    fetch_models("fx", str(archive), ModelRegistry(registry_root))
    return ToyModels(registry_root=registry_root, language="fx",
                     treebank=treebank, ner_sentences=ner_sentences,
                     model_files=files)
