#!/usr/bin/env python3
"""Train every processor on the synthetic toy corpus and install a registry.

Produces a ready-to-serve model registry (default: ./toy-registry, language
code "fx") plus the fetchable archive it was installed from.  Takes a few
minutes on one CPU core.

    python scripts/build_toy_models.py --out toy-registry
    annopipe annotate --lang fx --registry toy-registry <<< "le chat mange la pomme ."
"""

import argparse
import sys
import time
from pathlib import Path

from annopipe.charlm import BACKWARD, FORWARD, CharLMConfig, train_charlm
from annopipe.depparse import ParserConfig, train_parser
from annopipe.lemmatizer import LemmatizerConfig, train_lemmatizer
from annopipe.mwt import MWTConfig, train_mwt
from annopipe.ner import NERConfig, train_ner
from annopipe.registry import ModelRegistry, fetch_models, pack_archive
from annopipe.tagger import TaggerConfig, train_tagger
from annopipe.tokenizer import TokenizerConfig, train_tokenizer
from annopipe.toycorpus import toy_charlm_text, toy_ner_sentences, toy_treebank


def log(message):
    print(message, file=sys.stderr, flush=True)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="toy-registry", help="registry root to create")
    parser.add_argument("--lang", default="fx")
    parser.add_argument("--sentences", type=int, default=50)
    args = parser.parse_args()

    out = Path(args.out)
    work = out / "_build"
    work.mkdir(parents=True, exist_ok=True)
    treebank = toy_treebank(n_sentences=args.sentences, seed=0)
    ner_sentences = toy_ner_sentences(n_sentences=30, seed=2)
    files = {}

    def step(name, fn):
        started = time.time()
        model = fn()
        path = work / f"{name}.apm"
        model.save(path)
        files[name] = path
        log(f"trained {name} in {time.time() - started:.1f}s -> {path}")

    step("tokenize", lambda: train_tokenizer(treebank, TokenizerConfig(
        epochs=35, hidden=24, char_dim=12, dropout=0.0, seed=7)))
    step("mwt", lambda: train_mwt(treebank, MWTConfig(epochs=5, seed=17)))
    step("pos", lambda: train_tagger(treebank, TaggerConfig(
        epochs=35, dropout=0.0, seed=5, word_dim=16, char_dim=8,
        char_hidden=8, hidden=24, upos_dim=8)))
    step("lemma", lambda: train_lemmatizer(treebank, LemmatizerConfig(epochs=8, seed=19)))
    step("depparse", lambda: train_parser(treebank, ParserConfig(
        epochs=45, dropout=0.0, seed=31, word_dim=16, upos_dim=8, feats_dim=6,
        hidden=24, arc_dim=16, label_dim=12)))

    lm_config = CharLMConfig(char_dim=8, hidden=10, epochs=4, lr=0.005, seed=5)
    text = toy_charlm_text(seed=0, n_sentences=40)
    fwd = train_charlm(text, FORWARD, lm_config)
    bwd = train_charlm(text, BACKWARD, lm_config)
    step("ner", lambda: train_ner(ner_sentences, fwd, bwd, NERConfig(
        word_dim=12, hidden=16, epochs=30, dropout=0.0, seed=9)))

    archive = pack_archive(args.lang, files, out / f"{args.lang}-models.tgz")
    installed = fetch_models(args.lang, str(archive), ModelRegistry(out))
    log(f"installed {args.lang}: {', '.join(installed)} under {out}")
    log(f"try: annopipe annotate --lang {args.lang} --registry {out} "
        f"<<< 'la table parle des chiens .'")


if __name__ == "__main__":
    main()
