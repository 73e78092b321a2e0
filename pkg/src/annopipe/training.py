"""Training orchestration behind the ``train`` CLI subcommands.

Every processor trains from ``--train_file``, evaluates against
``--eval_file``/``--gold_file`` (holding out 20% of training sentences when
no dev file is given), and can write predictions to ``--output_file``.
Evaluation inputs are stripped to what the stage legitimately sees: raw text
for the tokenizer, gold tokens for the tagger, gold tags for the parser, and
so on.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from . import charlm, depparse, lemmatizer, mwt, ner, tagger, tokenizer
from .bio import bio_corpus_to_document, entities_to_bio, parse_bio, serialize_bio
from .conllu import read_conllu_file, write_conllu_file
from .corpus import concat_documents, split_dev
from .doc import Document, Sentence, Token, Word
from .evaluate import MetricReport, Score, align_and_score, score_ner

CONLLU_PROCESSORS = ("tokenize", "mwt", "pos", "lemma", "depparse")
TRAINABLE = CONLLU_PROCESSORS + ("ner", "charlm")


@dataclass
class TrainResult:
    model: object
    report: Optional[MetricReport] = None
    ner_score: Optional[Score] = None
    perplexity: Optional[float] = None


def _strip_for(processor: str, doc: Document) -> Document:
    """The legitimate evaluation input for a stage (gold upstream, bare below)."""
    if processor == "mwt":
        # tokenized skeleton: every token collapses to a single surface word
        sentences = []
        for sentence in doc.sentences:
            tokens = []
            words = []
            for token in sentence.tokens:
                wid = len(words) + 1
                tokens.append(Token(id_range=(wid, wid), surface=token.surface,
                                    start_char=token.start_char, end_char=token.end_char,
                                    mwt_flag=token.is_mwt or token.mwt_flag))
                words.append(Word(id=wid, form=token.surface))
            sentences.append(Sentence(tokens=tuple(tokens), words=tuple(words)))
        return Document(text=doc.text, sentences=tuple(sentences))

    keep = {
        "pos": (),
        "lemma": ("upos", "xpos", "feats"),
        "depparse": ("upos", "xpos", "feats", "lemma"),
    }[processor]
    sentences = []
    for sentence in doc.sentences:
        words = tuple(
            Word(id=w.id, form=w.form,
                 **{attr: getattr(w, attr) for attr in keep})
            for w in sentence.words)
        sentences.append(Sentence(tokens=sentence.tokens, words=words))
    return Document(text=doc.text, sentences=tuple(sentences))


def _predict(processor: str, model, docs: list[Document]) -> list[Document]:
    out = []
    for doc in docs:
        if processor == "tokenize":
            out.append(tokenizer.tokenize(model, doc.text))
        elif processor == "mwt":
            out.append(mwt.expand_document(model, _strip_for("mwt", doc)))
        elif processor == "pos":
            out.append(tagger.tag_document(model, _strip_for("pos", doc)))
        elif processor == "lemma":
            out.append(lemmatizer.lemmatize_document(model, _strip_for("lemma", doc)))
        elif processor == "depparse":
            out.append(depparse.parse_document(model, _strip_for("depparse", doc)))
    return out


_CONFIGS = {
    "tokenize": tokenizer.TokenizerConfig,
    "mwt": mwt.MWTConfig,
    "pos": tagger.TaggerConfig,
    "lemma": lemmatizer.LemmatizerConfig,
    "depparse": depparse.ParserConfig,
    "ner": ner.NERConfig,
    "charlm": charlm.CharLMConfig,
}

_TRAINERS = {
    "tokenize": tokenizer.train_tokenizer,
    "mwt": mwt.train_mwt,
    "pos": tagger.train_tagger,
    "lemma": lemmatizer.train_lemmatizer,
    "depparse": depparse.train_parser,
}


def make_config(processor: str, overrides: dict | None):
    cls = _CONFIGS[processor]
    return cls(**(overrides or {}))


def train_conllu_processor(processor: str, train_file, eval_file=None, gold_file=None,
                           output_file=None, config: dict | None = None,
                           save_model=None, log=None) -> TrainResult:
    docs = read_conllu_file(train_file)
    if eval_file is not None:
        train_docs = docs
        eval_docs = read_conllu_file(eval_file)
    else:
        train_docs, eval_docs = split_dev(docs)
        if log and eval_docs:
            log(f"no --eval_file given: held out {len(eval_docs)} of "
                f"{len(eval_docs) + sum(len(d.sentences) for d in train_docs)} "
                f"training sentences as dev")
    model = _TRAINERS[processor](train_docs, make_config(processor, config), log=log)
    if save_model:
        model.save(save_model)
    gold_docs = read_conllu_file(gold_file) if gold_file else eval_docs
    report = None
    if eval_docs:
        predicted = _predict(processor, model, eval_docs)
        if output_file:
            write_conllu_file(output_file, predicted)
        report = align_and_score(concat_documents(predicted), concat_documents(gold_docs))
    return TrainResult(model=model, report=report)


def train_ner_processor(train_file, eval_file=None, gold_file=None, output_file=None,
                        config: dict | None = None, charlm_fwd=None, charlm_bwd=None,
                        save_model=None, log=None) -> TrainResult:
    sentences = parse_bio(Path(train_file).read_text(encoding="utf-8"))
    hashes = {}
    if charlm_fwd and charlm_bwd:
        from .nn.modelio import file_sha256
        fwd = charlm.CharLM.load(charlm_fwd)
        bwd = charlm.CharLM.load(charlm_bwd)
        hashes = {"forward": file_sha256(charlm_fwd), "backward": file_sha256(charlm_bwd)}
    else:
        # no pretrained LMs given: fit small ones on the training text itself
        if log:
            log("no char-LM models given; pretraining small ones on the training text")
        text = " ".join(" ".join(forms) for forms, _ in sentences)
        lm_config = charlm.CharLMConfig(epochs=5)
        fwd = charlm.train_charlm(text, charlm.FORWARD, lm_config, log=log)
        bwd = charlm.train_charlm(text, charlm.BACKWARD, lm_config, log=log)
    if eval_file is not None:
        train_sents = sentences
        eval_sents = parse_bio(Path(eval_file).read_text(encoding="utf-8"))
    else:
        train_docs, eval_docs = split_dev([bio_corpus_to_document(sentences)])
        train_sents = [([w.form for w in s.words], entities_to_bio(s))
                       for d in train_docs for s in d.sentences]
        eval_sents = [([w.form for w in s.words], entities_to_bio(s))
                      for d in eval_docs for s in d.sentences]
        if log and eval_sents:
            log(f"no --eval_file given: held out {len(eval_sents)} sentences as dev")
    model = ner.train_ner(train_sents, fwd, bwd, make_config("ner", config),
                          charlm_hashes=hashes, log=log)
    if save_model:
        model.save(save_model)
    result = TrainResult(model=model)
    if eval_sents:
        gold_sents = (parse_bio(Path(gold_file).read_text(encoding="utf-8"))
                      if gold_file else eval_sents)
        gold_doc = bio_corpus_to_document(gold_sents)
        predicted = [(forms, model.predict_tags(forms)) for forms, _ in eval_sents]
        if output_file:
            Path(output_file).write_text(serialize_bio(predicted), encoding="utf-8")
        pred_doc = bio_corpus_to_document(predicted)
        result.ner_score = score_ner(list(pred_doc.entities), list(gold_doc.entities))
    return result


def train_charlm_processor(train_file, direction, eval_file=None,
                           config: dict | None = None, save_model=None,
                           log=None) -> TrainResult:
    text = Path(train_file).read_text(encoding="utf-8")
    model = charlm.train_charlm(text, direction, make_config("charlm", config), log=log)
    if save_model:
        model.save(save_model)
    result = TrainResult(model=model)
    eval_text = Path(eval_file).read_text(encoding="utf-8") if eval_file else text
    result.perplexity = model.perplexity(eval_text)
    return result
