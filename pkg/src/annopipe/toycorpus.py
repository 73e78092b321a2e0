"""Deterministic synthetic corpora for desk-scale training and tests.

A miniature French-flavored language, small enough for every processor to
overfit in seconds but exercising the full annotation surface: multi-word
tokens ("du" -> de+le, "des" -> de+les, "aux" -> à+les), an apostrophe token
with no trailing space ("l'hôtel"), morphological features, projective and
non-trivial dependency structure, and person/location/organization entities.
"""

from __future__ import annotations

import numpy as np

from .doc import Document, MorphFeatures, Sentence, Token, Word


def _feats(**kwargs) -> MorphFeatures:
    return MorphFeatures.from_dict({k: [v] for k, v in kwargs.items()})


_NOUNS = {
    # form: (lemma, gender, number)
    "chat": ("chat", "Masc", "Sing"), "chats": ("chat", "Masc", "Plur"),
    "chien": ("chien", "Masc", "Sing"), "chiens": ("chien", "Masc", "Plur"),
    "hôtel": ("hôtel", "Masc", "Sing"), "hôtels": ("hôtel", "Masc", "Plur"),
    "pomme": ("pomme", "Fem", "Sing"), "pommes": ("pomme", "Fem", "Plur"),
    "maison": ("maison", "Fem", "Sing"), "maisons": ("maison", "Fem", "Plur"),
    "table": ("table", "Fem", "Sing"), "tables": ("table", "Fem", "Plur"),
}

_DETS = {
    "le": ("le", {"Definite": "Def", "Gender": "Masc", "Number": "Sing"}),
    "la": ("le", {"Definite": "Def", "Gender": "Fem", "Number": "Sing"}),
    "les": ("le", {"Definite": "Def", "Number": "Plur"}),
    "un": ("un", {"Definite": "Ind", "Gender": "Masc", "Number": "Sing"}),
    "une": ("un", {"Definite": "Ind", "Gender": "Fem", "Number": "Sing"}),
}

_VERBS = {"mange": "manger", "voit": "voir", "aime": "aimer", "parle": "parler"}

_SG_MASC = [f for f, (_, g, n) in _NOUNS.items() if g == "Masc" and n == "Sing"]
_SG_FEM = [f for f, (_, g, n) in _NOUNS.items() if g == "Fem" and n == "Sing"]
_PLURALS = [f for f, (_, _, n) in _NOUNS.items() if n == "Plur"]


def _noun(form, head, deprel):
    lemma, gender, number = _NOUNS[form]
    return dict(form=form, lemma=lemma, upos="NOUN", xpos="NC",
                feats=_feats(Gender=gender, Number=number), head=head, deprel=deprel)


def _det(form, head):
    lemma, feats = _DETS[form]
    return dict(form=form, lemma=lemma, upos="DET", xpos="D",
                feats=MorphFeatures.from_dict({k: [v] for k, v in feats.items()}),
                head=head, deprel="det")


def _verb(form, head=0, deprel="root"):
    return dict(form=form, lemma=_VERBS[form], upos="VERB", xpos="V",
                feats=_feats(Mood="Ind", Number="Sing", Person="3", Tense="Pres"),
                head=head, deprel=deprel)


def _punct(form, head):
    return dict(form=form, lemma=form, upos="PUNCT", xpos="PONCT",
                feats=None, head=head, deprel="punct")


def _adp(form, lemma, head):
    return dict(form=form, lemma=lemma, upos="ADP", xpos="P",
                feats=None, head=head, deprel="case")


# A token spec is (surface, [word dicts], space_after).
def _plain(word, space=True):
    return (word["form"], [word], space)


def _mwt(surface, words, space=True):
    return (surface, words, space)


def _sentence_specs(rng: np.random.Generator) -> list:
    """One random sentence from the template pool, fully annotated."""
    template = int(rng.integers(0, 5))
    punct = str(rng.choice([".", "!", "?"]))
    if template == 0:
        # le chat mange la pomme .
        subj_det, subj = "le", str(rng.choice(_SG_MASC))
        obj_det, obj = "la", str(rng.choice(_SG_FEM))
        verb = str(rng.choice(["mange", "voit", "aime"]))
        return [
            _plain(_det(subj_det, 2)), _plain(_noun(subj, 3, "nsubj")),
            _plain(_verb(verb)),
            _plain(_det(obj_det, 5)), _plain(_noun(obj, 3, "obj")),
            _plain(_punct(punct, 3), space=False),
        ]
    if template == 1:
        # les chats voient les maisons .
        subj, obj = str(rng.choice(_PLURALS)), str(rng.choice(_PLURALS))
        verb = str(rng.choice(["mange", "voit", "aime"]))
        return [
            _plain(_det("les", 2)), _plain(_noun(subj, 3, "nsubj")),
            _plain(_verb(verb)),
            _plain(_det("les", 5)), _plain(_noun(obj, 3, "obj")),
            _plain(_punct(punct, 3), space=False),
        ]
    if template == 2:
        # le chien parle du chat .  ("du" -> de + le)
        subj = str(rng.choice(_SG_MASC))
        obl = str(rng.choice(_SG_MASC))
        return [
            _plain(_det("le", 2)), _plain(_noun(subj, 3, "nsubj")),
            _plain(_verb("parle")),
            _mwt("du", [_adp("de", "de", 6), _det("le", 6)]),
            _plain(_noun(obl, 3, "obl")),
            _plain(_punct(punct, 3), space=False),
        ]
    if template == 3:
        # la table parle des chiens . / aux chiens .
        subj = str(rng.choice(_SG_FEM))
        obl = str(rng.choice(_PLURALS))
        if rng.random() < 0.5:
            mwt = _mwt("des", [_adp("de", "de", 6), _det("les", 6)])
        else:
            mwt = _mwt("aux", [_adp("à", "à", 6), _det("les", 6)])
        return [
            _plain(_det("la", 2)), _plain(_noun(subj, 3, "nsubj")),
            _plain(_verb("parle")),
            mwt,
            _plain(_noun(obl, 3, "obl")),
            _plain(_punct(punct, 3), space=False),
        ]
    # l'hôtel voit les chats .  (apostrophe clitic, no space after)
    obj = str(rng.choice(_PLURALS))
    verb = str(rng.choice(["voit", "aime"]))
    return [
        _plain(dict(form="l'", lemma="le", upos="DET", xpos="D",
                    feats=_feats(Definite="Def", Number="Sing"),
                    head=2, deprel="det"), space=False),
        _plain(_noun("hôtel", 3, "nsubj")),
        _plain(_verb(verb)),
        _plain(_det("les", 5)), _plain(_noun(obj, 3, "obj")),
        _plain(_punct(punct, 3), space=False),
    ]


def _assemble(sentence_specs: list[list], base_text: str = "") -> Document:
    """Lay out sentences left to right, single space between them."""
    text = base_text
    sentences = []
    for spec in sentence_specs:
        if text:
            text += " "
        tokens = []
        words = []
        for ti, (surface, word_dicts, space_after) in enumerate(spec):
            first = len(words) + 1
            for wd in word_dicts:
                words.append(Word(id=len(words) + 1, **wd))
            start = len(text)
            text += surface
            tokens.append(Token(
                id_range=(first, len(words)), surface=surface,
                start_char=start, end_char=len(text),
                mwt_flag=len(word_dicts) > 1))
            if space_after and ti < len(spec) - 1:
                text += " "
        sentences.append(Sentence(tokens=tuple(tokens), words=tuple(words)))
    return Document(text=text, sentences=tuple(sentences))


def toy_treebank(n_sentences: int = 50, seed: int = 0,
                 sentences_per_doc: int = 5) -> list[Document]:
    """Fully annotated documents (tokens, MWTs, tags, feats, lemmas, trees)."""
    rng = np.random.default_rng(seed)
    specs = [_sentence_specs(rng) for _ in range(n_sentences)]
    docs = []
    for i in range(0, len(specs), sentences_per_doc):
        docs.append(_assemble(specs[i:i + sentences_per_doc]))
    return docs


_PER_FIRST = ["Marie", "Jean", "Anna", "Paul", "Lucie"]
_PER_LAST = ["Dupont", "Martin", "Bernard"]
_LOCS = ["Paris", "Lyon", "Nice", "Rome"]
_ORGS = ["Acme", "Globex"]


def toy_ner_sentences(n_sentences: int = 30, seed: int = 0) -> list[tuple[list[str], list[str]]]:
    """BIO-tagged sentences over a tiny person/location/organization world."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_sentences):
        template = int(rng.integers(0, 3))
        if template == 0:
            first, last = str(rng.choice(_PER_FIRST)), str(rng.choice(_PER_LAST))
            loc = str(rng.choice(_LOCS))
            forms = [first, last, "visite", loc, "."]
            tags = ["B-PER", "I-PER", "O", "B-LOC", "O"]
        elif template == 1:
            first = str(rng.choice(_PER_FIRST))
            org = str(rng.choice(_ORGS))
            forms = [first, "travaille", "chez", org, "."]
            tags = ["B-PER", "O", "O", "B-ORG", "O"]
        else:
            loc1, loc2 = str(rng.choice(_LOCS)), str(rng.choice(_LOCS))
            forms = [loc1, "et", loc2, "sont", "belles", "."]
            tags = ["B-LOC", "O", "B-LOC", "O", "O", "O"]
        out.append((forms, tags))
    return out


def toy_charlm_text(seed: int = 0, n_sentences: int = 80) -> str:
    """Raw text blending treebank and NER vocabulary for LM pretraining."""
    docs = toy_treebank(n_sentences=n_sentences // 2, seed=seed)
    parts = [doc.text for doc in docs]
    for forms, _ in toy_ner_sentences(n_sentences // 2, seed=seed + 1):
        parts.append(" ".join(forms))
    return " ".join(parts)
