"""Pipeline orchestration: processor loading, prerequisite validation, and
document threading in the fixed order tokenize > mwt > pos > lemma >
depparse > ner."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from . import depparse, lemmatizer, mwt, ner, tagger, tokenizer
from .doc import Document, validate_document
from .registry import ModelRegistry, RegistryError

PROCESSOR_ORDER = ("tokenize", "mwt", "pos", "lemma", "depparse", "ner")

PREREQUISITES = {
    "tokenize": (),
    "mwt": ("tokenize",),
    "pos": ("tokenize",),
    "lemma": ("tokenize", "pos"),
    "depparse": ("tokenize", "pos", "lemma"),
    "ner": ("tokenize",),
}

_LOADERS = {
    "tokenize": tokenizer.TokenizerModel.load,
    "mwt": mwt.MWTModel.load,
    "pos": tagger.TaggerModel.load,
    "lemma": lemmatizer.LemmatizerModel.load,
    "depparse": depparse.ParserModel.load,
    "ner": ner.NERModel.load,
}


class PipelineError(RuntimeError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    language: str
    processors: tuple[str, ...] = ()  # empty: everything available for the language
    registry_root: object = None      # None: ANNOPIPE_REGISTRY or ~/.annopipe/models
    model_paths: dict = field(default_factory=dict)  # per-processor override
    device: str = "cpu"

    @classmethod
    def from_spec(cls, language: str, processors=None, registry_root=None,
                  model_paths=None) -> "PipelineConfig":
        if isinstance(processors, str):
            processors = tuple(p.strip() for p in processors.split(",") if p.strip())
        return cls(language=language, processors=tuple(processors or ()),
                   registry_root=registry_root, model_paths=dict(model_paths or {}))


class Pipeline:
    """Immutable once built; safe for concurrent ``run`` calls."""

    def __init__(self, config: PipelineConfig, models: dict):
        self.config = config
        self.processors = tuple(p for p in PROCESSOR_ORDER if p in models)
        self._models = models

    def run(self, text: str) -> Document:
        doc = tokenizer.tokenize(self._models["tokenize"], text)
        if "mwt" in self._models:
            doc = mwt.expand_document(self._models["mwt"], doc)
        if "pos" in self._models:
            doc = tagger.tag_document(self._models["pos"], doc)
        if "lemma" in self._models:
            doc = lemmatizer.lemmatize_document(self._models["lemma"], doc)
        if "depparse" in self._models:
            doc = depparse.parse_document(self._models["depparse"], doc)
        if "ner" in self._models:
            doc = ner.tag_document(self._models["ner"], doc)
        validate_document(doc)
        return doc

    __call__ = run


def _validate_processors(processors: tuple[str, ...]) -> None:
    unknown = [p for p in processors if p not in PROCESSOR_ORDER]
    if unknown:
        raise PipelineError(
            f"unknown processor(s) {', '.join(sorted(unknown))}; "
            f"supported: {', '.join(PROCESSOR_ORDER)}")
    for processor in processors:
        missing = [p for p in PREREQUISITES[processor] if p not in processors]
        if missing:
            raise PipelineError(
                f"processor {processor!r} requires {', '.join(missing)}")


def build_pipeline(config: PipelineConfig) -> Pipeline:
    """Load models for the requested processors and validate the closure."""
    if config.device != "cpu":
        raise PipelineError(f"unsupported device {config.device!r}; this build is CPU-only")
    registry = ModelRegistry(config.registry_root)
    processors = config.processors
    if not processors:
        try:
            processors = tuple(p for p in PROCESSOR_ORDER
                               if p in registry.available(config.language))
        except RegistryError as exc:
            raise PipelineError(str(exc)) from exc
        overrides = tuple(p for p in config.model_paths if p not in processors)
        processors = tuple(p for p in PROCESSOR_ORDER
                           if p in processors or p in overrides)
    _validate_processors(processors)

    models = {}
    for processor in processors:
        override = config.model_paths.get(processor)
        try:
            path = Path(override) if override else registry.model_path(
                config.language, processor)
            models[processor] = _LOADERS[processor](path)
        except (RegistryError, FileNotFoundError, OSError) as exc:
            raise PipelineError(f"cannot load {processor!r} model: {exc}") from exc

    tok = models.get("tokenize")
    if tok is not None and tok.produces_mwt and "mwt" not in models:
        downstream = [p for p in ("pos", "lemma", "depparse") if p in models]
        if downstream:
            raise PipelineError(
                "the tokenizer model flags multi-word tokens, so running "
                f"{', '.join(downstream)} requires the 'mwt' processor")
    return Pipeline(config, models)
