"""Self-describing model containers.

One zip file per processor: ``manifest.json`` (format tag, processor kind,
config, vocabularies, metadata) plus ``params.npz`` with the named parameter
tensors.
"""

from __future__ import annotations

import hashlib
import io
import json
import zipfile

import numpy as np

FORMAT_TAG = "annopipe-model/1"


class ModelFormatError(RuntimeError):
    pass


def save_model(path, kind: str, config: dict, vocabs: dict, arrays: dict, meta: dict | None = None):
    manifest = {
        "format": FORMAT_TAG,
        "kind": kind,
        "config": config,
        "vocabs": vocabs,
        "meta": meta or {},
    }
    buffer = io.BytesIO()
    np.savez(buffer, **arrays)
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as archive:
        archive.writestr("manifest.json", json.dumps(manifest, ensure_ascii=False, sort_keys=True))
        archive.writestr("params.npz", buffer.getvalue())


def load_model(path, expect_kind: str | None = None):
    """Returns (kind, config, vocabs, arrays, meta); refuses foreign formats."""
    try:
        with zipfile.ZipFile(path) as archive:
            manifest = json.loads(archive.read("manifest.json"))
            with archive.open("params.npz") as handle:
                arrays = dict(np.load(io.BytesIO(handle.read())))
    except (zipfile.BadZipFile, KeyError) as exc:
        raise ModelFormatError(f"{path}: not a model container ({exc})") from exc
    if manifest.get("format") != FORMAT_TAG:
        raise ModelFormatError(
            f"{path}: format {manifest.get('format')!r} not supported "
            f"(expected {FORMAT_TAG!r})")
    kind = manifest.get("kind")
    if expect_kind is not None and kind != expect_kind:
        raise ModelFormatError(f"{path}: contains a {kind!r} model, expected {expect_kind!r}")
    return kind, manifest["config"], manifest["vocabs"], arrays, manifest.get("meta", {})


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
