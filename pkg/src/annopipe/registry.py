"""Model registry: per-language manifests, hash-verified loads, atomic installs.

Layout: ``<root>/<language>/manifest.json`` plus one model container per
processor.  Archives are gzipped tarballs holding the same manifest and
files; installing one is copy + verify + rename, so a failed fetch never
touches the live registry.
"""

from __future__ import annotations

import json
import os
import shutil
import tarfile
import tempfile
import urllib.request
from pathlib import Path

from .nn.modelio import FORMAT_TAG, file_sha256

REGISTRY_ENV = "ANNOPIPE_REGISTRY"
MANIFEST_VERSION = 1


class RegistryError(RuntimeError):
    pass


def default_registry_root() -> Path:
    root = os.environ.get(REGISTRY_ENV)
    if root:
        return Path(root)
    return Path.home() / ".annopipe" / "models"


class ModelRegistry:
    def __init__(self, root=None):
        self.root = Path(root) if root else default_registry_root()

    def manifest_path(self, language: str) -> Path:
        return self.root / language / "manifest.json"

    def languages(self) -> list[str]:
        if not self.root.is_dir():
            return []
        return sorted(p.parent.name for p in self.root.glob("*/manifest.json"))

    def manifest(self, language: str) -> dict:
        path = self.manifest_path(language)
        if not path.is_file():
            raise RegistryError(
                f"no models installed for language {language!r} under {self.root} "
                f"(run: annopipe models fetch --lang {language} --source <url-or-path>)")
        data = json.loads(path.read_text(encoding="utf-8"))
        if data.get("manifest_version") != MANIFEST_VERSION:
            raise RegistryError(
                f"{path}: manifest version {data.get('manifest_version')!r} "
                f"not supported (expected {MANIFEST_VERSION})")
        return data

    def available(self, language: str) -> list[str]:
        return sorted(self.manifest(language)["processors"])

    def model_path(self, language: str, processor: str, verify: bool = True) -> Path:
        manifest = self.manifest(language)
        entry = manifest["processors"].get(processor)
        if entry is None:
            raise RegistryError(
                f"language {language!r} has no model for processor {processor!r} "
                f"(available: {', '.join(sorted(manifest['processors'])) or 'none'})")
        if entry.get("format") != FORMAT_TAG:
            raise RegistryError(
                f"{language}/{processor}: model format {entry.get('format')!r} "
                f"not supported (expected {FORMAT_TAG!r})")
        path = self.root / language / entry["file"]
        if not path.is_file():
            raise RegistryError(
                f"model file missing: {path} "
                f"(run: annopipe models fetch --lang {language} --source <url-or-path>)")
        if verify:
            digest = file_sha256(path)
            if digest != entry["sha256"]:
                raise RegistryError(
                    f"{path}: content hash mismatch "
                    f"(manifest {entry['sha256'][:12]}..., file {digest[:12]}...)")
        return path

    def verify(self, language: str) -> dict[str, bool]:
        out = {}
        for processor in self.available(language):
            try:
                self.model_path(language, processor, verify=True)
                out[processor] = True
            except RegistryError:
                out[processor] = False
        return out


def build_manifest(language: str, files: dict[str, Path]) -> dict:
    """Manifest for processor -> model file mappings (hashes computed here)."""
    return {
        "manifest_version": MANIFEST_VERSION,
        "language": language,
        "processors": {
            processor: {
                "file": path.name,
                "sha256": file_sha256(path),
                "format": FORMAT_TAG,
            }
            for processor, path in files.items()
        },
    }


def pack_archive(language: str, files: dict[str, Path], out_path) -> Path:
    """Create a fetchable model archive for one language."""
    out_path = Path(out_path)
    manifest = build_manifest(language, files)
    with tarfile.open(out_path, "w:gz") as tar:
        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as tmp:
            json.dump(manifest, tmp, ensure_ascii=False, indent=1)
            tmp_path = tmp.name
        try:
            tar.add(tmp_path, arcname="manifest.json")
            for path in files.values():
                tar.add(path, arcname=path.name)
        finally:
            os.unlink(tmp_path)
    return out_path


def _retrieve(source: str, into: Path) -> Path:
    """Fetch an archive from a local path or URL into ``into``."""
    if source.startswith(("http://", "https://", "file://")):
        target = into / "archive.tgz"
        with urllib.request.urlopen(source) as response, open(target, "wb") as handle:
            shutil.copyfileobj(response, handle)
        return target
    path = Path(source)
    if not path.is_file():
        raise RegistryError(f"archive not found: {source}")
    return path


def fetch_models(language: str, source: str, registry: ModelRegistry) -> list[str]:
    """Install a model archive; verifies every hash before anything goes live.

    Returns the processor names installed.  Any failure (bad archive, hash
    mismatch) leaves the registry exactly as it was.
    """
    registry.root.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=registry.root))
    try:
        archive = _retrieve(source, staging)
        extract_dir = staging / "extract"
        extract_dir.mkdir()
        try:
            with tarfile.open(archive) as tar:
                for member in tar.getmembers():
                    name = Path(member.name).name  # flat archive, no traversal
                    if not member.isfile():
                        continue
                    with tar.extractfile(member) as src, open(extract_dir / name, "wb") as dst:
                        shutil.copyfileobj(src, dst)
        except tarfile.TarError as exc:
            raise RegistryError(f"unreadable archive {source}: {exc}") from exc
        manifest_file = extract_dir / "manifest.json"
        if not manifest_file.is_file():
            raise RegistryError(f"archive {source} carries no manifest.json")
        manifest = json.loads(manifest_file.read_text(encoding="utf-8"))
        if manifest.get("manifest_version") != MANIFEST_VERSION:
            raise RegistryError(
                f"archive manifest version {manifest.get('manifest_version')!r} unsupported")
        if manifest.get("language") != language:
            raise RegistryError(
                f"archive is for language {manifest.get('language')!r}, requested {language!r}")
        for processor, entry in manifest["processors"].items():
            path = extract_dir / entry["file"]
            if not path.is_file():
                raise RegistryError(f"archive missing model file {entry['file']!r}")
            digest = file_sha256(path)
            if digest != entry["sha256"]:
                raise RegistryError(
                    f"hash mismatch for {processor} ({entry['file']}): aborting install")
        # All verified: swap into place.
        target = registry.root / language
        backup = staging / "previous"
        if target.exists():
            os.replace(target, backup)
        try:
            os.replace(extract_dir, target)
        except OSError:
            if backup.exists():
                os.replace(backup, target)
            raise
        return sorted(manifest["processors"])
    finally:
        shutil.rmtree(staging, ignore_errors=True)
