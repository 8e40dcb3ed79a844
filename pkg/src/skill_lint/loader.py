"""Discover and load a skill package directory: manifest, interaction model,
and back-end source units. Loading never throws on malformed member files;
every skipped or failed file yields exactly one diagnostic.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from skill_lint.diagnostics import Diagnostic
from skill_lint.interaction import InteractionModel, MalformedModelError, looks_like_model, parse_model

COLLECTS_YES = "yes"
COLLECTS_NO = "no"
COLLECTS_UNANSWERED = "unanswered"

DIALECT_JS = "js-style"
DIALECT_PY = "py-style"

_DIALECT_BY_EXT = {".js": DIALECT_JS, ".mjs": DIALECT_JS, ".cjs": DIALECT_JS, ".py": DIALECT_PY}
_KNOWN_UNSUPPORTED = {".ts", ".tsx", ".jsx", ".java", ".go", ".rb", ".cs"}
_SKIP_DIRS = {"node_modules", ".git", ".svn", "dist", "build", "__pycache__", ".venv", "venv", ".tox"}
_MODEL_DIR_HINTS = {"interactionmodel", "interactionmodels", "models", "custom", "interaction_model"}


class EmptyPackageError(ValueError):
    """No manifest, interaction model, or back-end source found under the root."""


class MalformedManifestError(ValueError):
    """Manifest text is not valid structured data."""


@dataclass(frozen=True)
class Manifest:
    skill_name: str = ""
    category: str | None = None
    description: str | None = None
    privacy_policy_urls: dict = field(default_factory=dict)  # locale -> url
    permissions: tuple[str, ...] = ()
    collects_personal_info: str = COLLECTS_UNANSWERED
    privacy_section_present: bool = True
    child_directed: bool = False
    source_path: str | None = None

    def privacy_policy_url(self) -> str | None:
        """Preferred-locale privacy policy URL (en-US, then en-*, then any)."""
        for locale in _locale_order(self.privacy_policy_urls):
            url = self.privacy_policy_urls[locale]
            if url:
                return url
        return None


@dataclass(frozen=True)
class SourceUnit:
    path: str  # relative to the package root
    dialect: str  # js-style | py-style
    text: str
    line_index: tuple[int, ...]  # offset of each line start

    @staticmethod
    def from_text(path: str, dialect: str, text: str) -> "SourceUnit":
        index = [0]
        for i, ch in enumerate(text):
            if ch == "\n":
                index.append(i + 1)
        return SourceUnit(path=path, dialect=dialect, text=text, line_index=tuple(index))

    def location(self, offset: int) -> tuple[int, int]:
        """1-based (line, column) for a byte offset into text."""
        lo, hi = 0, len(self.line_index) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.line_index[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return lo + 1, offset - self.line_index[lo] + 1


@dataclass(frozen=True)
class SkillPackage:
    root_path: str
    manifest: Manifest | None
    interaction_model: InteractionModel | None
    backend_units: tuple[SourceUnit, ...]
    load_diagnostics: tuple[Diagnostic, ...]

    def summary(self) -> dict:
        return {
            "root": os.path.basename(os.path.abspath(self.root_path)) or self.root_path,
            "skill_name": self.manifest.skill_name if self.manifest else None,
            "category": self.manifest.category if self.manifest else None,
            "has_manifest": self.manifest is not None,
            "has_interaction_model": self.interaction_model is not None,
            "invocation_name": self.interaction_model.invocation_name if self.interaction_model else None,
            "backend_units": [u.path for u in self.backend_units],
        }


def _locale_order(locales: dict) -> list[str]:
    return sorted(locales, key=lambda loc: (loc != "en-US", not loc.startswith("en-"), loc))


def parse_manifest(text: str) -> Manifest:
    """Parse platform manifest text into a Manifest.

    Unknown fields are ignored for forward compatibility; raises
    MalformedManifestError on undecodable text (the loader downgrades
    that to a diagnostic).
    """
    try:
        data = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedManifestError(str(exc)) from exc
    if not isinstance(data, dict):
        raise MalformedManifestError("manifest is not an object")

    root = data.get("manifest") if isinstance(data.get("manifest"), dict) else data

    skill_name = ""
    category = None
    description = None
    publishing = root.get("publishingInformation")
    if isinstance(publishing, dict):
        raw_cat = publishing.get("category")
        category = raw_cat if isinstance(raw_cat, str) else None
        locales = publishing.get("locales")
        if isinstance(locales, dict):
            for locale in _locale_order(locales):
                entry = locales.get(locale)
                if isinstance(entry, dict):
                    if not skill_name and isinstance(entry.get("name"), str):
                        skill_name = entry["name"]
                    if description is None and isinstance(entry.get("description"), str):
                        description = entry["description"]
    if not skill_name and isinstance(root.get("name"), str):
        skill_name = root["name"]

    permissions: list[str] = []
    for entry in root.get("permissions") or []:
        if isinstance(entry, dict):
            entry = entry.get("name")
        if isinstance(entry, str) and entry and entry not in permissions:
            permissions.append(entry)

    privacy = root.get("privacyAndCompliance")
    privacy_section_present = isinstance(privacy, dict)
    privacy_urls: dict = {}
    collects = COLLECTS_UNANSWERED
    child_directed = False
    if privacy_section_present:
        locales = privacy.get("locales")
        if isinstance(locales, dict):
            for locale, entry in locales.items():
                if isinstance(entry, dict):
                    url = entry.get("privacyPolicyUrl")
                    privacy_urls[str(locale)] = url if isinstance(url, str) and url.strip() else None
        uses = privacy.get("usesPersonalInfo")
        if isinstance(uses, str):
            uses = {"true": True, "false": False}.get(uses.strip().lower())
        if uses is True:
            collects = COLLECTS_YES
        elif uses is False:
            collects = COLLECTS_NO
        child_directed = privacy.get("isChildDirected") is True

    return Manifest(
        skill_name=skill_name,
        category=category,
        description=description,
        privacy_policy_urls=privacy_urls,
        permissions=tuple(permissions),
        collects_personal_info=collects,
        privacy_section_present=privacy_section_present,
        child_directed=child_directed,
    )


def _walk_files(root: Path) -> list[Path]:
    found: list[Path] = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(d for d in dirnames if d not in _SKIP_DIRS and not d.startswith("."))
        for name in sorted(filenames):
            found.append(Path(dirpath) / name)
    return found


def _depth(root: Path, path: Path) -> int:
    return len(path.relative_to(root).parts)


def _read_text(path: Path, diagnostics: list[Diagnostic], rel: str) -> str | None:
    try:
        return path.read_text(encoding="utf-8", errors="replace")
    except OSError as exc:
        diagnostics.append(Diagnostic("warning", f"unreadable file skipped: {exc}", rel))
        return None


def load_skill_package(root: str | Path) -> SkillPackage:
    """Load one package directory into a SkillPackage.

    Manifest is the shallowest `skill.json`; the interaction model is the
    first locale model file (en-US preferred) under a model-ish directory or
    any JSON with the model shape; back-end units are all .js/.py files.
    """
    root = Path(root)
    if not root.is_dir():
        raise NotADirectoryError(str(root))

    diagnostics: list[Diagnostic] = []
    files = _walk_files(root)

    manifest = _load_manifest(root, files, diagnostics)
    model = _load_model(root, files, diagnostics)
    units = _load_backend_units(root, files, diagnostics)

    if manifest is None:
        diagnostics.append(Diagnostic("warning", "no skill manifest (skill.json) found"))
    if model is None:
        diagnostics.append(Diagnostic("warning", "no interaction model file found"))

    if manifest is None and model is None and not units:
        raise EmptyPackageError(str(root))

    return SkillPackage(
        root_path=str(root),
        manifest=manifest,
        interaction_model=model,
        backend_units=tuple(sorted(units, key=lambda u: u.path)),
        load_diagnostics=tuple(diagnostics),
    )


def _load_manifest(root: Path, files: list[Path], diagnostics: list[Diagnostic]) -> Manifest | None:
    candidates = sorted(
        (p for p in files if p.name == "skill.json"),
        key=lambda p: (_depth(root, p), str(p.relative_to(root))),
    )
    if len(candidates) > 1:
        extra = ", ".join(str(p.relative_to(root)) for p in candidates[1:])
        diagnostics.append(
            Diagnostic("info", f"multiple skill.json files; analyzing the shallowest, ignoring: {extra}")
        )
    for candidate in candidates:
        rel = str(candidate.relative_to(root))
        text = _read_text(candidate, diagnostics, rel)
        if text is None:
            continue
        try:
            manifest = parse_manifest(text)
        except MalformedManifestError as exc:
            diagnostics.append(Diagnostic("warning", f"malformed manifest: {exc}", rel))
            continue
        if not manifest.privacy_section_present:
            diagnostics.append(Diagnostic("warning", "privacy section missing from manifest", rel))
        return _with_path(manifest, rel)
    return None


def _with_path(manifest: Manifest, rel: str) -> Manifest:
    from dataclasses import replace

    return replace(manifest, source_path=rel)


def _model_priority(root: Path, path: Path) -> tuple:
    name = path.name
    in_model_dir = any(part.lower() in _MODEL_DIR_HINTS for part in path.relative_to(root).parts[:-1])
    return (
        name != "en-US.json",
        not (name.startswith("en-") and name.endswith(".json")),
        not in_model_dir,
        _depth(root, path),
        str(path.relative_to(root)),
    )


def _load_model(root: Path, files: list[Path], diagnostics: list[Diagnostic]) -> InteractionModel | None:
    candidates = []
    for path in files:
        if path.suffix != ".json" or path.name == "skill.json":
            continue
        rel_parts = path.relative_to(root).parts[:-1]
        if any(part.lower() in _MODEL_DIR_HINTS for part in rel_parts) or path.name.startswith("en-"):
            candidates.append(path)
            continue
        candidates.append(path)  # still a candidate; shape check decides below

    for path in sorted(candidates, key=lambda p: _model_priority(root, p)):
        rel = str(path.relative_to(root))
        text = _read_text(path, diagnostics, rel)
        if text is None:
            continue
        try:
            data = json.loads(text)
        except (json.JSONDecodeError, UnicodeDecodeError):
            if path.name.startswith("en-") or any(
                part.lower() in _MODEL_DIR_HINTS for part in path.relative_to(root).parts[:-1]
            ):
                diagnostics.append(Diagnostic("warning", "malformed interaction model JSON", rel))
            continue
        if not looks_like_model(data):
            continue
        try:
            model, model_diags = parse_model(data, source_path=rel)
        except MalformedModelError as exc:
            diagnostics.append(Diagnostic("warning", f"malformed interaction model: {exc}", rel))
            continue
        diagnostics.extend(model_diags)
        return model
    return None


def _load_backend_units(root: Path, files: list[Path], diagnostics: list[Diagnostic]) -> list[SourceUnit]:
    units: list[SourceUnit] = []
    for path in files:
        suffix = path.suffix.lower()
        rel = str(path.relative_to(root))
        if suffix in _DIALECT_BY_EXT:
            text = _read_text(path, diagnostics, rel)
            if text is None:
                continue
            units.append(SourceUnit.from_text(rel, _DIALECT_BY_EXT[suffix], text))
        elif suffix in _KNOWN_UNSUPPORTED:
            diagnostics.append(Diagnostic("info", f"unsupported source dialect '{suffix}' excluded", rel))
    return units
