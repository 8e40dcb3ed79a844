"""Front-end interaction model: intents, slots, sample utterances, and the
classifiers that mark slots/utterances as sensitive data-collection elements.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from skill_lint.diagnostics import Diagnostic
from skill_lint.findings import Evidence, Finding
from skill_lint.rules import (
    SECTION_BUILTIN,
    SECTION_HEALTH,
    SECTION_PERMISSION,
    SECTION_PII,
    Keyword,
    KeywordRegistry,
)
from skill_lint.text import contains_token_seq, split_identifier

BUILTIN_INTENT_PREFIX = "AMAZON."

SECTION_LABELS = {
    SECTION_PII: "PII",
    SECTION_BUILTIN: "builtin-slot",
    SECTION_PERMISSION: "permission-data",
    SECTION_HEALTH: "health",
}

_PLACEHOLDER = re.compile(r"\{([^{}]+)\}")


class MalformedModelError(ValueError):
    """Raised when text cannot be interpreted as an interaction model."""


@dataclass(frozen=True)
class Slot:
    name: str
    slot_type: str
    utterances_referencing: int
    intent_name: str


@dataclass(frozen=True)
class Intent:
    name: str
    slots: tuple[Slot, ...]
    sample_utterances: tuple[str, ...]

    @property
    def is_builtin(self) -> bool:
        return self.name.startswith(BUILTIN_INTENT_PREFIX)


@dataclass(frozen=True)
class InteractionModel:
    invocation_name: str
    intents: tuple[Intent, ...]
    source_path: str | None = None

    @property
    def builtin_intents(self) -> tuple[Intent, ...]:
        return tuple(i for i in self.intents if i.is_builtin)

    @property
    def custom_intents(self) -> tuple[Intent, ...]:
        return tuple(i for i in self.intents if not i.is_builtin)


@dataclass(frozen=True)
class SensitivityLabel:
    category: str  # PII | builtin-slot | permission-data | health
    matched_keyword: str
    match_site: str  # slot-name | slot-type | utterance | output
    data_category: str  # canonical data name, e.g. Name


def looks_like_model(data: object) -> bool:
    if not isinstance(data, dict):
        return False
    if "interactionModel" in data or "languageModel" in data:
        return True
    return "invocationName" in data and "intents" in data


def parse_model(data: dict, source_path: str | None = None) -> tuple[InteractionModel, list[Diagnostic]]:
    """Build an InteractionModel from decoded model JSON, tolerating shape variants."""
    root = data
    if isinstance(root.get("interactionModel"), dict):
        root = root["interactionModel"]
    if isinstance(root.get("languageModel"), dict):
        root = root["languageModel"]
    if not isinstance(root.get("intents"), list) and "invocationName" not in root:
        raise MalformedModelError("no language model found")

    diagnostics: list[Diagnostic] = []
    invocation = root.get("invocationName")
    invocation = invocation if isinstance(invocation, str) else ""

    intents: list[Intent] = []
    seen: set[str] = set()
    for raw in root.get("intents") or []:
        if not isinstance(raw, dict):
            diagnostics.append(Diagnostic("warning", "intent entry is not an object", source_path))
            continue
        name = raw.get("name") or raw.get("intent") or ""
        if not isinstance(name, str) or not name:
            diagnostics.append(Diagnostic("warning", "intent without a name skipped", source_path))
            continue
        if name in seen:
            diagnostics.append(Diagnostic("warning", f"duplicate intent '{name}' collapsed", source_path))
            continue
        seen.add(name)

        samples = raw.get("samples")
        if not isinstance(samples, list):
            samples = raw.get("sampleUtterances") if isinstance(raw.get("sampleUtterances"), list) else []
        utterances = tuple(s for s in samples if isinstance(s, str))

        slot_names: list[tuple[str, str]] = []
        for slot_raw in raw.get("slots") or []:
            if not isinstance(slot_raw, dict):
                continue
            slot_name = slot_raw.get("name") or ""
            slot_type = slot_raw.get("type") or ""
            if not slot_name or not slot_type:
                diagnostics.append(
                    Diagnostic("warning", f"slot with missing name or type in intent '{name}'", source_path)
                )
                continue
            slot_names.append((str(slot_name), str(slot_type)))

        declared = {s for s, _ in slot_names}
        for utterance in utterances:
            for ref in _PLACEHOLDER.findall(utterance):
                if ref not in declared:
                    diagnostics.append(
                        Diagnostic(
                            "warning",
                            f"utterance '{utterance}' references undeclared slot '{ref}' in intent '{name}'",
                            source_path,
                        )
                    )

        slots = tuple(
            Slot(
                name=slot_name,
                slot_type=slot_type,
                utterances_referencing=sum(1 for u in utterances if "{%s}" % slot_name in u),
                intent_name=name,
            )
            for slot_name, slot_type in slot_names
        )
        intents.append(Intent(name=name, slots=slots, sample_utterances=utterances))

    return InteractionModel(invocation_name=invocation, intents=tuple(intents), source_path=source_path), diagnostics


def classify_sensitive_slots(
    model: InteractionModel, registry: KeywordRegistry
) -> list[tuple[Slot, SensitivityLabel]]:
    """Mark slots whose name or type contains a data-collection keyword.

    Matching is case-insensitive and word-boundary aware: identifiers are
    split at camelCase/snake_case boundaries, so "age" never matches inside
    "message". The slot type is checked before the name, longest keyword
    first, and the first match labels the slot.
    """
    ordered = sorted(registry.keywords, key=lambda k: (-len(k.tokens), k.surface))
    results: list[tuple[Slot, SensitivityLabel]] = []
    for intent in model.intents:
        for slot in intent.slots:
            label = _match_slot(slot, ordered)
            if label is not None:
                results.append((slot, label))
    return results


def _match_slot(slot: Slot, ordered_keywords: list[Keyword]) -> SensitivityLabel | None:
    sites = (("slot-type", split_identifier(slot.slot_type)), ("slot-name", split_identifier(slot.name)))
    for site, tokens in sites:
        for kw in ordered_keywords:
            if contains_token_seq(tokens, list(kw.tokens)):
                return SensitivityLabel(
                    category=SECTION_LABELS[kw.section],
                    matched_keyword=kw.surface,
                    match_site=site,
                    data_category=kw.category,
                )
    return None


def classify_collection_utterances(
    model: InteractionModel, sensitive_slots: list[tuple[Slot, SensitivityLabel]]
) -> list[tuple[Intent, str, Slot]]:
    """Utterances that absorb a user's reply to a data-collection request.

    A sample utterance qualifies when a possessive marker precedes a
    sensitive-slot placeholder ("my name is {name}") or when the utterance
    is nothing but the placeholder ("{firstName}").
    """
    sensitive = {(slot.intent_name, slot.name) for slot, _ in sensitive_slots}
    by_key = {(slot.intent_name, slot.name): slot for slot, _ in sensitive_slots}
    matches: list[tuple[Intent, str, Slot]] = []
    for intent in model.intents:
        for utterance in intent.sample_utterances:
            for ref in _PLACEHOLDER.findall(utterance):
                if (intent.name, ref) not in sensitive:
                    continue
                if _is_collection_utterance(utterance, ref):
                    matches.append((intent, utterance, by_key[(intent.name, ref)]))
    return matches


def _is_collection_utterance(utterance: str, slot_name: str) -> bool:
    placeholder = "{%s}" % slot_name
    if utterance.strip() == placeholder:
        return True
    tokens = utterance.split()
    for i, token in enumerate(tokens):
        if placeholder in token:
            return any(t.lower() in ("my", "our") for t in tokens[:i])
    return False


def check_invocation_name(
    name: str,
    registry: KeywordRegistry,
    *,
    include_advisories: bool = False,
    path: str | None = None,
) -> list[Finding]:
    """Apply the invocation-name requirements; one finding per violated rule."""
    evidence = (Evidence(path, None, None, name or "(missing)"),)

    def finding(subrule: str, message: str, severity: str = "") -> Finding:
        return Finding(
            rule_id="CONT-003",
            message=message,
            evidence=evidence,
            data_source="invocation-name",
            severity=severity,
            subrule=subrule,
        )

    if not name.strip():
        return [finding("MISSING", "invocation name is missing")]

    inv = registry.invocation
    tokens = name.split()
    lowered = [t.lower() for t in tokens]
    findings: list[Finding] = []

    if len(tokens) == 1 and lowered[0] not in inv.brand_names:
        findings.append(finding("R1", f"one-word invocation name '{name}' is not allowed"))

    if len(tokens) == 2:
        hits = sorted(set(lowered) & inv.articles_prepositions)
        if hits:
            findings.append(
                finding("R2", f"two-word invocation name contains article/preposition: {', '.join(hits)}")
            )

    reserved: list[str] = []
    for token in sorted(set(lowered)):
        kinds = []
        if token in inv.launch_phrases:
            kinds.append("launch phrase")
        if token in inv.connecting_words:
            kinds.append("connecting word")
        if token in inv.wake_words:
            kinds.append("wake word")
        if kinds:
            reserved.append(f"'{token}' ({', '.join(kinds)})")
    if reserved:
        findings.append(finding("R3", "invocation name contains reserved word " + "; ".join(reserved)))

    if any(ch not in "abcdefghijklmnopqrstuvwxyz '" for ch in name):
        findings.append(
            finding(
                "R4",
                "invocation name must contain only lower-case letters, spaces, and possessive apostrophes",
            )
        )

    if include_advisories and name.lower() in inv.common_names:
        findings.append(finding("W1", f"invocation name '{name}' is not distinctive", severity="advisory"))

    return findings
