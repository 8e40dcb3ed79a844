"""Rule registries: data-collection keywords, invocation-name word lists,
recognized API patterns, and the other tunable word lists.

Everything here is data-driven from ``data/rules.json`` so behavior is pinned
by the shipped file and overridable with ``--rules``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from skill_lint.text import split_identifier

SECTION_PII = "pii"
SECTION_BUILTIN = "builtin_slot"
SECTION_PERMISSION = "permission"
SECTION_HEALTH = "health"
SECTIONS = (SECTION_PII, SECTION_BUILTIN, SECTION_PERMISSION, SECTION_HEALTH)

UNKNOWN_CATEGORY = "Unknown"


@dataclass(frozen=True)
class Keyword:
    surface: str  # lower-cased canonical form
    section: str
    category: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class CommonRequest:
    text: str  # normalized lower-case sentence
    category: str
    confidence: str  # high | heuristic


@dataclass(frozen=True)
class InvocationRules:
    articles_prepositions: frozenset[str]
    launch_phrases: frozenset[str]
    connecting_words: frozenset[str]
    wake_words: frozenset[str]
    common_names: frozenset[str]
    brand_names: frozenset[str]


@dataclass(frozen=True)
class PatternRegistry:
    """Recognized back-end API shapes: permission endpoints and client methods."""

    endpoints: tuple[tuple[str, str], ...]  # (path, category)
    endpoint_prefixes: tuple[str, ...]
    client_methods: dict[str, str]  # normalized method name -> category
    permission_ids: tuple[tuple[str, str], ...]  # (manifest id fragment, category)

    def classify_endpoint(self, literal: str) -> str | None:
        """Category for a string literal naming a permission endpoint.

        Returns None when the literal is not an endpoint at all; the unknown
        category when it matches a prefix but no known suffix.
        """
        low = literal.lower()
        if not any(p in low for p in self.endpoint_prefixes):
            return None
        if "/v1/devices/" in low:
            if "countryandpostalcode" in low:
                return "CountryAndPostalCode"
            if "/settings/address" in low:
                return "Address"
            return UNKNOWN_CATEGORY
        # Profile endpoints: check the longer fragments before "name".
        if "givenname" in low:
            return "GivenName"
        if "mobilenumber" in low:
            return "PhoneNumber"
        if "email" in low:
            return "Email"
        if "profile.name" in low or "/profile/name" in low:
            return "Name"
        return UNKNOWN_CATEGORY

    def classify_client_method(self, name: str) -> str | None:
        return self.client_methods.get(name.replace("_", "").lower())

    def classify_permission_id(self, permission: str) -> str | None:
        low = permission.lower()
        for fragment, category in self.permission_ids:
            if fragment in low:
                return category
        return None


@dataclass(frozen=True)
class KeywordRegistry:
    """The full rule registry; one instance is threaded through all checkers."""

    version: str
    keywords: tuple[Keyword, ...]
    category_keywords: dict[str, tuple[tuple[str, ...], ...]]  # category -> token seqs
    collect_verbs: frozenset[str]
    store_verbs: frozenset[str]
    solicitation_verbs: frozenset[str]
    possessive_markers: frozenset[str]
    negation_words: frozenset[str]
    common_request_sentences: tuple[CommonRequest, ...]
    invocation: InvocationRules
    patterns: PatternRegistry
    rating_star_phrases: tuple[str, ...]
    rating_verbs: frozenset[str]
    policy_relevance_terms: frozenset[str]
    health_disclaimer_phrases: tuple[str, ...]
    profanity_lexicon: tuple[str, ...]
    _by_surface: dict[str, Keyword] = field(default_factory=dict, repr=False)

    def keywords_in_sections(self, sections: tuple[str, ...]) -> tuple[Keyword, ...]:
        return tuple(k for k in self.keywords if k.section in sections)

    def lookup(self, surface: str) -> Keyword | None:
        return self._by_surface.get(surface.lower())


def _build_keywords(raw: dict) -> list[Keyword]:
    keywords: list[Keyword] = []
    for section in SECTIONS:
        for entry in raw.get(section, []):
            surfaces = [entry["keyword"]] + list(entry.get("aliases", []))
            for surface in surfaces:
                keywords.append(
                    Keyword(
                        surface=surface.lower(),
                        section=section,
                        category=entry["category"],
                        tokens=tuple(split_identifier(surface)),
                    )
                )
    return keywords


def _build_category_keywords(keywords: list[Keyword], aliases: dict) -> dict[str, tuple[tuple[str, ...], ...]]:
    seqs: dict[str, list[tuple[str, ...]]] = {}
    for kw in keywords:
        seqs.setdefault(kw.category, [])
        if kw.tokens and kw.tokens not in seqs[kw.category]:
            seqs[kw.category].append(kw.tokens)
    for category, extra in aliases.items():
        seqs.setdefault(category, [])
        for surface in extra:
            tokens = tuple(split_identifier(surface))
            if tokens and tokens not in seqs[category]:
                seqs[category].append(tokens)
    return {cat: tuple(v) for cat, v in seqs.items()}


def registry_from_dict(data: dict) -> KeywordRegistry:
    keywords = _build_keywords(data.get("keywords", {}))
    invocation_raw = data.get("invocation", {})
    patterns = PatternRegistry(
        endpoints=tuple((e["path"], e["category"]) for e in data.get("endpoints", [])),
        endpoint_prefixes=tuple(data.get("endpoint_prefixes", [])),
        client_methods={
            name.replace("_", "").lower(): cat
            for name, cat in data.get("permission_client_methods", {}).items()
        },
        permission_ids=tuple(
            (e["fragment"].lower(), e["category"]) for e in data.get("permission_ids", [])
        ),
    )
    registry = KeywordRegistry(
        version=str(data.get("version", "0")),
        keywords=tuple(keywords),
        category_keywords=_build_category_keywords(keywords, data.get("category_aliases", {})),
        collect_verbs=frozenset(data.get("collect_verbs", [])),
        store_verbs=frozenset(data.get("store_verbs", [])),
        solicitation_verbs=frozenset(data.get("solicitation_verbs", [])),
        possessive_markers=frozenset(data.get("possessive_markers", ["my", "our"])),
        negation_words=frozenset(data.get("negation_words", ["not", "never", "no"])),
        common_request_sentences=tuple(
            CommonRequest(e["text"].lower(), e["category"], e.get("confidence", "high"))
            for e in data.get("common_request_sentences", [])
        ),
        invocation=InvocationRules(
            articles_prepositions=frozenset(invocation_raw.get("articles_prepositions", [])),
            launch_phrases=frozenset(invocation_raw.get("launch_phrases", [])),
            connecting_words=frozenset(invocation_raw.get("connecting_words", [])),
            wake_words=frozenset(invocation_raw.get("wake_words", [])),
            common_names=frozenset(n.lower() for n in invocation_raw.get("common_names", [])),
            brand_names=frozenset(n.lower() for n in invocation_raw.get("brand_names", [])),
        ),
        patterns=patterns,
        rating_star_phrases=tuple(data.get("rating", {}).get("star_phrases", [])),
        rating_verbs=frozenset(data.get("rating", {}).get("verbs", [])),
        policy_relevance_terms=frozenset(data.get("policy_relevance_terms", [])),
        health_disclaimer_phrases=tuple(data.get("health_disclaimer_phrases", [])),
        profanity_lexicon=tuple(t.lower() for t in data.get("profanity_lexicon", [])),
    )
    registry._by_surface.update({k.surface: k for k in keywords})
    return registry


def _default_data() -> dict:
    with resources.files("skill_lint.data").joinpath("rules.json").open("r", encoding="utf-8") as fh:
        return json.load(fh)


def _merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_registry(rules_path: str | Path | None = None) -> KeywordRegistry:
    """Load the shipped registry, optionally overlaying a user rules file.

    Override semantics: top-level (and nested dict) keys present in the user
    file replace the shipped values; absent keys keep the defaults.
    """
    data = _default_data()
    if rules_path is not None:
        override = json.loads(Path(rules_path).read_text(encoding="utf-8"))
        data = _merge(data, override)
    return registry_from_dict(data)
