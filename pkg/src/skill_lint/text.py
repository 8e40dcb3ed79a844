"""Shared text helpers: sentence splitting, tokenizing, identifier splitting."""

from __future__ import annotations

import re

# Interpolation holes in resolved string literals are rendered as mathematical
# angle brackets so they can never collide with source text.
HOLE_OPEN = "⟨"
HOLE_CLOSE = "⟩"

_SSML_TAG = re.compile(r"<[^<>]{0,200}?>")
_BREAK_TAG = re.compile(r"<break\b[^<>]*/?>", re.IGNORECASE)
_SENTENCE_END = re.compile(r"([.?!]+)")
_WORD = re.compile(r"[a-z0-9*']+")
_HOLE = re.compile(rf"{HOLE_OPEN}[^{HOLE_OPEN}{HOLE_CLOSE}]*{HOLE_CLOSE}")
_IDENT_PART = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|[0-9]+")


def strip_holes(text: str) -> str:
    return _HOLE.sub(" ", text)


def strip_ssml(text: str) -> str:
    """Drop SSML/markup tags, turning <break> tags into sentence boundaries."""
    text = _BREAK_TAG.sub(". ", text)
    return _SSML_TAG.sub(" ", text)


def split_sentences(text: str) -> list[str]:
    """Split on ., ?, ! keeping the terminal punctuation with each sentence."""
    pieces = _SENTENCE_END.split(strip_ssml(text))
    sentences: list[str] = []
    for i in range(0, len(pieces), 2):
        body = pieces[i].strip()
        punct = pieces[i + 1] if i + 1 < len(pieces) else ""
        if body:
            sentences.append(body + punct)
    return sentences


def words(text: str) -> list[str]:
    """Lower-case word tokens; apostrophes and * stay inside a token."""
    return _WORD.findall(text.lower())


def split_identifier(name: str) -> list[str]:
    """Split camelCase/snake_case/kebab-case identifiers into lower tokens.

    "AMAZON.FirstName" -> [amazon, first, name]; "US_City" -> [us, city].
    """
    tokens: list[str] = []
    for chunk in re.split(r"[._\-\s/]+", name):
        tokens.extend(m.group(0).lower() for m in _IDENT_PART.finditer(chunk))
    return tokens


def contains_token_seq(haystack: list[str], needle: list[str]) -> bool:
    """True when needle occurs as a contiguous subsequence of haystack."""
    if not needle or len(needle) > len(haystack):
        return False
    for i in range(len(haystack) - len(needle) + 1):
        if haystack[i : i + len(needle)] == needle:
            return True
    return False


def find_token_seq(haystack: list[str], needle: list[str], start: int = 0) -> int:
    """Index of the first occurrence of needle in haystack at or after start, else -1."""
    if not needle:
        return -1
    for i in range(start, len(haystack) - len(needle) + 1):
        if haystack[i : i + len(needle)] == needle:
            return i
    return -1


def normalize_sentence(text: str) -> str:
    """Lower-case, strip punctuation, collapse whitespace (for fuzzy matching)."""
    return " ".join(re.findall(r"[a-z0-9']+", text.lower()))


def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def edit_similarity(a: str, b: str) -> float:
    """Normalized edit similarity in [0, 1]: 1 - distance / max length."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest
