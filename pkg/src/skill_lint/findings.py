"""Finding taxonomy: stable rule identifiers, severities, and evidence."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

SEVERITY_VIOLATION = "violation"
SEVERITY_VULNERABILITY = "vulnerability"
SEVERITY_BUG = "bug"
SEVERITY_ADVISORY = "advisory"

SEVERITY_RANK = {
    SEVERITY_VIOLATION: 3,
    SEVERITY_VULNERABILITY: 2,
    SEVERITY_BUG: 1,
    SEVERITY_ADVISORY: 0,
}

MAX_EXCERPT = 200


@dataclass(frozen=True)
class RuleSpec:
    rule_id: str
    slug: str
    group: str  # privacy | content | consistency
    severity: str
    summary: str
    remediation: str


_RULE_LIST = [
    RuleSpec("PRIV-001", "missing-privacy-policy", "privacy", SEVERITY_VIOLATION,
             "Data collection or storage without a privacy policy",
             "Add a working privacy policy URL to the manifest's privacy section."),
    RuleSpec("PRIV-002", "incomplete-privacy-policy", "privacy", SEVERITY_VIOLATION,
             "Privacy policy does not disclose collected or stored data",
             "Disclose each collected data type (and any storage) in the policy text."),
    RuleSpec("PRIV-003", "over-privileged-permission", "privacy", SEVERITY_VIOLATION,
             "Permission declared or fetched but its data is never used",
             "Remove unused permissions from the manifest, or use the data."),
    RuleSpec("PRIV-004", "undeclared-permission-use", "privacy", SEVERITY_BUG,
             "Permission data fetched without declaring the permission",
             "Declare the permission in the manifest before calling its API."),
    RuleSpec("PRIV-005", "false-disclosure", "privacy", SEVERITY_VIOLATION,
             "Developer answered 'no' to personal-info collection but the code collects data",
             "Answer 'yes' to the personal-information question or remove the collection."),
    RuleSpec("PRIV-006", "deceptive-policy", "privacy", SEVERITY_VIOLATION,
             "Policy asserts no data retention while the code stores collected data",
             "Align the retention statement with the code's database writes."),
    RuleSpec("PRIV-007", "undisclosed-to-platform", "privacy", SEVERITY_ADVISORY,
             "Personal-info collection question left unanswered while the code collects data",
             "Answer the personal-information question in the distribution settings."),
    RuleSpec("CONT-001", "toxic-content", "content", SEVERITY_VIOLATION,
             "Skill output contains toxic or profane content",
             "Remove profanity and toxic phrasing from skill outputs."),
    RuleSpec("CONT-002", "rating-manipulation", "content", SEVERITY_VIOLATION,
             "Explicitly solicits a positive rating",
             "Do not ask users for a 5-star rating; invite neutral feedback instead."),
    RuleSpec("CONT-003", "invocation-name", "content", SEVERITY_VIOLATION,
             "Invocation name violates naming requirements",
             "Choose a distinctive multi-word lower-case invocation name without reserved words."),
    RuleSpec("CONT-004", "kids-data-collection", "content", SEVERITY_VIOLATION,
             "Kids-category skill collects personal information",
             "Remove all personal-data collection from kids skills."),
    RuleSpec("CONT-005", "kids-external-website", "content", SEVERITY_VIOLATION,
             "Kids-category skill references an external website",
             "Remove external website references from kids skills."),
    RuleSpec("CONT-006", "health-missing-disclaimer", "content", SEVERITY_VIOLATION,
             "Health-category skill description lacks a medical disclaimer",
             "State in the description that the skill is not a substitute for professional medical advice."),
    RuleSpec("CONT-007", "malicious-resource", "content", SEVERITY_VIOLATION,
             "Referenced URL is flagged as suspicious or malicious",
             "Remove or replace the flagged external resource."),
    RuleSpec("CONT-008", "external-content-collection", "content", SEVERITY_VIOLATION,
             "Fetched external webpage content solicits personal data",
             "Review the external content source; it asks users for personal data."),
    RuleSpec("CONS-001", "request-without-slot", "consistency", SEVERITY_BUG,
             "Output asks for user data but no slot can capture the reply",
             "Add an intent with a matching slot and sample utterances; replies currently fall through to the fallback intent."),
    RuleSpec("CONS-002", "slot-without-request", "consistency", SEVERITY_VULNERABILITY,
             "Data-collection slot exists but the code never asks for the data",
             "Remove the unused slot; a later back-end update could silently collect this data without re-certification."),
    RuleSpec("CONS-003", "slot-without-utterance", "consistency", SEVERITY_BUG,
             "Data-collection slot is referenced by no sample utterance",
             "Add sample utterances containing the slot placeholder."),
    RuleSpec("CONS-004", "intent-without-utterance", "consistency", SEVERITY_BUG,
             "Custom intent has no sample utterances",
             "Add sample utterances so the intent can be matched."),
]

RULES: dict[str, RuleSpec] = {r.rule_id: r for r in _RULE_LIST}
RULES_BY_SLUG: dict[str, RuleSpec] = {r.slug: r for r in _RULE_LIST}


@dataclass(frozen=True)
class Evidence:
    path: str | None
    line: int | None
    column: int | None
    excerpt: str

    def __post_init__(self) -> None:
        if len(self.excerpt) > MAX_EXCERPT:
            object.__setattr__(self, "excerpt", self.excerpt[: MAX_EXCERPT - 1] + "…")

    def to_dict(self) -> dict:
        return {"path": self.path, "line": self.line, "column": self.column, "excerpt": self.excerpt}


@dataclass(frozen=True)
class Finding:
    rule_id: str
    message: str
    evidence: tuple[Evidence, ...]
    data_source: str  # output | permission | database | disclosure | description | invocation-name | intent | slot
    severity: str = ""
    confidence: str = "high"  # high | heuristic
    categories: tuple[str, ...] = ()
    subrule: str | None = None  # e.g. invocation-name rule R1..R4, W1

    def __post_init__(self) -> None:
        if self.rule_id not in RULES:
            raise ValueError(f"unknown rule id: {self.rule_id}")
        if not self.evidence:
            raise ValueError("finding evidence must be nonempty")
        if not self.severity:
            object.__setattr__(self, "severity", RULES[self.rule_id].severity)

    @property
    def slug(self) -> str:
        return RULES[self.rule_id].slug

    @property
    def remediation(self) -> str:
        return RULES[self.rule_id].remediation

    def with_severity(self, severity: str) -> "Finding":
        return replace(self, severity=severity)

    def sort_key(self) -> tuple:
        first = self.evidence[0]
        return (
            -SEVERITY_RANK.get(self.severity, 0),
            self.rule_id,
            first.path or "",
            first.line or 0,
            first.column or 0,
            self.message,
        )

    def to_dict(self) -> dict:
        out = {
            "rule_id": self.rule_id,
            "slug": self.slug,
            "severity": self.severity,
            "confidence": self.confidence,
            "message": self.message,
            "data_source": self.data_source,
            "categories": list(self.categories),
            "evidence": [e.to_dict() for e in self.evidence],
            "remediation": self.remediation,
        }
        if self.subrule:
            out["subrule"] = self.subrule
        return out


def meets_threshold(finding: Finding, fail_on: str) -> bool:
    if fail_on == "never":
        return False
    return SEVERITY_RANK.get(finding.severity, 0) >= SEVERITY_RANK[fail_on]
