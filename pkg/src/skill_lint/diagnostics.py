from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    """A non-fatal problem encountered while loading or analyzing a package."""

    severity: str  # info | warning | error
    message: str
    path: str | None = None

    def __post_init__(self) -> None:
        if not self.message:
            raise ValueError("diagnostic message must be nonempty")

    def to_dict(self) -> dict:
        out: dict = {"severity": self.severity, "message": self.message}
        if self.path is not None:
            out["path"] = self.path
        return out
