"""A small result record shared by the verifiers."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class CheckResult:
    id: str
    status: str
    checks: int = 0
    counterexample: dict | None = None
    anchor: str = ""
    details: dict | None = None

    @property
    def verified(self) -> bool:
        return self.status == "verified"

    def to_dict(self) -> dict:
        out = {"id": self.id, "status": self.status, "checks": self.checks,
               "counterexample": self.counterexample, "anchor": self.anchor}
        if self.details:
            out["details"] = self.details
        return out


def passed(id: str, checks: int, anchor: str = "") -> CheckResult:
    return CheckResult(id, "verified", checks, None, anchor)


def failed(id: str, checks: int, counterexample: dict, anchor: str = "") -> CheckResult:
    return CheckResult(id, "failed", checks, counterexample, anchor)
