"""Check records and reports shared by every verification routine."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class CheckRecord:
    name: str
    passed: bool
    violation: float
    tolerance: float
    samples: int | None = None
    detail: dict = field(default_factory=dict)

    @classmethod
    def from_violation(cls, name, violation, tolerance, samples=None, **detail):
        violation = float(violation) + 0.0  # no negative zero in reports
        # NaN never passes
        passed = bool(violation <= tolerance) and not math.isnan(violation)
        return cls(name, passed, violation, float(tolerance), samples, detail)

    def to_dict(self):
        out = {
            "name": self.name,
            "pass": self.passed,
            "max_violation": self.violation,
            "tolerance": self.tolerance,
        }
        if self.samples is not None:
            out["samples"] = self.samples
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class Report:
    suite: str
    records: list[CheckRecord] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(r.passed for r in self.records)

    @property
    def max_violation(self):
        return max((r.violation for r in self.records), default=0.0)

    @property
    def failures(self):
        return [r.name for r in self.records if not r.passed]

    def add(self, record):
        self.records.append(record)
        return record

    def extend(self, other, prefix=""):
        for r in other.records:
            self.records.append(
                CheckRecord(prefix + r.name, r.passed, r.violation, r.tolerance, r.samples, r.detail)
            )
        return self

    def __getitem__(self, name):
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self):
        return {
            "suite": self.suite,
            "pass": self.passed,
            **self.meta,
            "checks": [r.to_dict() for r in self.records],
        }
