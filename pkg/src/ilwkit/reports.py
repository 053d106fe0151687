"""Inequality ratio reports shared by the remainder checks and the inequality lab."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class RatioCase:
    index: int
    label: str
    lhs: float
    rhs: float
    ratio: float | None  # None: excluded (zero right side)

    @classmethod
    def make(cls, index: int, label: str, lhs: float, rhs: float, zero_ratio: float | None = None):
        """Build a case; ``rhs == 0`` is excluded unless ``lhs == 0`` and ``zero_ratio`` is set."""
        lhs, rhs = float(lhs), float(rhs)
        if rhs > 0.0:
            ratio = lhs / rhs
        elif lhs == 0.0 and zero_ratio is not None:
            ratio = float(zero_ratio)
        else:
            ratio = None
        return cls(index, label, lhs, rhs, ratio)


@dataclass(frozen=True)
class RatioReport:
    lemma: str
    cases: tuple = ()
    refinement_factor: float | None = None
    notes: tuple = ()

    @property
    def included(self) -> tuple:
        return tuple(c for c in self.cases if c.ratio is not None)

    @property
    def excluded(self) -> tuple:
        return tuple(c for c in self.cases if c.ratio is None)

    @property
    def max_ratio(self) -> float:
        r = [c.ratio for c in self.included]
        return max(r) if r else 0.0

    @property
    def finite(self) -> bool:
        return all(math.isfinite(c.ratio) for c in self.included)

    def with_refinement(self, refined: "RatioReport") -> "RatioReport":
        """Attach the max-ratio change factor (>= 1) against a refined-grid rerun."""
        a, b = self.max_ratio, refined.max_ratio
        if a == 0.0 and b == 0.0:
            factor = 1.0
        elif a == 0.0 or b == 0.0:
            factor = math.inf
        else:
            factor = max(a, b) / min(a, b)
        return replace(self, refinement_factor=factor)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lemma", "index", "label", "lhs", "rhs", "ratio"])
        for c in self.cases:
            w.writerow(
                [self.lemma, c.index, c.label, f"{c.lhs:.17g}", f"{c.rhs:.17g}",
                 "" if c.ratio is None else f"{c.ratio:.17g}"]
            )
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "lemma": self.lemma,
            "cases": len(self.cases),
            "excluded": len(self.excluded),
            "max_ratio": self.max_ratio,
            "refinement_factor": self.refinement_factor,
            "notes": list(self.notes),
        }


def merge(lemma: str, reports) -> RatioReport:
    """Concatenate cases of several reports, reindexed in order."""
    cases = []
    for rep in reports:
        for c in rep.cases:
            cases.append(replace(c, index=len(cases)))
    return RatioReport(lemma, tuple(cases))


def l2(values: np.ndarray, spacing: float) -> float:
    return float(np.sqrt(spacing * np.dot(values, values)))
