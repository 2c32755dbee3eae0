"""Effectiveness measures and top-size filtering."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .engine import ResultEntry


def top_size_filter(results: list[ResultEntry]) -> list[ResultEntry]:
    """The maximal prefix of a ranked list sharing the minimum size."""
    if not results:
        return []
    smallest = results[0].size
    out = []
    for r in results:
        if r.size != smallest:
            break
        out.append(r)
    return out


@dataclass(frozen=True)
class EvalReport:
    precision: Fraction
    recall: Fraction
    fmeasure: Fraction
    retrieved_count: int
    relevant_count: int


def evaluate_effectiveness(retrieved: set, relevant: set) -> EvalReport:
    """Precision, recall and F-measure of a retrieved set against judgments.

    Empty-set conventions: an empty retrieved set has precision 1 when
    nothing was relevant and 0 otherwise; recall mirrors that over the
    relevant set.
    """
    hits = len(retrieved & relevant)
    if retrieved:
        p = Fraction(hits, len(retrieved))
    else:
        p = Fraction(1) if not relevant else Fraction(0)
    if relevant:
        r = Fraction(hits, len(relevant))
    else:
        r = Fraction(1) if not retrieved else Fraction(0)
    f = Fraction(0) if p + r == 0 else 2 * p * r / (p + r)
    return EvalReport(
        precision=p,
        recall=r,
        fmeasure=f,
        retrieved_count=len(retrieved),
        relevant_count=len(relevant),
    )
