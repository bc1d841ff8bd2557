"""Double-counting audit of a level transition, in exact rationals.

The number of labeled (k+1)-column arrays in the classified universe is
counted two ways.  From the output classes, the orbit-stabilizer theorem
gives sum (k+1)! v!^(k+1) / |Aut(C')|.  From the search events, every
partition orbit of a parent C contributes per chi-passing member

    (k! v!^k / |Aut(C)|) * S(C') / (alpha(C') * beta(C, C')),

where alpha is the share of columns of C' with minimal largest symbol
multiplicity (the share of labeled copies whose last column survives the
generation cap), beta the chi-passing share of the orbit, and S(C') the
number of distinct symbol assignments of the partition (v! over the
factorials of identical-part multiplicities).  Exact equality of the two
sums is the audit; any mismatch aborts a classification run.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial


@dataclass(frozen=True)
class AuditReport:
    level: int                 # the k+1 of the transition k -> k+1
    class_side: Fraction
    search_side: Fraction

    @property
    def passed(self):
        return self.class_side == self.search_side

    def to_json_dict(self):
        return {
            "format": 1,
            "level": self.level,
            "classSide": str(self.class_side),
            "searchSide": str(self.search_side),
            "pass": self.passed,
        }


@dataclass(frozen=True)
class DoubleCountLedger:
    class_side_sum: Fraction
    search_side_sum: Fraction


def class_side(class_records, k1: int, v: int) -> Fraction:
    """Sum of (k+1)! v!^(k+1) / |Aut(C')| over the classified level k1 = k+1."""
    full = factorial(k1) * factorial(v) ** k1
    total = Fraction(0)
    for rec in class_records:
        if rec.aut_order <= 0:
            raise ValueError("missing or invalid automorphism order")
        total += Fraction(full, rec.aut_order)
    return total


def search_side(records, k: int, v: int) -> Fraction:
    """Sum over chi-passing events of class_size(C) * S / (alpha * beta)."""
    full = factorial(k) * factorial(v) ** k
    total = Fraction(0)
    for rec in records:
        if rec.alpha <= 0 or rec.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        total += (
            rec.n_events
            * Fraction(full, rec.parent_aut_order)
            * rec.s_count
            / (rec.alpha * rec.beta)
        )
    return total


def audit_transition(level, N: int, v: int) -> AuditReport:
    """Audit one LevelResult holding the records of its own transition."""
    cs = class_side(level.classes, level.k, v)
    ss = search_side(level.records, level.k - 1, v)
    return AuditReport(level.k, cs, ss)


def audit(level, N: int, v: int) -> AuditReport:
    """Alias with the spec's operation name."""
    return audit_transition(level, N, v)
