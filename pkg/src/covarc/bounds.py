"""Lower bounds for uniform covering arrays, in exact arithmetic.

The central inequality: for a uniform N x k array over Z_v with d = floor(N/v)
and i = N - v*d,

    (k^2-3k+2v) N^2 - v(k(2v-1)-2)(k-1) N
        + k( k(v^4-v^3+vi-i^2) - (v^4-v^3+3vi-3i^2) ) >= 0.

Everything here uses Python ints and Fractions; sign decisions near zero must
be exact (the evaluator hits values like -96).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from covarc.arrays import CoveringArray, high_frequency_profile


@dataclass(frozen=True)
class BoundParams:
    N: int
    k: int
    v: int

    @property
    def d(self):
        return self.N // self.v

    @property
    def i(self):
        return self.N - self.v * self.d


def theorem_inequality(N: int, k: int, v: int):
    """Evaluate the quadratic inequality; returns (holds, exact lhs)."""
    if N < 1 or k < 2 or v < 2:
        raise ValueError("need N >= 1, k >= 2, v >= 2")
    i = N % v
    lhs = (
        (k * k - 3 * k + 2 * v) * N * N
        - v * (k * (2 * v - 1) - 2) * (k - 1) * N
        + k * (
            k * (v**4 - v**3 + v * i - i * i)
            - (v**4 - v**3 + 3 * v * i - 3 * i * i)
        )
    )
    return lhs >= 0, lhs


def theorem_lhs_from_counts(N: int, k: int, v: int) -> int:
    """Same value via 4v*(C(N,2) - M1 + M2_bound); independent cross-check."""
    i = N % v
    return (
        2 * v * N * (N - 1)
        - 2 * k * (N - i) * (N - v + i)
        + k * (k - 1) * (N - i + v - v * v) * (N - v * v + i)
    )


def uca_lower_bound(k: int, v: int) -> int:
    """Smallest N not excluded by the inequality (never below the v^2 floor).

    Nonexistence propagates downward (a uniform array loses a row of
    minimal-count symbols and stays uniform), so the excluded region is the
    initial segment ending at the largest failing N.
    """
    if k < 2 or v < 2:
        raise ValueError("need k >= 2, v >= 2")
    worst = None
    for N in range(v * v, v * v + k * v + 1):
        holds, _ = theorem_inequality(N, k, v)
        if not holds:
            worst = N
    return v * v if worst is None else worst + 1


@dataclass(frozen=True)
class RationalBound:
    """A lower bound on N, possibly strict (N > bound rather than N >= bound)."""

    bound: Fraction
    strict: bool

    @property
    def integer_bound(self) -> int:
        """Smallest integer N compatible with the bound."""
        if self.strict:
            return self.bound.__floor__() + 1
        return self.bound.__ceil__()


def corollary_small_j_bound(v: int, j: int) -> RationalBound:
    """Case list for UCA(N; v+j, v) with 3 <= j <= 7, sharpened for small v."""
    if not 3 <= j <= 7:
        raise ValueError("j must be within 3..7")
    vv = v * v
    if j == 3:
        if 2 < v <= 11:
            return RationalBound(vv + Fraction(3 * v, 2) - 2, strict=True)
        return RationalBound(vv + Fraction(3 * v, 2) - Fraction(5, 2), strict=True)
    if j == 4:
        if v <= 6:
            return RationalBound(Fraction(vv + 2 * v - 4), strict=False)
        return RationalBound(Fraction(vv + 2 * v - 5), strict=True)
    if j == 5:
        return RationalBound(vv + Fraction(7 * v, 3) - Fraction(13, 2), strict=True)
    if j == 6:
        return RationalBound(vv + Fraction(8 * v, 3) - Fraction(21, 2), strict=True)
    return RationalBound(Fraction(vv + 3 * v - 15), strict=True)


@dataclass(frozen=True)
class QuadraticBound:
    """Coefficients of the closed-form bound N >= v*(b + sqrt(D))/a."""

    k: int
    v: int

    @property
    def a(self):
        k = self.k
        return 2 * k * k - 6 * k + 4 * self.v

    @property
    def b(self):
        k, v = self.k, self.v
        return (2 * v - 3) * k * k + (-2 * v + 5) * k + (-4 * v + 2)

    @property
    def D(self):
        k, v = self.k, self.v
        return (
            k**4
            + (8 * v * v - 16 * v + 2) * k**3
            + (-8 * v**3 + 24 * v - 3) * k * k
            + (8 * v**3 - 8 * v * v - 8 * v - 4) * k
            + 4
        )


def closed_form_bound(k: int, v: int) -> float:
    """The closed-form lower bound v*(b + sqrt(D))/a as a float."""
    q = QuadraticBound(k, v)
    if q.D < 0:
        raise ValueError(f"negative discriminant at k={k}, v={v}")
    return v * (q.b + q.D**0.5) / q.a


def closed_form_integer_bound(k: int, v: int) -> int:
    """Exact ceiling of v*(b + sqrt(D))/a, via integer arithmetic only."""
    if k < 3:
        raise ValueError("need k >= 3")
    q = QuadraticBound(k, v)
    a, b, D = q.a, q.b, q.D
    if D < 0:
        raise ValueError(f"negative discriminant at k={k}, v={v}")
    # smallest n with n*a - v*b >= v*sqrt(D)
    root = isqrt(D)
    exact = root * root == D
    n = (v * b + v * root) // a  # candidate, may be one short
    while True:
        t = n * a - v * b
        if t >= 0 and (t * t > v * v * D or (exact and t * t == v * v * D)):
            return n
        n += 1


def k_max_estimate(v: int) -> Fraction:
    """k where the closed-form bound peaks: (16v^2 - 20v - 15) / (8v - 16)."""
    if v < 3:
        raise ValueError("need v >= 3 (v = 2 divides by zero)")
    return Fraction(16 * v * v - 20 * v - 15, 8 * v - 16)


@dataclass(frozen=True)
class RowBoundReport:
    min_high_entries: int
    implied_bound: int | None    # lower bound on N, None when unconstrained
    violated: bool               # C.N below the implied bound


def hf_row_bound(C: CoveringArray) -> RowBoundReport:
    """Lower bound on N implied by a row with few high-frequency entries.

    A row with at most two high-frequency entries forces N >= v^2+v-1 when
    k = v+2 and N >= v^2+v when k >= v+3; a row with at most three forces
    N >= v^2+v-1 for any k >= v+2.  A violation means C cannot actually be a
    covering array (an internal generation error if it was produced as one).
    """
    v = C.v
    if C.k < v + 2:
        raise ValueError(f"need k >= v+2 = {v + 2}, got k={C.k}")
    prof = high_frequency_profile(C)
    h = min(i for i, n in enumerate(prof.a) if n > 0)
    if h <= 2:
        bound = v * v + v - 1 if C.k == v + 2 else v * v + v
    elif h == 3:
        bound = v * v + v - 1
    else:
        return RowBoundReport(h, None, False)
    return RowBoundReport(h, bound, C.N < bound)
