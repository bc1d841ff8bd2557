"""Covering arrays as sorted row multisets, plus per-array structural checks.

An array over the alphabet Z_v = {0, ..., v-1} is stored as a tuple of N
rows (each a length-k tuple of ints), sorted ascending.  Duplicate rows are
kept as separate entries; the sorted order makes serialization bit-stable
and gives every lexicographic convention in the search a fixed meaning.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import comb


class ArrayFormatError(ValueError):
    """Malformed array text (bad header, symbol out of range, ...)."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CoveringArray:
    """An N x k array over Z_v, held as a sorted multiset of rows.

    Immutable after construction; hashable; safe to share across workers.
    """

    __slots__ = ("v", "k", "N", "rows", "_hash", "__dict__")

    def __init__(self, v: int, rows):
        rows = tuple(sorted(tuple(r) for r in rows))
        if not rows:
            raise ValueError("array needs at least one row")
        k = len(rows[0])
        if k < 1:
            raise ValueError("k must be >= 1")
        if v < 2:
            raise ValueError("v must be >= 2")
        for r in rows:
            if len(r) != k:
                raise ValueError("ragged rows")
            for x in r:
                if not 0 <= x < v:
                    raise ValueError(f"symbol {x} outside 0..{v - 1}")
        self.v = v
        self.k = k
        self.N = len(rows)
        self.rows = rows
        self._hash = hash((v, rows))

    def __eq__(self, other):
        return (
            isinstance(other, CoveringArray)
            and self.v == other.v
            and self.rows == other.rows
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"CoveringArray(v={self.v}, k={self.k}, N={self.N})"

    # Row-major symbol sequence of the sorted rows; the one fixed array order.
    def lex_key(self):
        return self.rows

    @cached_property
    def distinct_rows(self):
        """Distinct row values in sorted order."""
        out = []
        for r in self.rows:
            if not out or out[-1] != r:
                out.append(r)
        return tuple(out)

    @cached_property
    def multiplicities(self):
        """Multiplicity of each distinct row, aligned with distinct_rows."""
        mult = []
        for r in self.rows:
            if mult and self.distinct_rows[len(mult) - 1] == r:
                mult[-1] += 1
            else:
                mult.append(1)
        return tuple(mult)

    @cached_property
    def column_counts(self):
        """column_counts[c][x] = number of occurrences of symbol x in column c."""
        counts = [[0] * self.v for _ in range(self.k)]
        for r in self.rows:
            for c, x in enumerate(r):
                counts[c][x] += 1
        return tuple(tuple(col) for col in counts)

    def serialize(self) -> str:
        lines = [f"{self.v} {self.k} {self.N}"]
        lines.extend(" ".join(map(str, r)) for r in self.rows)
        return "\n".join(lines) + "\n"


def parse_array(text: str, first_line: int = 1) -> CoveringArray:
    """Parse the text format: header "v k N" then N rows of k symbols."""
    lines = text.strip("\n").split("\n")
    head = lines[0].split()
    if len(head) != 3:
        raise ArrayFormatError("header must be 'v k N'", line=first_line)
    try:
        v, k, n = map(int, head)
    except ValueError:
        raise ArrayFormatError("non-integer header", line=first_line) from None
    if len(lines) - 1 != n:
        raise ArrayFormatError(
            f"expected {n} rows, found {len(lines) - 1}", line=first_line
        )
    rows = []
    for i, line in enumerate(lines[1:], start=1):
        syms = line.split()
        if len(syms) != k:
            raise ArrayFormatError(
                f"expected {k} symbols, found {len(syms)}", line=first_line + i
            )
        try:
            row = tuple(int(s) for s in syms)
        except ValueError:
            raise ArrayFormatError("non-integer symbol", line=first_line + i) from None
        for x in row:
            if not 0 <= x < v:
                raise ArrayFormatError(
                    f"symbol {x} outside 0..{v - 1}", line=first_line + i
                )
        rows.append(row)
    return CoveringArray(v, rows)


def parse_catalog(text: str):
    """Parse a catalog file: arrays separated by one blank line."""
    arrays = []
    line_no = 1
    for block in text.split("\n\n"):
        if not block.strip():
            line_no += block.count("\n")
            continue
        arrays.append(parse_array(block, first_line=line_no))
        line_no += block.strip("\n").count("\n") + 2
    return arrays


def serialize_catalog(arrays) -> str:
    return "\n".join(a.serialize() for a in arrays)


def is_covering_array(C: CoveringArray) -> bool:
    """Strength-2 coverage: every symbol pair occurs in every column pair."""
    v = C.v
    full = (1 << (v * v)) - 1
    for c1 in range(C.k):
        for c2 in range(c1 + 1, C.k):
            seen = 0
            for r in C.rows:
                seen |= 1 << (r[c1] * v + r[c2])
            if seen != full:
                return False
    return True


def missing_pair_witness(C: CoveringArray):
    """First uncovered (c1, c2, x, y), or None if C is a covering array."""
    v = C.v
    for c1 in range(C.k):
        for c2 in range(c1 + 1, C.k):
            seen = 0
            for r in C.rows:
                seen |= 1 << (r[c1] * v + r[c2])
            for p in range(v * v):
                if not seen >> p & 1:
                    return (c1, c2, p // v, p % v)
    return None


def is_uniform(C: CoveringArray) -> bool:
    """Every symbol occurs floor(N/v) or ceil(N/v) times in every column."""
    lo, rem = divmod(C.N, C.v)
    allowed = {lo, lo + 1} if rem else {lo}
    return all(m in allowed for col in C.column_counts for m in col)


def column_invariant(C: CoveringArray, c: int):
    """Symbol counts of column c sorted in descending order.

    These tuples compare lexicographically; ties between columns are broken
    by that same comparison.
    """
    if not 0 <= c < C.k:
        raise IndexError(f"column {c} out of range for k={C.k}")
    return tuple(sorted(C.column_counts[c], reverse=True))


@dataclass(frozen=True)
class ColumnProfile:
    column: int
    counts: tuple
    invariant: tuple


def column_profile(C: CoveringArray, c: int) -> ColumnProfile:
    return ColumnProfile(c, C.column_counts[c], column_invariant(C, c))


@dataclass(frozen=True)
class HighFrequencyProfile:
    """Row counts by number of high-frequency entries.

    An entry is high-frequency when its symbol occurs at least v+1 times in
    its column.  a[i] = number of rows with exactly i such entries; high_symbols
    lists, per column, the set of symbols occurring at least v+1 times.
    """

    a: tuple
    high_symbols: tuple


def high_frequency_profile(C: CoveringArray) -> HighFrequencyProfile:
    v = C.v
    high = tuple(
        frozenset(x for x in range(v) if C.column_counts[c][x] >= v + 1)
        for c in range(C.k)
    )
    a = [0] * (C.k + 1)
    for r in C.rows:
        h = sum(1 for c, x in enumerate(r) if x in high[c])
        a[h] += 1
    return HighFrequencyProfile(tuple(a), high)


@dataclass(frozen=True)
class AgreementStats:
    """Exact pair-agreement counts of an array.

    m1 counts triples (r, r', c) of row pairs agreeing in column c; m2 counts
    quadruples (r, r', {c, c'}) agreeing in an unordered column pair.  mu[(r, b)]
    is the number of columns where rows r and b agree (indices into C.rows,
    r < b).  pair_counts[(c, c')][(x, y)] is the number of rows with x in c
    and y in c'; mu_x[(c, c')][x] the number of row pairs agreeing on x in c
    and on anything in c'.
    """

    m1: int
    m2: int
    mu: dict
    pair_counts: dict
    mu_x: dict


def agreement_stats(C: CoveringArray) -> AgreementStats:
    v = C.v
    m1 = sum(comb(m, 2) for col in C.column_counts for m in col)
    pair_counts = {}
    mu_x = {}
    m2 = 0
    for c1 in range(C.k):
        for c2 in range(c1 + 1, C.k):
            lam = {}
            for r in C.rows:
                key = (r[c1], r[c2])
                lam[key] = lam.get(key, 0) + 1
            pair_counts[(c1, c2)] = lam
            mux = [0] * v
            for (x, _y), n in lam.items():
                mux[x] += comb(n, 2)
            mu_x[(c1, c2)] = tuple(mux)
            m2 += sum(mux)
    mu = {}
    rows = C.rows
    for i in range(C.N):
        ri = rows[i]
        for j in range(i + 1, C.N):
            rj = rows[j]
            mu[(i, j)] = sum(1 for a, b in zip(ri, rj) if a == b)
    return AgreementStats(m1, m2, mu, pair_counts, mu_x)


def uniform_m1_closed_form(N: int, k: int, v: int) -> Fraction:
    """Exact M1 of any uniform array: k*d*(N-v+i)/2 with d=floor(N/v), i=N-vd."""
    d, i = divmod(N, v)
    return Fraction(k * d * (N - v + i), 2)


def uniform_m2_upper_bound(N: int, k: int, v: int) -> Fraction:
    """Upper bound on M2 for uniform arrays: k(k-1)(d+1-v)(N-v^2+i)/4."""
    d, i = divmod(N, v)
    return Fraction(k * (k - 1) * (d + 1 - v) * (N - v * v + i), 4)


@dataclass(frozen=True)
class TightStructureReport:
    """Certificate for UCA(v^2+v-1; v+2, v) tight-bound structure."""

    agreements_ok: bool          # every row pair agrees in 1 or 2 columns
    bad_pair: tuple | None       # witness (i, j, agreement count) when not
    doubled_pairs: dict          # (c, c') -> tuple of (x, y) with count 2
    disjoint_ok: bool            # each column pair: exactly v-1 disjoint doubles

    @property
    def passed(self):
        return self.agreements_ok and self.disjoint_ok


def check_tight_structure(C: CoveringArray) -> TightStructureReport:
    """Check the structure forced at the tight bound N = v^2+v-1, k = v+2.

    Raises ValueError unless C is a uniform covering array with exactly those
    parameters.
    """
    v = C.v
    if C.N != v * v + v - 1 or C.k != v + 2:
        raise ValueError(
            f"expected N={v * v + v - 1}, k={v + 2} for v={v}; "
            f"got N={C.N}, k={C.k}"
        )
    if not is_uniform(C):
        raise ValueError("array is not uniform")
    stats = agreement_stats(C)
    agreements_ok = True
    bad_pair = None
    for (i, j), m in stats.mu.items():
        if m not in (1, 2):
            agreements_ok = False
            bad_pair = (i, j, m)
            break
    doubled = {}
    disjoint_ok = True
    for key, lam in stats.pair_counts.items():
        twos = tuple(sorted(xy for xy, n in lam.items() if n == 2))
        if any(n > 2 for n in lam.values()):
            disjoint_ok = False
        doubled[key] = twos
        xs = [x for x, _ in twos]
        ys = [y for _, y in twos]
        if len(twos) != v - 1 or len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
            disjoint_ok = False
    return TightStructureReport(agreements_ok, bad_pair, doubled, disjoint_ok)
