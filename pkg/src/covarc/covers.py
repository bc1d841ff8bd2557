"""Strength-1 covers of an array and the pre-search rejection rules.

A cover is a set of rows containing every symbol in every column; a minimal
cover has no proper subset with that property.  Covers never need duplicate
rows, so they are represented as sorted tuples of indices into the array's
distinct-row list (for an array without duplicate rows these are exactly row
positions).  Tuples compare lexicographically, which is the order behind
phi, the group rejection rule, and the chi test of the second search phase.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from covarc.arrays import CoveringArray

Cover = tuple  # sorted tuple of distinct-row indices


def row_masks(C: CoveringArray):
    """Per distinct row, the bitmask of (column, symbol) incidences."""
    v = C.v
    return tuple(
        sum(1 << (c * v + x) for c, x in enumerate(row)) for row in C.distinct_rows
    )


def full_mask(C: CoveringArray) -> int:
    return (1 << (C.k * C.v)) - 1


def is_cover(C: CoveringArray, rows_idx) -> bool:
    masks = row_masks(C)
    acc = 0
    for i in rows_idx:
        acc |= masks[i]
    return acc == full_mask(C)


@dataclass
class CoverSet:
    """The minimal covers of an array, with the pre-search rejection flags."""

    array: CoveringArray
    covers: list
    max_size: int
    rejected_by_mu: list = field(default_factory=list)
    rejected_by_group: list = field(default_factory=list)
    fixed_row: int | None = None

    @property
    def active(self):
        dropped = set(self.rejected_by_mu) | set(self.rejected_by_group)
        return [D for D in self.covers if D not in dropped]


def minimal_covers(C: CoveringArray, max_size: int) -> CoverSet:
    """All minimal covers of size at most max_size.

    Backtracking over distinct rows in index order; a row is only added when
    it covers a still-missing column symbol (anything else is redundant in
    every superset), and a branch dies when some column misses more symbols
    than there are picks left.  Minimality is certified at the leaf: every
    chosen row must cover some (column, symbol) no other chosen row covers.
    """
    if max_size < C.v:
        raise ValueError(f"max_size must be at least v={C.v}")
    masks = row_masks(C)
    full = full_mask(C)
    n = len(masks)
    k, v = C.k, C.v
    col_masks = [((1 << v) - 1) << (c * v) for c in range(k)]
    found = []

    def missing_ok(acc, remaining):
        for cm in col_masks:
            if (v - ((acc & cm).bit_count())) > remaining:
                return False
        return True

    def minimal(chosen):
        for i in chosen:
            rest = 0
            for j in chosen:
                if j != i:
                    rest |= masks[j]
            if masks[i] & ~rest == 0:
                return False
        return True

    def dfs(start, chosen, acc):
        if acc == full:
            if minimal(chosen):
                found.append(tuple(chosen))
            return
        if len(chosen) >= max_size:
            return
        remaining = max_size - len(chosen)
        if not missing_ok(acc, remaining):
            return
        for i in range(start, n):
            m = masks[i]
            if m & ~acc == 0:
                continue
            chosen.append(i)
            dfs(i + 1, chosen, acc | m)
            chosen.pop()

    dfs(0, [], 0)
    found.sort()
    return CoverSet(C, found, max_size)


def phi(D, C: CoveringArray) -> Cover:
    """Lexicographically smallest minimal cover inside the row set D.

    D is an iterable of distinct-row indices (a multiset part may pass its
    support).  Raises ValueError when D is not a cover.
    """
    support = tuple(sorted(set(D)))
    masks = row_masks(C)
    full = full_mask(C)
    acc = 0
    for i in support:
        acc |= masks[i]
    if acc != full:
        raise ValueError("D is not a cover")
    best = None

    def minimal(chosen):
        for i in chosen:
            rest = 0
            for j in chosen:
                if j != i:
                    rest |= masks[j]
            if masks[i] & ~rest == 0:
                return False
        return True

    def dfs(pos, chosen, acc):
        nonlocal best
        if best is not None and tuple(chosen) > best[: len(chosen)]:
            return
        if acc == full:
            if minimal(chosen):
                cand = tuple(chosen)
                if best is None or cand < best:
                    best = cand
            return
        if pos == len(support):
            return
        rest_all = 0
        for j in range(pos, len(support)):
            rest_all |= masks[support[j]]
        if acc | rest_all != full:
            return
        i = support[pos]
        if masks[i] & ~acc:
            chosen.append(i)
            dfs(pos + 1, chosen, acc | masks[i])
            chosen.pop()
        dfs(pos + 1, chosen, acc)

    dfs(0, [], 0)
    assert best is not None
    return best


def prune_by_mu(S: CoverSet, mu: int) -> CoverSet:
    """Drop covers larger than mu (the largest symbol multiplicity in the
    column with the smallest invariant)."""
    S.rejected_by_mu = [D for D in S.covers if len(D) > mu]
    return S


def cover_orbits(covers, row_perms):
    """Group covers into orbits under the generators' action on rows.

    Orbits may contain covers outside the input list (the group acts on all
    row subsets); only input membership is reported per orbit, alongside the
    full orbit content needed by the rejection rule.
    """
    seen = {}
    orbits = []
    for D in covers:
        if D in seen:
            continue
        orbit = {D}
        frontier = [D]
        while frontier:
            E = frontier.pop()
            for p in row_perms:
                F = tuple(sorted(p[i] for i in E))
                if F not in orbit:
                    orbit.add(F)
                    frontier.append(F)
        for E in orbit:
            seen[E] = len(orbits)
        orbits.append(orbit)
    return orbits


def prune_by_group(S: CoverSet, c: int, row_perms) -> CoverSet:
    """Reject covers D containing c with some image gD < D also containing c.

    Requires row c to have multiplicity 1.  Per orbit, among the members that
    contain c only the lexicographically smallest survives.
    """
    C = S.array
    if C.multiplicities[c] != 1:
        raise ValueError(f"fixed row {c} has multiplicity > 1")
    S.fixed_row = c
    in_set = set(S.covers)
    rejected = []
    for orbit in cover_orbits(S.covers, row_perms):
        with_c = sorted(E for E in orbit if c in E)
        rejected.extend(E for E in with_c[1:] if E in in_set)
    S.rejected_by_group = sorted(set(rejected))
    return S


def group_rejection_counts(S: CoverSet, row_perms):
    """For every multiplicity-1 row c, how many covers prune_by_group drops."""
    C = S.array
    candidates = [i for i, m in enumerate(C.multiplicities) if m == 1]
    counts = dict.fromkeys(candidates, 0)
    in_set = set(S.covers)
    cand_set = set(candidates)
    for orbit in cover_orbits(S.covers, row_perms):
        touched = set()
        for E in orbit:
            touched.update(i for i in E if i in cand_set)
        for c_row in touched:
            with_c = sorted(E for E in orbit if c_row in E)
            keep = with_c[0]
            counts[c_row] += sum(1 for E in with_c if E in in_set and E != keep)
    return counts


def choose_fixed_row(C: CoveringArray, S: CoverSet, row_perms):
    """The multiplicity-1 row maximizing the group rejection count.

    Ties break to the smallest index.  Returns None when every row is
    duplicated, which disables group pruning (and the chi test degenerates
    to a plain lexicographic choice downstream).
    """
    counts = group_rejection_counts(S, row_perms)
    if not counts:
        return None
    best = max(counts.values())
    return min(c for c, n in counts.items() if n == best)
