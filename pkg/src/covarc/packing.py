"""Packings of v minimal covers and their completion to full partitions.

The packing search is a 0/1-coefficient equality system in the style of an
exact-cover solver: one bounded variable per cover (its multiplicity in the
packing), one slack per distinct row, and two extra slacks tying the counts
of size-v and size>=v+2 covers to N - v^2.  The slack rows never change the
solution set; they only cut dead branches early.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement

from covarc.arrays import CoveringArray
from covarc.covers import phi


@dataclass(frozen=True)
class ExactCoverInstance:
    """Equality system A x = b with 0 <= x_j <= u_j, all structural
    coefficients 0/1.

    Variables, in order: one per cover (multiplicity in the packing), one
    slack per distinct row, then s1 and s2.  Equations: per distinct row,
    cover usage plus row slack equals the row multiplicity; the cover
    variables sum to v; s1 plus the size-v cover count equals v; and
    s1 + s2 + (count of size >= v+2 covers) equals N - v^2.
    """

    array: CoveringArray
    covers: tuple                # sorted by (size, lex)
    upper_bounds: tuple          # aligned with variables
    equations: tuple             # (coeff dict var_index -> 1, rhs)

    @property
    def n_covers(self):
        return len(self.covers)

    def var_name(self, j):
        nc, nr = len(self.covers), len(self.array.distinct_rows)
        if j < nc:
            return f"x{j}"
        if j < nc + nr:
            return f"slack_r{j - nc}"
        return "s1" if j == nc + nr else "s2"


def build_instance(C: CoveringArray, covers) -> ExactCoverInstance:
    v = C.v
    mult = C.multiplicities
    covers = tuple(sorted(covers, key=lambda D: (len(D), D)))
    nc = len(covers)
    nr = len(mult)
    s1, s2 = nc + nr, nc + nr + 1
    ub = []
    for D in covers:
        ub.append(min(min(mult[i] for i in D), v))
    ub.extend(mult)
    excess = C.N - v * v
    ub.extend([excess, excess])
    eqs = []
    for r in range(nr):
        coeff = {j: 1 for j, D in enumerate(covers) if r in D}
        coeff[nc + r] = 1
        eqs.append((coeff, mult[r]))
    eqs.append(({j: 1 for j in range(nc)}, v))
    eqs.append(({s1: 1, **{j: 1 for j, D in enumerate(covers) if len(D) == v}}, v))
    eqs.append(
        (
            {s1: 1, s2: 1, **{j: 1 for j, D in enumerate(covers) if len(D) >= v + 2}},
            excess,
        )
    )
    return ExactCoverInstance(C, covers, tuple(ub), tuple(eqs))


def enumerate_packings(inst: ExactCoverInstance, use_slack_constraints=True):
    """Yield every multiset of v covers that packs inside the array.

    Branches over covers in (size, lex) order with non-decreasing indices, so
    each multiset appears exactly once.  Row capacities give the hard
    constraint; the s1/s2 equations only prune.
    """
    C = inst.array
    v = C.v
    covers = inst.covers
    nc = len(covers)
    mult = list(C.multiplicities)
    excess = C.N - v * v
    sizes = [len(D) for D in covers]

    def slack_feasible(chosen_sizes, t, start):
        # optimistic lower bound on the final (v - M_v) + M_{>=v+2}, which
        # equation pair (s1, s2) caps at N - v^2; never cuts a valid leaf
        if not use_slack_constraints:
            return True
        m_v = sum(1 for s in chosen_sizes if s == v)
        m_big = sum(1 for s in chosen_sizes if s >= v + 2)
        remaining = v - t
        add_v = remaining if (start < nc and sizes[start] == v) else 0
        add_big = remaining if (start >= nc or sizes[start] >= v + 2) else 0
        return (v - m_v - add_v) + (m_big + add_big) <= excess

    out = []

    def dfs(start, chosen, chosen_sizes):
        t = len(chosen)
        if t == v:
            out.append(tuple(chosen))
            return
        # remaining covers must each have size >= v and fit the row budget
        budget = C.N - sum(chosen_sizes)
        if budget < (v - t) * v:
            return
        if not slack_feasible(chosen_sizes, t, start):
            return
        for j in range(start, nc):
            D = covers[j]
            if sizes[j] * (v - t) > budget:
                break  # sizes ascend; nothing later fits either
            ok = True
            for i in D:
                if mult[i] == 0:
                    ok = False
                    break
            if not ok:
                continue
            for i in D:
                mult[i] -= 1
            chosen.append(j)
            chosen_sizes.append(sizes[j])
            dfs(j, chosen, chosen_sizes)
            chosen.pop()
            chosen_sizes.pop()
            for i in D:
                mult[i] += 1

    dfs(0, [], [])
    for packing in out:
        yield tuple(covers[j] for j in packing)


@dataclass(frozen=True)
class Packing:
    covers: tuple  # multiset of covers, as chosen


def complete_partitions(
    C: CoveringArray,
    packing,
    max_part: int,
    min_part: int | None = None,
    phi_cache: dict | None = None,
):
    """All full partitions of C's rows extending the packing, phi-filtered.

    Parts are multisets over distinct-row indices, seeded with the packing's
    covers; leftover row copies are distributed in every way that respects
    the size window.  A partition survives only when each seed cover is the
    lexicographically smallest minimal cover of its part, which makes every
    partition reachable from exactly one packing.  Parts are returned sorted,
    each part a sorted tuple of indices with repetition.
    """
    v = C.v
    mult = C.multiplicities
    used = [0] * len(mult)
    for D in packing:
        for i in D:
            used[i] += 1
    leftovers = []
    for i, m in enumerate(mult):
        extra = m - used[i]
        if extra < 0:
            raise ValueError("packing does not fit inside the array")
        if extra:
            leftovers.append((i, extra))
    parts0 = [list(D) for D in packing]
    lo = min_part if min_part is not None else v
    if phi_cache is None:
        phi_cache = {}

    def phi_of(part):
        key = tuple(sorted(set(part)))
        got = phi_cache.get(key)
        if got is None:
            got = phi(key, C)
            phi_cache[key] = got
        return got

    results = []
    emitted = set()

    def dfs(idx, parts):
        if idx == len(leftovers):
            if any(len(p) < lo for p in parts):
                return
            for D, p in zip(packing, parts):
                if phi_of(p) != D:
                    return
            enc = tuple(sorted(tuple(sorted(p)) for p in parts))
            if enc not in emitted:  # identical seed covers can collide
                emitted.add(enc)
                results.append(enc)
            return
        row, count = leftovers[idx]
        room = [max_part - len(p) for p in parts]
        for distn in _distributions(count, room):
            for pi, c in enumerate(distn):
                parts[pi].extend([row] * c)
            dfs(idx + 1, parts)
            for pi, c in enumerate(distn):
                if c:
                    del parts[pi][-c:]
        return

    dfs(0, parts0)
    return results


def _distributions(count, room):
    """All ways to put `count` identical items into bins with capacities."""
    bins = len(room)

    def rec(i, rem):
        if i == bins - 1:
            if rem <= room[i]:
                yield (rem,)
            return
        for c in range(min(rem, room[i]) + 1):
            for rest in rec(i + 1, rem - c):
                yield (c,) + rest

    yield from rec(0, count)


def brute_force_packings(C: CoveringArray, covers):
    """Oracle: filter all v-multisets of covers by row capacities."""
    v = C.v
    mult = C.multiplicities
    out = []
    for combo in combinations_with_replacement(sorted(covers, key=lambda D: (len(D), D)), v):
        used = [0] * len(mult)
        ok = True
        for D in combo:
            for i in D:
                used[i] += 1
                if used[i] > mult[i]:
                    ok = False
        if ok:
            out.append(tuple(combo))
    return out
