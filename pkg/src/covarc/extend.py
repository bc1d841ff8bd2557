"""Column extension with canonical augmentation and the classification driver.

One level of the search: enumerate the partitions of a representative C into
v strength-1 covers (via packings of minimal covers, each partition reached
from exactly one packing thanks to the phi rule), group the partitions into
orbits under Aut(C), and keep per orbit the designated member.  A candidate
survives when

  1. the new column's invariant is lexicographically no larger than any
     other column's,
  2. among columns tying that invariant, the new column lies in the orbit
     whose cells receive the smallest canonical label,
  3. the chi value (phi of the part holding the fixed row) is minimal over
     the orbit, and
  4. the candidate's array is lexicographically smallest among the orbit
     members attaining that chi.

Audit statistics (alpha, beta, S, orbit sizes) are collected per orbit for
the double-counting consistency check, including orbits later rejected by
conditions 1-2.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations_with_replacement
from math import factorial

from covarc.arrays import CoveringArray, column_invariant, is_uniform
from covarc.canon import ArrayCanon, array_canon
from covarc.covers import (
    CoverSet,
    choose_fixed_row,
    minimal_covers,
    phi,
    prune_by_group,
)
from covarc.packing import build_instance, complete_partitions, enumerate_packings


@dataclass
class ExtensionOptions:
    """Knobs for one classification run."""

    uniform_only: bool = False
    delta_schedule: dict = field(default_factory=dict)  # level k -> delta
    target_k: int | None = None
    collect_stats: bool = True
    group_prune: bool = True
    mu_prune: bool = True
    slack_constraints: bool = True
    condition_order: str = "chi-first"  # or "invariant-first"
    workers: int = 1

    def validate(self, N: int, v: int):
        for k, delta in self.delta_schedule.items():
            if delta < 0 or k < 2:
                raise ValueError("delta schedule entries need k >= 2, delta >= 0")
            if delta > 0 and N >= v * (v + 1):
                raise ValueError("delta pruning requires N < v(v+1)")
        if self.condition_order not in ("chi-first", "invariant-first"):
            raise ValueError(f"unknown condition order {self.condition_order!r}")


@dataclass(frozen=True)
class ExtensionRecord:
    """Audit bookkeeping for one partition orbit of one parent."""

    parent_index: int
    parent_aut_order: int
    alpha: Fraction
    beta: Fraction
    s_count: int
    orbit_size: int
    n_events: int                 # orbit members passing the chi test
    accepted: bool
    child_signature: bytes | None


@dataclass(frozen=True)
class ClassRecord:
    array: CoveringArray
    signature: bytes
    aut_order: int
    alpha: Fraction
    uniform: bool


@dataclass
class LevelResult:
    k: int
    classes: list
    records: list            # ExtensionRecords of the transition into this level
    audit: object | None = None

    @property
    def count(self):
        return len(self.classes)

    @property
    def uniform_count(self):
        return sum(1 for c in self.classes if c.uniform)


class Catalog(dict):
    """Level results keyed by k for one (N, v)."""

    def __init__(self, N, v):
        super().__init__()
        self.N = N
        self.v = v

    def counts(self):
        return {k: self[k].count for k in sorted(self)}

    def uniform_counts(self):
        return {k: self[k].uniform_count for k in sorted(self)}


# ---------------------------------------------------------------------------
# helpers on arrays under construction


def alpha_of(C: CoveringArray) -> Fraction:
    """Share of columns whose largest symbol multiplicity is minimal."""
    maxes = [max(col) for col in C.column_counts]
    m = min(maxes)
    return Fraction(maxes.count(m), C.k)


def _sorted_desc(sizes):
    return tuple(sorted(sizes, reverse=True))


def _partition_array_key(parts, mult_len):
    """Canonical symbol assignment and comparison key of a partition.

    Parts are ranked by their per-value count vectors, descending; symbols
    0..v-1 go to parts in that order (ties are identical parts, so the order
    between them is immaterial).  The key lists, per distinct row value, the
    sorted tuple of assigned symbols, which reproduces row-major comparison
    of the finished arrays.
    """
    vecs = []
    for p in parts:
        vec = [0] * mult_len
        for i in p:
            vec[i] += 1
        vecs.append(tuple(vec))
    order = sorted(range(len(parts)), key=lambda t: vecs[t], reverse=True)
    symbol = [0] * len(parts)
    for s, t in enumerate(order):
        symbol[t] = s
    key = tuple(
        tuple(sorted(symbol[t] for t in range(len(parts)) for _ in range(vecs[t][j])))
        for j in range(mult_len)
    )
    return key, symbol


def _build_extended(C: CoveringArray, parts, symbol):
    rows = []
    for t, p in enumerate(parts):
        s = symbol[t]
        for i in p:
            rows.append(C.distinct_rows[i] + (s,))
    return CoveringArray(C.v, rows)


def _s_count(parts, v):
    seen = {}
    for p in parts:
        seen[p] = seen.get(p, 0) + 1
    s = factorial(v)
    for e in seen.values():
        s //= factorial(e)
    return s


def _apply_row_perm(parts, perm):
    return tuple(sorted(tuple(sorted(perm[i] for i in p)) for p in parts))


def _partition_orbit(P, row_perms):
    orbit = {P}
    frontier = [P]
    while frontier:
        Q = frontier.pop()
        for perm in row_perms:
            R = _apply_row_perm(Q, perm)
            if R not in orbit:
                orbit.add(R)
                frontier.append(R)
    return orbit


def _column_orbits(colperm_gens, k):
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in colperm_gens:
        for c in range(k):
            a, b = find(c), find(g[c])
            if a != b:
                parent[a] = b
    return find


def condition1(C: CoveringArray, new_col: int | None = None) -> bool:
    """No other column has a lexicographically smaller invariant than the
    last (or given) column."""
    c0 = C.k - 1 if new_col is None else new_col
    inv = column_invariant(C, c0)
    return all(column_invariant(C, c) >= inv for c in range(C.k) if c != c0)


def condition2(C: CoveringArray, ac: ArrayCanon | None = None) -> bool:
    """Among columns tying the last column's invariant, the last column must
    sit in the orbit whose cells get the smallest canonical label."""
    last = C.k - 1
    inv = column_invariant(C, last)
    ties = [c for c in range(C.k) if c != last and column_invariant(C, c) == inv]
    if not ties:
        return True
    if ac is None:
        ac = array_canon(C)
    lab = ac.graph_form.labeling
    v = C.v

    def key(c):
        return min(lab[c * v + s] for s in range(v))

    best = min(ties + [last], key=key)
    find = _column_orbits([g[0] for g in ac.aut.generators], C.k)
    return find(last) == find(best)


def phase1_accept(C: CoveringArray) -> bool:
    """Conditions 1 and 2 on an already-extended array."""
    return condition1(C) and condition2(C)


# ---------------------------------------------------------------------------
# delta-skip filter


def size_v_position_covers(C: CoveringArray):
    """All size-v covers as bitmasks over row positions.

    Duplicate rows count as separate elements, so a cover using a duplicated
    value expands into one mask per copy choice.
    """
    v = C.v
    starts = []
    pos = 0
    for m in C.multiplicities:
        starts.append(pos)
        pos += m
    value_covers = minimal_covers(C, v).covers
    masks = []
    for D in value_covers:
        choices = [[starts[i] + t for t in range(C.multiplicities[i])] for i in D]

        def expand(idx, acc):
            if idx == len(choices):
                masks.append(acc)
                return
            for p in choices[idx]:
                expand(idx + 1, acc | (1 << p))

        expand(0, 0)
    return masks


def skip_filter(C: CoveringArray, delta: int) -> bool:
    """True when C holds delta size-v covers pairwise meeting in one row."""
    if C.N >= C.v * (C.v + 1):
        raise ValueError("delta pruning requires N < v(v+1)")
    if delta <= 0:
        return True
    masks = size_v_position_covers(C)
    if delta == 1:
        return bool(masks)
    n = len(masks)
    if n < delta:
        return False
    adj = [0] * n
    for i in range(n):
        mi = masks[i]
        for j in range(i + 1, n):
            if (mi & masks[j]).bit_count() == 1:
                adj[i] |= 1 << j
                adj[j] |= 1 << i

    def clique(cand, need, lowest):
        if need == 0:
            return True
        m = cand >> lowest << lowest
        while m:
            low = m & -m
            i = low.bit_length() - 1
            if clique(cand & adj[i], need - 1, i + 1):
                return True
            m ^= low
        return False

    return clique((1 << n) - 1, delta, 0)


# ---------------------------------------------------------------------------
# one parent, one level


def extend_all(C: CoveringArray, options: ExtensionOptions, delta_next: int = 0,
               parent_index: int = 0):
    """Extensions of one representative: accepted classes plus audit records."""
    v, k, N = C.v, C.k, C.N
    ac = array_canon(C)
    row_perms = ac.row_perms
    d, i = divmod(N, v)
    if options.uniform_only:
        mu = d + 1 if i else d
        min_part = d
    else:
        mu = min(column_invariant(C, c)[0] for c in range(k))
        min_part = None
    max_cover = mu if options.mu_prune else N
    S = minimal_covers(C, max_cover)
    if not options.mu_prune:
        S.rejected_by_mu = []  # keep everything; oversize parts die later
    c_fix = choose_fixed_row(C, S, row_perms)
    if options.group_prune and c_fix is not None and row_perms:
        prune_by_group(S, c_fix, row_perms)
    inst = build_instance(C, S.active)
    phi_cache = {}
    partitions = []
    for packing in enumerate_packings(inst, options.slack_constraints):
        partitions.extend(
            complete_partitions(C, packing, mu, min_part, phi_cache)
        )

    def phi_of(support):
        got = phi_cache.get(support)
        if got is None:
            got = phi(support, C)
            phi_cache[support] = got
        return got

    def chi(parts):
        for p in parts:
            if c_fix in p:
                return phi_of(tuple(sorted(set(p))))
        raise AssertionError("fixed row missing from partition")

    old_invs = [column_invariant(C, c) for c in range(k)]
    mult_len = len(C.distinct_rows)

    def chi_argmin(members):
        if c_fix is None:
            return list(members)
        chis = [chi(Q) for Q in members]
        best_chi = min(chis)
        return [Q for Q, x in zip(members, chis) if x == best_chi]

    def winner_of(candidates):
        keyed = [(_partition_array_key(Q, mult_len), Q) for Q in candidates]
        keyed.sort(key=lambda t: t[0][0])
        (_key, symbol), Q = keyed[0]
        return _build_extended(C, Q, symbol), Q

    invariant_first = options.condition_order == "invariant-first"
    accepted = []
    records = []
    seen = set()
    for P in partitions:
        if P in seen:
            continue
        orbit = _partition_orbit(P, row_perms)
        seen.update(orbit)
        members = sorted(orbit)
        sizes = [len(p) for p in members[0]]
        new_inv = _sorted_desc(sizes)
        cond1 = all(inv >= new_inv for inv in old_invs)
        if invariant_first and not cond1 and not options.collect_stats:
            continue  # restriction filters are class-invariant; nothing to keep
        argmin = chi_argmin(members)
        child, winner = winner_of(argmin)
        if delta_next and not skip_filter(child, delta_next):
            continue
        accepted_here = False
        child_sig = None
        if cond1:
            child_ac = array_canon(child)
            if condition2(child, child_ac):
                accepted_here = True
                child_sig = child_ac.signature
                accepted.append(
                    ClassRecord(
                        child,
                        child_sig,
                        child_ac.aut.order,
                        alpha_of(child),
                        is_uniform(child),
                    )
                )
        if options.collect_stats:
            records.append(
                ExtensionRecord(
                    parent_index,
                    ac.aut.order,
                    alpha_of(child),
                    Fraction(len(argmin), len(orbit)),
                    _s_count(winner, v),
                    len(orbit),
                    len(argmin),
                    accepted_here,
                    child_sig,
                )
            )
    return accepted, records


def phase2_accept(C: CoveringArray, Cx: CoveringArray, c_fix) -> bool:
    """Conditions 3 and 4 for an extension Cx of C with fixed row c_fix."""
    index = {r: i for i, r in enumerate(C.distinct_rows)}
    parts = {}
    for row in Cx.rows:
        parts.setdefault(row[-1], []).append(index[row[:-1]])
    P = tuple(sorted(tuple(sorted(p)) for p in parts.values()))
    ac = array_canon(C)
    orbit = _partition_orbit(P, ac.row_perms)
    members = sorted(orbit)
    phi_cache = {}

    def chi(Q):
        for p in Q:
            if c_fix in p:
                key = tuple(sorted(set(p)))
                if key not in phi_cache:
                    phi_cache[key] = phi(key, C)
                return phi_cache[key]
        raise AssertionError

    if c_fix is not None:
        best = min(chi(Q) for Q in members)
        if chi(P) != best:
            return False
        argmin = [Q for Q in members if chi(Q) == best]
    else:
        argmin = members
    mult_len = len(C.distinct_rows)
    keyed = sorted((_partition_array_key(Q, mult_len)[0], Q) for Q in argmin)
    return keyed[0][1] == P


# ---------------------------------------------------------------------------
# base case: two columns


def _integer_partitions(total, max_parts, max_value=None):
    if max_value is None:
        max_value = total
    if total == 0:
        yield ()
        return
    if max_parts == 0:
        return
    for first in range(min(total, max_value), 0, -1):
        for rest in _integer_partitions(total - first, max_parts - 1, first):
            yield (first,) + rest


def base_case(N: int, v: int, uniform_only=False):
    """All inequivalent two-column covering arrays, via the all-pairs block
    plus excess rows, deduplicated by canonical signature."""
    if N < v * v:
        raise ValueError(f"N must be at least v^2 = {v * v}")
    excess = N - v * v
    allpairs = [(x, y) for x in range(v) for y in range(v)]
    reps = {}
    for lam in _integer_partitions(excess, v):
        lam = tuple(lam) + (0,) * (v - len(lam))
        pools = [
            list(combinations_with_replacement(range(v), lam[x])) for x in range(v)
        ]

        def assemble(x, chosen):
            if x == v:
                rows = allpairs + [
                    (sym, s) for sym, ms in enumerate(chosen) for s in ms
                ]
                C = CoveringArray(v, rows)
                if uniform_only and not is_uniform(C):
                    return
                sig = array_canon(C).signature
                if sig not in reps:
                    reps[sig] = C
                return
            for ms in pools[x]:
                assemble(x + 1, chosen + [ms])

        assemble(0, [])
    return [reps[s] for s in sorted(reps)]


# ---------------------------------------------------------------------------
# classification driver


def _level_from_arrays(arrays, k):
    classes = []
    for C in arrays:
        ac = array_canon(C)
        classes.append(
            ClassRecord(C, ac.signature, ac.aut.order, alpha_of(C), is_uniform(C))
        )
    classes.sort(key=lambda r: r.signature)
    return LevelResult(k, classes, [])


def _extend_task(args):
    v, rows, opt_state, delta_next, idx = args
    options = ExtensionOptions(**opt_state)
    C = CoveringArray(v, rows)
    accepted, records = extend_all(C, options, delta_next, idx)
    return accepted, records


def extend_level(reps, options: ExtensionOptions, delta_next: int = 0):
    """Extend every representative one column; returns (classes, records)."""
    accepted = []
    records = []
    if options.workers > 1 and len(reps) > 1:
        import concurrent.futures as cf

        opt_state = {
            **options.__dict__,
            "delta_schedule": dict(options.delta_schedule),
            "workers": 1,
        }
        tasks = [
            (C.v, C.rows, opt_state, delta_next, idx) for idx, C in enumerate(reps)
        ]
        chunk = max(1, len(tasks) // (options.workers * 8))
        with cf.ProcessPoolExecutor(max_workers=options.workers) as pool:
            for acc, recs in pool.map(_extend_task, tasks, chunksize=chunk):
                accepted.extend(acc)
                records.extend(recs)
    else:
        for idx, C in enumerate(reps):
            acc, recs = extend_all(C, options, delta_next, idx)
            accepted.extend(acc)
            records.extend(recs)
    accepted.sort(key=lambda r: r.signature)
    return accepted, records


def classify(N: int, v: int, options: ExtensionOptions | None = None) -> Catalog:
    """Catalog of equivalence-class representatives per k, with audits."""
    from covarc.verify import audit_transition

    options = options or ExtensionOptions()
    options.validate(N, v)
    catalog = Catalog(N, v)
    base = base_case(N, v, uniform_only=options.uniform_only)
    delta2 = options.delta_schedule.get(2, 0)
    if delta2:
        base = [C for C in base if skip_filter(C, delta2)]
    catalog[2] = _level_from_arrays(base, 2)
    k = 2
    while True:
        if options.target_k is not None and k >= options.target_k:
            break
        if catalog[k].count == 0:
            if options.target_k is None:
                break
            catalog[k + 1] = LevelResult(k + 1, [], [])
            k += 1
            continue
        delta_next = options.delta_schedule.get(k + 1, 0)
        classes, records = extend_level(
            [c.array for c in catalog[k].classes], options, delta_next
        )
        level = LevelResult(k + 1, classes, records)
        if options.collect_stats:
            level.audit = audit_transition(level, N, v)
        catalog[k + 1] = level
        k += 1
        if options.target_k is None and catalog[k].count == 0:
            break
    return catalog
