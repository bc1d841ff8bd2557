"""Canonical forms and automorphism groups of covering arrays.

An array is encoded as a two-color graph: k disjoint v-cliques of "cell"
vertices (column-symbol pairs) followed by N "row" vertices, each row vertex
joined to the k cells occurring in that row.  Color-preserving graph
isomorphism is then exactly array equivalence (column permutations composed
with per-column symbol permutations).

Canonical labeling is individualization-refinement: equitable partition
refinement, branching on the first non-singleton class, with orbit pruning
by the automorphisms discovered so far.  The canonical labeling is the one
minimizing the relabeled adjacency bit-string.  Group orders come from a
Schreier-Sims stabilizer chain over the discovered generators.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import factorial

from covarc.arrays import CoveringArray


# ---------------------------------------------------------------------------
# permutation helpers


def _compose(a, b):
    """(a o b)[i] = a[b[i]]."""
    return tuple(a[x] for x in b)


def _inverse(a):
    inv = [0] * len(a)
    for i, x in enumerate(a):
        inv[x] = i
    return tuple(inv)


class PermGroup:
    """Permutation group with a Schreier-Sims stabilizer chain (exact order)."""

    def __init__(self, degree: int, gens=()):
        self.n = degree
        self.identity = tuple(range(degree))
        self.base = []
        self.sgs = []
        self.trans = []
        for g in gens:
            self.extend(tuple(g))

    def order(self) -> int:
        o = 1
        for t in self.trans:
            o *= len(t)
        return o

    def contains(self, g) -> bool:
        h, _ = self._sift(tuple(g))
        return h == self.identity

    def extend(self, g) -> bool:
        """Add a generator; True if the group grew."""
        g = tuple(g)
        h, lvl = self._sift(g)
        if h == self.identity:
            return False
        self._insert(h, lvl)
        i = lvl
        while i >= 0:
            self._rebuild(i)
            deeper = self._verify_level(i)
            i = i - 1 if deeper is None else deeper
        return True

    def orbit(self, x: int):
        """Orbit of a point under the whole group."""
        seen = {x}
        frontier = [x]
        while frontier:
            y = frontier.pop()
            for g in self.sgs:
                z = g[y]
                if z not in seen:
                    seen.add(z)
                    frontier.append(z)
        return seen

    # -- internals

    def _sift(self, g):
        for i, b in enumerate(self.base):
            x = g[b]
            t = self.trans[i]
            if x not in t:
                return g, i
            g = _compose(_inverse(t[x]), g)
        return g, len(self.base)

    def _insert(self, h, lvl):
        if lvl == len(self.base):
            b = min(x for x in range(self.n) if h[x] != x)
            self.base.append(b)
            self.trans.append({b: self.identity})
        self.sgs.append(h)

    def _gens_at(self, i):
        head = self.base[:i]
        return [g for g in self.sgs if all(g[b] == b for b in head)]

    def _rebuild(self, i):
        b = self.base[i]
        gens = self._gens_at(i)
        t = {b: self.identity}
        frontier = [b]
        while frontier:
            x = frontier.pop()
            tx = t[x]
            for g in gens:
                y = g[x]
                if y not in t:
                    t[y] = _compose(g, tx)
                    frontier.append(y)
        self.trans[i] = t

    def _verify_level(self, i):
        """Sift Schreier generators of level i; returns the level to re-close
        from when a new strong generator was needed, else None."""
        t = self.trans[i]
        gens = self._gens_at(i)
        for x in list(t):
            tx = t[x]
            for g in gens:
                y = g[x]
                sg = _compose(_inverse(t[y]), _compose(g, tx))
                if sg == self.identity:
                    continue
                h, lvl = self._sift(sg)
                if h == self.identity:
                    continue
                self._insert(h, lvl)
                for j in range(i + 1, min(lvl + 1, len(self.trans))):
                    self._rebuild(j)
                return lvl
        return None


# ---------------------------------------------------------------------------
# colored graphs


@dataclass(frozen=True)
class ColoredGraph:
    """Two-color encoding; cells occupy vertices 0..n_cells-1, rows follow."""

    n_cells: int
    n_rows: int
    adj: tuple  # per-vertex neighbor bitmask

    @property
    def n(self):
        return self.n_cells + self.n_rows

    def edge_count(self):
        return sum(m.bit_count() for m in self.adj) // 2

    def validate(self, v: int):
        if self.n_cells % v:
            raise ValueError("cell count not a multiple of v")
        for u in range(self.n_cells, self.n):
            if (self.adj[u] >> self.n_cells) & ((1 << self.n_rows) - 1):
                raise ValueError("row-row edge")


def to_colored_graph(C: CoveringArray) -> ColoredGraph:
    """Cell (c, j) becomes vertex c*v+j; row at position r becomes k*v+r."""
    v, k = C.v, C.k
    ncells = k * v
    adj = [0] * (ncells + C.N)
    for c in range(k):
        base = c * v
        for a in range(v):
            for b in range(a + 1, v):
                adj[base + a] |= 1 << (base + b)
                adj[base + b] |= 1 << (base + a)
    for r, row in enumerate(C.rows):
        u = ncells + r
        for c, x in enumerate(row):
            cell = c * v + x
            adj[u] |= 1 << cell
            adj[cell] |= 1 << u
    return ColoredGraph(ncells, C.N, tuple(adj))


# ---------------------------------------------------------------------------
# individualization-refinement


def _refine(adj, parts, queue):
    """Equitable refinement of an ordered partition.

    parts is a list of vertex lists; queue holds splitter bitmasks.  Classes
    split by neighbor count into the splitter, subclasses ordered by count
    ascending; every new subclass is queued.  Deterministic and invariant
    under color-preserving isomorphism.
    """
    while queue:
        smask = queue.popleft()
        out = []
        for P in parts:
            if len(P) == 1:
                out.append(P)
                continue
            groups = {}
            for x in P:
                cnt = (adj[x] & smask).bit_count()
                g = groups.get(cnt)
                if g is None:
                    groups[cnt] = [x]
                else:
                    g.append(x)
            if len(groups) == 1:
                out.append(P)
                continue
            for cnt in sorted(groups):
                grp = groups[cnt]
                out.append(grp)
                m = 0
                for x in grp:
                    m |= 1 << x
                queue.append(m)
        parts = out
    return parts


def _mask(vertices):
    m = 0
    for x in vertices:
        m |= 1 << x
    return m


@dataclass(frozen=True)
class CanonicalForm:
    labeling: tuple      # vertex -> canonical position
    generators: tuple    # vertex permutations generating Aut(G)
    aut_order: int
    certificate: bytes   # relabeled adjacency bit-string (the minimum)


class _Search:
    def __init__(self, adj, n):
        self.adj = adj
        self.n = n
        self.nbytes = (n + 7) // 8
        self.gens = []
        self.first = None          # (labeling, cert) at the first leaf
        self.best_cert = None
        self.best_labeling = None

    def run(self, parts):
        self._node(parts, [])
        group = PermGroup(self.n, self.gens)
        return CanonicalForm(
            self.best_labeling, tuple(self.gens), group.order(), self.best_cert
        )

    def _labeling(self, parts):
        lab = [0] * self.n
        for pos, P in enumerate(parts):
            lab[P[0]] = pos
        return tuple(lab)

    def _cert(self, lab):
        adj = self.adj
        inv = _inverse(lab)
        out = bytearray()
        for p in range(self.n):
            m = adj[inv[p]]
            new = 0
            while m:
                low = m & -m
                new |= 1 << lab[low.bit_length() - 1]
                m ^= low
            out += new.to_bytes(self.nbytes, "big")
        return bytes(out)

    def _leaf(self, parts):
        lab = self._labeling(parts)
        cert = self._cert(lab)
        if self.first is None:
            self.first = (lab, cert)
            self.best_cert = cert
            self.best_labeling = lab
            return
        flab, fcert = self.first
        if cert == fcert:
            self._found_aut(flab, lab)
        if self.best_cert is None or cert < self.best_cert:
            self.best_cert = cert
            self.best_labeling = lab
        elif cert == self.best_cert and lab != self.best_labeling:
            self._found_aut(self.best_labeling, lab)

    def _found_aut(self, lab1, lab2):
        inv2 = _inverse(lab2)
        g = tuple(inv2[lab1[x]] for x in range(self.n))
        if g != tuple(range(self.n)) and g not in self.gens:
            self.gens.append(g)

    def _node(self, parts, seq):
        target = None
        for P in parts:
            if len(P) > 1:
                target = P
                break
        if target is None:
            self._leaf(parts)
            return
        explored = []
        for w in list(target):
            if self._pruned(w, explored, seq):
                continue
            child = []
            rest_mask = 0
            for P in parts:
                if P is target:
                    rest = [x for x in P if x != w]
                    rest_mask = _mask(rest)
                    child.append([w])
                    child.append(rest)
                else:
                    child.append(P)
            child = _refine(self.adj, child, deque([1 << w, rest_mask]))
            self._node(child, seq + [w])
            explored.append(w)

    def _pruned(self, w, explored, seq):
        if not explored:
            return False
        fixing = [g for g in self.gens if all(g[x] == x for x in seq)]
        if not fixing:
            return False
        seen = set(explored)
        frontier = list(explored)
        while frontier:
            x = frontier.pop()
            for g in fixing:
                y = g[x]
                if y == w:
                    return True
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
        return False


def canonical_form(G: ColoredGraph) -> CanonicalForm:
    """Canonical labeling, Aut(G) generators, and exact |Aut(G)|."""
    n = G.n
    cells = list(range(G.n_cells))
    rows = list(range(G.n_cells, n))
    parts = [p for p in (cells, rows) if p]
    queue = deque(_mask(p) for p in parts)
    parts = _refine(G.adj, parts, queue)
    return _Search(G.adj, n).run(parts)


# ---------------------------------------------------------------------------
# array-level interface


@dataclass(frozen=True)
class ArrayAutGroup:
    """Aut(C) as column/symbol permutation pairs, with exact order.

    order = |Aut(G)| / prod(mult(r)!); the kernel of Aut(G) -> Aut(C) freely
    permutes duplicate-row vertices and nothing else.
    """

    generators: tuple    # (column_perm, per-column symbol perms)
    order: int


@dataclass(frozen=True)
class ArrayCanon:
    """Everything the search needs from one canonicalization of an array."""

    canonical: CoveringArray
    signature: bytes
    graph_form: CanonicalForm
    aut: ArrayAutGroup
    row_perms: tuple     # Aut(C) generators as permutations of distinct rows


def _project_generator(g, k, v):
    """Graph automorphism -> (column perm, symbol perms); cells only."""
    colperm = [None] * k
    symperms = [[None] * v for _ in range(k)]
    for c in range(k):
        for s in range(v):
            img = g[c * v + s]
            c2, s2 = divmod(img, v)
            if colperm[c] is None:
                colperm[c] = c2
            elif colperm[c] != c2:
                raise AssertionError("generator breaks a column clique")
            symperms[c][s] = s2
    return tuple(colperm), tuple(tuple(sp) for sp in symperms)


def apply_transform(C: CoveringArray, colperm, symperms) -> CoveringArray:
    """Apply a column permutation plus per-column symbol permutations."""
    k = C.k
    rows = []
    for r in C.rows:
        new = [0] * k
        for c in range(k):
            new[colperm[c]] = symperms[c][r[c]]
        rows.append(tuple(new))
    return CoveringArray(C.v, rows)


def _row_perm(C: CoveringArray, colperm, symperms):
    index = {r: i for i, r in enumerate(C.distinct_rows)}
    k = C.k
    perm = []
    for r in C.distinct_rows:
        new = [0] * k
        for c in range(k):
            new[colperm[c]] = symperms[c][r[c]]
        perm.append(index[tuple(new)])
    return tuple(perm)


def signature_bytes(C: CoveringArray, form: CanonicalForm) -> bytes:
    canon = canonical_array(C, form)
    payload = bytes([canon.v, canon.k]) + canon.N.to_bytes(2, "big")
    return payload + bytes(x for row in canon.rows for x in row)


def canonical_array(C: CoveringArray, form: CanonicalForm) -> CoveringArray:
    """Relabel columns and symbols by canonical cell positions and sort rows."""
    v, k = C.v, C.k
    lab = form.labeling
    order = sorted(range(k), key=lambda c: min(lab[c * v + s] for s in range(v)))
    colperm = [0] * k
    for newc, c in enumerate(order):
        colperm[c] = newc
    symperms = []
    for c in range(k):
        ranked = sorted(range(v), key=lambda s: lab[c * v + s])
        sp = [0] * v
        for news, s in enumerate(ranked):
            sp[s] = news
        symperms.append(tuple(sp))
    return apply_transform(C, tuple(colperm), tuple(symperms))


def array_canon(C: CoveringArray) -> ArrayCanon:
    form = canonical_form(to_colored_graph(C))
    kernel = 1
    for m in C.multiplicities:
        kernel *= factorial(m)
    gens = []
    row_perms = []
    seen = set()
    for g in form.generators:
        colperm, symperms = _project_generator(g, C.k, C.v)
        key = (colperm, symperms)
        if key in seen:
            continue
        seen.add(key)
        if colperm == tuple(range(C.k)) and all(
            sp == tuple(range(C.v)) for sp in symperms
        ):
            continue
        gens.append(key)
        row_perms.append(_row_perm(C, colperm, symperms))
    aut = ArrayAutGroup(tuple(gens), form.aut_order // kernel)
    return ArrayCanon(
        canonical_array(C, form), signature_bytes(C, form), form, aut, tuple(row_perms)
    )


def array_aut_group(C: CoveringArray) -> ArrayAutGroup:
    return array_canon(C).aut


def canonical_signature(C: CoveringArray) -> bytes:
    """Stable digest, equal exactly for equivalent arrays."""
    form = canonical_form(to_colored_graph(C))
    return signature_bytes(C, form)


def are_equivalent(C1: CoveringArray, C2: CoveringArray) -> bool:
    if (C1.v, C1.k, C1.N) != (C2.v, C2.k, C2.N):
        raise ValueError("parameter mismatch")
    return canonical_signature(C1) == canonical_signature(C2)
