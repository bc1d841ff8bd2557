from itertools import permutations

import pytest

from covarc.arrays import CoveringArray
from covarc.covers import minimal_covers, phi
from covarc.packing import (
    build_instance,
    complete_partitions,
    enumerate_packings,
)

from oracles import brute_packings


def test_instance_structure(oa9):
    S = minimal_covers(oa9, 3)
    inst = build_instance(oa9, S.covers)
    nc, nr = len(inst.covers), len(oa9.distinct_rows)
    assert len(inst.upper_bounds) == nc + nr + 2
    # all distinct rows: cover variables bounded by 1, slacks by 1
    assert all(u == 1 for u in inst.upper_bounds[: nc + nr])
    # N = v^2: s1, s2 capped at 0
    assert inst.upper_bounds[nc + nr] == 0 and inst.upper_bounds[nc + nr + 1] == 0
    # per-row equations + three count equations
    assert len(inst.equations) == nr + 3
    coeff, rhs = inst.equations[nr]
    assert rhs == oa9.v and set(coeff.values()) == {1}
    # equation (12): s1 + M_v = v;  equation (13): s1 + s2 + M_big = N - v^2
    coeff12, rhs12 = inst.equations[nr + 1]
    assert rhs12 == oa9.v and nc + nr in coeff12
    coeff13, rhs13 = inst.equations[nr + 2]
    assert rhs13 == 0 and nc + nr + 1 in coeff13


def test_instance_bounds_with_duplicates(ca10_base):
    S = minimal_covers(ca10_base, 4)
    inst = build_instance(ca10_base, S.covers)
    nc = len(inst.covers)
    # the slack of the duplicated row 0 is bounded by its multiplicity 2;
    # s1 and s2 are capped at N - v^2 = 1
    assert inst.upper_bounds[nc + 0] == 2
    assert inst.upper_bounds[-1] == ca10_base.N - 9
    assert inst.upper_bounds[-2] == ca10_base.N - 9


def test_oa9_packings_vs_brute(oa9):
    S = minimal_covers(oa9, 3)
    inst = build_instance(oa9, S.covers)
    got = sorted(enumerate_packings(inst))
    expect = sorted(brute_packings(oa9, S.covers))
    assert got == expect
    # the 9 rows split into 3 permutation triples: 6*2*... exactly the
    # resolutions of K_{3,3} edge set into perfect matchings
    assert len(got) == 2


def test_empty_cover_set(oa9):
    inst = build_instance(oa9, [])
    assert list(enumerate_packings(inst)) == []


def test_slack_toggle_equality(oa9, ca10_base, uca_11_5_3):
    for C in [oa9, ca10_base, uca_11_5_3[0], uca_11_5_3[1]]:
        mu = max(max(col) for col in C.column_counts)
        S = minimal_covers(C, mu)
        inst = build_instance(C, S.covers)
        a = sorted(enumerate_packings(inst, use_slack_constraints=True))
        b = sorted(enumerate_packings(inst, use_slack_constraints=False))
        assert a == b


def test_packings_vs_brute_more(ca10_base, uca_11_5_3):
    for C in [ca10_base, uca_11_5_3[0]]:
        S = minimal_covers(C, 4)
        inst = build_instance(C, S.covers)
        assert sorted(enumerate_packings(inst)) == sorted(brute_packings(C, S.covers))


def test_no_duplicate_packings(uca_11_5_3):
    C = uca_11_5_3[0]
    S = minimal_covers(C, 4)
    inst = build_instance(C, S.covers)
    packs = list(enumerate_packings(inst))
    assert len(packs) == len(set(packs))


def test_multiset_soundness(uca_11_5_3):
    C = uca_11_5_3[0]
    S = minimal_covers(C, 4)
    inst = build_instance(C, S.covers)
    for packing in enumerate_packings(inst):
        used = [0] * len(C.multiplicities)
        for D in packing:
            for i in D:
                used[i] += 1
        assert all(u <= m for u, m in zip(used, C.multiplicities))


def test_complete_partitions_exact_cover(oa9):
    S = minimal_covers(oa9, 3)
    inst = build_instance(oa9, S.covers)
    for packing in enumerate_packings(inst):
        parts_list = complete_partitions(oa9, packing, 3)
        # packing already covers all rows: exactly the packing itself
        assert parts_list == [tuple(sorted(packing))]


def test_complete_partitions_leftovers(ca10_base):
    S = minimal_covers(ca10_base, 4)
    inst = build_instance(ca10_base, S.covers)
    total = []
    for packing in enumerate_packings(inst):
        for parts in complete_partitions(ca10_base, packing, 4):
            total.append(parts)
            # multiset союз of parts is exactly the row multiset
            counts = [0] * len(ca10_base.multiplicities)
            for p in parts:
                for i in p:
                    counts[i] += 1
            assert counts == list(ca10_base.multiplicities)
            # phi rejection: each part's phi is the packing cover it extends
            for p in parts:
                assert phi(tuple(sorted(set(p))), ca10_base) in packing
    # each partition appears exactly once over all packings
    assert len(total) == len(set(total))


def test_partition_count_matches_exhaustive(oa9):
    # every partition of the 9 rows into 3 parts that are covers, counted
    # directly, must match the packing->completion pipeline
    import itertools

    rows = range(9)
    def is_cover_set(idx):
        return (
            len({oa9.distinct_rows[i][0] for i in idx}) == 3
            and len({oa9.distinct_rows[i][1] for i in idx}) == 3
        )

    direct = set()
    for p1 in itertools.combinations(rows, 3):
        rest = [r for r in rows if r not in p1]
        for p2 in itertools.combinations(rest, 3):
            p3 = tuple(r for r in rest if r not in p2)
            if is_cover_set(p1) and is_cover_set(p2) and is_cover_set(p3):
                direct.add(tuple(sorted([p1, p2, tuple(p3)])))
    S = minimal_covers(oa9, 3)
    inst = build_instance(oa9, S.covers)
    piped = set()
    for packing in enumerate_packings(inst):
        piped.update(complete_partitions(oa9, packing, 3))
    assert piped == direct
