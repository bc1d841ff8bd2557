from fractions import Fraction
from math import factorial

import pytest

from covarc.extend import ClassRecord, ExtensionOptions, ExtensionRecord, classify
from covarc.verify import AuditReport, audit_transition, class_side, search_side

from oracles import labeled_orbit


def test_class_side_single_full_symmetry(oa9):
    # a class whose group is the full symmetry group contributes exactly 1
    rec = ClassRecord(oa9, b"", factorial(2) * factorial(3) ** 2, Fraction(1), True)
    assert class_side([rec], 2, 3) == 1


def test_class_side_counts_labeled_arrays():
    # sum over classes of group_order/|Aut| = number of labeled arrays;
    # cross-check by explicit orbit enumeration at k = 3
    cat = classify(10, 3, ExtensionOptions(target_k=3))
    total = class_side(cat[3].classes, 3, 3)
    labeled = sum(len(labeled_orbit(c.array)) for c in cat[3].classes)
    assert total == labeled


def test_class_side_empty():
    assert class_side([], 4, 3) == 0


def test_class_side_requires_orders(oa9):
    rec = ClassRecord(oa9, b"", 0, Fraction(1), True)
    with pytest.raises(ValueError):
        class_side([rec], 2, 3)


def test_search_side_single_event():
    # alpha = beta = 1, S = v!, |Aut(C)| = k! v!^k  ->  contribution v!
    k, v = 2, 3
    rec = ExtensionRecord(
        parent_index=0,
        parent_aut_order=factorial(k) * factorial(v) ** k,
        alpha=Fraction(1),
        beta=Fraction(1),
        s_count=factorial(v),
        orbit_size=1,
        n_events=1,
        accepted=True,
        child_signature=None,
    )
    assert search_side([rec], k, v) == factorial(v)


def test_search_side_rejects_zero_alpha():
    rec = ExtensionRecord(0, 1, Fraction(0), Fraction(1), 1, 1, 1, False, None)
    with pytest.raises(ValueError):
        search_side([rec], 2, 3)


def test_audit_equality_on_small_runs():
    for N, opts in [
        (10, ExtensionOptions()),
        (11, ExtensionOptions()),
        (11, ExtensionOptions(uniform_only=True)),
    ]:
        cat = classify(N, 3, opts)
        for k in cat:
            level = cat[k]
            if level.audit is None:
                continue
            assert level.audit.passed
            assert level.audit.class_side == class_side(level.classes, k, 3)
            assert level.audit.search_side == search_side(level.records, k - 1, 3)


def test_audit_detects_corruption():
    cat = classify(10, 3, ExtensionOptions(target_k=3))
    level = cat[3]
    # halving one automorphism order breaks exact equality
    bad = [
        ClassRecord(c.array, c.signature, max(1, c.aut_order // 2), c.alpha, c.uniform)
        if i == 0
        else c
        for i, c in enumerate(level.classes)
    ]
    cs = class_side(bad, 3, 3)
    assert cs != level.audit.class_side
    report = AuditReport(3, cs, level.audit.search_side)
    assert not report.passed


def test_search_side_is_exact_rational():
    cat = classify(11, 3)
    for k in cat:
        if cat[k].audit is None:
            continue
        assert isinstance(cat[k].audit.class_side, Fraction)
        assert isinstance(cat[k].audit.search_side, Fraction)


def test_per_record_identity():
    # contribution identity: n_events / beta == orbit_size exactly
    cat = classify(11, 3)
    for k in cat:
        for rec in cat[k].records:
            assert rec.n_events == rec.beta * rec.orbit_size


def test_audit_report_json():
    rep = AuditReport(3, Fraction(7, 2), Fraction(7, 2))
    doc = rep.to_json_dict()
    assert doc == {
        "format": 1,
        "level": 3,
        "classSide": "7/2",
        "searchSide": "7/2",
        "pass": True,
    }
