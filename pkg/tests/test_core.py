"""Instance model, arrival models, permutation enumeration, serialization."""

import math
import random
from fractions import Fraction

import pytest

from rombit.core import (
    CapacityError,
    InputError,
    ParseError,
    distinct_orderings,
    enumerate_permutations,
    instance_from_json,
    instance_to_json,
    lex_compare,
    make_instance,
    make_item,
    ordering_multiplicity,
    permute,
    read_instances,
    write_instances,
)


def test_lex_compare_examples():
    assert lex_compare((1, 2), (1, 3)) == -1
    assert lex_compare((2,), (2,)) == 0
    assert lex_compare((Fraction(1, 2), 9), (Fraction(3, 5), 0)) == -1
    with pytest.raises(InputError):
        lex_compare((1, 2), (1,))


def test_lex_compare_total_order():
    rng = random.Random(0)
    keys = [
        tuple(Fraction(rng.randint(-3, 3), rng.randint(1, 4)) for _ in range(3))
        for _ in range(60)
    ]
    for a in keys:
        for b in keys:
            cab, cba = lex_compare(a, b), lex_compare(b, a)
            assert cab == -cba
            assert (cab == 0) == (a == b)
    for a in keys[:20]:
        for b in keys[:20]:
            for c in keys[:20]:
                if lex_compare(a, b) <= 0 and lex_compare(b, c) <= 0:
                    assert lex_compare(a, c) <= 0


def _bit_instance(bits):
    return make_instance(
        "string_guess", [make_item((b,), {"bit": b}) for b in bits]
    )


def test_permute_adversarial_identity_and_determinism():
    inst = _bit_instance([0, 1, 0])
    seq = permute(inst, "adversarial", seed=9)
    assert seq.permutation == (0, 1, 2)
    a = permute(inst, "rom", seed=5)
    b = permute(inst, "rom", seed=5)
    assert a.permutation == b.permutation


def test_rom_uniformity_n4():
    # all 24 permutations observed with frequency 1/24 within 0.01 at K=1e5
    inst = _bit_instance([0, 1, 0, 1])
    counts = {}
    K = 100000
    for seed in range(1, K + 1):
        p = permute(inst, "rom", seed=seed).permutation
        counts[p] = counts.get(p, 0) + 1
    assert len(counts) == 24
    for c in counts.values():
        assert abs(c / K - 1 / 24) <= 0.01


def _throughput_instance(rel_slacks, p=10):
    items = [
        make_item((p, s), {"release": r, "proc": p, "slack": s})
        for r, s in rel_slacks
    ]
    return make_instance("throughput", items, {"proc": Fraction(p)})


def test_realtime_rom_keeps_releases_sorted():
    inst = _throughput_instance([(0, 5), (2, 0), (2, 20), (7, 5)])
    for seed in range(40):
        seq = permute(inst, "realtime_rom", seed=seed)
        rel = [it.field_("release") for it in seq.arrival_items()]
        assert rel == sorted(rel)
        slacks = sorted(it.field_("slack") for it in seq.arrival_items())
        assert slacks == sorted([5, 0, 20, 5])


def test_realtime_rom_requires_release():
    inst = _bit_instance([0, 1])
    with pytest.raises(InputError):
        permute(inst, "realtime_rom", seed=0)


def test_enumerate_permutations():
    assert len(list(enumerate_permutations(_bit_instance([1])))) == 1
    assert len(list(enumerate_permutations(_bit_instance([0, 1, 1])))) == 6
    big = _bit_instance([0] * 11)
    with pytest.raises(CapacityError):
        enumerate_permutations(big)


def test_distinct_orderings_match_labeled_enumeration():
    vals = [1, 1, 2]
    orders = list(distinct_orderings(vals))
    assert len(orders) == 3
    assert ordering_multiplicity(vals) == 2
    assert len(orders) * ordering_multiplicity(vals) == math.factorial(3)


def test_instance_roundtrip(tmp_path):
    inst = _throughput_instance([(0, Fraction(1, 3)), (Fraction(5, 2), 0)])
    path = tmp_path / "x.jsonl"
    write_instances([inst], path)
    back = read_instances(path)
    assert len(back) == 1
    assert back[0] == inst


def test_read_instances_empty_and_errors(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    assert read_instances(path) == []
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"problem": "nonsense", "items": []}\n')
    with pytest.raises(ParseError) as ei:
        read_instances(bad)
    assert "nonsense" in str(ei.value)
    assert "line 1" in str(ei.value)
    garbled = tmp_path / "garbled.jsonl"
    garbled.write_text(instance_to_json(_bit_instance([0, 1])) + "\n{oops\n")
    with pytest.raises(ParseError) as ei:
        read_instances(garbled)
    assert "line 2" in str(ei.value)


def test_json_rationals_roundtrip():
    inst = _bit_instance([0, 1])
    again = instance_from_json(instance_to_json(inst))
    assert again == inst


def test_instance_validation():
    with pytest.raises(InputError):
        make_instance("string_guess", [])
    with pytest.raises(InputError):
        make_instance(
            "throughput",
            [
                make_item((10, 0), {"release": 5, "proc": 10, "slack": 0}),
                make_item((10, 0), {"release": 1, "proc": 10, "slack": 0}),
            ],
        )
