"""Structure and theorem smoke-checks for the difference constructions."""
from __future__ import annotations

from fractions import Fraction as F

import pytest

from apa_toolkit import constraints as C
from apa_toolkit.difference import (DifferenceAPA, ProductState, over_diff,
                                    prune_unreachable, under_diff)
from apa_toolkit.errors import InputError, PreconditionError
from apa_toolkit.model import Modality, make_apa, validate
from apa_toolkit.oracle import GridSpec, brute_satisfies, enumerate_implementations
from apa_toolkit.refinement import refines, satisfies
from tests.fixtures import (deferral_implementation_split, deferral_pair,
                            interval_implementation_diff, interval_pair,
                            refining_pair)


def test_difference_needs_a_failed_refinement():
    n1, n2 = refining_pair()
    with pytest.raises(PreconditionError):
        over_diff(n1, n2)
    with pytest.raises(PreconditionError):
        under_diff(n1, n2, 2)


def test_under_diff_level_must_be_positive():
    n1, n2 = interval_pair()
    with pytest.raises(InputError):
        under_diff(n1, n2, 0)


def test_over_diff_structure():
    n1, n2 = interval_pair()
    diff = over_diff(n1, n2)
    assert isinstance(diff, DifferenceAPA)
    assert diff.level is None
    assert diff.source_initial == ("s0", "t0")
    assert all(isinstance(s, ProductState) for s in diff.states)
    assert all(s.k is None for s in diff.states)
    assert diff.initial == (ProductState("s0", "t0", "a"),)
    # Product states carry the left component's valuation.
    for s in diff.states:
        assert diff.valuations(s) == (n1.valuation_of(s.s1),)
    assert validate(diff).ok
    tags = {type(expr).__name__ for _, expr in diff.constraints}
    assert "PhiB" in tags
    # Derived constraints only ever range over the product's own states.
    for _, expr in diff.constraints:
        if isinstance(expr, (C.BotLift, C.PhiB)):
            assert set(expr.cells) <= set(diff.states)


def test_under_diff_structure_and_levels():
    d1, d2 = deferral_pair()
    diff = under_diff(d1, d2, 3)
    assert diff.level == 3
    assert diff.initial == (ProductState("u0", "v0", "a", 3),)
    ks = {s.k for s in diff.states if s.k is not None}
    assert ks and ks <= {1, 2, 3}
    assert validate(diff).ok
    from apa_toolkit.constraints import PhiBK
    assert any(isinstance(expr, PhiBK) for _, expr in diff.constraints)


def test_construction_is_deterministic():
    n1, n2 = interval_pair()
    assert over_diff(n1, n2) == over_diff(n1, n2)
    assert under_diff(n1, n2, 2) == under_diff(n1, n2, 2)


def test_mismatched_root_valuations_reduce_to_the_left_automaton():
    n1 = make_apa(states=["s"], actions=["a"], ap=["p"], labeling={"s": [[]]},
                  transitions=[], initial=["s"], constraints={})
    n2 = make_apa(states=["t"], actions=["a"], ap=["p"], labeling={"t": [["p"]]},
                  transitions=[], initial=["t"], constraints={})
    assert not refines(n1, n2)
    assert over_diff(n1, n2) == n1
    assert under_diff(n1, n2, 2) == n1


def test_under_diff_chain_refines_upward():
    d1, d2 = deferral_pair()
    assert refines(under_diff(d1, d2, 1), under_diff(d1, d2, 2))
    assert refines(under_diff(d1, d2, 2), under_diff(d1, d2, 3))


def test_true_difference_members_satisfy_the_over_approximation():
    n1, n2 = interval_pair()
    diff = over_diff(n1, n2)
    p = interval_implementation_diff()
    assert satisfies(p, n1)[0] and not satisfies(p, n2)[0]
    assert brute_satisfies(p, diff)


def test_over_approximation_admits_spurious_implementations():
    d1, d2 = deferral_pair()
    diff = over_diff(d1, d2)
    p = deferral_implementation_split()
    assert brute_satisfies(p, d2)      # satisfies the subtracted automaton...
    assert brute_satisfies(p, diff)    # ...yet the over-approximation admits it


def test_under_approximation_implementations_lie_in_the_true_difference():
    d1, d2 = deferral_pair()
    diff = under_diff(d1, d2, 1)
    count = 0
    for p in enumerate_implementations(diff, GridSpec(denominator=4)):
        assert brute_satisfies(p, d1)
        assert not brute_satisfies(p, d2)
        count += 1
        if count >= 8:
            break
    assert count > 0


def test_prune_unreachable_preserves_membership():
    n1, n2 = interval_pair()
    diff = over_diff(n1, n2)
    pruned = prune_unreachable(diff)
    assert set(pruned.states) <= set(diff.states)
    assert pruned.initial == diff.initial
    assert validate(pruned).ok
    assert prune_unreachable(pruned) == pruned
    p = interval_implementation_diff()
    assert brute_satisfies(p, pruned)
