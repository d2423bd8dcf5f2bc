"""Seeded random model generation for property suites and demos.

Generated automata are deterministic, in single-valuation normal form, and
use interval constraints whose bounds sit on a fixed grid, so the brute-force
enumeration of their implementations is always feasible: every interval
family keeps sum(lo) <= 1 <= sum(hi), which guarantees both a satisfying
distribution and a grid point at the same denominator.
"""

from __future__ import annotations

import random
from fractions import Fraction

from . import constraints as C
from .model import APA, Modality, make_apa

_VALUATIONS = ((), ("p",), ("q",), ("p", "q"))
_ACTIONS = ("a", "b")
_AP = ("p", "q")


def _random_interval_family(rng: random.Random, support: list, denominator: int):
    """Per-state [lo, hi] bounds with sum(lo) <= 1 <= sum(hi)."""
    while True:
        lows = [rng.randint(0, denominator) for _ in support]
        if sum(lows) > denominator:
            continue
        highs = [rng.randint(lo, denominator) for lo in lows]
        if sum(highs) >= denominator:
            return {s: (Fraction(lo, denominator), Fraction(hi, denominator))
                    for s, lo, hi in zip(support, lows, highs)}


def random_apa(rng: random.Random, *, max_states: int = 4, max_actions: int = 2,
               denominator: int = 10, prefix: str = "q",
               root_valuation: tuple | None = None) -> APA:
    """One deterministic single-valuation automaton with interval constraints.

    All states carry pairwise-distinct valuations, which makes determinism
    automatic for any constraint support.  `root_valuation` pins the initial
    state's valuation so paired automata get comparable roots.
    """
    if max_states > len(_VALUATIONS):
        raise ValueError(f"at most {len(_VALUATIONS)} states (one distinct valuation each)")
    n_states = rng.randint(1, max_states)
    n_actions = rng.randint(1, max_actions)
    states = [f"{prefix}{i}" for i in range(n_states)]
    pool = [v for v in _VALUATIONS if v != root_valuation] if root_valuation is not None \
        else list(_VALUATIONS)
    rng.shuffle(pool)
    vals = ([root_valuation] if root_valuation is not None else []) + pool
    labeling = {s: [list(v)] for s, v in zip(states, vals)}

    transitions = []
    constraints = {}
    for s in states:
        for a in _ACTIONS[:n_actions]:
            if rng.random() >= 0.6:
                continue
            size = rng.randint(1, min(3, n_states))
            support = rng.sample(states, size)
            bounds = _random_interval_family(rng, support, denominator)
            cid = f"c_{s}_{a}"
            constraints[cid] = C.interval_constraint(
                bounds, zero=[t for t in states if t not in support])
            modality = Modality.MUST if rng.random() < 0.5 else Modality.MAY
            transitions.append((s, a, cid, modality))
    return make_apa(states=states, actions=list(_ACTIONS[:max_actions]), ap=list(_AP),
                    labeling=labeling, transitions=transitions,
                    initial=[states[0]], constraints=constraints)


def random_pair(rng: random.Random, *, max_states: int = 4, max_actions: int = 2,
                denominator: int = 10) -> tuple[APA, APA]:
    """Two independently sampled automata over a shared alphabet whose roots
    carry the same valuation (so refinement is not decided trivially at the
    root)."""
    root = _VALUATIONS[rng.randrange(len(_VALUATIONS))]
    n1 = random_apa(rng, max_states=max_states, max_actions=max_actions,
                    denominator=denominator, prefix="q", root_valuation=root)
    n2 = random_apa(rng, max_states=max_states, max_actions=max_actions,
                    denominator=denominator, prefix="r", root_valuation=root)
    return n1, n2
