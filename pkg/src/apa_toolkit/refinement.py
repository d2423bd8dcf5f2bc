"""Refinement between abstract automata: the shrinking-relation fixed point,
removal indices, case classification with per-action blame sets, witness
distributions for recursive failures, and satisfaction of a concrete
automaton against an abstract one.

For deterministic targets in single-valuation normal form the correspondence
function inside each pair check is forced: a left successor can only be
matched with the unique equally-labeled potential successor on the right.
Every quantifier over distributions then reduces to exact LPs over the
disjunctive-normal-form pieces of the constraints involved.
"""

from __future__ import annotations

import enum
import itertools
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

from . import _lp
from . import constraints as C
from .constraints import (Distribution, FacetViolation, LinearAtom, ReachesPair, State,
                          SupportAtState, WitnessDistribution, ZERO, ONE)
from .errors import InputError, PreconditionError, ResourceLimitError
from .model import (APA, PA, Action, Modality, Transition, forced_successor,
                    is_deterministic, is_svnf)

Pair = tuple[State, State]

DEFAULT_NODE_BUDGET = 10 ** 6


def node_budget() -> int:
    raw = os.environ.get("APA_TOOLKIT_BUDGET", "")
    try:
        return int(raw) if raw else DEFAULT_NODE_BUDGET
    except ValueError:
        return DEFAULT_NODE_BUDGET


class CaseLabel(enum.Enum):
    CASE1 = 1   # pair inside the maximal relation
    CASE2 = 2   # valuations differ
    CASE3 = 3   # equal valuations, pair rejected


@dataclass(frozen=True)
class BSets:
    """Per-action blame sets for a rejected pair with equal valuations.

    a: left has a required transition, right allows none.
    b: left has an optional transition, right allows none.
    c: both transition, right's is optional, some left distribution is
       unmatched by every right distribution.
    d: right requires a transition, left has none at all.
    e: right requires a transition, left's is merely optional.
    f: both require, some left distribution is unmatched.
    """

    b_a: tuple[Action, ...] = ()
    b_b: tuple[Action, ...] = ()
    b_c: tuple[Action, ...] = ()
    b_d: tuple[Action, ...] = ()
    b_e: tuple[Action, ...] = ()
    b_f: tuple[Action, ...] = ()

    def of(self, which: str) -> tuple[Action, ...]:
        merged = set()
        for x in which:
            merged.update(getattr(self, f"b_{x}"))
        return tuple(sorted(merged))

    @property
    def all_actions(self) -> tuple[Action, ...]:
        return self.of("abcdef")


@dataclass(frozen=True)
class CorrespondenceFunction:
    """Weighted matching of left successors to right successors."""

    delta: tuple[tuple[State, tuple[tuple[State, Fraction], ...]], ...]

    def weight(self, s: State, t: State) -> Fraction:
        for src, row in self.delta:
            if src == s:
                return dict(row).get(t, ZERO)
        return ZERO

    def simulates(self, mu1: Distribution, mu2: Distribution,
                  relation: frozenset) -> bool:
        """Exact check of the three simulation clauses."""
        rows = dict(self.delta)
        for s, m in mu1.items:
            if m > 0:
                row = dict(rows.get(s, ()))
                if sum(row.values(), ZERO) != 1:
                    return False
                for t, w in row.items():
                    if w > 0 and (s, t) not in relation:
                        return False
        image: dict[State, Fraction] = {}
        for s, row in rows.items():
            for t, w in row:
                image[t] = image.get(t, ZERO) + mu1[s] * w
        for t in set(image) | {t for t, m in mu2.items}:
            if image.get(t, ZERO) != mu2[t]:
                return False
        return True


@dataclass(eq=False)
class RefinementAnalysis:
    """Everything the difference and counterexample constructions consume."""

    n1: APA
    n2: APA
    history: tuple[frozenset, ...]          # R_0 ... R_K
    relation: frozenset = field(init=False)  # maximal relation R_K
    fixpoint_index: int = field(init=False)  # K
    ind: dict = field(default_factory=dict)
    cases: dict = field(default_factory=dict)
    bsets: dict = field(default_factory=dict)

    def __post_init__(self):
        self.relation = self.history[-1]
        self.fixpoint_index = len(self.history) - 1

    def ind_of(self, s1: State, s2: State) -> int:
        return self.ind[(s1, s2)]

    def case_of(self, s1: State, s2: State) -> CaseLabel:
        return self.cases[(s1, s2)]

    def bsets_of(self, s1: State, s2: State) -> BSets:
        return self.bsets.get((s1, s2), BSets())

    @property
    def refines(self) -> bool:
        try:
            s01, s02 = self.n1.initial_state(), self.n2.initial_state()
        except PreconditionError:
            return all(any((s1, s2) in self.relation for s2 in self.n2.initial)
                       for s1 in self.n1.initial)
        return (s01, s02) in self.relation


# ---------------------------------------------------------------------------
# The forced-correspondence simulation check
# ---------------------------------------------------------------------------


def _single_transition(n: APA, s: State, a: Action) -> Transition | None:
    ts = n.transitions_from(s, a)
    if len(ts) > 1:
        raise PreconditionError(f"state {s!r} has {len(ts)} transitions on {a!r}; need determinism")
    return ts[0] if ts else None


@lru_cache(maxsize=None)
def _forced_succ(n2: APA, s2: State, a: Action, v) -> State | None:
    """The unique equally-labeled potential successor, if any."""
    return forced_successor(n2, s2, a, v)


def forced_map(n1: APA, n2: APA, s2: State, a: Action,
               relation: frozenset | None = None) -> tuple[tuple[State, State | None], ...]:
    """succ-induced successor map S1 -> S2, optionally filtered by a relation."""
    out = []
    for s1p in n1.states:
        t = _forced_succ(n2, s2, a, n1.valuation_of(s1p))
        if t is not None and relation is not None and (s1p, t) not in relation:
            t = None
        out.append((s1p, t))
    return tuple(out)


@lru_cache(maxsize=None)
def _sim_witness(phi1, states1: tuple, mapping: tuple, phi2, states2: tuple):
    """A mu1 in Sat(phi1) that no mu2 in Sat(phi2) simulates under the forced
    map, or None if every mu1 is matched.

    Violations decompose exactly into: mass on an unmapped left successor, or
    a fully-mapped mu1 whose image falls outside Sat(phi2).
    """
    mdict = dict(mapping)
    unmapped = [s for s in states1 if mdict.get(s) is None]
    groups: dict[State, list[State]] = {}
    for s in states1:
        t = mdict.get(s)
        if t is not None:
            groups.setdefault(t, []).append(s)

    for piece in C.dnf_cover(phi1):
        nonstrict, strict = piece.lp_rows()
        nonstrict = nonstrict + [({s: ONE for s in states1}, "==", ONE)]
        # (i) mass on an unmapped successor
        for s in unmapped:
            point = _lp.strict_feasible_point(nonstrict, strict + [({s: -ONE}, ZERO)],
                                              list(states1))
            if point is not None:
                return WitnessDistribution(Distribution.of(point), SupportAtState(s))
        # (ii) fully mapped, image outside Sat(phi2)
        zero_rows = [({s: ONE}, "==", ZERO) for s in unmapped]
        for neg_piece in C.dnf_cover(C.negate(phi2)):
            pulled_nonstrict: list = []
            pulled_strict: list = []
            facet: LinearAtom | None = None
            for coeffs, rel, rhs in neg_piece.rows:
                pb: dict[State, Fraction] = {}
                for t, c in coeffs:
                    for s in groups.get(t, ()):
                        pb[s] = pb.get(s, ZERO) + c
                if rel == "<":
                    pulled_strict.append((pb, rhs))
                else:
                    pulled_nonstrict.append((pb, rel, rhs))
                if facet is None:
                    # this row certifies the violation; name the right-hand
                    # condition it refutes
                    flipped = {"<": ">=", "<=": ">", "==": "=="}[rel]
                    facet = LinearAtom(coeffs, flipped, rhs)
            point = _lp.strict_feasible_point(nonstrict + zero_rows + pulled_nonstrict,
                                              strict + pulled_strict, list(states1))
            if point is not None:
                return WitnessDistribution(Distribution.of(point),
                                           FacetViolation(facet if facet is not None
                                                          else LinearAtom((), "==", ONE)))
    return None


def _sim_ok(n1: APA, n2: APA, phi1, s2: State, a: Action, phi2,
            relation: frozenset) -> bool:
    mapping = forced_map(n1, n2, s2, a, relation)
    return _sim_witness(phi1, n1.states, mapping, phi2, n2.states) is None


# ---------------------------------------------------------------------------
# Fixed-point computation
# ---------------------------------------------------------------------------


def _pair_ok(n1: APA, n2: APA, s1: State, s2: State, relation: frozenset) -> bool:
    if n1.valuation_of(s1) != n2.valuation_of(s2):
        return False
    for a in n1.actions:
        t1 = _single_transition(n1, s1, a)
        t2 = _single_transition(n2, s2, a)
        phi1 = n1.constraint(t1.constraint_id) if t1 else None
        phi2 = n2.constraint(t2.constraint_id) if t2 else None
        if t2 is not None and t2.modality is Modality.MUST:
            if t1 is None or t1.modality is not Modality.MUST:
                return False
            if not _sim_ok(n1, n2, phi1, s2, a, phi2, relation):
                return False
        if t1 is not None:
            if t2 is None:
                return False
            if not _sim_ok(n1, n2, phi1, s2, a, phi2, relation):
                return False
    return True


def _require_analysable(n1: APA, n2: APA) -> None:
    for n, name in ((n1, "left"), (n2, "right")):
        if not is_svnf(n):
            raise PreconditionError(f"{name} automaton is not in single-valuation normal form")
        if not is_deterministic(n):
            raise PreconditionError(f"{name} automaton is not deterministic")
        if set(n.actions) != set(n1.actions):
            raise InputError("automata must share the same action alphabet")


def compute_refinement(n1: APA, n2: APA) -> RefinementAnalysis:
    """Greatest fixed point of the pair-elimination sweep, with bookkeeping."""
    _require_analysable(n1, n2)
    pairs = [(s1, s2) for s1 in n1.states for s2 in n2.states]
    current = frozenset(pairs)
    history = [current]
    while True:
        nxt = frozenset(p for p in current if _pair_ok(n1, n2, p[0], p[1], current))
        if nxt == current:
            break
        history.append(nxt)
        current = nxt
    analysis = RefinementAnalysis(n1, n2, tuple(history))
    K = analysis.fixpoint_index
    for p in pairs:
        analysis.ind[p] = max(k for k, r in enumerate(history) if p in r) if p in history[0] else 0
    for p in pairs:
        s1, s2 = p
        if p in analysis.relation:
            analysis.cases[p] = CaseLabel.CASE1
        elif n1.valuation_of(s1) != n2.valuation_of(s2):
            analysis.cases[p] = CaseLabel.CASE2
        else:
            analysis.cases[p] = CaseLabel.CASE3
            analysis.bsets[p] = _compute_bsets(n1, n2, s1, s2, analysis.relation)
    return analysis


def _compute_bsets(n1: APA, n2: APA, s1: State, s2: State,
                   relation: frozenset) -> BSets:
    buckets: dict[str, list[Action]] = {x: [] for x in "abcdef"}
    for a in n1.actions:
        t1 = _single_transition(n1, s1, a)
        t2 = _single_transition(n2, s2, a)
        hits = []
        if t1 is not None and t2 is None:
            hits.append("a" if t1.modality is Modality.MUST else "b")
        if t1 is None and t2 is not None and t2.modality is Modality.MUST:
            hits.append("d")
        if t1 is not None and t2 is not None:
            phi1 = n1.constraint(t1.constraint_id)
            phi2 = n2.constraint(t2.constraint_id)
            if t2.modality is Modality.MUST and t1.modality is Modality.MAY:
                hits.append("e")
            elif not _sim_ok(n1, n2, phi1, s2, a, phi2, relation):
                hits.append("c" if t2.modality is Modality.MAY else "f")
        assert len(hits) <= 1, f"action {a!r} triggers several rejection cases: {hits}"
        for x in hits:
            buckets[x].append(a)
    return BSets(**{f"b_{x}": tuple(sorted(acts)) for x, acts in buckets.items()})


def refines(n1: APA, n2: APA) -> bool:
    """Refinement between abstract automata.

    Deterministic pairs use the exact fixed point.  Non-deterministic inputs
    (difference automata, typically) fall back to a sound fixed point whose
    distribution condition is witnessed by piecewise successor maps; it can
    answer False on a refinement it fails to witness, never True wrongly.
    """
    if _deterministic_pair(n1, n2):
        return compute_refinement(n1, n2).refines
    return _refines_nondet(n1, n2)


def _deterministic_pair(n1: APA, n2: APA) -> bool:
    return (is_svnf(n1) and is_svnf(n2)
            and is_deterministic(n1) and is_deterministic(n2)
            and set(n1.actions) == set(n2.actions))


# -- sound refinement for non-deterministic automata ------------------------

_MAP_TEST_BUDGET = 256  # complete successor maps tried per constraint piece
_map_condition_memo: dict = {}


def _candidate_order(s: State):
    def key(t: State):
        return (t != s, str(t))
    return key


@lru_cache(maxsize=None)
def _complement_pieces(phi2, cap: int = C.DNF_BRANCH_CAP):
    return C.dnf_cover(C.negate(phi2), cap)


def _point_simulated(mu: Mapping[State, Fraction], phi2, states2: tuple,
                     relation: frozenset) -> bool:
    """Exact: does SOME mu2 in Sat(phi2) simulate this one concrete mu?

    Couples mu's support fractionally onto relation-compatible targets and
    asks each piece of Sat(phi2) for a feasible image.  Used as a cheap
    complete rejection filter before the map search.
    """
    supp = [s for s, m in mu.items() if m > 0]
    cands = {s: [t for t in states2 if (s, t) in relation] for s in supp}
    if any(not cands[s] for s in supp):
        return False
    variables = [(s, t) for s in supp for t in cands[s]]
    base = [({(s, t): ONE for t in cands[s]}, "==", mu[s]) for s in supp]
    for piece in C.dnf_cover(phi2):
        nonstrict, strict = [], []
        for coeffs, rel, rhs in piece.rows:
            row = {}
            for t, c in coeffs:
                for s in supp:
                    if t in cands[s]:
                        row[(s, t)] = row.get((s, t), ZERO) + c
            if rel == "<":
                strict.append((row, rhs))
            else:
                nonstrict.append((row, rel, rhs))
        if _lp.strict_feasible_point(base + nonstrict, strict, variables) is not None:
            return True
    return False


def _map_condition(phi1, states1: tuple, phi2, states2: tuple,
                   relation: frozenset) -> bool:
    """Sufficient check: every mu1 in Sat(phi1) simulated w.r.t. `relation` by
    some mu2 in Sat(phi2).

    Witness shape: per piece of Sat(phi1), one deterministic successor map T
    (relation-compatible); the pushforward condition T#piece being inside
    Sat(phi2) is then exact, decided against the complement cover.  Searching
    only deterministic maps is the conservative part.
    """
    supp1 = C.supportable_states(phi1, states1)
    slice_key = frozenset(p for p in relation if p[0] in supp1)
    memo_key = (phi1, states1, phi2, states2, slice_key)
    hit = _map_condition_memo.get(memo_key)
    if hit is not None:
        return hit
    result = _map_condition_raw(phi1, states1, phi2, states2, slice_key)
    _map_condition_memo[memo_key] = result
    return result


def _map_condition_raw(phi1, states1: tuple, phi2, states2: tuple,
                       relation: frozenset) -> bool:
    neg_pieces = _complement_pieces(phi2)
    for piece in C.dnf_cover(phi1):
        probe = C.piece_point(piece, states1)
        if probe is None:
            continue
        # complete rejection filter: one concrete point with no simulating image
        if not _point_simulated(probe, phi2, states2, relation):
            return False
        dom = [s for s in states1
               if C.piece_point(piece, states1, extra_strict=[({s: -ONE}, ZERO)]) is not None]
        cands = {s: sorted((t for t in states2 if (s, t) in relation), key=_candidate_order(s))
                 for s in dom}
        if any(not cands[s] for s in dom):
            return False
        dom.sort(key=lambda s: (len(cands[s]), str(s)))
        nonstrict, strict = piece.lp_rows()
        nonstrict = nonstrict + [({s: ONE for s in states1}, "==", ONE)]

        def push_ok(assign: dict) -> bool:
            for neg in neg_pieces:
                extra_nonstrict, extra_strict = [], []
                for coeffs, rel, rhs in neg.rows:
                    cm = dict(coeffs)
                    pulled: dict = {}
                    for s in dom:
                        c = cm.get(assign[s])
                        if c:
                            pulled[s] = pulled.get(s, ZERO) + c
                    if rel == "<":
                        extra_strict.append((pulled, rhs))
                    else:
                        extra_nonstrict.append((pulled, rel, rhs))
                point = _lp.strict_feasible_point(nonstrict + extra_nonstrict,
                                                  strict + extra_strict, list(states1))
                if point is not None:
                    return False  # some mu1 in the piece escapes Sat(phi2)
            return True

        budget = _MAP_TEST_BUDGET

        def dfs(i: int, assign: dict) -> bool:
            nonlocal budget
            if budget <= 0:
                return False
            if i == len(dom):
                budget -= 1
                return push_ok(assign)
            for t in cands[dom[i]]:
                assign[dom[i]] = t
                if dfs(i + 1, assign):
                    return True
                if budget <= 0:
                    break
            assign.pop(dom[i], None)
            return False

        if not dfs(0, {}):
            return False
    return True


def _nondet_pair_ok(n1: APA, n2: APA, s1: State, s2: State, relation: frozenset) -> bool:
    states1, states2 = tuple(n1.states), tuple(n2.states)
    for a in n1.actions:
        ts1 = n1.transitions_from(s1, a)
        ts2 = n2.transitions_from(s2, a)
        for tr2 in ts2:
            if tr2.modality is not Modality.MUST:
                continue
            phi2 = n2.constraint(tr2.constraint_id)
            if not any(tr1.modality is Modality.MUST and
                       _map_condition(n1.constraint(tr1.constraint_id), states1,
                                      phi2, states2, relation)
                       for tr1 in ts1):
                return False
        for tr1 in ts1:
            phi1 = n1.constraint(tr1.constraint_id)
            if not any(_map_condition(phi1, states1,
                                      n2.constraint(tr2.constraint_id), states2, relation)
                       for tr2 in ts2):
                return False
    return True


def _refines_nondet(n1: APA, n2: APA) -> bool:
    for n, name in ((n1, "left"), (n2, "right")):
        if not is_svnf(n):
            raise PreconditionError(f"{name} automaton is not in single-valuation normal form")
    if set(n1.actions) != set(n2.actions):
        raise InputError("automata must share the same action alphabet")
    relation = frozenset((s1, s2) for s1 in n1.states for s2 in n2.states
                         if n1.valuation_of(s1) == n2.valuation_of(s2))
    while True:
        nxt = frozenset(p for p in relation if _nondet_pair_ok(n1, n2, p[0], p[1], relation))
        if nxt == relation:
            break
        relation = nxt
    return all(any((s1, s2) in relation for s2 in n2.initial) for s1 in n1.initial)


def classify_pair(analysis: RefinementAnalysis, s1: State, s2: State) -> tuple[CaseLabel, BSets]:
    return analysis.case_of(s1, s2), analysis.bsets_of(s1, s2)


# ---------------------------------------------------------------------------
# Breaking actions and witness distributions
# ---------------------------------------------------------------------------


def breaking(analysis: RefinementAnalysis, s1: State, s2: State) -> tuple[Action, ...]:
    """Actions whose violation removed the pair at its recorded sweep.

    Defined for equal-valuation pairs outside the maximal relation; the
    unmatched-distribution test runs against the relation as it stood when
    the pair was removed, not the final one.
    """
    n1, n2 = analysis.n1, analysis.n2
    if n1.valuation_of(s1) != n2.valuation_of(s2):
        raise PreconditionError("breaking is defined for equal-valuation pairs only")
    k = analysis.ind_of(s1, s2)
    if k >= analysis.fixpoint_index:
        raise PreconditionError("breaking is defined for rejected pairs only")
    rel_k = analysis.history[k]
    out = set(analysis.bsets_of(s1, s2).of("abde"))
    for a in n1.actions:
        t1 = _single_transition(n1, s1, a)
        t2 = _single_transition(n2, s2, a)
        if t1 is None or t2 is None:
            continue
        phi1 = n1.constraint(t1.constraint_id)
        phi2 = n2.constraint(t2.constraint_id)
        if not _sim_ok(n1, n2, phi1, s2, a, phi2, rel_k):
            out.add(a)
    result = tuple(sorted(out))
    assert result, "a rejected equal-valuation pair must have a breaking action"
    return result


def lemma_indplus_witness(analysis: RefinementAnalysis, s1: State, s2: State,
                          e: Action) -> WitnessDistribution:
    """A left distribution certifying the recursive failure on action e.

    Searched in a fixed order: (1) mass on a successor with no counterpart,
    (2) fully-matched image violating the right constraint, (3) mass on a
    successor pair rejected strictly earlier.
    """
    n1, n2 = analysis.n1, analysis.n2
    if analysis.case_of(s1, s2) is not CaseLabel.CASE3:
        raise PreconditionError("witness extraction needs an equal-valuation rejected pair")
    bs = analysis.bsets_of(s1, s2)
    if e not in bs.of("cf") or e not in breaking(analysis, s1, s2):
        raise PreconditionError(f"action {e!r} is not a constraint-level breaking action here")
    k = analysis.ind_of(s1, s2)
    rel_k = analysis.history[k]
    phi1 = n1.constraint(_single_transition(n1, s1, e).constraint_id)
    phi2 = n2.constraint(_single_transition(n2, s2, e).constraint_id)
    full = dict(forced_map(n1, n2, s2, e))  # no relation filter

    states1 = n1.states
    for piece in C.dnf_cover(phi1):
        nonstrict, strict = piece.lp_rows()
        nonstrict = nonstrict + [({s: ONE for s in states1}, "==", ONE)]
        # (1) support state with no potential successor at all
        for s in states1:
            if full.get(s) is None:
                point = _lp.strict_feasible_point(nonstrict, strict + [({s: -ONE}, ZERO)],
                                                  list(states1))
                if point is not None:
                    return WitnessDistribution(Distribution.of(point), SupportAtState(s))
    # (2) fully mapped image misses Sat(phi2)
    witness = _sim_witness(phi1, states1, tuple(sorted(full.items(), key=lambda kv: str(kv[0]))),
                           phi2, n2.states)
    if witness is not None and isinstance(witness.reason, FacetViolation):
        return witness
    # (3) mass on a successor pair rejected strictly earlier
    for piece in C.dnf_cover(phi1):
        nonstrict, strict = piece.lp_rows()
        nonstrict = nonstrict + [({s: ONE for s in states1}, "==", ONE)]
        for s in states1:
            t = full.get(s)
            if t is not None and (s, t) not in rel_k:
                point = _lp.strict_feasible_point(nonstrict, strict + [({s: -ONE}, ZERO)],
                                                  list(states1))
                if point is not None:
                    return WitnessDistribution(Distribution.of(point), ReachesPair(s, t))
    raise AssertionError("breaking action admits no witness; analysis is inconsistent")


# ---------------------------------------------------------------------------
# Satisfaction of a concrete automaton against an abstract one
# ---------------------------------------------------------------------------


def _pa_val(p: PA, s: State):
    return p.valuation_of(s)


def _match_by_pushforward(p: PA, n: APA, mu_p: Distribution, s2: State, a: Action,
                          phi, relation: frozenset) -> bool:
    """Deterministic fast path: push mu_p through the forced map, test membership."""
    def target(p_state: State) -> State | None:
        candidates = [t for t in C.supportable_states(phi, n.states)
                      if n.valuations(t) == (_pa_val(p, p_state),) and (p_state, t) in relation]
        if len(candidates) > 1:
            raise PreconditionError("constraint admits two equally-labeled successors; "
                                    "fast path requires determinism")
        return candidates[0] if candidates else None

    image = C.pushforward(mu_p, target)
    if isinstance(image, C.SupportGap):
        return False
    return C.sat_member(phi, image.mass)


def _match_by_coupling(p: PA, n: APA, mu_p: Distribution, phi,
                       relation: frozenset) -> bool:
    """General path: is there mu2 in Sat(phi) simulating the concrete mu_p?

    Decided as an exact feasibility problem over the joint weights
    w(p',t) = mu_p(p') * delta(p')(t), one LP per piece of the constraint.
    """
    support = [s for s, m in mu_p.items if m > 0]
    targets = {s: [t for t in n.states if (s, t) in relation] for s in support}
    if any(not ts for ts in targets.values()):
        return False
    variables = [(s, t) for s in support for t in targets[s]]
    base_rows: list = []
    for s in support:
        base_rows.append(({(s, t): ONE for t in targets[s]}, "==", mu_p[s]))
    all_targets = sorted({t for ts in targets.values() for t in ts}, key=str)
    # image mass at t is the column sum over the joint weights
    col = {t: {(s, u): ONE for (s, u) in variables if u == t} for t in all_targets}

    for piece in C.dnf_cover(phi):
        rows = list(base_rows)
        strict: list = []
        feasible = True
        for coeffs, rel, rhs in piece.rows:
            expr: dict = {}
            for t, cf in coeffs:
                for var, one in col.get(t, {}).items():
                    expr[var] = expr.get(var, ZERO) + cf
            if not expr:
                lhs = ZERO
                ok = {"<=": lhs <= rhs, "<": lhs < rhs, "==": lhs == rhs}[rel]
                if not ok:
                    feasible = False
                    break
                continue
            if rel == "<":
                strict.append((expr, rhs))
            else:
                rows.append((expr, rel, rhs))
        if not feasible:
            continue
        # Sat(phi) lives on the target simplex: column sums must total 1,
        # which base rows already force (sum mu_p = 1); cells outside the
        # product support do not exist as variables.
        point = _lp.strict_feasible_point(rows, strict, variables)
        if point is not None:
            return True
    return False


def satisfies(p: PA, n: APA, budget: int | None = None) -> tuple[bool, frozenset | None]:
    """Does the concrete automaton implement the abstract one?

    Runs a greatest-fixed-point pair elimination; each surviving pair is
    re-checked against the current relation.  Deterministic abstract inputs
    use forced-pushforward membership; non-deterministic ones (differences)
    fall back to per-distribution coupling feasibility.
    """
    if not is_svnf(n):
        raise PreconditionError("satisfaction requires the abstract side in "
                                "single-valuation normal form")
    limit = budget if budget is not None else node_budget()
    fast = is_deterministic(n)
    checks = 0

    def pair_ok(ps: State, s2: State, relation: frozenset) -> bool:
        nonlocal checks
        checks += 1
        if checks > limit:
            raise ResourceLimitError(f"satisfaction search exceeded {limit} pair checks")
        if (_pa_val(p, ps),) != tuple(n.valuations(s2)):
            return False
        for a in p.actions:
            mus = [t.distribution for t in p.transitions_from(ps, a)]
            phis = [(n.constraint(t.constraint_id), t.modality)
                    for t in n.transitions_from(s2, a)]
            for phi, modality in phis:
                if modality is Modality.MUST:
                    if not any(_matches(mu, ps, s2, a, phi, relation) for mu in mus):
                        return False
            for mu in mus:
                if not any(_matches(mu, ps, s2, a, phi, relation) for phi, _ in phis):
                    return False
        return True

    def _matches(mu: Distribution, ps: State, s2: State, a: Action, phi,
                 relation: frozenset) -> bool:
        if fast:
            return _match_by_pushforward(p, n, mu, s2, a, phi, relation)
        return _match_by_coupling(p, n, mu, phi, relation)

    current = frozenset((ps, s2) for ps in p.states for s2 in n.states)
    while True:
        nxt = frozenset(pair for pair in current if pair_ok(pair[0], pair[1], current))
        if nxt == current:
            break
        current = nxt
    ok = any((p.initial, s0) in current for s0 in n.initial)
    return (ok, current if ok else None)
