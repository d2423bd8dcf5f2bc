"""Automaton data model: abstract (three-valued) and concrete (two-valued)
probabilistic automata, with validation of the structural preconditions the
analyses assume (single-valuation normal form, determinism).

All types are immutable and hashable; all operations are pure.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from . import constraints as C
from .constraints import ConstraintExpr, Distribution, State
from .errors import InputError, PreconditionError

Action = str
ConstraintId = str
Valuation = frozenset  # of atomic-proposition names


def valuation(props: Iterable[str] = ()) -> Valuation:
    return frozenset(props)


class Modality(enum.Enum):
    """Transition modality; absence of a transition encodes the third value."""

    MUST = "must"
    MAY = "may"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Transition:
    source: State
    action: Action
    constraint_id: ConstraintId
    modality: Modality


@dataclass(frozen=True)
class APA:
    """Abstract probabilistic automaton.

    labeling maps each state to the set of admissible valuations; transitions
    hold (state, action, constraint-id, modality) with absence meaning "no
    transition allowed"; constraints resolves ids to constraint expressions
    over the state set.
    """

    states: tuple[State, ...]
    actions: tuple[Action, ...]
    ap: tuple[str, ...]
    labeling: tuple[tuple[State, tuple[Valuation, ...]], ...]
    transitions: tuple[Transition, ...]
    initial: tuple[State, ...]
    constraints: tuple[tuple[ConstraintId, ConstraintExpr], ...]

    # -- accessors ---------------------------------------------------------

    def valuations(self, s: State) -> tuple[Valuation, ...]:
        for state, vals in self.labeling:
            if state == s:
                return vals
        raise InputError(f"state {s!r} has no labeling entry")

    def valuation_of(self, s: State) -> Valuation:
        vals = self.valuations(s)
        if len(vals) != 1:
            raise PreconditionError(f"state {s!r} carries {len(vals)} valuations, need exactly 1")
        return vals[0]

    def constraint(self, cid: ConstraintId) -> ConstraintExpr:
        for key, expr in self.constraints:
            if key == cid:
                return expr
        raise InputError(f"unknown constraint id {cid!r}")

    def transitions_from(self, s: State, a: Action | None = None) -> tuple[Transition, ...]:
        return tuple(t for t in self.transitions
                     if t.source == s and (a is None or t.action == a))

    def initial_state(self) -> State:
        if len(self.initial) != 1:
            raise PreconditionError(f"expected a single initial state, found {len(self.initial)}")
        return self.initial[0]


def make_apa(*, states: Sequence[State], actions: Sequence[Action], ap: Sequence[str],
             labeling: Mapping[State, Iterable[Iterable[str]]],
             transitions: Iterable[tuple[State, Action, ConstraintId, Modality | str]],
             initial: Iterable[State],
             constraints: Mapping[ConstraintId, ConstraintExpr]) -> APA:
    """Convenience constructor accepting plain dicts/lists."""
    lab = tuple((s, tuple(sorted((valuation(v) for v in labeling.get(s, ())),
                                 key=lambda f: sorted(f))))
                for s in states)
    trans = tuple(Transition(s, a, cid, m if isinstance(m, Modality) else Modality(m))
                  for s, a, cid, m in transitions)
    cons = tuple(sorted(constraints.items(), key=lambda kv: kv[0]))
    return APA(tuple(states), tuple(actions), tuple(sorted(ap)), lab, trans,
               tuple(initial), cons)


@dataclass(frozen=True)
class PATransition:
    source: State
    action: Action
    distribution: Distribution


@dataclass(frozen=True)
class PA:
    """Concrete probabilistic automaton: single valuation per state, concrete
    distributions, a single initial state."""

    states: tuple[State, ...]
    actions: tuple[Action, ...]
    ap: tuple[str, ...]
    labeling: tuple[tuple[State, Valuation], ...]
    transitions: tuple[PATransition, ...]
    initial: State

    def valuation_of(self, s: State) -> Valuation:
        for state, val in self.labeling:
            if state == s:
                return val
        raise InputError(f"state {s!r} has no labeling entry")

    def transitions_from(self, s: State, a: Action | None = None) -> tuple[PATransition, ...]:
        return tuple(t for t in self.transitions
                     if t.source == s and (a is None or t.action == a))


def make_pa(*, states: Sequence[State], actions: Sequence[Action], ap: Sequence[str],
            labeling: Mapping[State, Iterable[str]],
            transitions: Iterable[tuple[State, Action, Mapping[State, object] | Distribution]],
            initial: State) -> PA:
    lab = tuple((s, valuation(labeling.get(s, ()))) for s in states)
    trans = []
    for s, a, dist in transitions:
        mu = dist if isinstance(dist, Distribution) else Distribution.of(dist)
        trans.append(PATransition(s, a, mu))
    return PA(tuple(states), tuple(actions), tuple(sorted(ap)), lab, tuple(trans), initial)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[str, ...]
    warnings: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.errors


def _constraint_dimension_ok(expr: ConstraintExpr, states: frozenset) -> bool:
    """Every state mentioned by the constraint belongs to the automaton."""
    if isinstance(expr, C.Atom):
        return all(s in states for s, _ in expr.atom.coeffs)
    if isinstance(expr, (C.And, C.Or)):
        return all(_constraint_dimension_ok(i, states) for i in expr.items)
    if isinstance(expr, C.Not):
        return _constraint_dimension_ok(expr.item, states)
    if isinstance(expr, (C.BotLift, C.PhiB)):
        return all(c in states for c in expr.cells)
    return True  # TrueExpr / FalseExpr


def validate(apa: APA) -> ValidationReport:
    """Structural well-formedness check; empty error list iff well-formed."""
    errors: list[str] = []
    warnings: list[str] = []
    state_set = frozenset(apa.states)
    ap_set = frozenset(apa.ap)
    cids = [cid for cid, _ in apa.constraints]
    if len(set(cids)) != len(cids):
        errors.append("duplicate constraint ids")
    cid_set = set(cids)

    labeled = [s for s, _ in apa.labeling]
    for s in apa.states:
        if s not in labeled:
            errors.append(f"state {s!r} missing from labeling")
    for s, vals in apa.labeling:
        if s not in state_set:
            errors.append(f"labeling mentions unknown state {s!r}")
        for v in vals:
            extra = set(v) - ap_set
            if extra:
                errors.append(f"valuation of {s!r} uses unknown propositions {sorted(extra)}")
        if len(vals) == 0:
            warnings.append(f"state {s!r} admits no valuation; no implementation can satisfy it")
        if len(set(vals)) != len(vals):
            errors.append(f"duplicate valuations at {s!r}")

    for s in apa.initial:
        if s not in state_set:
            errors.append(f"initial state {s!r} not a state")
    if not apa.initial:
        warnings.append("no initial state")

    seen_triples = set()
    for t in apa.transitions:
        if t.source not in state_set:
            errors.append(f"transition from unknown state {t.source!r}")
        if t.action not in apa.actions:
            errors.append(f"transition on unknown action {t.action!r}")
        if t.constraint_id not in cid_set:
            errors.append(f"transition references unknown constraint {t.constraint_id!r}")
        triple = (t.source, t.action, t.constraint_id)
        if triple in seen_triples:
            errors.append(f"duplicate transition entry {triple!r}")
        seen_triples.add(triple)

    for cid, expr in apa.constraints:
        if not _constraint_dimension_ok(expr, state_set):
            errors.append(f"constraint {cid!r} mentions states outside the automaton")

    return ValidationReport(tuple(errors), tuple(warnings))


def validate_pa(p: PA) -> ValidationReport:
    errors: list[str] = []
    state_set = frozenset(p.states)
    ap_set = frozenset(p.ap)
    labeled = {s for s, _ in p.labeling}
    for s in p.states:
        if s not in labeled:
            errors.append(f"state {s!r} missing from labeling")
    for s, val in p.labeling:
        extra = set(val) - ap_set
        if extra:
            errors.append(f"valuation of {s!r} uses unknown propositions {sorted(extra)}")
    if p.initial not in state_set:
        errors.append(f"initial state {p.initial!r} not a state")
    for t in p.transitions:
        if t.source not in state_set:
            errors.append(f"transition from unknown state {t.source!r}")
        if t.action not in p.actions:
            errors.append(f"transition on unknown action {t.action!r}")
        for s, _ in t.distribution.items:
            if s not in state_set:
                errors.append(f"distribution of ({t.source!r},{t.action!r}) hits unknown state {s!r}")
    return ValidationReport(tuple(errors), ())


# ---------------------------------------------------------------------------
# Normal-form and determinism checks
# ---------------------------------------------------------------------------


def is_svnf(apa: APA) -> bool:
    """True iff every state admits at most one valuation."""
    return all(len(vals) <= 1 for _, vals in apa.labeling)


def is_deterministic(apa: APA) -> bool:
    """Determinism for SVNF automata.

    (1) at most one transition per (state, action); (2) no single transition
    can put mass on two distinct equally-labeled states; (3) one initial state.
    """
    if not is_svnf(apa):
        raise PreconditionError("determinism check requires single-valuation normal form")
    if len(apa.initial) != 1:
        return False
    per_pair: dict[tuple[State, Action], int] = {}
    for t in apa.transitions:
        per_pair[(t.source, t.action)] = per_pair.get((t.source, t.action), 0) + 1
    if any(n > 1 for n in per_pair.values()):
        return False
    for t in apa.transitions:
        phi = apa.constraint(t.constraint_id)
        supp = C.supportable_states(phi, apa.states)
        by_val: dict[Valuation, int] = {}
        for s in supp:
            vals = apa.valuations(s)
            if len(vals) != 1:
                continue  # un-labeled states cannot clash
            by_val[vals[0]] = by_val.get(vals[0], 0) + 1
        if any(n > 1 for n in by_val.values()):
            return False
    return True


@lru_cache(maxsize=None)
def succ(apa: APA, s: State, a: Action, v: Valuation) -> frozenset:
    """Potential a-successors of s carrying valuation v (at most one when
    deterministic): states with positive mass under some satisfying
    distribution of some (s, a) constraint."""
    out = set()
    for t in apa.transitions_from(s, a):
        phi = apa.constraint(t.constraint_id)
        for s2 in C.supportable_states(phi, apa.states):
            if apa.valuations(s2) == (v,):
                out.add(s2)
    return frozenset(out)


def forced_successor(apa: APA, s: State, a: Action, v: Valuation) -> State | None:
    """The unique successor from succ, or None; rejects ambiguity loudly."""
    candidates = succ(apa, s, a, v)
    if len(candidates) > 1:
        raise PreconditionError(
            f"succ({s!r},{a!r},{set(v) or '{}'}) is not a singleton; automaton not deterministic")
    return next(iter(candidates), None)


def pa_as_apa(p: PA) -> APA:
    """View a concrete automaton as an abstract one: singleton labelings and
    point constraints pinning each transition's distribution."""
    labeling = {s: [p.valuation_of(s)] for s in p.states}
    cons: dict[ConstraintId, ConstraintExpr] = {}
    trans = []
    for i, t in enumerate(p.transitions):
        cid = f"mu{i}"
        cons[cid] = C.point_constraint(t.distribution)
        trans.append((t.source, t.action, cid, Modality.MUST))
    return make_apa(states=p.states, actions=p.actions, ap=p.ap, labeling=labeling,
                    transitions=trans, initial=[p.initial], constraints=cons)
