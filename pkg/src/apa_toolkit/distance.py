"""Discounted accumulating distances between abstract automata.

The distance between two states is the least fixed point of a discounted
max-min system: along every action, each left constraint must be matched by
a right constraint at small transport cost (and each required right
constraint must be matched by a required left one), with the next-step
distances discounted by a factor in (0, 1).

The logical layer stays exact: the outer supremum is taken over the exact
vertices of the constraint's polyhedral pieces, and every transport problem
is solved by an exact rational LP.  Only the fixed-point iterate itself is
a binary64 float, with the contraction giving a certified error bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping

from . import _lp
from . import constraints as C
from .constraints import ConstraintExpr, Distribution, Piece, Polytope, State
from .errors import InputError, PreconditionError
from .model import APA, PA, Modality, is_svnf, pa_as_apa

ONE = Fraction(1)


@dataclass(frozen=True)
class DistanceParams:
    lam: float = 0.5
    epsilon: float = 1e-9
    max_iter: int = 10 ** 6
    vertex_dim_cap: int = C.VERTEX_DIM_CAP
    dnf_cap: int = C.DNF_BRANCH_CAP

    def __post_init__(self):
        if not 0 < self.lam < 1:
            raise InputError("the discount factor must lie strictly between 0 and 1")
        if self.epsilon <= 0:
            raise InputError("the convergence tolerance must be positive")


@dataclass
class DistanceTable:
    """Fixed-point iterate with its convergence certificate.

    `exact` is False when some constraint pair needed the sampled outer bound
    (a non-convex right-hand cover); every reported value is then a certified
    lower bound of the true distance rather than an epsilon-close value.
    """

    d: dict
    residual: float
    guaranteed_error: float
    iterations: int
    converged: bool
    exact: bool

    def value(self, s1: State, s2: State) -> float:
        return self.d[(s1, s2)]


def compatible(n1: APA, n2: APA, s1: State, s2: State) -> bool:
    """False iff no implementation could witness a finite distance: differing
    valuations, a left action the right bans, or a right requirement the left
    cannot be forced to meet."""
    if n1.valuation_of(s1) != n2.valuation_of(s2):
        return False
    for a in sorted(set(n1.actions) | set(n2.actions)):
        ts1 = n1.transitions_from(s1, a)
        ts2 = n2.transitions_from(s2, a)
        if ts1 and not ts2:
            return False
        if any(t.modality is Modality.MUST for t in ts2) and \
                not any(t.modality is Modality.MUST for t in ts1):
            return False
    return True


# ---------------------------------------------------------------------------
# Constraint-level distance: sup over the left satisfaction set of the
# cheapest transport into the right satisfaction set.
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _vertices_cached(poly: Polytope, dim_cap: int) -> tuple[Distribution, ...]:
    return tuple(C.vertices(poly, dim_cap))


@lru_cache(maxsize=None)
def _feasible_pieces(phi: ConstraintExpr, states: tuple, cap: int) -> tuple[Piece, ...]:
    """Pieces of the DNF cover that are nonempty as half-open sets."""
    out = []
    for piece in C.dnf_cover(phi, cap):
        if C.piece_point(piece, states) is None:
            continue
        out.append(piece)
    return tuple(out)


@lru_cache(maxsize=None)
def _outer_points(phi: ConstraintExpr, states: tuple, cap: int,
                  dim_cap: int) -> tuple[Distribution, ...]:
    """Candidate maximizers: vertices of the closure of each nonempty piece.

    Exact for the supremum whenever the inner value is convex (single-piece
    right cover), since the half-open pieces are dense in their closures and
    the inner value is continuous.
    """
    points: list[Distribution] = []
    for piece in _feasible_pieces(phi, states, cap):
        for v in _vertices_cached(Polytope.from_piece(piece, states), dim_cap):
            if v not in points:
                points.append(v)
    return tuple(points)


def _transport_value(mu: Distribution, rows2: Iterable, states2: tuple,
                     dval: Callable[[State, State], float]) -> Fraction:
    """Cheapest coupling of mu with any distribution in the given closed
    right-hand region; cost of a (left, right) cell is the current distance."""
    supp = mu.support()
    if len(supp) == 1:
        s = supp[0]
        rows = [(dict(coeffs), rel, rhs) for coeffs, rel, rhs in rows2]
        rows.append(({t: ONE for t in states2}, "==", ONE))
        obj = {t: Fraction(dval(s, t)) for t in states2}
        res = _lp.solve(obj, rows, list(states2), maximize=False)
        assert res.optimal, "the right-hand region was checked nonempty"
        return res.value
    variables = [(s, t) for s in supp for t in states2]
    rows = []
    for s in supp:
        rows.append(({(s, t): ONE for t in states2}, "==", mu[s]))
    for coeffs, rel, rhs in rows2:
        row = {}
        for t, c in dict(coeffs).items():
            for s in supp:
                row[(s, t)] = c
        rows.append((row, rel, rhs))
    obj = {(s, t): Fraction(dval(s, t)) for s in supp for t in states2}
    res = _lp.solve(obj, rows, variables, maximize=False)
    assert res.optimal, "a product coupling always exists"
    return res.value


def _expr_distance(phi1: ConstraintExpr, states1: tuple,
                   phi2: ConstraintExpr, states2: tuple,
                   dval: Callable[[State, State], float],
                   params: DistanceParams) -> tuple[float, bool]:
    """(value, exact): distance between two constraint expressions.

    With a multi-piece right cover the inner value is only piecewise convex,
    so the vertex scan yields a certified lower bound (exact=False).
    """
    pieces2 = _feasible_pieces(phi2, states2, params.dnf_cap)
    if not pieces2:
        return 1.0, True  # nothing to transport into
    pieces1 = _feasible_pieces(phi1, states1, params.dnf_cap)
    if not pieces1:
        return 0.0, True  # supremum over an empty set
    exact = len(pieces2) == 1
    rows2 = [p.closure_rows() for p in pieces2]
    best = Fraction(0)
    for mu in _outer_points(phi1, states1, params.dnf_cap, params.vertex_dim_cap):
        inner = min(_transport_value(mu, rows, states2, dval) for rows in rows2)
        if inner > best:
            best = inner
    return min(float(best), 1.0), exact


def constraint_distance(phi1: Polytope, phi2: Polytope,
                        d: DistanceTable | Mapping, params: DistanceParams | None = None) -> float:
    """Distance between two convex constraints, given next-step distances.

    Pairs missing from the table cost 1 (the conservative worst case).
    """
    params = params or DistanceParams()
    dmap = d.d if isinstance(d, DistanceTable) else dict(d)

    def dval(s: State, t: State) -> float:
        return dmap.get((s, t), 1.0)

    rows2 = [(dict(coeffs), rel, rhs) for coeffs, rel, rhs in phi2.rows]
    if _lp.feasible_point(rows2 + [({t: ONE for t in phi2.states}, "==", ONE)],
                          list(phi2.states)) is None:
        return 1.0  # empty right-hand region, by convention
    best = Fraction(0)
    for mu in _vertices_cached(phi1, params.vertex_dim_cap):
        val = _transport_value(mu, phi2.rows, phi2.states, dval)
        if val > best:
            best = val
    return min(float(best), 1.0)


# ---------------------------------------------------------------------------
# State-level fixed point
# ---------------------------------------------------------------------------


def _pair_terms(n1: APA, n2: APA, s1: State, s2: State):
    """The max-min structure of the distance equation at one state pair:
    a list of min-groups, each a nonempty list of (left phi, right phi)."""
    terms = []
    for a in n1.actions:
        ts1 = n1.transitions_from(s1, a)
        ts2 = n2.transitions_from(s2, a)
        for tr1 in ts1:
            opts = [(n1.constraint(tr1.constraint_id), n2.constraint(tr2.constraint_id))
                    for tr2 in ts2]
            assert opts, "compatible pairs never minimize over an empty set"
            terms.append(opts)
        must1 = [tr for tr in ts1 if tr.modality is Modality.MUST]
        for tr2 in ts2:
            if tr2.modality is not Modality.MUST:
                continue
            opts = [(n1.constraint(tr1.constraint_id), n2.constraint(tr2.constraint_id))
                    for tr1 in must1]
            assert opts, "compatible pairs never minimize over an empty set"
            terms.append(opts)
    return terms


def state_distances(n1: APA, n2: APA, params: DistanceParams | None = None) -> DistanceTable:
    """Value iteration for the discounted distance on all state pairs."""
    params = params or DistanceParams()
    if not (is_svnf(n1) and is_svnf(n2)):
        raise PreconditionError("distances need single-valuation normal form on both sides")
    lam = params.lam
    states1, states2 = tuple(n1.states), tuple(n2.states)
    pairs = [(s1, s2) for s1 in states1 for s2 in states2]
    incompat = {p for p in pairs if not compatible(n1, n2, *p)}
    terms = {p: _pair_terms(n1, n2, *p) for p in pairs if p not in incompat}

    # Constraint-pair metadata reused across sweeps: which left states can
    # carry mass (the d-slice that feeds the transport objective).
    combos = sorted({cp for tl in terms.values() for opts in tl for cp in opts},
                    key=lambda cp: (str(cp[0]), str(cp[1])))
    dims1 = {}
    for l, r in combos:
        pts = _outer_points(l, states1, params.dnf_cap, params.vertex_dim_cap)
        dims1[(l, r)] = tuple(sorted({s for v in pts for s in v.support()}, key=str))

    d = {p: (1.0 if p in incompat else 0.0) for p in pairs}
    threshold = params.epsilon * (1 - lam) / lam
    cache: dict = {}
    exact = True
    residual = float("inf")
    iterations = 0
    converged = False
    while iterations < params.max_iter:
        iterations += 1

        def dval(s: State, t: State) -> float:
            return d[(s, t)]

        new = {}
        residual = 0.0
        for p in pairs:
            if p in incompat:
                new[p] = 1.0
                continue
            best = 0.0
            for opts in terms[p]:
                inner = 1.0
                for l, r in opts:
                    key = (l, r, tuple(d[(s, t)] for s in dims1[(l, r)] for t in states2))
                    if key not in cache:
                        cache[key] = _expr_distance(l, states1, r, states2, dval, params)
                    val, ex = cache[key]
                    exact = exact and ex
                    inner = min(inner, lam * val)
                best = max(best, inner)
            new[p] = best
            residual = max(residual, abs(best - d[p]))
        d = new
        if residual <= threshold:
            converged = True
            break
    return DistanceTable(d=d, residual=residual,
                         guaranteed_error=residual * lam / (1 - lam),
                         iterations=iterations, converged=converged, exact=exact)


def syntactic_distance(n1: APA, n2: APA, params: DistanceParams | None = None) -> float:
    """Distance between automata: worst left initial state against its best
    right initial state."""
    if not n1.initial or not n2.initial:
        raise InputError("both automata need at least one initial state")
    table = state_distances(n1, n2, params)
    return max(min(table.value(s1, s2) for s2 in n2.initial) for s1 in n1.initial)


def thorough_distance_lower_bound(n1: APA, n2: APA,
                                  sampler: Callable[[APA], Iterable[PA]],
                                  params: DistanceParams | None = None) -> float:
    """Sampled surrogate for the implementation-set distance.

    Heuristic on both sides: the outer max runs over sampled left
    implementations only (underestimates), the inner min over sampled right
    implementations only (overestimates).  When a left sample satisfies the
    right automaton the inner minimum is exactly 0, so those pairs are exact.
    Each inner term is additionally clamped by the syntactic distance from
    the left sample to the right automaton, which also over-approximates the
    true inner infimum but never exceeds the automaton-level distance, so a
    sparse right sample cannot inflate the estimate past it.
    """
    from .refinement import satisfies  # local import to avoid a cycle

    params = params or DistanceParams()
    impls1 = list(sampler(n1))
    impls2 = list(sampler(n2))
    if not impls1:
        raise InputError("the sampler produced no implementations of the left automaton")
    best = 0.0
    abstr2 = pa_as_apa(n2) if isinstance(n2, PA) else n2
    for p1 in impls1:
        if satisfies(p1, abstr2)[0]:
            continue  # inner minimum hits this very implementation at cost 0
        if not impls2:
            raise InputError("the sampler produced no implementations of the right automaton")
        inner = min(syntactic_distance(pa_as_apa(p1), pa_as_apa(p2), params)
                    for p2 in impls2)
        inner = min(inner, syntactic_distance(pa_as_apa(p1), abstr2, params))
        best = max(best, inner)
    return best
