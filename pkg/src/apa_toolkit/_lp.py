"""Exact linear programming over rationals, sized for desk-scale decision procedures.

Two-phase dense simplex with Bland's rule on `fractions.Fraction`.  Every
refinement / difference / distance decision in this package reduces to small
LPs (tens of variables), where exactness matters far more than speed: the
logical layer must not depend on floating-point tolerances.

All variables are implicitly >= 0, which covers every use here (probability
masses, coupling masses, slack variables).  Callers fix the variable order;
solutions returned are basic, i.e. vertices of the feasible polyhedron.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

Var = Hashable
ZERO = Fraction(0)
ONE = Fraction(1)

# A constraint is (coeffs, rel, rhs) with rel one of "<=", ">=", "==".
Constraint = tuple[Mapping[Var, Fraction], str, Fraction]


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None
    point: dict[Var, Fraction] | None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """Dense simplex tableau: rows are equality constraints A x = b, x >= 0."""

    def __init__(self, num_vars: int):
        self.num_vars = num_vars
        self.rows: list[list[Fraction]] = []  # each row: coefficients + [rhs]
        self.basis: list[int] = []

    def add_row(self, coeffs: list[Fraction], rhs: Fraction) -> None:
        self.rows.append(coeffs + [rhs])

    def pivot(self, row: int, col: int) -> None:
        piv = self.rows[row][col]
        inv = ONE / piv
        self.rows[row] = [x * inv for x in self.rows[row]]
        for r in range(len(self.rows)):
            if r != row and self.rows[r][col] != 0:
                factor = self.rows[r][col]
                self.rows[r] = [a - factor * b for a, b in zip(self.rows[r], self.rows[row])]
        self.basis[row] = col

    def solution(self) -> list[Fraction]:
        x = [ZERO] * self.num_vars
        for r, col in enumerate(self.basis):
            if col < self.num_vars:
                x[col] = self.rows[r][-1]
        return x


def _simplex_phase(tab: _Tableau, cost: list[Fraction]) -> tuple[str, Fraction]:
    """Minimize cost over the tableau's feasible region, Bland's rule throughout."""
    m = len(tab.rows)
    n = len(cost)
    # Reduced-cost row: z_j - c_j computed fresh each pivot from the basis.
    while True:
        # y = c_B applied through the current (already reduced) rows.
        reduced = list(cost)
        obj = ZERO
        for r in range(m):
            cb = cost[tab.basis[r]]
            if cb != 0:
                row = tab.rows[r]
                obj += cb * row[-1]
                for j in range(n):
                    if row[j] != 0:
                        reduced[j] -= cb * row[j]
        entering = -1
        for j in range(n):
            if reduced[j] < 0:
                entering = j
                break
        if entering < 0:
            return "optimal", obj
        # Ratio test, Bland tiebreak on basis index.
        leaving = -1
        best: Fraction | None = None
        for r in range(m):
            a = tab.rows[r][entering]
            if a > 0:
                ratio = tab.rows[r][-1] / a
                if best is None or ratio < best or (ratio == best and tab.basis[r] < tab.basis[leaving]):
                    best = ratio
                    leaving = r
        if leaving < 0:
            return "unbounded", obj
        tab.pivot(leaving, entering)


def solve(
    objective: Mapping[Var, Fraction],
    constraints: Sequence[Constraint],
    variables: Sequence[Var],
    maximize: bool = True,
) -> LpResult:
    """Solve max/min objective subject to `constraints`, all variables >= 0.

    The returned point is a basic feasible solution (a vertex).
    """
    var_index = {v: i for i, v in enumerate(variables)}
    if len(var_index) != len(variables):
        raise ValueError("duplicate variables")
    n = len(variables)

    # Normalize to equalities with slack/surplus columns and rhs >= 0.
    rows: list[tuple[list[Fraction], Fraction, str]] = []
    num_slacks = 0
    for coeffs, rel, rhs in constraints:
        row = [ZERO] * n
        for v, c in coeffs.items():
            row[var_index[v]] += Fraction(c)
        rhs = Fraction(rhs)
        if rel == ">=":
            row = [-c for c in row]
            rhs = -rhs
            rel = "<="
        if rel == "<=":
            num_slacks += 1
        elif rel != "==":
            raise ValueError(f"unknown relation {rel!r}")
        rows.append((row, rhs, rel))

    total = n + num_slacks
    tab = _Tableau(total)
    slack_at = n
    for row, rhs, rel in rows:
        full = row + [ZERO] * num_slacks
        if rel == "<=":
            full[slack_at] = ONE
            slack_at += 1
        if rhs < 0:
            full = [-c for c in full]
            rhs = -rhs
        tab.add_row(full, rhs)

    m = len(tab.rows)
    # Phase 1: artificial basis.
    art_start = total
    for r in range(m):
        for row in tab.rows:
            row.insert(-1, ZERO)
        tab.rows[r][art_start + r] = ONE
        tab.basis.append(art_start + r)
    tab.num_vars = total + m
    phase1_cost = [ZERO] * total + [ONE] * m
    status, value = _simplex_phase(tab, phase1_cost)
    if status != "optimal" or value != 0:
        return LpResult("infeasible", None, None)
    # Drive artificials out of the basis where possible; drop redundant rows.
    for r in range(m - 1, -1, -1):
        if tab.basis[r] >= art_start:
            pivot_col = next((j for j in range(total) if tab.rows[r][j] != 0), None)
            if pivot_col is None:
                del tab.rows[r]
                del tab.basis[r]
            else:
                tab.pivot(r, pivot_col)
    # Truncate artificial columns.
    for r in range(len(tab.rows)):
        tab.rows[r] = tab.rows[r][:total] + [tab.rows[r][-1]]
    tab.num_vars = total

    sign = Fraction(-1) if maximize else ONE
    cost = [ZERO] * total
    for v, c in objective.items():
        cost[var_index[v]] += sign * Fraction(c)
    status, value = _simplex_phase(tab, cost)
    if status == "unbounded":
        return LpResult("unbounded", None, None)
    x = tab.solution()
    point = {v: x[i] for v, i in var_index.items()}
    return LpResult("optimal", sign * value if maximize else value, point)


def feasible_point(
    constraints: Sequence[Constraint], variables: Sequence[Var]
) -> dict[Var, Fraction] | None:
    """A vertex of the constraint set, or None if empty."""
    res = solve({}, constraints, variables, maximize=False)
    return res.point if res.optimal else None


_SLACK = ("__strict_slack__",)


def strict_feasible_point(
    constraints: Sequence[Constraint],
    strict: Sequence[tuple[Mapping[Var, Fraction], Fraction]],
    variables: Sequence[Var],
) -> dict[Var, Fraction] | None:
    """A point satisfying `constraints` plus coeffs·x < rhs for each strict row.

    Decided exactly by maximizing a shared slack t with coeffs·x + t <= rhs
    (t capped at 1); a strict solution exists iff the optimum is positive.
    """
    if not strict:
        return feasible_point(constraints, variables)
    aug_vars = list(variables) + [_SLACK]
    aug: list[Constraint] = [(dict(c), rel, rhs) for c, rel, rhs in constraints]
    for coeffs, rhs in strict:
        row = dict(coeffs)
        row[_SLACK] = row.get(_SLACK, ZERO) + ONE
        aug.append((row, "<=", Fraction(rhs)))
    aug.append(({_SLACK: ONE}, "<=", ONE))
    res = solve({_SLACK: ONE}, aug, aug_vars, maximize=True)
    if not res.optimal or res.value <= 0:
        return None
    point = dict(res.point)
    point.pop(_SLACK, None)
    return point
