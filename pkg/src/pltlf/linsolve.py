"""Exact linear feasibility and optimization over the rationals.

Systems mix non-strict, strict and equality rows over named variables.
Feasibility with strict rows is decided by adjoining a slack variable
``eps`` to every strict row and maximizing it (capped at 1): the system is
feasible iff the optimum is positive, and the maximizing point satisfies the
strict rows with margin.  :func:`maximize` reports the supremum over the
topological closure (strict rows relaxed to non-strict) together with an
attainment flag checked against the strict rows.

The pivoting core is a dense two-phase simplex on ``fractions.Fraction``
with Bland's rule, which cannot cycle.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .syntax import Comparison

ZERO = Fraction(0)
ONE = Fraction(1)


class Rel(enum.Enum):
    LE = "<="
    GE = ">="
    LT = "<"
    GT = ">"
    EQ = "="

    @property
    def strict(self) -> bool:
        return self in (Rel.LT, Rel.GT)

    @property
    def relaxed(self) -> "Rel":
        if self is Rel.LT:
            return Rel.LE
        if self is Rel.GT:
            return Rel.GE
        return self

    @classmethod
    def from_comparison(cls, cmp: Comparison) -> "Rel":
        return cls(cmp.value)

    def holds(self, lhs: Fraction, rhs: Fraction) -> bool:
        if self is Rel.LE:
            return lhs <= rhs
        if self is Rel.GE:
            return lhs >= rhs
        if self is Rel.LT:
            return lhs < rhs
        if self is Rel.GT:
            return lhs > rhs
        return lhs == rhs


@dataclass(frozen=True)
class LinearConstraint:
    """Row ``sum coeffs[i] * x_i  <rel>  rhs`` over the system's variables."""

    coeffs: tuple
    rel: Rel
    rhs: Fraction


@dataclass(frozen=True)
class LinearSystem:
    variables: tuple
    constraints: tuple = ()

    @classmethod
    def from_rows(cls, variables, rows) -> "LinearSystem":
        """Build from (coeff dict, rel, rhs) triples. Unknown names are errors."""
        variables = tuple(variables)
        index = {v: i for i, v in enumerate(variables)}
        constraints = []
        for coeffs, rel, rhs in rows:
            dense = [ZERO] * len(variables)
            for name, c in coeffs.items():
                dense[index[name]] = Fraction(c)
            constraints.append(LinearConstraint(tuple(dense), rel, Fraction(rhs)))
        return cls(variables, tuple(constraints))

    def with_rows(self, rows) -> "LinearSystem":
        extra = LinearSystem.from_rows(self.variables, rows)
        return LinearSystem(self.variables, self.constraints + extra.constraints)

    def relaxed(self) -> "LinearSystem":
        """Strict rows weakened to their non-strict closure."""
        return LinearSystem(
            self.variables,
            tuple(LinearConstraint(c.coeffs, c.rel.relaxed, c.rhs) for c in self.constraints),
        )

    def holds(self, point: dict) -> bool:
        """Exact membership test for a named point."""
        for c in self.constraints:
            lhs = sum(
                (coeff * point[name] for coeff, name in zip(c.coeffs, self.variables)),
                start=ZERO,
            )
            if not c.rel.holds(lhs, c.rhs):
                return False
        return True

    def render_rows(self) -> tuple:
        out = []
        for c in self.constraints:
            terms = []
            for coeff, name in zip(c.coeffs, self.variables):
                if coeff == 0:
                    continue
                if coeff == 1:
                    text = name
                elif coeff == -1:
                    text = f"-{name}"
                else:
                    text = f"{coeff} {name}"
                terms.append(text)
            lhs = " + ".join(terms) if terms else "0"
            out.append(f"{lhs} {c.rel.value} {c.rhs}")
        return tuple(out)


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    witness: Optional[dict] = None


@dataclass(frozen=True)
class Optimum:
    """Supremum of an objective; ``attained`` respects strict rows."""

    supremum: Fraction
    attained: bool
    witness: Optional[dict] = None


class InfeasibleSystemError(RuntimeError):
    pass


class UnboundedObjectiveError(RuntimeError):
    pass


def _pivot(tab, basis, row, col):
    piv = tab[row][col]
    tab[row] = [v / piv for v in tab[row]]
    for r in range(len(tab)):
        if r != row and tab[r][col] != 0:
            factor = tab[r][col]
            tab[r] = [a - factor * b for a, b in zip(tab[r], tab[row])]
    basis[row] = col


def _optimize(tab, basis, m):
    """Run Bland pivots until the reduced-cost row (last) is non-positive.

    Returns False if an entering column proves the objective unbounded.
    """
    rc = tab[m]
    width = len(rc) - 1
    while True:
        col = next((j for j in range(width) if rc[j] > 0), None)
        if col is None:
            return True
        best_row, best_ratio = None, None
        for r in range(m):
            a = tab[r][col]
            if a > 0:
                ratio = tab[r][-1] / a
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[r] < basis[best_row])
                ):
                    best_row, best_ratio = r, ratio
        if best_row is None:
            return False
        _pivot(tab, basis, best_row, col)
        rc = tab[m]


def _reduced_costs(tab, basis, m, objective):
    """Install the reduced-cost row for the given column objective."""
    rc = list(objective) + [ZERO]
    for r in range(m):
        c_b = objective[basis[r]]
        if c_b != 0:
            rc = [a - c_b * b for a, b in zip(rc, tab[r])]
    tab[m] = rc


def _solve_standard(rows, rhs, n, objective):
    """max objective . y  s.t.  rows y = rhs, y >= 0.

    Returns (status, value, y) with status in optimal/infeasible/unbounded.
    """
    m = len(rows)
    tab = []
    for i in range(m):
        row, b = list(rows[i]), rhs[i]
        if b < 0:
            row = [-v for v in row]
            b = -b
        art = [ZERO] * m
        art[i] = ONE
        tab.append(row + art + [b])
    basis = list(range(n, n + m))
    tab.append([])

    phase1 = [ZERO] * n + [-ONE] * m
    _reduced_costs(tab, basis, m, phase1)
    _optimize(tab, basis, m)
    if sum((tab[r][-1] for r in range(m) if basis[r] >= n), start=ZERO) > 0:
        return "infeasible", None, None

    # Drive leftover zero-value artificials out of the basis; rows that have
    # no real coefficient left are redundant and dropped.
    r = 0
    while r < len(tab) - 1:
        if basis[r] >= n:
            col = next((j for j in range(n) if tab[r][j] != 0), None)
            if col is None:
                del tab[r]
                del basis[r]
                continue
            _pivot(tab, basis, r, col)
        r += 1
    m = len(tab) - 1
    for r in range(m + 1):
        tab[r] = tab[r][:n] + [tab[r][-1]]

    full_obj = list(objective) + [ZERO] * (n - len(objective))
    _reduced_costs(tab, basis, m, full_obj)
    if not _optimize(tab, basis, m):
        return "unbounded", None, None
    y = [ZERO] * n
    for r in range(m):
        if basis[r] < n:
            y[basis[r]] = tab[r][-1]
    value = sum((c * v for c, v in zip(full_obj, y)), start=ZERO)
    return "optimal", value, y


_EPS = "__eps__"


def _solve(system: LinearSystem, objective: dict, with_eps: bool):
    """Named-variable front end; free variables are split into differences.

    ``objective`` maps variable names (or the eps pseudo-name) to
    coefficients.  Returns (status, value, point) where point includes the
    eps value when requested.
    """
    names = system.variables
    n_named = len(names)
    eps_col = 2 * n_named if with_eps else None

    # Row specs: (dense named coeffs, eps coefficient, non-strict rel, rhs).
    specs = []
    for c in system.constraints:
        rel, eps_coeff = c.rel, ZERO
        if rel.strict:
            if not with_eps:
                raise AssertionError("strict row reached the relaxed solver")
            eps_coeff = ONE if rel is Rel.LT else -ONE
            rel = rel.relaxed
        specs.append((c.coeffs, eps_coeff, rel, c.rhs))
    if with_eps:
        specs.append(((ZERO,) * n_named, ONE, Rel.LE, ONE))

    slack_count = sum(1 for _, _, rel, _ in specs if rel is not Rel.EQ)
    total = 2 * n_named + (1 if with_eps else 0) + slack_count
    slack_base = 2 * n_named + (1 if with_eps else 0)

    rows, rhs = [], []
    slack_at = slack_base
    for dense, eps_coeff, rel, b in specs:
        row = [ZERO] * total
        for j, coeff in enumerate(dense):
            row[2 * j] = coeff
            row[2 * j + 1] = -coeff
        if with_eps:
            row[eps_col] = eps_coeff
        if rel is not Rel.EQ:
            row[slack_at] = ONE if rel is Rel.LE else -ONE
            slack_at += 1
        rows.append(row)
        rhs.append(b)

    obj = [ZERO] * total
    for name, coeff in objective.items():
        if name == _EPS:
            obj[eps_col] = Fraction(coeff)
        else:
            j = names.index(name)
            obj[2 * j] = Fraction(coeff)
            obj[2 * j + 1] = -Fraction(coeff)

    status, value, y = _solve_standard(rows, rhs, total, obj)
    if status != "optimal":
        return status, None, None
    point = {name: y[2 * j] - y[2 * j + 1] for j, name in enumerate(names)}
    if with_eps:
        point[_EPS] = y[eps_col]
    return status, value, point


def solve_feasibility(system: LinearSystem) -> FeasibilityResult:
    """Decide feasibility exactly; the witness satisfies strict rows strictly."""
    if any(c.rel.strict for c in system.constraints):
        status, value, point = _solve(system, {_EPS: ONE}, with_eps=True)
        if status == "infeasible" or value <= 0:
            return FeasibilityResult(False)
        del point[_EPS]
        return FeasibilityResult(True, point)
    status, _, point = _solve(system, {}, with_eps=False)
    if status == "infeasible":
        return FeasibilityResult(False)
    return FeasibilityResult(True, point)


def _lex_polish(system: LinearSystem, fixed: dict) -> dict:
    """Deterministic witness: lexicographically smallest point over the
    declared variable order, subject to the (non-strict) system and fixes."""
    current = system
    for name, v in fixed.items():
        current = current.with_rows([({name: 1}, Rel.EQ, v)])
    point = dict(fixed)
    for name in system.variables:
        if name in point:
            continue
        status, value, _ = _solve(current, {name: -ONE}, with_eps=False)
        if status != "optimal":
            raise UnboundedObjectiveError(f"variable {name} unbounded below")
        v = -value
        point[name] = v
        current = current.with_rows([({name: 1}, Rel.EQ, v)])
    return point


def maximize(system: LinearSystem, variable: str) -> Optimum:
    """Supremum of a variable over the system.

    The supremum is taken over the closure of the feasible region; whether
    it is attained is decided against the strict rows.  Raises
    :class:`InfeasibleSystemError` when the system itself is infeasible and
    :class:`UnboundedObjectiveError` when the variable grows without bound.
    """
    if variable not in system.variables:
        raise KeyError(f"unknown variable {variable!r}")
    if not solve_feasibility(system).feasible:
        raise InfeasibleSystemError("system is infeasible")

    relaxed = system.relaxed()
    status, value, _ = _solve(relaxed, {variable: ONE}, with_eps=False)
    if status == "unbounded":
        raise UnboundedObjectiveError(f"variable {variable!r} unbounded above")
    assert status == "optimal"

    has_strict = any(c.rel.strict for c in system.constraints)
    if not has_strict:
        witness = _lex_polish(relaxed, {variable: value})
        return Optimum(value, True, witness)

    pinned = system.with_rows([({variable: 1}, Rel.EQ, value)])
    res = solve_feasibility(pinned)
    if res.feasible:
        return Optimum(value, True, res.witness)
    return Optimum(value, False, None)
