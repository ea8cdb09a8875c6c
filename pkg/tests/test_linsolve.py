import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from pltlf import (
    InfeasibleSystemError,
    LinearSystem,
    Rel,
    UnboundedObjectiveError,
    maximize,
    solve_feasibility,
)

import strategies as sts
from oracles import fm_feasible, fm_supremum

HALF = Fraction(1, 2)
SIXTY = Fraction(3, 5)


def branch_system(qsets_rows, names):
    """Simplex-style system: given probability rows, add nonnegativity and
    total mass one."""
    rows = list(qsets_rows)
    for name in names:
        rows.append(({name: 1}, Rel.GE, 0))
    rows.append(({name: 1 for name in names}, Rel.EQ, 1))
    return LinearSystem.from_rows(names, rows)


@pytest.fixture(scope="module")
def example_feasible():
    # branching pattern {1}, {2}, {1,2} under "at most half a" / "at least
    # sixty percent next-b"
    names = ("x1", "x2", "x12")
    return branch_system(
        [
            ({"x1": 1, "x12": 1}, Rel.LE, HALF),
            ({"x2": 1, "x12": 1}, Rel.GE, SIXTY),
        ],
        names,
    )


@pytest.fixture(scope="module")
def example_infeasible():
    names = ("x0", "x1", "x12")
    return branch_system(
        [
            ({"x1": 1, "x12": 1}, Rel.LE, HALF),
            ({"x12": 1}, Rel.GE, SIXTY),
        ],
        names,
    )


class TestFeasibility:
    def test_example_pair(self, example_feasible, example_infeasible):
        assert solve_feasibility(example_feasible).feasible
        assert not solve_feasibility(example_infeasible).feasible

    def test_witness_satisfies(self, example_feasible):
        res = solve_feasibility(example_feasible)
        assert example_feasible.holds(res.witness)

    def test_strict_boundary(self):
        sys1 = LinearSystem.from_rows(
            ("x",), [({"x": 1}, Rel.LT, 1), ({"x": 1}, Rel.GE, 1)]
        )
        assert not solve_feasibility(sys1).feasible
        sys2 = LinearSystem.from_rows(
            ("x",), [({"x": 1}, Rel.LT, 1), ({"x": 1}, Rel.GT, 0)]
        )
        res = solve_feasibility(sys2)
        assert res.feasible and 0 < res.witness["x"] < 1


class TestMaximize:
    def test_subset_maxima(self, example_feasible):
        assert maximize(example_feasible, "x2").supremum == 1
        assert maximize(example_feasible, "x12").supremum == HALF

    def test_adjoined_subset_maxima(self):
        # widen the pattern with the empty set and the singleton {1}
        names = ("x0", "x1", "x2", "x12")
        system = branch_system(
            [
                ({"x1": 1, "x12": 1}, Rel.LE, HALF),
                ({"x2": 1, "x12": 1}, Rel.GE, SIXTY),
            ],
            names,
        )
        assert maximize(system, "x0").supremum == Fraction(2, 5)
        assert maximize(system, "x1").supremum == Fraction(2, 5)

    def test_scenario_table_rows(self):
        # the four-scenario system of the two-constraint running example
        names = ("x00", "x01", "x10", "x11")
        system = branch_system(
            [
                ({"x10": 1, "x11": 1}, Rel.LE, Fraction(4, 5)),
                ({"x01": 1, "x11": 1}, Rel.LE, Fraction(7, 10)),
            ],
            names,
        ).with_rows([({"x00": 1}, Rel.EQ, 0)])
        assert maximize(system, "x00").supremum == 0
        assert maximize(system, "x01").supremum == Fraction(7, 10)
        assert maximize(system, "x10").supremum == Fraction(4, 5)
        assert maximize(system, "x11").supremum == HALF

    def test_witness_attains(self, example_feasible):
        opt = maximize(example_feasible, "x2")
        assert opt.attained
        assert example_feasible.holds(opt.witness)
        assert opt.witness["x2"] == opt.supremum

    def test_strict_supremum_not_attained(self):
        system = LinearSystem.from_rows(
            ("x",), [({"x": 1}, Rel.LT, 1), ({"x": 1}, Rel.GE, 0)]
        )
        opt = maximize(system, "x")
        assert opt.supremum == 1 and not opt.attained

    def test_infeasible_raises(self, example_infeasible):
        with pytest.raises(InfeasibleSystemError):
            maximize(example_infeasible, "x12")

    def test_unbounded_raises(self):
        system = LinearSystem.from_rows(("x",), [({"x": 1}, Rel.GE, 0)])
        with pytest.raises(UnboundedObjectiveError):
            maximize(system, "x")

    def test_unknown_variable(self, example_feasible):
        with pytest.raises(KeyError):
            maximize(example_feasible, "nope")

    def test_upper_bound_for_sampled_points(self, example_feasible):
        opt = maximize(example_feasible, "x12")
        rng = random.Random(20240811)
        base = solve_feasibility(example_feasible).witness
        accepted = 0
        for _ in range(20000):
            point = {
                k: v + Fraction(rng.randint(-16, 16), 128) for k, v in base.items()
            }
            total = sum(point.values())
            if total == 0:
                continue
            point = {k: v / total for k, v in point.items()}
            if example_feasible.holds(point):
                accepted += 1
                assert point["x12"] <= opt.supremum
            if accepted >= 1000:
                break
        assert accepted >= 1000


class TestDifferential:
    @given(sts.linear_systems())
    def test_feasibility_matches_fourier_motzkin(self, system):
        assert solve_feasibility(system).feasible == fm_feasible(system)

    @given(sts.linear_systems(max_vars=3, max_rows=5))
    @settings(max_examples=40)
    def test_supremum_matches_fourier_motzkin(self, system):
        expected = fm_supremum(system, system.variables[0])
        if expected is None:
            with pytest.raises(InfeasibleSystemError):
                maximize(system, system.variables[0])
        else:
            assert expected != "unbounded"  # box rows keep it finite
            assert maximize(system, system.variables[0]).supremum == expected


class TestRendering:
    def test_rows(self, example_feasible):
        rows = example_feasible.render_rows()
        assert rows[0] == "x1 + x12 <= 1/2"
        assert rows[1] == "x2 + x12 >= 3/5"
        assert rows[-1] == "x1 + x2 + x12 = 1"
