#!/usr/bin/env python3
"""Tour of the library on the bundled data files.

Run from anywhere after installing the package:

    python3 scripts/walkthrough.py
"""

import pathlib
from fractions import Fraction

from pltlf import (
    behaviour,
    build_weighted,
    enumerate_mlts,
    format_trace,
    formula_text,
    is_satisfiable,
    is_satisfiable0,
    mlt_acceptor,
    monitor_step,
    most_likely_scenario,
    parse_formula,
    parse_pltlf0,
    parse_trace,
    prefix_extension_query,
    scenario_maxima,
    start_monitor,
    trace_probability,
    witness_model,
)
from pltlf.mining import load_log, mine_constraints, render_mined, to_pltlf0

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def show(title):
    print()
    print(title)
    print("-" * len(title))


def main():
    show("Satisfiability and witness models")
    phi = parse_formula("P<=0.5[a] & P>=0.6[X b]")
    print("formula:     ", formula_text(phi))
    print("satisfiable: ", is_satisfiable(phi))
    model = witness_model(phi)
    print("witness tree:", model.to_dict())
    bad = parse_formula("P>=0.5[a] & P>=0.6[!a]")
    print("counterpart: ", formula_text(bad), "->", is_satisfiable(bad))

    show("Most likely traces")
    wa = build_weighted(phi)
    print("highest trace probability:", behaviour(wa))
    for trace in enumerate_mlts(mlt_acceptor(wa), 4, 6):
        print("  attained by", format_trace(trace))

    show("Trace and prefix probabilities")
    trace = parse_trace("-;a;b")
    print(f"P({format_trace(trace)}) =", trace_probability(phi, trace))
    prefix = parse_trace("-;a")
    value, acceptor = prefix_extension_query(phi, prefix)
    print(f"best extension of {format_trace(prefix)} has probability", value)
    for t in enumerate_mlts(acceptor, 3, 6):
        print("  for example", format_trace(t))

    show("Constraint sets and scenario analysis")
    psi1 = parse_pltlf0((DATA / "psi1.p0").read_text())
    table = scenario_maxima(psi1)
    for row in table.rows_text():
        print("  ", row)
    for scenario, top in zip(table.scenarios, table.maxima):
        print(f"  scenario {scenario.label}: {scenario.describe()}  max {top}")
    print("most likely scenario a priori:", most_likely_scenario(table, ()))

    show("Monitoring a running trace")
    state = start_monitor(table)
    for event in (frozenset(), frozenset("a"), frozenset("b")):
        state = monitor_step(state, event)
        label = ",".join(sorted(event)) or "-"
        print(f"  after {label!r}: scenario {state.best_index} "
              f"({state.describe_best()}) with probability {state.probability}")

    show("Mining a log back into bounds")
    log = load_log(DATA / "sample_log.csv")
    mined = mine_constraints(log, Fraction(4, 5))
    print(render_mined(mined), end="")
    print("mined set satisfiable:", is_satisfiable0(to_pltlf0(mined)))


if __name__ == "__main__":
    main()
