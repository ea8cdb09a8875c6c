"""Reasoning tools for probability-bounded linear temporal logic on finite traces.

The core logic attaches probability bounds to subformulas and interprets
them over trees of traces whose branches carry a probability distribution.
This package decides satisfiability, extracts witness models, answers
most-likely-trace and trace-probability queries, handles the flat fragment
where bounds apply only to whole temporal formulas, monitors running
traces against such constraint sets, and mines constraint sets from event
logs.
"""

from .syntax import (
    Always,
    And,
    Comparison,
    Eventually,
    Formula,
    Implies,
    Next,
    Not,
    Or,
    ParseError,
    Prob,
    Prop,
    TRUE,
    FALSE,
    Trace,
    Until,
    conj,
    eval_trace,
    format_trace,
    formula_text,
    negate,
    normalize,
    parse_formula,
    parse_trace,
    vars_of,
)
from .closure import Atom, ClosureSet, atom_of_members, closure, enumerate_atoms
from .linsolve import (
    InfeasibleSystemError,
    LinearSystem,
    Optimum,
    Rel,
    UnboundedObjectiveError,
    maximize,
    solve_feasibility,
)
from .automaton import (
    ReducedAutomaton,
    TreeAutomaton,
    WitnessModel,
    check_model,
    is_satisfiable,
    witness_model,
)
from .weighted import (
    BehaviourTable,
    MltAcceptor,
    TraceNFA,
    WeightedAutomaton,
    behaviour,
    build_weighted,
    enumerate_mlts,
    language_probability,
    mlt_acceptor,
    prefix_extension_query,
    product,
    trace_probability,
)
from .fragment import (
    MonitorState,
    Pltlf0Formula,
    PrefixAcceptor,
    ProbConstraint,
    Scenario,
    ScenarioTable,
    accepts_prefix,
    build_lphi,
    format_pltlf0,
    is_satisfiable0,
    monitor_step,
    monitor_with_property,
    most_likely_scenario,
    parse_pltlf0,
    scenario_maxima,
    scenarios_of,
    start_monitor,
    to_pltlf,
)
from .mining import (
    Case,
    EventLog,
    MinedConstraint,
    Template,
    default_catalog,
    frequent_sets,
    load_log,
    mine,
    mine_constraints,
    render_mined,
    set_support,
    to_pltlf0,
)

__version__ = "0.1.0"

__all__ = [
    "Always",
    "And",
    "Atom",
    "BehaviourTable",
    "Case",
    "ClosureSet",
    "Comparison",
    "EventLog",
    "Eventually",
    "FALSE",
    "Formula",
    "Implies",
    "InfeasibleSystemError",
    "LinearSystem",
    "MinedConstraint",
    "MltAcceptor",
    "MonitorState",
    "Next",
    "Not",
    "Optimum",
    "Or",
    "ParseError",
    "Pltlf0Formula",
    "PrefixAcceptor",
    "Prob",
    "ProbConstraint",
    "Prop",
    "ReducedAutomaton",
    "Rel",
    "Scenario",
    "ScenarioTable",
    "TRUE",
    "Template",
    "Trace",
    "TraceNFA",
    "TreeAutomaton",
    "UnboundedObjectiveError",
    "Until",
    "WeightedAutomaton",
    "WitnessModel",
    "accepts_prefix",
    "atom_of_members",
    "behaviour",
    "build_lphi",
    "build_weighted",
    "check_model",
    "closure",
    "conj",
    "default_catalog",
    "enumerate_atoms",
    "enumerate_mlts",
    "eval_trace",
    "format_pltlf0",
    "format_trace",
    "formula_text",
    "frequent_sets",
    "is_satisfiable",
    "is_satisfiable0",
    "language_probability",
    "load_log",
    "maximize",
    "mine",
    "mine_constraints",
    "mlt_acceptor",
    "monitor_step",
    "monitor_with_property",
    "most_likely_scenario",
    "negate",
    "normalize",
    "parse_formula",
    "parse_pltlf0",
    "parse_trace",
    "prefix_extension_query",
    "product",
    "render_mined",
    "scenario_maxima",
    "scenarios_of",
    "set_support",
    "solve_feasibility",
    "start_monitor",
    "to_pltlf",
    "to_pltlf0",
    "trace_probability",
    "vars_of",
    "witness_model",
]
