"""Most likely traces and probability queries over trace languages.

The reduced tree automaton is flattened into a max-times weighted
automaton whose runs are traces: states keep their atom's valuation, an
edge carries the largest mass any branch system lets the child subset
absorb, and the behaviour (maximum run weight from an initial state to a
final one) is the probability of the most likely trace.  An unweighted
acceptor carved out of the weighted automaton recognizes exactly the
traces attaining that probability, and products with ordinary finite
automata answer probability queries for whole trace languages.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .automaton import ReducedAutomaton, ScenarioRecord, TreeAutomaton, _qset_name
from .linsolve import maximize
from .syntax import Formula, Trace, all_valuations, format_trace, parse_trace, vars_of

ZERO = Fraction(0)
ONE = Fraction(1)


def _valuation_text(valuation: frozenset) -> str:
    return format_trace((valuation,))


class WeightedAutomaton:
    """Max-times automaton over traces.

    A run starts in an initial state, follows weighted edges, and ends in
    a final state; its weight is the product of the edge weights (1 for a
    single-state run) and the trace it spells is the sequence of state
    valuations.  Absent edges have weight zero.
    """

    def __init__(self, states, initial, finals, weights, valuations):
        self.states = tuple(states)
        self.initial = frozenset(initial)
        self.finals = frozenset(finals)
        self.weights = dict(weights)
        self.valuations = dict(valuations)
        succ = {q: [] for q in self.states}
        for src, dst in self.weights:
            succ[src].append(dst)
        self.succ = {q: tuple(sorted(targets, key=str)) for q, targets in succ.items()}
        self._table: Optional[BehaviourTable] = None

    def weight(self, src, dst) -> Fraction:
        return self.weights.get((src, dst), ZERO)

    def behaviour_table(self) -> "BehaviourTable":
        if self._table is None:
            self._table = _fixpoint(self)
        return self._table


@dataclass(frozen=True)
class BehaviourTable:
    """Largest run weight from each state, with the sweep count that the
    fixpoint iteration needed."""

    values: dict
    sweeps: int
    value: Fraction


def _fixpoint(wa: WeightedAutomaton) -> BehaviourTable:
    # Finals start at one (the empty run); everything else grows
    # monotonically, one edge per sweep, so simple runs suffice and the
    # iteration stabilizes within |states| sweeps.
    base = {q: ONE if q in wa.finals else ZERO for q in wa.states}
    current = dict(base)
    sweeps = 0
    while True:
        updated = {}
        for q in wa.states:
            best = base[q]
            for dst in wa.succ[q]:
                cand = wa.weights[(q, dst)] * current[dst]
                if cand > best:
                    best = cand
            updated[q] = best
        if updated == current:
            break
        current = updated
        sweeps += 1
    value = max((current[q] for q in wa.initial), default=ZERO)
    return BehaviourTable(current, sweeps, value)


def scenario_max(
    automaton: TreeAutomaton, aid: int, record: ScenarioRecord, qmask: int
) -> Fraction:
    """Largest mass the scenario can place on the child subset ``qmask``.

    When the subset is not part of the scenario its variable is adjoined
    to the branch system first (the extra branch takes no mass away from
    any probability row, so feasibility is preserved).
    """
    width = len(automaton.prob_members_of(aid))
    qsets = record.qsets
    if qmask not in qsets:
        qsets = tuple(sorted(qsets + (qmask,)))
    system = automaton.build_system(aid, qsets)
    return maximize(system, _qset_name(qmask, width)).supremum


def build_weighted(source) -> WeightedAutomaton:
    """Flatten a reduced tree automaton into a weighted trace automaton.

    The weight of an edge from ``a`` to ``a'`` is the best mass any
    surviving scenario of ``a`` can give the subset position that ``a'``
    occupies; positions are pinned by which probability arguments hold in
    ``a'``, so the maximum ranges over scenarios only.
    """
    if isinstance(source, Formula):
        reduced = TreeAutomaton(source).reduce()
    elif isinstance(source, TreeAutomaton):
        reduced = source.reduce()
    elif isinstance(source, ReducedAutomaton):
        reduced = source
    else:
        raise TypeError(f"cannot build a weighted automaton from {type(source).__name__}")
    aut = reduced.automaton
    states = tuple(sorted(reduced.good))
    weights = {}
    mass_cache = {}
    for aid in states:
        for record in reduced.scenario_records(aid):
            by_position = aut.occupants(aid, record.qsets, reduced.good)
            occupied = [
                (qmask, child)
                for qmask, fits in by_position.items()
                for child in fits
            ]
            for qmask, child in sorted(occupied):
                key = (record, qmask)
                mass = mass_cache.get(key)
                if mass is None:
                    mass = scenario_max(aut, aid, record, qmask)
                    mass_cache[key] = mass
                if mass == 0:
                    continue
                prev = weights.get((aid, child), ZERO)
                if mass > prev:
                    weights[(aid, child)] = mass
    valuations = {aid: aut.atoms[aid].valuation() for aid in states}
    return WeightedAutomaton(states, reduced.initial, reduced.finals, weights, valuations)


def behaviour(wa: WeightedAutomaton) -> Fraction:
    """Probability of the most likely trace: the largest run weight."""
    return wa.behaviour_table().value


class MltAcceptor:
    """Acceptor of exactly the traces whose probability equals the
    behaviour of the weighted automaton it was carved from."""

    def __init__(self, states, initial, finals, edges, valuations, value):
        self.states = tuple(states)
        self.initial = frozenset(initial)
        self.finals = frozenset(finals)
        self.edges = frozenset(edges)
        self.valuations = dict(valuations)
        self.value = value
        succ = {q: [] for q in self.states}
        for src, dst in self.edges:
            succ[src].append(dst)
        self.succ = {q: tuple(sorted(targets, key=str)) for q, targets in succ.items()}

    def accepts(self, trace: Trace) -> bool:
        if not trace:
            raise ValueError("traces are nonempty")
        current = {q for q in self.initial if self.valuations[q] == trace[0]}
        for valuation in trace[1:]:
            current = {
                dst
                for q in current
                for dst in self.succ[q]
                if self.valuations[dst] == valuation
            }
            if not current:
                return False
        return bool(current & self.finals)


def mlt_acceptor(wa: WeightedAutomaton) -> MltAcceptor:
    """Carve the acceptor of most likely traces out of ``wa``.

    Initial states must realize the behaviour, and every edge must be
    tight: taking it keeps the remaining run weight on track.  When the
    behaviour is zero nothing is accepted and the acceptor is empty.
    """
    table = wa.behaviour_table()
    if table.value == 0:
        return MltAcceptor((), (), (), (), {}, ZERO)
    w = table.values
    states = tuple(q for q in wa.states if w[q] > 0)
    kept = frozenset(states)
    initial = frozenset(q for q in wa.initial if w[q] == table.value)
    finals = frozenset(q for q in wa.finals if q in kept)
    edges = frozenset(
        (src, dst)
        for (src, dst), wt in wa.weights.items()
        if src in kept and dst in kept and wt * w[dst] == w[src]
    )
    valuations = {q: wa.valuations[q] for q in states}
    return MltAcceptor(states, initial, finals, edges, valuations, table.value)


def _trace_key(trace: Trace) -> tuple:
    return tuple(tuple(sorted(v)) for v in trace)


def enumerate_mlts(acc: MltAcceptor, max_count: int, max_len: int) -> list:
    """List accepted traces, shortest first and then lexicographically by
    sorted valuations.  The accepted language may be infinite, so both
    bounds are required."""
    if max_count < 1 or max_len < 1:
        raise ValueError("max_count and max_len must be at least 1")
    results = []
    level = {}
    for q in acc.initial:
        level.setdefault((acc.valuations[q],), set()).add(q)
    length = 1
    while level and len(results) < max_count:
        for trace in sorted(level, key=_trace_key):
            if level[trace] & acc.finals:
                results.append(trace)
                if len(results) >= max_count:
                    break
        if length >= max_len:
            break
        grown = {}
        for trace, reached in level.items():
            for q in reached:
                for dst in acc.succ[q]:
                    grown.setdefault(trace + (acc.valuations[dst],), set()).add(dst)
        level = grown
        length += 1
    return results[:max_count]


class TraceNFA:
    """Nondeterministic finite automaton over valuations."""

    def __init__(self, states, initial, finals, transitions):
        self.states = tuple(states)
        self.initial = frozenset(initial)
        self.finals = frozenset(finals)
        self.transitions = tuple(
            (src, frozenset(valuation), dst) for src, valuation, dst in transitions
        )
        known = set(self.states)
        for src, _, dst in self.transitions:
            if src not in known or dst not in known:
                raise ValueError(f"transition uses undeclared state: {src!r} -> {dst!r}")
        if not self.initial <= known or not self.finals <= known:
            raise ValueError("initial and final states must be declared states")
        delta = {}
        for src, valuation, dst in self.transitions:
            delta.setdefault((src, valuation), set()).add(dst)
        self._delta = {key: frozenset(dsts) for key, dsts in delta.items()}

    def step(self, sources, valuation: frozenset) -> frozenset:
        reached = set()
        for src in sources:
            reached.update(self._delta.get((src, valuation), ()))
        return frozenset(reached)

    def accepts(self, trace: Trace) -> bool:
        current = self.initial
        for valuation in trace:
            current = self.step(current, valuation)
        return bool(current & self.finals)

    def labels(self) -> frozenset:
        return frozenset(valuation for _, valuation, _ in self.transitions)

    @classmethod
    def from_trace(cls, trace: Trace) -> "TraceNFA":
        """Acceptor of the single given trace."""
        if not trace:
            raise ValueError("traces are nonempty")
        states = tuple(range(len(trace) + 1))
        transitions = [(i, trace[i], i + 1) for i in range(len(trace))]
        return cls(states, (0,), (len(trace),), transitions)

    @classmethod
    def universal(cls, variables) -> "TraceNFA":
        """Acceptor of every trace over the given propositions."""
        transitions = [(0, v, 0) for v in all_valuations(variables)]
        return cls((0,), (0,), (0,), transitions)

    @classmethod
    def extends_prefix(cls, prefix: Trace, variables) -> "TraceNFA":
        """Acceptor of the traces that start with ``prefix``."""
        if not prefix:
            raise ValueError("the prefix must be nonempty")
        n = len(prefix)
        states = tuple(range(n + 1))
        transitions = [(i, prefix[i], i + 1) for i in range(n)]
        transitions += [(n, v, n) for v in all_valuations(variables)]
        return cls(states, (0,), (n,), transitions)

    def to_dict(self) -> dict:
        return {
            "states": list(self.states),
            "initial": [s for s in self.states if s in self.initial],
            "finals": [s for s in self.states if s in self.finals],
            "transitions": [
                [src, _valuation_text(valuation), dst]
                for src, valuation, dst in self.transitions
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TraceNFA":
        try:
            states = data["states"]
            initial = data["initial"]
            finals = data["finals"]
            raw = data["transitions"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"automaton JSON is missing key {exc}") from None
        transitions = []
        for entry in raw:
            if not isinstance(entry, (list, tuple)) or len(entry) != 3:
                raise ValueError(f"bad transition entry: {entry!r}")
            src, label, dst = entry
            (valuation,) = parse_trace(label)
            transitions.append((src, valuation, dst))
        return cls(tuple(states), initial, finals, transitions)


def product(nfa: TraceNFA, wa: WeightedAutomaton) -> WeightedAutomaton:
    """Pair the weighted automaton with an NFA reading its valuations.

    A product state is a weighted state together with an NFA state
    reached after reading that state's valuation, so runs of the product
    are exactly the weighted runs whose traces the NFA accepts.
    """
    seeds = []
    for b in sorted(wa.initial, key=str):
        for s in sorted(nfa.step(nfa.initial, wa.valuations[b]), key=str):
            seeds.append((b, s))
    states = []
    seen = set()
    queue = deque(seeds)
    weights = {}
    while queue:
        state = queue.popleft()
        if state in seen:
            continue
        seen.add(state)
        states.append(state)
        b, s = state
        for b2 in wa.succ[b]:
            for s2 in sorted(nfa.step((s,), wa.valuations[b2]), key=str):
                weights[(state, (b2, s2))] = wa.weights[(b, b2)]
                if (b2, s2) not in seen:
                    queue.append((b2, s2))
    finals = frozenset(
        (b, s) for b, s in states if b in wa.finals and s in nfa.finals
    )
    valuations = {(b, s): wa.valuations[b] for b, s in states}
    return WeightedAutomaton(states, frozenset(seeds), finals, weights, valuations)


def _check_vars(f: Formula, valuations) -> None:
    known = vars_of(f)
    for valuation in valuations:
        unknown = valuation - known
        if unknown:
            raise ValueError(
                f"query mentions propositions the formula does not use: "
                f"{', '.join(sorted(unknown))}"
            )


def trace_probability(f: Formula, trace: Trace) -> Fraction:
    """Largest probability any satisfying interpretation gives the trace."""
    if not trace:
        raise ValueError("traces are nonempty")
    _check_vars(f, trace)
    wa = build_weighted(f)
    return behaviour(product(TraceNFA.from_trace(trace), wa))


def language_probability(f: Formula, nfa: TraceNFA) -> tuple:
    """Probability of the likeliest accepted trace, with its acceptor."""
    _check_vars(f, nfa.labels())
    wa = build_weighted(f)
    prod = product(nfa, wa)
    return behaviour(prod), mlt_acceptor(prod)


def prefix_extension_query(f: Formula, prefix: Trace) -> tuple:
    """Probability that a trace starts with ``prefix``, with the acceptor
    of the likeliest such traces."""
    if not prefix:
        raise ValueError("the prefix must be nonempty")
    _check_vars(f, prefix)
    nfa = TraceNFA.extends_prefix(prefix, sorted(vars_of(f)))
    return language_probability(f, nfa)
