"""Tree automaton over atoms: satisfiability and witness models.

States are the atoms of the closure.  A transition out of an atom picks a
scenario: a family S of subsets of the atom's probability members whose
branch system (one probability row per member, plus nonnegativity and a
total mass of one) is feasible.  Each subset in S labels one child position;
the child atom must carry exactly the arguments that subset promises, every
next member of the parent must hold in all children, and every absent next
member must fail in at least one child.

An atom is final when it has no next member and all its probability bounds
accept mass zero; those atoms may label leaves.  Good states are computed as
the least fixpoint of "has a transition into only good states" seeded with
the finals; the sweep index at which an atom joins is its distance to
acceptance and drives witness extraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Optional

from .closure import Atom, ClosureSet, enumerate_atoms
from .linsolve import LinearSystem, Rel, solve_feasibility
from .syntax import (
    And,
    FalseConst,
    Formula,
    Next,
    Not,
    Prob,
    Prop,
    TrueConst,
    Until,
    formula_text,
    normalize,
)

ZERO = Fraction(0)


def _qset_name(qmask: int, width: int) -> str:
    inside = ",".join(str(j + 1) for j in range(width) if qmask >> j & 1)
    return f"x{{{inside}}}"


@dataclass(frozen=True)
class ScenarioRecord:
    """A feasible scenario at some atom: child subsets plus their system."""

    qsets: tuple
    system: LinearSystem


class TreeAutomaton:
    """Automaton for one formula; construction enumerates all atoms."""

    def __init__(self, formula: Formula):
        self.formula = normalize(formula)
        self.closure = ClosureSet(self.formula)
        self.atoms = tuple(enumerate_atoms(self.closure))
        clo = self.closure

        next_list = clo.next_members
        self._next_arg = tuple(clo.index[clo.members[i].operand] for i in next_list)
        self._all_next = (1 << len(next_list)) - 1

        # Probability pairs in closure order of their smaller member; each
        # atom holds exactly one side of every pair.
        pairs = []
        seen = set()
        for i in clo.prob_members:
            if i in seen:
                continue
            j = clo.negation[i]
            seen.add(i)
            seen.add(j)
            pairs.append((i, j, clo.index[clo.members[i].operand]))
        self._pairs = tuple(pairs)

        n = len(self.atoms)
        self._next_present = [0] * n
        self._next_args = [0] * n
        self._parg = [0] * n
        self._prob_sig = [None] * n
        self.final = [False] * n
        for aid, atom in enumerate(self.atoms):
            bits = atom.bits
            np_mask = na_mask = 0
            for pos, i in enumerate(next_list):
                if bits >> i & 1:
                    np_mask |= 1 << pos
                if bits >> self._next_arg[pos] & 1:
                    na_mask |= 1 << pos
            self._next_present[aid] = np_mask
            self._next_args[aid] = na_mask
            parg = 0
            sig = []
            ok_empty = True
            for pos, (i, j, arg) in enumerate(pairs):
                if bits >> arg & 1:
                    parg |= 1 << pos
                present = clo.members[i if bits >> i & 1 else j]
                sig.append((present.cmp, present.bound))
                if not present.cmp.holds(ZERO, present.bound):
                    ok_empty = False
            self._parg[aid] = parg
            self._prob_sig[aid] = tuple(sig)
            self.final[aid] = np_mask == 0 and ok_empty

        root = clo.index[self.formula]
        self.initial = tuple(aid for aid, a in enumerate(self.atoms) if a.bits >> root & 1)
        self.final_ids = tuple(aid for aid in range(n) if self.final[aid])

        self._family_cache = {}
        self._cand_cache = {}
        self._witness_cache = {}
        self._good = None

    def __len__(self) -> int:
        return len(self.atoms)

    def prob_members_of(self, aid: int) -> tuple:
        """Probability members of the atom, in pair order."""
        clo, bits = self.closure, self.atoms[aid].bits
        return tuple(
            clo.members[i if bits >> i & 1 else j] for (i, j, _) in self._pairs
        )

    def build_system(self, aid: int, qsets) -> LinearSystem:
        """Branch system for a scenario: probability rows in pair order,
        nonnegativity for every subset variable, total mass one."""
        qsets = tuple(sorted(qsets))
        width = len(self._pairs)
        names = tuple(_qset_name(q, width) for q in qsets)
        rows = []
        for j, member in enumerate(self.prob_members_of(aid)):
            coeffs = {names[k]: 1 for k, q in enumerate(qsets) if q >> j & 1}
            rows.append((coeffs, Rel.from_comparison(member.cmp), member.bound))
        for name in names:
            rows.append(({name: 1}, Rel.GE, ZERO))
        rows.append(({name: 1 for name in names}, Rel.EQ, Fraction(1)))
        return LinearSystem.from_rows(names, rows)

    def scenario_family(self, aid: int) -> tuple:
        """All feasible scenarios at the atom, smallest families first.

        Feasibility depends only on the atom's probability signature, so
        results are shared across atoms with equal signatures.
        """
        sig = self._prob_sig[aid]
        cached = self._family_cache.get(sig)
        if cached is not None:
            return cached
        width = len(self._pairs)
        records = []
        if width == 0:
            records.append(ScenarioRecord((0,), self.build_system(aid, (0,))))
        else:
            subsets = range(1 << width)
            for size in range(1, len(subsets) + 1):
                for chosen in combinations(subsets, size):
                    system = self.build_system(aid, chosen)
                    if solve_feasibility(system).feasible:
                        records.append(ScenarioRecord(chosen, system))
        result = tuple(records)
        self._family_cache[sig] = result
        return result

    def scenario_witness(self, aid: int, record: ScenarioRecord) -> dict:
        """Deterministic point of the scenario's branch system."""
        key = (self._prob_sig[aid], record.qsets)
        point = self._witness_cache.get(key)
        if point is None:
            point = solve_feasibility(record.system).witness
            self._witness_cache[key] = point
        return point

    def _candidates(self, aid: int) -> dict:
        """Child candidates bucketed by their probability-argument profile.

        A candidate must contain the argument of every next member of the
        parent; its cover mask records which absent next members it refutes.
        """
        cached = self._cand_cache.get(aid)
        if cached is not None:
            return cached
        req = self._next_present[aid]
        obl = self._all_next & ~req
        buckets = {}
        for cid in range(len(self.atoms)):
            args = self._next_args[cid]
            if req & ~args:
                continue
            cover = obl & ~args
            buckets.setdefault(self._parg[cid], []).append((cid, cover))
        result = {q: tuple(v) for q, v in buckets.items()}
        self._cand_cache[aid] = result
        return result

    def _positions(self, aid: int, qsets, restrict):
        """Candidate lists per subset position, or None if one is empty."""
        buckets = self._candidates(aid)
        positions = []
        for q in qsets:
            cands = buckets.get(q, ())
            if restrict is not None:
                cands = tuple(c for c in cands if c[0] in restrict)
            if not cands:
                return None
            positions.append(cands)
        return positions

    def transition_tuples(self, aid: int, qsets, restrict=None) -> Iterator[tuple]:
        """Child tuples for the scenario, one atom per subset, in order.

        Every absent next member of the parent must be refuted somewhere in
        the tuple; ``restrict`` limits the candidate atoms (used with the
        good-state set).
        """
        positions = self._positions(aid, qsets, restrict)
        if positions is None:
            return
        obl = self._all_next & ~self._next_present[aid]

        k = len(positions)
        suffix = [0] * (k + 1)
        for i in range(k - 1, -1, -1):
            possible = 0
            for _, cover in positions[i]:
                possible |= cover
            suffix[i] = suffix[i + 1] | possible

        chosen = [0] * k

        def rec(i: int, covered: int) -> Iterator[tuple]:
            if covered | suffix[i] != obl:
                return
            if i == k:
                yield tuple(chosen)
                return
            for cid, cover in positions[i]:
                chosen[i] = cid
                yield from rec(i + 1, covered | cover)

        yield from rec(0, 0)

    def has_transition(self, aid: int, qsets, restrict) -> bool:
        """Whether a full child tuple exists, without enumerating tuples.

        Tracks the set of reachable obligation-cover masks position by
        position; a tuple exists iff the full obligation mask is reachable.
        """
        positions = self._positions(aid, qsets, restrict)
        if positions is None:
            return False
        obl = self._all_next & ~self._next_present[aid]
        if obl == 0:
            return True
        reach = {0}
        for cands in positions:
            covers = {cover for _, cover in cands}
            reach = {m | c for m in reach for c in covers}
            if obl in reach:
                # every later position is nonempty, so extension succeeds
                return True
        return obl in reach

    def occupants(self, aid: int, qsets, restrict=None) -> dict:
        """Atoms that appear at each position of at least one child tuple.

        Same reachable-cover bookkeeping as ``has_transition``, run both
        forwards and backwards so each candidate only needs a compatible
        pair of partial covers around it.
        """
        positions = self._positions(aid, qsets, restrict)
        if positions is None:
            return {}
        obl = self._all_next & ~self._next_present[aid]
        cover_sets = [frozenset(cover for _, cover in cands) for cands in positions]
        k = len(positions)
        forward = [{0}]
        for covers in cover_sets:
            forward.append({m | c for m in forward[-1] for c in covers})
        backward = [{0}] * (k + 1)
        for i in range(k - 1, -1, -1):
            backward[i] = {m | c for m in backward[i + 1] for c in cover_sets[i]}
        result = {}
        for i, cands in enumerate(positions):
            around = {f | b for f in forward[i] for b in backward[i + 1]}
            fits = tuple(
                cid
                for cid, cover in cands
                if any(u | cover == obl for u in around)
            )
            if not fits:
                return {}
            result[qsets[i]] = fits
        return result

    def successors(self, aid: int) -> tuple:
        """Children in the probability-free case, where tuples are unary."""
        if self._pairs:
            raise ValueError("successors() requires a probability-free closure")
        obl = self._all_next & ~self._next_present[aid]
        cands = self._candidates(aid).get(0, ())
        return tuple(cid for cid, cover in cands if cover == obl)

    def good_states(self) -> "GoodStates":
        """Least fixpoint over "some transition reaches only good states".

        Each sweep evaluates against the previous sweep's set, so the sweep
        index of an atom strictly dominates those of some transition's
        children.
        """
        if self._good is not None:
            return self._good
        good = set(self.final_ids)
        distance = {aid: 0 for aid in self.final_ids}
        sweep = 0
        while True:
            snapshot = frozenset(good)
            added = []
            for aid in range(len(self.atoms)):
                if aid in good:
                    continue
                for record in self.scenario_family(aid):
                    if self.has_transition(aid, record.qsets, snapshot):
                        added.append(aid)
                        break
            if not added:
                break
            sweep += 1
            for aid in added:
                good.add(aid)
                distance[aid] = sweep
        self._good = GoodStates(frozenset(good), distance, sweep)
        return self._good

    def reduce(self) -> "ReducedAutomaton":
        return ReducedAutomaton(self)


@dataclass(frozen=True)
class GoodStates:
    good: frozenset
    distance: dict
    sweeps: int


class ReducedAutomaton:
    """View of the automaton restricted to good states."""

    def __init__(self, automaton: TreeAutomaton):
        self.automaton = automaton
        gs = automaton.good_states()
        self.good = gs.good
        self.distance = gs.distance
        self.initial = tuple(a for a in automaton.initial if a in gs.good)
        self.finals = tuple(a for a in automaton.final_ids if a in gs.good)

    def scenario_records(self, aid: int) -> tuple:
        """Scenarios that still have a transition after reduction."""
        return tuple(
            record
            for record in self.automaton.scenario_family(aid)
            if self.automaton.has_transition(aid, record.qsets, self.good)
        )

    def transition_tuples(self, aid: int, qsets) -> Iterator[tuple]:
        return self.automaton.transition_tuples(aid, qsets, self.good)

    def dump(self) -> dict:
        """Adjacency listing of the reduced automaton (duplicate child
        tuples across scenarios are collapsed)."""
        aut = self.automaton
        states = []
        for aid in sorted(self.good):
            atom = aut.atoms[aid]
            states.append(
                {
                    "id": aid,
                    "members": [formula_text(g) for g in atom.members()],
                    "valuation": sorted(atom.valuation()),
                    "initial": aid in self.initial,
                    "final": aut.final[aid],
                    "distance": self.distance[aid],
                }
            )
        edges = []
        for aid in sorted(self.good):
            seen = set()
            for record in self.scenario_records(aid):
                for tup in self.transition_tuples(aid, record.qsets):
                    if (aid, tup) in seen:
                        continue
                    seen.add((aid, tup))
                    edges.append({"source": aid, "children": list(tup)})
        return {"states": states, "edges": edges}


def is_satisfiable(f: Formula) -> bool:
    return bool(TreeAutomaton(f).reduce().initial)


@dataclass(frozen=True)
class WitnessModel:
    """Finite tree interpretation: valuations on nodes, probabilities on
    non-root nodes, children of an internal node summing to one."""

    valuation: frozenset
    probability: Optional[Fraction]
    children: tuple

    def to_dict(self) -> dict:
        return {
            "valuation": sorted(self.valuation),
            "probability": None if self.probability is None else str(self.probability),
            "children": [c.to_dict() for c in self.children],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WitnessModel":
        prob = data.get("probability")
        return cls(
            frozenset(data.get("valuation", ())),
            None if prob is None else Fraction(prob),
            tuple(cls.from_dict(c) for c in data.get("children", ())),
        )


def witness_model(f: Formula) -> Optional[WitnessModel]:
    """A tree interpretation satisfying the formula, or None.

    Extraction descends distances to acceptance: at every non-final state
    pick the first scenario and transition whose children all joined the
    good set strictly earlier; child probabilities come from the scenario's
    deterministic branch-system witness.
    """
    aut = TreeAutomaton(f)
    red = aut.reduce()
    if not red.initial:
        return None
    root = min(red.initial, key=lambda a: (red.distance[a], a))

    def build(aid: int, probability) -> WitnessModel:
        atom = aut.atoms[aid]
        if aut.final[aid]:
            return WitnessModel(atom.valuation(), probability, ())
        d = red.distance[aid]
        for record in aut.scenario_family(aid):
            for tup in aut.transition_tuples(aid, record.qsets, red.good):
                if all(red.distance[c] < d for c in tup):
                    point = aut.scenario_witness(aid, record)
                    width = len(aut._pairs)
                    children = tuple(
                        build(cid, point[_qset_name(q, width)])
                        for q, cid in zip(record.qsets, tup)
                    )
                    return WitnessModel(atom.valuation(), probability, children)
        raise AssertionError(f"good non-final atom {aid} lost its transitions")

    return build(root, None)


def check_model(model: WitnessModel, f: Formula) -> bool:
    """Exact truth of the formula at the root of the tree.

    Validates shape first: the root carries no probability, every other node
    carries one in [0, 1], and the children of each internal node sum to 1.
    """
    if model.probability is not None:
        raise ValueError("root node must not carry a probability")

    def validate(node: WitnessModel, is_root: bool):
        if not is_root:
            p = node.probability
            if p is None:
                raise ValueError("non-root node lacks a probability")
            if not 0 <= p <= 1:
                raise ValueError(f"probability {p} outside [0, 1]")
        if node.children:
            total = sum((c.probability or ZERO for c in node.children), start=ZERO)
            if total != 1:
                raise ValueError(f"children probabilities sum to {total}, not 1")
        for c in node.children:
            validate(c, False)

    validate(model, True)
    f = normalize(f)
    memo = {}

    def truth(node: WitnessModel, g: Formula) -> bool:
        key = (id(node), g)
        hit = memo.get(key)
        if hit is not None:
            return hit
        match g:
            case TrueConst():
                res = True
            case FalseConst():
                res = False
            case Prop(name):
                res = name in node.valuation
            case Not(x):
                res = not truth(node, x)
            case And(ops):
                res = all(truth(node, o) for o in ops)
            case Next(x):
                res = bool(node.children) and all(truth(c, x) for c in node.children)
            case Until(l, r):
                res = truth(node, r) or (
                    bool(node.children)
                    and truth(node, l)
                    and all(truth(c, g) for c in node.children)
                )
            case Prob(cmp, bound, x):
                mass = sum(
                    (c.probability for c in node.children if truth(c, x)), start=ZERO
                )
                res = cmp.holds(mass, bound)
            case _:
                raise TypeError(f"not a core formula: {g!r}")
        memo[key] = res
        return res

    return truth(model, f)
