"""Augmented determinization with shared counters and increment postponing.

The basic construction of :mod:`crex.csa` replicates registers whenever
nondeterministic runs branch and re-join, which ruins the in-place
offset-list simulation.  Here a register carries a whole *carrier* of
marked states: ``x{p,q+}`` holds values that belong to ``x_p`` as they
are and to ``x_q`` shifted up by one (a postponed increment).  States
are pairs (CA state set, active carrier set) and transitions are built
from the basic constituent machinery in three steps:

1. rewrite every basic r-term over the active carriers, turning a
   postponed increment into a real one (a second pending increment is an
   irresolvable replication and aborts the whole construction);
2. collect conflicting increments (a carrier read both incremented and
   plain) and postpone the increment by re-targeting it to the marked
   version of the target state;
3. group identical r-terms under one l-value carrier, so every register
   is read at most once across the final update.

Guards and final conditions rewrite a predicate on ``x_q`` into a
disjunction over the active carriers containing ``q``; a carrier holding
the marked ``q+`` contributes the predicate shifted by one, which is
exactly what the carrier encoding makes true.

Success is equivalent to the regex having synchronizing counting; the
abort carries a witness input prefix for diagnostics.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from . import bytesets
from . import ca as CA
from . import csa as CS
from .errors import NotFlatError, ReplicationError, ResourceLimitError

LT, GE = CA.LT, CA.GE


def carrier_text(cid, carrier) -> str:
    inner = ",".join(
        f"q{q}" + ("+" if marked else "")
        for q, marked in sorted(carrier))
    return f"x{cid}{{{inner}}}"


def _shift_atom(op: str, k: int):
    """Predicate on a value v+1 expressed on v; None = unsatisfiable."""
    if op == LT:
        return None if k <= 1 else (LT, k - 1)
    return (GE, max(k - 1, 0))


def rewrite_predicate(atom, ac) -> tuple:
    """Rewrite (cid, q, op, k) into atoms over the active carriers.

    Unmarked occurrences of q contribute the predicate unchanged; marked
    occurrences contribute it shifted onto the stored (pre-increment)
    value.  An empty result means the predicate cannot hold (the counter
    is empty at q)."""
    cid, q, op, k = atom
    out = []
    for reg in ac:
        rcid, carrier = reg
        if rcid != cid:
            continue
        if (q, False) in carrier:
            out.append((reg, op, k))
        if (q, True) in carrier:
            shifted = _shift_atom(op, k)
            if shifted is not None:
                out.append((reg, shifted[0], shifted[1]))
    return tuple(out)


@dataclass
class SharedUpdate:
    """Result of the three-step update construction."""

    update: tuple     # tuple of (register, terms) in canonical order
    active: frozenset


def build_shared_update(ca, basic_update, ac):
    """Rewrite a basic update over shared carriers; see module docstring.

    ``basic_update`` maps target registers (cid, state) to term lists.
    Raises :class:`ReplicationError` on a double increment."""
    by_counter: dict = {}
    for reg, terms in basic_update:
        by_counter.setdefault(reg[0], []).append((reg[1], terms))

    final_update = []
    active = set()
    for cid, assignments in sorted(by_counter.items()):
        cnt = ca.counters[cid]
        carriers = [reg for reg in ac if reg[0] == cid]

        # step 1: express r-terms over carriers, evaluating postponements
        expanded: dict = {}    # target state -> list of carrier-level terms
        for target, terms in assignments:
            acc = []
            for term in terms:
                if term[0] == "const":
                    entry = term
                    if entry not in acc:
                        acc.append(entry)
                    continue
                src = term[1]
                for reg in carriers:
                    _cid, carrier = reg
                    plain = (src[1], False) in carrier
                    marked = (src[1], True) in carrier
                    if term[0] == "copy":
                        if plain:
                            entry = ("copy", reg)
                            if entry not in acc:
                                acc.append(entry)
                        if marked:
                            entry = ("inc", reg, cnt.max_bound, cnt.saturation)
                            if entry not in acc:
                                acc.append(entry)
                    else:  # inc
                        if plain:
                            entry = ("inc", reg, cnt.max_bound, cnt.saturation)
                            if entry not in acc:
                                acc.append(entry)
                        if marked:
                            raise ReplicationError(
                                "irresolvable counter replication: double "
                                f"increment of {carrier_text(cid, carrier)}",
                                counter_label=cnt.label,
                                carrier=carrier_text(cid, carrier))
            expanded[target] = acc

        # step 2: postpone conflicting increments
        plain_reads = {t[1] for acc in expanded.values()
                       for t in acc if t[0] == "copy"}
        postponed: dict = {}   # (state, marked) -> term list
        for target, acc in expanded.items():
            kept = []
            for term in acc:
                if term[0] == "inc" and term[1] in plain_reads:
                    marked_terms = postponed.setdefault((target, True), [])
                    entry = ("copy", term[1])
                    if entry not in marked_terms:
                        marked_terms.append(entry)
                else:
                    kept.append(term)
            if kept:
                postponed[(target, False)] = kept

        # step 3: group identical r-terms under a common l-value carrier
        owners: dict = {}      # term -> set of (state, marked)
        for qhat, terms in postponed.items():
            for term in terms:
                owners.setdefault(term, set()).add(qhat)
        grouped: dict = {}     # carrier -> term list
        for term, qhats in owners.items():
            carrier = frozenset(qhats)
            grouped.setdefault(carrier, []).append(term)
        for carrier, terms in sorted(grouped.items(),
                                     key=lambda kv: sorted(kv[0])):
            reg = (cid, carrier)
            active.add(reg)
            final_update.append((reg, tuple(sorted(terms))))

    # non-replication holds by construction; keep the cheap global check
    read = set()
    for _reg, terms in final_update:
        for term in terms:
            if term[0] != "const":
                assert term[1] not in read, "replicated register escaped"
                read.add(term[1])
    return SharedUpdate(tuple(final_update), frozenset(active))


DEFAULT_STATE_CAP = CS.DEFAULT_STATE_CAP


class AugmentedCsa(CS.StateInterner):
    """Deterministic, non-replicating CSA over shared-carrier registers.

    States are explored directly from the CA: constituent transitions and
    minterms are computed per augmented state on demand, without ever
    materializing the basic CSA.
    """

    def __init__(self, ca: CA.CountingAutomaton, state_cap: int | None = None):
        states_seen = set()
        for states in ca.counter_states.values():
            if states & states_seen:
                raise NotFlatError("determinization requires flat counting")
            states_seen |= states
        self.ca = ca
        self.state_cap = state_cap or int(
            os.environ.get("CREX_STATE_CAP", str(DEFAULT_STATE_CAP)))
        self.basic = CS.BasicCsa(ca, require_flat=False,
                                 state_cap=self.state_cap)
        self._trans: dict = {}
        self._finals: dict = {}
        self._parents: dict = {self.initial_key(): None}
        self._init_interner()

    def initial_key(self):
        ac = frozenset(
            (cnt.cid, frozenset(((self.ca.initial, False),)))
            for cnt in self.ca.counters)
        return ((self.ca.initial,), ac)

    def initial_memory(self) -> dict:
        return {reg: frozenset((0,)) for reg in self.initial_key()[1]}

    @property
    def states_built(self) -> int:
        return len(self._parents)

    def witness(self, key) -> bytes:
        """Reconstruct a byte string that drives the automaton to ``key``."""
        path = []
        while self._parents.get(key) is not None:
            key, class_id = self._parents[key]
            path.append(bytesets.min_byte(self.ca.class_sets[class_id]))
        return bytes(reversed(path))

    def _admit(self, key, parent, class_id):
        if key not in self._parents:
            if len(self._parents) >= self.state_cap:
                raise ResourceLimitError(
                    f"augmented CSA exceeded {self.state_cap} states",
                    built=len(self._parents))
            self._parents[key] = (parent, class_id)

    def transitions(self, key, class_id):
        got = self._trans.get((key, class_id))
        if got is not None:
            return got
        if key == CS.DEAD:
            built = (CS.CsaTransition((), (), CS.DEAD),)
            self._trans[(key, class_id)] = built
            return built
        states, ac = key
        parts = self.basic.constituents(states, class_id)
        built = []
        for positive, literals in CS.minterms([g for _q, g, _u, _t in parts]):
            rewritten = self._rewrite_guard(literals, ac)
            if rewritten is None:
                continue
            compatible = [p for p in parts if set(p[1]) <= positive]
            targets = tuple(sorted({p[3] for p in compatible}))
            if not targets:
                self._admit(CS.DEAD, key, class_id)
                built.append(CS.CsaTransition(rewritten, (), CS.DEAD))
                continue
            basic_update: dict = {}
            for _q, _g, upd, _t in compatible:
                for reg, term in upd:
                    if reg[1] in targets:
                        terms = basic_update.setdefault(reg, [])
                        if term not in terms:
                            terms.append(term)
            try:
                shared = build_shared_update(
                    self.ca, tuple(basic_update.items()), ac)
            except ReplicationError as err:
                err.state = key
                err.class_id = class_id
                err.witness = self.witness(key) + bytes(
                    (bytesets.min_byte(self.ca.class_sets[class_id]),))
                raise
            target_key = (targets, shared.active)
            self._admit(target_key, key, class_id)
            built.append(CS.CsaTransition(rewritten, shared.update, target_key))
        built = tuple(built)
        self._trans[(key, class_id)] = built
        return built

    def _rewrite_guard(self, literals, ac):
        """Rewrite basic literals over carriers; None = unsatisfiable."""
        rewritten = []
        for sign, atoms in literals:
            (reg, op, k), = atoms
            cid, q = reg
            out = rewrite_predicate((cid, q, op, k), ac)
            if not out:
                if sign:
                    return None    # positive literal over an empty counter
                continue           # negated empty disjunction is vacuous
            rewritten.append((sign, out))
        rewritten = tuple(rewritten)
        if not CS.satisfiable(rewritten):
            return None
        return rewritten

    def transition_for(self, key, class_id, memory):
        for t in self.transitions(key, class_id):
            if all(CS.literal_holds(memory, lit) for lit in t.guard):
                return t
        raise AssertionError("augmented minterms must cover every memory")

    def final_condition(self, key):
        got = self._finals.get(key)
        if got is not None:
            return got
        disjuncts = []
        if key != CS.DEAD:
            states, ac = key
            for q in states:
                cond = self.ca.finals[q]
                if cond is None:
                    continue
                conj = []
                dead = False
                for cid, op, k in cond:
                    atoms = rewrite_predicate((cid, q, op, k), ac)
                    if not atoms:
                        dead = True
                        break
                    conj.append((True, atoms))
                if not dead:
                    disjuncts.append(tuple(conj))
        got = tuple(disjuncts)
        self._finals[key] = got
        return got

    def is_final(self, key, memory) -> bool:
        return any(
            all(CS.literal_holds(memory, lit) for lit in conj)
            for conj in self.final_condition(key))

    # reference set semantics (shared with BasicCsa's helpers)

    def eval_update(self, update, memory) -> dict:
        return self.basic.eval_update(update, memory)

    def step_set(self, state, byte: int):
        key, memory = state
        t = self.transition_for(key, self.ca.class_of_byte(byte), memory)
        return (t.target, self.eval_update(t.update, memory))

    def match_set(self, word: bytes) -> bool:
        state = (self.initial_key(), self.initial_memory())
        for byte in word:
            state = self.step_set(state, byte)
        return self.is_final(state[0], state[1])

    def explore_all(self):
        work = [self.initial_key()]
        seen = {self.initial_key()}
        while work:
            key = work.pop(0)
            for class_id in range(len(self.ca.class_sets)):
                for t in self.transitions(key, class_id):
                    if t.target not in seen:
                        seen.add(t.target)
                        work.append(t.target)
        return seen

    def summary(self) -> dict:
        """JSON-friendly dump of the explored state space."""
        keys = self.explore_all()
        states = []
        for key in sorted(keys, key=CS.state_label):
            if key == CS.DEAD:
                states.append({"states": [], "active": [], "dead": True})
            else:
                stateset, ac = key
                states.append({
                    "states": list(stateset),
                    "active": sorted(carrier_text(cid, carrier)
                                     for cid, carrier in ac),
                })
        return {"state_count": len(keys), "states": states}


def determinize_augmented(ca: CA.CountingAutomaton,
                          state_cap: int | None = None) -> AugmentedCsa:
    """Eagerly run the augmented determinization.

    Raises :class:`ReplicationError` when the regex does not have
    synchronizing counting (and :class:`NotFlatError` /
    :class:`ResourceLimitError` per their contracts)."""
    csa = AugmentedCsa(ca, state_cap=state_cap)
    csa.explore_all()
    return csa
