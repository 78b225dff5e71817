"""Counter-subset construction: CA -> deterministic counting-set automaton.

Registers are counters indexed by CA state (``x_q`` holds every value
counter ``x`` reaches in runs ending at ``q``).  For each reachable
state set and input byte class, one transition is built per satisfiable
minterm of the constituent guards; its update unites the constituent
updates, with increments filtered by the counter's upper bound.

Satisfiability of a minterm is judged in the set interpretation: a
negated atom constrains every element of a register, a positive atom
needs one witness element, and a register with only negated literals is
satisfiable by the empty set.  This keeps exactly the sign assignments
that some run-time register contents can realize.

Construction is lazy by default (a memoized transition builder driven
by the matcher); ``explore_all`` forces the whole automaton for export
and tests.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from itertools import product

from . import bytesets
from . import ca as CA
from . import parser as P
from .errors import NotFlatError, ResourceLimitError

LT, GE = CA.LT, CA.GE

# A register is (counter id, state) in the basic construction and
# (counter id, carrier) in the augmented one; the helpers below are
# shared and treat registers opaquely.

# term forms: ("const", 0|1) | ("copy", reg) | ("inc", reg, max|None, sat|None)
# guard literal: (sign, atoms) with atoms a tuple of (reg, op, k);
#   the literal holds iff sign == (some atom holds existentially)
# update: tuple of (target reg, tuple of terms)


DEFAULT_STATE_CAP = int(os.environ.get("CREX_STATE_CAP", "100000"))


def atom_holds(values: frozenset, op: str, k: int) -> bool:
    if op == LT:
        return any(v < k for v in values)
    return any(v >= k for v in values)


def literal_holds(memory, literal) -> bool:
    sign, atoms = literal
    value = any(
        atom_holds(memory.get(reg, frozenset()), op, k) for reg, op, k in atoms)
    return value == sign


def _allowed_interval(neg_atoms):
    """Values a single element may take under universal negated atoms."""
    lo, hi = 0, None
    for _reg, op, k in neg_atoms:
        if op == LT:      # not(x < k): every element >= k
            lo = max(lo, k)
        else:             # not(x >= k): every element < k
            hi = k if hi is None else min(hi, k)
    return lo, hi


def satisfiable(literals) -> bool:
    """Satisfiability of a conjunction of literals over set registers."""
    neg_by_reg: dict = {}
    for sign, atoms in literals:
        if not sign:
            for atom in atoms:
                neg_by_reg.setdefault(atom[0], []).append(atom)
    intervals = {reg: _allowed_interval(atoms)
                 for reg, atoms in neg_by_reg.items()}

    def witness_ok(reg, op, k) -> bool:
        lo, hi = intervals.get(reg, (0, None))
        if op == LT:
            return lo < k and (hi is None or lo < hi)
        return hi is None or max(lo, k) < hi

    for sign, atoms in literals:
        if sign and not any(witness_ok(*atom) for atom in atoms):
            return False
    return True


def minterms(guards, cap: int = 4096):
    """Satisfiable sign assignments over a collection of guards.

    Each guard is a tuple of atoms (a conjunction; empty = always true).
    Returns a list of (positive-atom frozenset, literal tuple) pairs,
    one per satisfiable minterm of the distinct non-trivial guards.

    Atoms constrain single registers, so satisfiability factors per
    register; the enumeration therefore builds the per-register sign
    choices first and never visits an unsatisfiable combination.
    """
    distinct: list = []
    for g in guards:
        for atom in g:
            if atom not in distinct:
                distinct.append(atom)
    by_reg: dict = {}
    for atom in distinct:
        by_reg.setdefault(atom[0], []).append(atom)
    per_reg = []
    for atoms in by_reg.values():
        choices = []
        for signs in product((True, False), repeat=len(atoms)):
            literals = tuple((s, (a,)) for s, a in zip(signs, atoms))
            if satisfiable(literals):
                choices.append(literals)
        per_reg.append(choices)
    total = 1
    for choices in per_reg:
        total *= len(choices)
        if total > cap:
            raise ResourceLimitError(
                f"minterm expansion past {cap} per transition bucket")
    out = []
    for combo in product(*per_reg):
        literals = tuple(lit for group in combo for lit in group)
        positive = frozenset(atom for sign, (atom,) in literals if sign)
        out.append((positive, literals))
    return out


@dataclass(frozen=True)
class CsaTransition:
    guard: tuple          # tuple of literals
    update: tuple         # tuple of (target reg, terms)
    target: tuple         # successor state key


DEAD = ()  # explicit reject sink: empty state set, self-loops everywhere


class StateInterner:
    """Integer ids for state keys plus an id-indexed transition cache.

    The simulation hot loop indexes by (state id, class id) instead of
    hashing structured state keys on every byte."""

    def _init_interner(self):
        self._key_ids: dict = {}
        self._id_keys: list = []
        self._id_dispatch: list = []
        self._id_finals: list = []

    def state_id(self, key) -> int:
        sid = self._key_ids.get(key)
        if sid is None:
            sid = len(self._id_keys)
            self._key_ids[key] = sid
            self._id_keys.append(key)
            self._id_dispatch.append([None] * len(self.ca.class_sets))
            self._id_finals.append(None)
        return sid

    def key_of(self, sid: int):
        return self._id_keys[sid]

    def dispatch(self, sid: int, class_id: int):
        got = self._id_dispatch[sid][class_id]
        if got is None:
            got = tuple(
                (t.guard, t.update, self.state_id(t.target))
                for t in self.transitions(self._id_keys[sid], class_id))
            self._id_dispatch[sid][class_id] = got
        return got

    def final_by_id(self, sid: int):
        got = self._id_finals[sid]
        if got is None:
            got = self.final_condition(self._id_keys[sid])
            self._id_finals[sid] = got
        return got


class BasicCsa(StateInterner):
    """Lazily determinized basic CSA over state-indexed registers."""

    def __init__(self, ca: CA.CountingAutomaton, state_cap: int | None = None,
                 require_flat: bool = True):
        self.ca = ca
        self.state_cap = state_cap or DEFAULT_STATE_CAP
        self._trans: dict = {}    # (state key, class id) -> tuple of CsaTransition
        self._finals: dict = {}   # state key -> tuple of final disjuncts
        self._known = {self.initial_key(), DEAD}
        self._init_interner()
        if require_flat:
            states_seen = set()
            for states in ca.counter_states.values():
                if states & states_seen:
                    raise NotFlatError(
                        "determinization requires flat counting")
                states_seen |= states

    # -- state bookkeeping -------------------------------------------------

    def initial_key(self):
        return (self.ca.initial,)

    def initial_memory(self) -> dict:
        return {(cnt.cid, self.ca.initial): frozenset((0,))
                for cnt in self.ca.counters}

    @property
    def states_built(self) -> int:
        return len(self._known)

    def _admit(self, key):
        if key not in self._known:
            if len(self._known) >= self.state_cap:
                raise ResourceLimitError(
                    f"basic CSA exceeded {self.state_cap} states",
                    built=len(self._known))
            self._known.add(key)

    # -- transition construction --------------------------------------------

    def constituents(self, key, class_id):
        """Indexed, filter-inserted versions of the CA transitions leaving
        the member states of ``key`` on ``class_id``."""
        ca = self.ca
        out = []
        for q in key:
            for t in ca.bucket(q, class_id):
                guard = tuple(((cid, q), op, k) for cid, op, k in t.guard)
                update = []
                ops = dict(t.update)
                for cnt in ca.counters:
                    op = ops.get(cnt.cid, CA.ZERO)
                    reg = (cnt.cid, t.target)
                    if op == CA.ZERO:
                        update.append((reg, ("const", 0)))
                    elif op == CA.ONE:
                        update.append((reg, ("const", 1)))
                    elif op == CA.KEEP:
                        update.append((reg, ("copy", (cnt.cid, q))))
                    else:
                        update.append((reg, ("inc", (cnt.cid, q),
                                              cnt.max_bound, cnt.saturation)))
                out.append((q, guard, tuple(update), t.target))
        return out

    def transitions(self, key, class_id):
        got = self._trans.get((key, class_id))
        if got is not None:
            return got
        if key == DEAD:
            built = (CsaTransition((), (), DEAD),)
            self._trans[(key, class_id)] = built
            return built
        parts = self.constituents(key, class_id)
        built = []
        for positive, literals in minterms([g for _q, g, _u, _t in parts]):
            compatible = [p for p in parts if set(p[1]) <= positive]
            target = tuple(sorted({p[3] for p in compatible}))
            update: dict = {}
            if target:
                for _q, _g, upd, _t in compatible:
                    for reg, term in upd:
                        if reg[1] in target:
                            terms = update.setdefault(reg, [])
                            if term not in terms:
                                terms.append(term)
            self._admit(target if target else DEAD)
            built.append(CsaTransition(
                literals,
                tuple(sorted((reg, tuple(terms))
                             for reg, terms in update.items())),
                target if target else DEAD))
        built = tuple(built)
        self._trans[(key, class_id)] = built
        return built

    def transition_for(self, key, class_id, memory) -> CsaTransition:
        for t in self.transitions(key, class_id):
            if all(literal_holds(memory, lit) for lit in t.guard):
                return t
        raise AssertionError("minterms must cover every memory")

    def final_condition(self, key):
        """Disjunction of per-state conjunctions, each a tuple of literals."""
        got = self._finals.get(key)
        if got is None:
            disjuncts = []
            for q in key:
                cond = self.ca.finals[q]
                if cond is None:
                    continue
                disjuncts.append(tuple(
                    (True, (((cid, q), op, k),)) for cid, op, k in cond))
            got = tuple(disjuncts)
            self._finals[key] = got
        return got

    def is_final(self, key, memory) -> bool:
        return any(
            all(literal_holds(memory, lit) for lit in conj)
            for conj in self.final_condition(key))

    # -- set-interpretation execution (reference semantics) ------------------

    def eval_update(self, update, memory) -> dict:
        new = {}
        for reg, terms in update:
            value: set = set()
            for term in terms:
                if term[0] == "const":
                    value.add(term[1])
                elif term[0] == "copy":
                    value |= memory.get(term[1], frozenset())
                else:
                    _kind, src, mx, sat = term
                    vals = memory.get(src, frozenset())
                    if mx is not None:
                        vals = {v for v in vals if v < mx}
                        value |= {v + 1 for v in vals}
                    else:
                        value |= {min(v + 1, sat) for v in vals}
            new[reg] = frozenset(value)
        return new

    def step_set(self, state, byte: int):
        """One step of the reference set semantics."""
        key, memory = state
        t = self.transition_for(key, self.ca.class_of_byte(byte), memory)
        return (t.target, self.eval_update(t.update, memory))

    def match_set(self, word: bytes) -> bool:
        state = (self.initial_key(), self.initial_memory())
        for byte in word:
            state = self.step_set(state, byte)
        return self.is_final(state[0], state[1])

    # -- exhaustive exploration ----------------------------------------------

    def explore_all(self):
        """Force construction of every reachable state and transition."""
        work = [self.initial_key()]
        seen = {self.initial_key()}
        while work:
            key = work.pop()
            for class_id in range(len(self.ca.class_sets)):
                for t in self.transitions(key, class_id):
                    if t.target not in seen:
                        seen.add(t.target)
                        work.append(t.target)
        return seen


def determinize_basic(ca: CA.CountingAutomaton,
                      state_cap: int | None = None) -> BasicCsa:
    """Eagerly build the basic CSA of a flat-regex CA."""
    csa = BasicCsa(ca, state_cap=state_cap)
    csa.explore_all()
    return csa


# -- encoding between CA configuration sets and CSA configurations ----------

def encode(ca: CA.CountingAutomaton, configs):
    """Project a set of CA configurations onto state-indexed registers."""
    key = tuple(sorted({q for q, _m in configs}))
    memory: dict = {}
    for q, mem in configs:
        mem = dict(mem)
        for cnt in ca.counters:
            reg = (cnt.cid, q)
            memory.setdefault(reg, set()).add(mem.get(cnt.cid, 0))
    return key, {reg: frozenset(v) for reg, v in memory.items()}


def decode(ca: CA.CountingAutomaton, key, memory) -> frozenset:
    """Cartesian-product reconstruction; inverse of :func:`encode`."""
    configs = set()
    for q in key:
        per_counter = [sorted(memory.get((cnt.cid, q), frozenset((0,))))
                       for cnt in ca.counters]
        for values in product(*per_counter):
            mem = tuple(sorted(
                (cnt.cid, v) for cnt, v in zip(ca.counters, values) if v))
            configs.add((q, mem))
    return frozenset(configs)


# -- export -------------------------------------------------------------------

def format_reg(reg) -> str:
    cid, where = reg
    if isinstance(where, int):
        return f"x{cid}_q{where}"
    marks = sorted((q, m) for q, m in where)
    inner = ",".join(f"q{q}" + ("+" if m else "") for q, m in marks)
    return f"x{cid}{{{inner}}}"


def format_term(term) -> str:
    if term[0] == "const":
        return str(term[1])
    if term[0] == "copy":
        return format_reg(term[1])
    _k, src, mx, _sat = term
    if mx is None:
        return f"{format_reg(src)}+1"
    return f"filter[<{mx}]({format_reg(src)})+1"


def format_literal(lit) -> str:
    sign, atoms = lit
    body = " | ".join(f"{format_reg(r)}{op}{k}" for r, op, k in atoms)
    if len(atoms) != 1:
        body = "(" + body + ")"
    return body if sign else "!" + body


def format_guard(guard) -> str:
    return " & ".join(format_literal(lit) for lit in guard) or "T"


def format_update(update) -> str:
    return "; ".join(
        f"{format_reg(reg)}:=" + "U".join(format_term(t) for t in terms)
        for reg, terms in update) or "-"


def state_label(key) -> str:
    if key == DEAD:
        return "dead"
    if isinstance(key, tuple) and key and isinstance(key[0], int):
        return "{" + ",".join(str(q) for q in key) + "}"
    states, ac = key
    regs = ",".join(format_reg(r) for r in sorted(ac, key=format_reg))
    return "{" + ",".join(str(q) for q in states) + "};[" + regs + "]"


def to_dot(csa, title="csa") -> str:
    """Render every explored state/transition of a (basic or augmented)
    automaton in Graphviz format."""
    keys = csa.explore_all()
    order = {k: i for i, k in enumerate(sorted(keys, key=state_label))}
    lines = [f"digraph {title} {{", "  rankdir=LR;", "  start [shape=point];"]
    for key, i in sorted(order.items(), key=lambda kv: kv[1]):
        final = "doublecircle" if csa.final_condition(key) else "circle"
        lines.append(
            f'  s{i} [shape={final} label="{state_label(key)}"];')
    lines.append(f"  start -> s{order[csa.initial_key()]};")
    for key, i in sorted(order.items(), key=lambda kv: kv[1]):
        for class_id, cls in enumerate(csa.ca.class_sets):
            for t in csa.transitions(key, class_id):
                label = bytesets.format_set(cls).replace("\\", "\\\\")
                label += "; " + format_guard(t.guard)
                label += " / " + format_update(t.update)
                lines.append(
                    f'  s{i} -> s{order[t.target]} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
