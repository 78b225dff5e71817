"""Counting automata built from normalized regexes.

The construction is a position (Glushkov-style) automaton extended with
one counter per counted sub-expression that actually needs a run-time
count.  States are the byte-class occurrences of the pattern plus an
initial state 0.  Counters live in clearly delimited loops: inside a
loop the counter is copied, the loop's back edges increment it under the
guard ``x < max``, entry edges set it to 1, re-entry edges (a loop-back
of an enclosing repetition) reset it to 1 under ``x >= min``, and edges
leaving the loop reset it to 0 under ``x >= min``.  Guards and final
conditions carry at most one atomic predicate per counter, which is what
both determinizations rely on.

Counters with an unbounded maximum saturate at ``min + 1`` when
incremented: the only predicate ever tested on them is ``x >= min``, so
larger values are indistinguishable and keeping them bounded keeps
register sets finite.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import bytesets
from . import parser as P

LT = "<"
GE = ">="

ZERO = "zero"   # implicit: counters absent from an update are set to 0
ONE = "one"
KEEP = "keep"
INC = "inc"


@dataclass(frozen=True)
class Counter:
    cid: int
    min_bound: int
    max_bound: int | None   # None = unbounded
    label: str

    @property
    def saturation(self) -> int | None:
        """Increment cap for unbounded counters (min + 1), else None."""
        return self.min_bound + 1 if self.max_bound is None else None


Atom = tuple[int, str, int]  # (counter id, op, constant)


@dataclass(frozen=True)
class CaTransition:
    source: int
    target: int
    byte_set: int
    guard: tuple[Atom, ...]
    update: tuple[tuple[int, str], ...]  # (cid, op); missing cids reset to 0


@dataclass(frozen=True)
class CountingAutomaton:
    counters: tuple[Counter, ...]
    n_states: int
    state_names: tuple[str, ...]
    transitions: tuple[CaTransition, ...]
    # final condition per state: None = never, tuple of atoms = conjunction
    # (empty tuple = always)
    finals: tuple
    class_sets: tuple[int, ...]
    class_table: bytes
    counter_states: dict
    counter_entry: dict
    counter_last: dict
    buckets: dict  # (state, class id) -> tuple of transitions

    @property
    def initial(self) -> int:
        return 0

    def counter(self, cid: int) -> Counter:
        return self.counters[cid]

    def class_of_byte(self, byte: int) -> int:
        return self.class_table[byte]

    def bucket(self, state: int, class_id: int):
        return self.buckets.get((state, class_id), ())


# -- first / last / follow -------------------------------------------------

def first_set(node: P.Node) -> frozenset[int]:
    """Positions that can start a word of the (marked) node."""
    if node.kind == P.CLASS:
        return frozenset((node.pos,))
    if node.kind == P.EPSILON:
        return frozenset()
    if node.kind == P.UNION:
        out = frozenset()
        for c in node.children:
            out |= first_set(c)
        return out
    if node.kind == P.CONCAT:
        out = set()
        for c in node.children:
            out |= first_set(c)
            if not P.nullable(c):
                break
        return frozenset(out)
    return first_set(node.children[0])  # star / counted


def last_set(node: P.Node) -> frozenset[int]:
    """Positions that can end a word of the (marked) node."""
    if node.kind == P.CLASS:
        return frozenset((node.pos,))
    if node.kind == P.EPSILON:
        return frozenset()
    if node.kind == P.UNION:
        out = frozenset()
        for c in node.children:
            out |= last_set(c)
        return out
    if node.kind == P.CONCAT:
        out = set()
        for c in reversed(node.children):
            out |= last_set(c)
            if not P.nullable(c):
                break
        return frozenset(out)
    return last_set(node.children[0])


def _loops(node: P.Node) -> bool:
    """Whether a star/counted node can repeat its body (max >= 2)."""
    if node.kind == P.STAR:
        return True
    return node.kind == P.COUNTED and (node.max_count is None or node.max_count >= 2)


def follow_set(node: P.Node):
    """Triples (source pos, target pos, loop node or None).

    Null triples come from concatenation; loop triples carry the
    repetition node whose back edge they are.
    """
    triples = []

    def visit(n: P.Node):
        for c in n.children:
            visit(c)
        if n.kind == P.CONCAT:
            kids = n.children
            suffix_first = [frozenset()] * (len(kids) + 1)
            for i in range(len(kids) - 1, -1, -1):
                f = first_set(kids[i])
                if P.nullable(kids[i]):
                    f = f | suffix_first[i + 1]
                suffix_first[i] = f
            for i in range(len(kids) - 1):
                for a in last_set(kids[i]):
                    for b in suffix_first[i + 1]:
                        triples.append((a, b, None))
        elif (n.kind == P.STAR or n.kind == P.COUNTED) and _loops(n):
            body = n.children[0]
            for a in last_set(body):
                for b in first_set(body):
                    triples.append((a, b, n))

    visit(node)
    return triples


# -- construction ----------------------------------------------------------

def _positions(node: P.Node):
    out = {}
    for n in P.walk(node):
        if n.kind == P.CLASS:
            out[n.pos] = n
    return out


def build_ca(ast: P.Node) -> CountingAutomaton:
    """Build the counting automaton of a normalized regex."""
    if ast.nid == 0:
        raise ValueError("build_ca expects a normalized AST")

    pos_nodes = _positions(ast)
    counter_nodes = P.counted_nodes(ast)
    counters = []
    node_cid = {}
    for cid, cnode in enumerate(counter_nodes):
        counters.append(Counter(cid, cnode.min_count, cnode.max_count,
                                P.pretty(cnode)))
        node_cid[cnode.nid] = cid

    # counters strictly inside each repetition node: their back edges restart
    # those counters
    enclosed = {}
    for n in P.walk(ast):
        if n.kind in (P.STAR, P.COUNTED):
            enclosed[n.nid] = frozenset(
                node_cid[d.nid] for d in P.walk(n.children[0])
                if d.nid in node_cid)

    c_states = {node_cid[cn.nid]: frozenset(
        d.pos for d in P.walk(cn) if d.kind == P.CLASS) for cn in counter_nodes}
    c_first = {node_cid[cn.nid]: first_set(cn.children[0]) for cn in counter_nodes}
    c_last = {node_cid[cn.nid]: last_set(cn.children[0]) for cn in counter_nodes}

    def counters_at(pos: int):
        return [cid for cid in range(len(counters)) if pos in c_states[cid]]

    transitions = set()

    def add(source, target, guard, update):
        transitions.add(CaTransition(
            source, target, pos_nodes[target].byte_set,
            tuple(sorted(guard)), tuple(sorted(update))))

    for b in first_set(ast):
        update = [(cid, ONE) for cid in counters_at(b)]
        add(0, b, (), update)

    for a, b, loop in follow_set(ast):
        guard, update = [], []
        loop_cid = node_cid.get(loop.nid) if loop is not None else None
        restarts = enclosed[loop.nid] if loop is not None else frozenset()
        for cid in range(len(counters)):
            states = c_states[cid]
            a_in, b_in = a in states, b in states
            if not a_in and not b_in:
                continue
            cnt = counters[cid]
            if a_in and b_in:
                if loop_cid == cid:
                    if cnt.max_bound is not None:
                        guard.append((cid, LT, cnt.max_bound))
                    update.append((cid, INC))
                elif cid in restarts:
                    # back edge of an enclosing repetition: restart this loop
                    assert a in c_last[cid] and b in c_first[cid]
                    guard.append((cid, GE, cnt.min_bound))
                    update.append((cid, ONE))
                else:
                    update.append((cid, KEEP))
            elif a_in:
                assert a in c_last[cid]
                guard.append((cid, GE, cnt.min_bound))
                # leaving the loop: counter resets to 0 (absent from update)
            else:
                assert b in c_first[cid]
                update.append((cid, ONE))
        add(a, b, guard, update)

    n_states = P.sharp(ast) + 1
    finals: list = [None] * n_states
    if P.nullable(ast):
        finals[0] = ()
    for q in last_set(ast):
        cond = tuple(sorted(
            (cid, GE, counters[cid].min_bound)
            for cid in counters_at(q) if q in c_last[cid]))
        finals[q] = cond

    class_sets, class_table = bytesets.partition(
        [n.byte_set for n in pos_nodes.values()] or [bytesets.ALL])

    buckets: dict = {}
    for t in sorted(transitions, key=lambda t: (t.source, t.target, t.guard)):
        for class_id, cls in enumerate(class_sets):
            if cls & t.byte_set:
                buckets.setdefault((t.source, class_id), []).append(t)
    buckets = {k: tuple(v) for k, v in buckets.items()}

    names = ["q0"] + [
        bytesets.format_set(pos_nodes[p].byte_set).strip("\\") + str(p)
        for p in range(1, n_states)]

    return CountingAutomaton(
        counters=tuple(counters),
        n_states=n_states,
        state_names=tuple(names),
        transitions=tuple(sorted(transitions,
                                 key=lambda t: (t.source, t.target, t.guard))),
        finals=tuple(finals),
        class_sets=tuple(class_sets),
        class_table=class_table,
        counter_states=c_states,
        counter_entry=c_first,
        counter_last=c_last,
        buckets=buckets,
    )


# -- configuration-level semantics -----------------------------------------

Config = tuple  # (state, memory) with memory a sorted tuple of (cid, value>0)


def initial_config() -> Config:
    return (0, ())


def _mem_get(memory, cid: int) -> int:
    for c, v in memory:
        if c == cid:
            return v
    return 0


def guard_holds(guard, memory) -> bool:
    for cid, op, k in guard:
        v = _mem_get(memory, cid)
        if op == LT:
            if not v < k:
                return False
        elif not v >= k:
            return False
    return True


def apply_update(ca: CountingAutomaton, update, memory) -> tuple:
    new = []
    for cid, op in update:
        if op == ONE:
            new.append((cid, 1))
        elif op == KEEP:
            v = _mem_get(memory, cid)
            if v:
                new.append((cid, v))
        else:  # INC
            v = _mem_get(memory, cid) + 1
            sat = ca.counters[cid].saturation
            if sat is not None:
                v = min(v, sat)
            new.append((cid, v))
    return tuple(sorted(new))


def ca_step(ca: CountingAutomaton, config: Config, byte: int):
    """All successor configurations of ``config`` under one input byte."""
    state, memory = config
    out = []
    for t in ca.bucket(state, ca.class_of_byte(byte)):
        if guard_holds(t.guard, memory):
            out.append((t.target, apply_update(ca, t.update, memory)))
    return out


def config_final(ca: CountingAutomaton, config: Config) -> bool:
    cond = ca.finals[config[0]]
    return cond is not None and guard_holds(cond, config[1])


# -- structural validation --------------------------------------------------

def validate_ca_properties(ca: CountingAutomaton) -> list[str]:
    """Check the structural properties the determinizers rely on.

    Returns a list of human-readable violations; empty for every
    automaton produced by :func:`build_ca`.
    """
    issues = []
    n = len(ca.counters)

    for cids in ca.counter_states.values():
        if 0 in cids:
            issues.append("initial state inside a counting loop")
    seen = {}
    for cid, states in ca.counter_states.items():
        for other, ostates in seen.items():
            if states & ostates:
                issues.append(
                    f"counting loops of x{cid} and x{other} overlap")
        seen[cid] = states

    for t in ca.transitions:
        per = {}
        for cid, op, k in t.guard:
            if cid in per:
                issues.append(f"two guard atoms on x{cid} in one transition")
            per[cid] = (op, k)
            cnt = ca.counters[cid]
            if op == LT and k != cnt.max_bound:
                issues.append(f"guard x{cid} < {k} does not test the max bound")
            if op == GE and k != cnt.min_bound:
                issues.append(f"guard x{cid} >= {k} does not test the min bound")
        ops = dict(t.update)
        for cid in range(n):
            op = ops.get(cid, ZERO)
            cnt = ca.counters[cid]
            guard = per.get(cid)
            in_loop = t.source in ca.counter_states.get(cid, ())
            if op == INC:
                if cnt.max_bound is not None and guard != (LT, cnt.max_bound):
                    issues.append(
                        f"increment of x{cid} without guard x{cid} < max")
                if t.target not in ca.counter_entry.get(cid, ()):
                    issues.append(
                        f"increment edge into non-entry state {t.target}")
            elif op == KEEP:
                if guard is not None:
                    issues.append(f"copy of x{cid} under a guard on x{cid}")
                if not (in_loop and t.target in ca.counter_states.get(cid, ())):
                    issues.append(f"copy of x{cid} outside its loop")
            elif op in (ZERO, ONE) and in_loop:
                if guard != (GE, cnt.min_bound):
                    issues.append(
                        f"reset of x{cid} from inside its loop without "
                        f"guard x{cid} >= min")
                if t.source not in ca.counter_last.get(cid, ()):
                    issues.append(
                        f"reset of x{cid} from a non-exit state {t.source}")
    return issues


# -- export ------------------------------------------------------------------

def _fmt_guard(ca, atoms) -> str:
    if not atoms:
        return ""
    return " & ".join(f"x{cid}{op}{k}" for cid, op, k in atoms)


def _fmt_update(ca, update) -> str:
    parts = []
    assigned = dict(update)
    for cnt in ca.counters:
        op = assigned.get(cnt.cid, ZERO)
        term = {ZERO: "0", ONE: "1", KEEP: f"x{cnt.cid}",
                INC: f"x{cnt.cid}+1"}[op]
        parts.append(f"x{cnt.cid}:={term}")
    return "; ".join(parts)


def to_dot(ca: CountingAutomaton) -> str:
    """Render the automaton in Graphviz format."""
    lines = ["digraph ca {", "  rankdir=LR;", '  start [shape=point];']
    for q in range(ca.n_states):
        cond = ca.finals[q]
        label = ca.state_names[q]
        shape = "circle"
        if cond is not None:
            shape = "doublecircle"
            if cond:
                label += "\\n[" + _fmt_guard(ca, cond) + "]"
        lines.append(f'  s{q} [shape={shape} label="{label}"];')
    lines.append("  start -> s0;")
    for t in ca.transitions:
        label = bytesets.format_set(t.byte_set).replace("\\", "\\\\")
        guard = _fmt_guard(ca, t.guard)
        if guard:
            label += "; " + guard
        label += " / " + _fmt_update(ca, t.update)
        lines.append(f'  s{t.source} -> s{t.target} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
