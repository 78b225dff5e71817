"""Ground-truth matching used by the test suite.

Two independent oracles guard each other: a breadth-first simulation of
the counting automaton's configuration sets, and a dynamic-programming
membership test evaluated directly on the AST.  Neither is fast; both
are meant to be obviously correct.

``explicit_determinize`` is the textbook subset construction applied to
the configuration automaton.  Its state count is exponential in the
counter bounds, which is exactly the blow-up the set-register engines
avoid; the cap keeps it usable as a test fixture.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import bytesets
from . import ca as CA
from . import parser as P
from .errors import ResourceLimitError


def oracle_match(ca: CA.CountingAutomaton, word: bytes,
                 frontier_cap: int = 200_000) -> bool:
    """Accept iff some configuration reachable over ``word`` is final."""
    frontier = {CA.initial_config()}
    for byte in word:
        nxt = set()
        for config in frontier:
            nxt.update(CA.ca_step(ca, config, byte))
        if len(nxt) > frontier_cap:
            raise ResourceLimitError(
                f"oracle frontier exceeded {frontier_cap} configurations",
                built=len(nxt))
        frontier = nxt
        if not frontier:
            return False
    return any(CA.config_final(ca, c) for c in frontier)


def ast_match(ast: P.Node, word: bytes) -> bool:
    """Membership by the inductive language definition, via span DP."""
    n = len(word)
    memo: dict = {}

    def spans_from(node: P.Node, i: int) -> frozenset[int]:
        """End positions of matches of ``node`` starting at ``i``."""
        key = (node.nid or id(node), i)
        got = memo.get(key)
        if got is not None:
            return got
        if node.kind == P.EPSILON:
            out = frozenset((i,))
        elif node.kind == P.CLASS:
            out = (frozenset((i + 1,))
                   if i < n and bytesets.contains(node.byte_set, word[i])
                   else frozenset())
        elif node.kind == P.UNION:
            acc = set()
            for c in node.children:
                acc |= spans_from(c, i)
            out = frozenset(acc)
        elif node.kind == P.CONCAT:
            ends = {i}
            for c in node.children:
                nxt = set()
                for j in ends:
                    nxt |= spans_from(c, j)
                ends = nxt
                if not ends:
                    break
            out = frozenset(ends)
        else:  # star / counted
            body = node.children[0]
            lo = 0 if node.kind == P.STAR else node.min_count
            hi = None if node.kind == P.STAR else node.max_count
            if P.nullable(body):
                lo = 0
            out_acc = set()
            ends = frozenset((i,))
            if lo == 0:
                out_acc |= ends
            count = 0
            history = set()
            while ends and (hi is None or count < hi):
                ends = frozenset(
                    j2 for j in ends for j2 in spans_from(body, j))
                count += 1
                if count >= lo:
                    out_acc |= ends
                    if hi is None:
                        # unbounded: the end-set sequence is deterministic,
                        # so a repeat means nothing new will ever appear
                        if ends in history:
                            break
                        history.add(ends)
            out = frozenset(out_acc)
        memo[key] = out
        return out

    return n in spans_from(ast, 0)


def power_reach(body: P.Node, word: bytes, k: int) -> frozenset[int]:
    """End positions reachable from 0 with exactly ``k`` non-empty body
    words.

    Empty factors are excluded: an iteration of a counting loop always
    consumes at least one byte, so the class boundary is about non-empty
    factorizations."""
    memo: dict = {}

    def spans_from(i: int) -> frozenset[int]:
        got = memo.get(i)
        if got is None:
            got = frozenset(
                j for j in range(i + 1, len(word) + 1)
                if ast_match(body, word[i:j]))
            memo[i] = got
        return got

    ends = frozenset((0,))
    for _ in range(k):
        nxt = set()
        for i in ends:
            nxt |= spans_from(i)
        ends = frozenset(nxt)
        if not ends:
            break
    return ends


def synchronizing_witness(body: P.Node, max_k: int = 4, max_len: int = 8,
                          max_alphabet: int = 3):
    """Search for (k, u, v): u in L(body)^k, v in L(body)^{k+1}, v a
    prefix of u.  Returns None when no witness exists within bounds.

    Factors are non-empty words of the body's language (an iteration of
    a counting loop consumes at least one byte).  The search runs over
    one representative byte per leaf class of the body (capped), which
    preserves witnesses because the automaton cannot distinguish bytes
    within a class.
    """
    if body.nid == 0:
        body = P.normalize(body)
    masks = []
    for node in P.walk(body):
        if node.kind == P.CLASS and node.byte_set not in masks:
            masks.append(node.byte_set)
    classes, _ = bytesets.partition(masks or [bytesets.ALL])
    reps = []
    for cls in classes:
        if any(cls & m for m in masks) or not masks:
            reps.append(bytesets.min_byte(cls))
    reps = reps[:max_alphabet]

    def words(length: int):
        if length == 0:
            yield b""
            return
        for prefix in words(length - 1):
            for b in reps:
                yield prefix + bytes((b,))

    for length in range(1, max_len + 1):
        for u in words(length):
            for k in range(1, max_k + 1):
                ends_k = power_reach(body, u, k)
                if len(u) not in ends_k:
                    continue
                ends_k1 = power_reach(body, u, k + 1)
                for j in sorted(ends_k1):
                    return (k, u, u[:j])
    return None


@dataclass
class ExplicitDfa:
    """Subset-construction DFA over configuration sets."""

    ca: CA.CountingAutomaton
    states: list              # list of frozenset of configurations
    transitions: dict         # (state id, class id) -> state id
    accepting: set

    @property
    def n_states(self) -> int:
        return len(self.states)

    def accepts(self, word: bytes) -> bool:
        sid = 0
        for byte in word:
            sid = self.transitions[(sid, self.ca.class_of_byte(byte))]
        return sid in self.accepting

    def step(self, sid: int, class_id: int) -> int:
        return self.transitions[(sid, class_id)]


def explicit_determinize(ca: CA.CountingAutomaton,
                         state_cap: int = 150_000) -> ExplicitDfa:
    """Determinize ``conf(ca)`` by the subset construction, per byte class."""
    init = frozenset((CA.initial_config(),))
    index = {init: 0}
    states = [init]
    transitions = {}
    work = [init]
    while work:
        current = work.pop()
        sid = index[current]
        for class_id in range(len(ca.class_sets)):
            byte = bytesets.min_byte(ca.class_sets[class_id])
            nxt = frozenset(
                succ for config in current
                for succ in CA.ca_step(ca, config, byte))
            tid = index.get(nxt)
            if tid is None:
                tid = len(states)
                if tid > state_cap:
                    raise ResourceLimitError(
                        f"explicit determinization exceeded {state_cap} states",
                        built=len(states))
                index[nxt] = tid
                states.append(nxt)
                work.append(nxt)
            transitions[(sid, class_id)] = tid
    accepting = {
        sid for sid, configs in enumerate(states)
        if any(CA.config_final(ca, c) for c in configs)}
    return ExplicitDfa(ca, states, transitions, accepting)
