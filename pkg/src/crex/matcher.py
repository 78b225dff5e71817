"""Fast simulation of a deterministic, non-replicating CSA.

Per input byte: pick the one enabled transition of the current state's
byte-class bucket (guards are mutually exclusive minterms, each atom an
O(1) head/tail probe), then evaluate its update in place.  Because no
register is read twice across an update, every source offset-list can be
mutated and handed to its new owner; the union of a term list is a chain
of merges whose cost the offset-lists amortize against increments.

Registers assigned the empty set simply disappear from the memory map;
the active-set construction guarantees everything else is reachable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CrexError
from .offset_list import OffsetList, Stats, merge


@dataclass
class MatchOutcome:
    accepted: bool
    final_state: object = None
    stats: Stats | None = None


class Simulation:
    """Single-owner run of one CSA (basic or augmented builder API)."""

    def __init__(self, csa, stats: Stats | None = None, audit: bool = False):
        self.csa = csa
        self.stats = stats if stats is not None else Stats()
        self.audit = audit
        self.sid = csa.state_id(csa.initial_key())
        self.memory = {
            reg: OffsetList.singleton(min(values), self.stats,
                                      saturation=self._saturation(reg))
            for reg, values in csa.initial_memory().items()}

    @property
    def key(self):
        return self.csa.key_of(self.sid)

    def _saturation(self, reg):
        return self.csa.ca.counters[reg[0]].saturation

    def _atom_holds(self, atom) -> bool:
        reg, op, k = atom
        values = self.memory.get(reg)
        if values is None:
            self.stats.guard_atoms += 1
            return False
        return values.satisfies(op, k)

    def _literal_holds(self, literal) -> bool:
        sign, atoms = literal
        return any(map(self._atom_holds, atoms)) == sign

    def _guard_holds(self, guard) -> bool:
        memory = self.memory
        stats = self.stats
        for sign, atoms in guard:
            value = False
            for reg, op, k in atoms:
                ol = memory.get(reg)
                stats.guard_atoms += 1
                if ol is not None and ol.length:
                    if (ol.head.value + ol.offset < k if op == "<"
                            else ol.tail.value + ol.offset >= k):
                        value = True
                        break
            if value != sign:
                return False
        return True

    def step(self, byte: int) -> None:
        self.stats.bytes_processed += 1
        class_id = self.csa.ca.class_table[byte]
        chosen = None
        bucket = self.csa.dispatch(self.sid, class_id)
        for guard, update, target in bucket:
            if self._guard_holds(guard):
                chosen = (guard, update, target)
                break
        if chosen is None:
            raise AssertionError("deterministic CSA left without a transition")
        if self.audit:
            others = [g for g, _u, _t in bucket
                      if g is not chosen[0] and self._guard_holds(g)]
            assert not others, "determinism violated: two enabled guards"
        self.memory = self._evaluate(chosen[1])
        self.sid = chosen[2]

    def run(self, data: bytes) -> None:
        """Consume a whole buffer (hot loop of :func:`match_word`)."""
        table = self.csa.ca.class_table
        dispatch = self.csa.dispatch
        stats = self.stats
        sid = self.sid
        for byte in data:
            bucket = dispatch(sid, table[byte])
            for guard, update, target in bucket:
                if self._guard_holds(guard):
                    break
            else:
                raise AssertionError(
                    "deterministic CSA left without a transition")
            if update:
                self.memory = self._evaluate(update)
            elif self.memory:
                self.memory = {}
            sid = target
        self.sid = sid
        stats.bytes_processed += len(data)

    def _evaluate(self, update) -> dict:
        old = self.memory
        # first pass: read (and pop) every source register, so whatever is
        # left in ``old`` afterwards is provably unread and can be recycled
        gathered = []
        for reg, terms in update:
            constants = None
            lists = None
            for term in terms:
                kind = term[0]
                if kind == "const":
                    if constants is None:
                        constants = [term[1]]
                    else:
                        constants.append(term[1])
                elif kind == "copy":
                    src = old.pop(term[1], None)  # pop enforces single read
                    if src is not None:
                        if lists is None:
                            lists = [src]
                        else:
                            lists.append(src)
                else:
                    _kind, src_reg, mx, _sat = term
                    src = old.pop(src_reg, None)
                    if src is not None:
                        if mx is not None:
                            src.filter_lt(mx)
                        src.increment_all()
                        if src.length:
                            if lists is None:
                                lists = [src]
                            else:
                                lists.append(src)
                        # an emptied list is simply dropped
            gathered.append((reg, constants, lists))
        new = {}
        for reg, constants, lists in gathered:
            result = None
            if lists is not None:
                for item in lists:
                    result = item if result is None else merge(result, item)
            if result is None:
                if constants is None:
                    continue
                leftover = old.pop(reg, None)
                if (leftover is not None and leftover.length == 1
                        and leftover.minimum() == constants[0]):
                    result = leftover   # unread register already holds it
                else:
                    result = OffsetList.singleton(
                        constants[0], self.stats,
                        saturation=self._saturation(reg))
                constants = constants[1:]
            if constants:
                for value in constants:
                    result.insert_value(value)
            if result.length:
                result.saturation = self._saturation(reg)
                new[reg] = result
        return new

    def accepted(self) -> bool:
        return any(
            all(map(self._literal_holds, conj))
            for conj in self.csa.final_by_id(self.sid))

    def freeze(self):
        """Hashable snapshot (state key, register -> frozen value set)."""
        return (self.key, frozenset(
            (reg, frozenset(ol.values())) for reg, ol in self.memory.items()))

    def load(self, snapshot) -> None:
        """Restore a snapshot produced by :meth:`freeze` (test support)."""
        key, mem = snapshot
        self.sid = self.csa.state_id(key)
        self.memory = {}
        for reg, values in mem:
            ol = OffsetList.empty(self.stats, saturation=self._saturation(reg))
            for v in sorted(values):
                ol._push_back(v)
                self.stats.inserts += 1
            self.memory[reg] = ol


def match_word(csa, data: bytes, stats: Stats | None = None,
               audit: bool = False) -> MatchOutcome:
    """Run the CSA over ``data`` and test the final condition.

    Construction errors of a lazily built CSA (replication, resource
    caps) surface as exceptions during stepping."""
    sim = Simulation(csa, stats=stats, audit=audit)
    if audit:
        for byte in data:
            sim.step(byte)
    else:
        sim.run(data)
    outcome = MatchOutcome(sim.accepted(), sim.key, sim.stats)
    if not sim.stats.ledger_ok():
        raise CrexError("amortization ledger violated: "
                        f"{sim.stats.as_dict()}")
    return outcome


def match_stream(csa, chunks, stats: Stats | None = None) -> MatchOutcome:
    """Like :func:`match_word` for an iterable of byte chunks."""
    sim = Simulation(csa, stats=stats)
    for chunk in chunks:
        for byte in chunk:
            sim.step(byte)
    return MatchOutcome(sim.accepted(), sim.key, sim.stats)
