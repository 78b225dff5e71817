"""Offset-list representation of counting sets.

A set of naturals is a shared offset plus a sorted, duplicate-free
doubly-linked list of stored values (represented value = stored + offset).
Incrementing every element is one offset bump; filtering trims only the
head or tail; merging walks just the consumed list's value range.  All
mutators update the owning :class:`Stats`, which the test suite uses to
check the amortization ledger (merge moves never exceed increments plus
insertions) and the bound-independence claims.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Stats:
    """Instrumentation shared by every register of one simulation."""

    increments: int = 0
    inserts: int = 0
    moves: int = 0
    removals: int = 0
    merges: int = 0
    guard_atoms: int = 0
    bytes_processed: int = 0
    lists_created: int = 0

    def element_touches(self) -> int:
        """Work that is not already charged to another counter: removals
        are paid for by the inserts that put the elements there."""
        return self.increments + self.inserts + self.moves + self.guard_atoms

    def ledger_ok(self) -> bool:
        return self.moves <= self.increments + self.inserts

    def as_dict(self) -> dict:
        return {
            "bytes": self.bytes_processed,
            "increments": self.increments,
            "inserts": self.inserts,
            "merge_moves": self.moves,
            "removals": self.removals,
            "merges": self.merges,
            "guard_atoms": self.guard_atoms,
            "element_touches": self.element_touches(),
        }


class _Cell:
    __slots__ = ("value", "prev", "next")

    def __init__(self, value):
        self.value = value
        self.prev = None
        self.next = None


@dataclass
class OffsetList:
    """One register's value set.  Owned by a single simulation context."""

    stats: Stats
    offset: int = 0
    head: _Cell | None = None
    tail: _Cell | None = None
    length: int = 0
    saturation: int | None = field(default=None)

    # -- construction ------------------------------------------------------

    @classmethod
    def singleton(cls, value: int, stats: Stats,
                  saturation: int | None = None) -> "OffsetList":
        ol = cls(stats=stats, saturation=saturation)
        stats.lists_created += 1
        ol._push_back(value)
        ol.stats.inserts += 1
        return ol

    @classmethod
    def empty(cls, stats: Stats, saturation: int | None = None) -> "OffsetList":
        stats.lists_created += 1
        return cls(stats=stats, saturation=saturation)

    # -- primitive list surgery (values are stored, not represented) --------

    def _push_back(self, represented: int):
        cell = _Cell(represented - self.offset)
        if self.tail is None:
            self.head = self.tail = cell
        else:
            cell.prev = self.tail
            self.tail.next = cell
            self.tail = cell
        self.length += 1

    def _pop(self, cell: _Cell):
        if cell.prev is None:
            self.head = cell.next
        else:
            cell.prev.next = cell.next
        if cell.next is None:
            self.tail = cell.prev
        else:
            cell.next.prev = cell.prev
        self.length -= 1

    def _insert_before(self, cell: _Cell | None, represented: int):
        """Insert before ``cell`` (None = append at tail)."""
        fresh = _Cell(represented - self.offset)
        if cell is None:
            prev = self.tail
        else:
            prev = cell.prev
        fresh.prev, fresh.next = prev, cell
        if prev is None:
            self.head = fresh
        else:
            prev.next = fresh
        if cell is None:
            self.tail = fresh
        else:
            cell.prev = fresh
        self.length += 1

    # -- observers -----------------------------------------------------------

    def __len__(self) -> int:
        return self.length

    def is_empty(self) -> bool:
        return self.length == 0

    def minimum(self) -> int:
        return self.head.value + self.offset

    def maximum(self) -> int:
        return self.tail.value + self.offset

    def values(self) -> list[int]:
        out = []
        cell = self.head
        while cell is not None:
            out.append(cell.value + self.offset)
            cell = cell.next
        return out

    def __repr__(self) -> str:
        return "{" + ",".join(str(v) for v in self.values()) + "}"

    def satisfies(self, op: str, k: int) -> bool:
        """Existential predicate test: some element < k, or some >= k."""
        self.stats.guard_atoms += 1
        if self.length == 0:
            return False
        if op == "<":
            return self.minimum() < k
        return self.maximum() >= k

    # -- mutators --------------------------------------------------------------

    def increment_all(self) -> "OffsetList":
        self.offset += 1
        self.stats.increments += 1
        if self.saturation is not None and self.length:
            cap = self.saturation
            while (self.length >= 2 and self.tail.prev.value + self.offset >= cap):
                self._pop(self.tail)
                self.stats.removals += 1
            if self.maximum() > cap:
                self.tail.value = cap - self.offset
        return self

    def filter_ge(self, k: int) -> "OffsetList":
        """Keep values >= k (drops from the head)."""
        while self.head is not None and self.head.value + self.offset < k:
            self._pop(self.head)
            self.stats.removals += 1
        return self

    def filter_lt(self, k: int) -> "OffsetList":
        """Keep values < k (drops from the tail)."""
        while self.tail is not None and self.tail.value + self.offset >= k:
            self._pop(self.tail)
            self.stats.removals += 1
        return self

    def insert_value(self, value: int):
        """Insert a small constant (0 or 1); walks at most two cells."""
        cell = self.head
        while cell is not None and cell.value + self.offset < value:
            cell = cell.next
        if cell is not None and cell.value + self.offset == value:
            return
        self._insert_before(cell, value)
        self.stats.inserts += 1

    def merge_from(self, other: "OffsetList") -> "OffsetList":
        """Union ``other`` into this list; ``other`` is consumed.

        Caller guarantees max(self) >= max(other) (or other empty), so the
        walk never passes elements above the consumed list's range.
        """
        self.stats.merges += 1
        self.stats.moves += other.length
        cell = self.head
        ocell = other.head
        while ocell is not None:
            value = ocell.value + other.offset
            while cell is not None and cell.value + self.offset < value:
                cell = cell.next
            if cell is None or cell.value + self.offset != value:
                self._insert_before(cell, value)
                self.stats.inserts += 1
            ocell = ocell.next
        other.head = other.tail = None
        other.length = 0
        return self


def merge(a: OffsetList, b: OffsetList) -> OffsetList:
    """Union of two offset-lists.  The one with the smaller maximum is
    consumed; on an equal maximum the shorter one is."""
    if b.is_empty():
        return a
    if a.is_empty():
        return b
    amax, bmax = a.maximum(), b.maximum()
    if amax > bmax or (amax == bmax and a.length >= b.length):
        return a.merge_from(b)
    return b.merge_from(a)
