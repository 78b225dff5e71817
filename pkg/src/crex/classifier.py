"""Classification of counting regexes.

``marker_sets`` runs the inductive marker-letter computation over byte
sets: a family of byte sets such that every word of the node's language
contains exactly one occurrence of a byte from each set.  A counted
body with a non-empty family is letter-marked, which is an easily
checked sufficient condition for synchronizing counting; the general
verdict falls back to running the augmented determinization and
reporting whether it aborts with a counter replication.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import augmented as AU
from . import bytesets
from . import ca as CA
from . import parser as P
from .errors import (CrexError, NotFlatError, ReplicationError,
                     ResourceLimitError)

MARKER_FAMILY_CAP = 64


@dataclass
class MarkerFamily:
    """Marker byte sets of one node; empty = not letter-marked there."""

    sets: tuple[int, ...]
    truncated: bool = False

    def __bool__(self) -> bool:
        return bool(self.sets)


def _dedup_cap(sets, truncated):
    out = []
    for s in sets:
        if s not in out:
            out.append(s)
    if len(out) > MARKER_FAMILY_CAP:
        return tuple(out[:MARKER_FAMILY_CAP]), True
    return tuple(out), truncated


def marker_sets(node: P.Node) -> MarkerFamily:
    """Inductive family of marker-letter sets for ``node``."""
    if node.kind == P.EPSILON:
        return MarkerFamily(())
    if node.kind == P.CLASS:
        return MarkerFamily((node.byte_set,))
    if node.kind == P.UNION:
        families = [marker_sets(c) for c in node.children]
        sigmas = [P.alphabet_mask(c) for c in node.children]
        acc = families[0].sets
        acc_sigma = sigmas[0]
        truncated = any(f.truncated for f in families)
        for fam, sigma in zip(families[1:], sigmas[1:]):
            merged = []
            for t1 in acc:
                for t2 in fam.sets:
                    if t1 & (sigma & ~t2) == 0 and t2 & (acc_sigma & ~t1) == 0:
                        merged.append(t1 | t2)
            acc, truncated = _dedup_cap(merged, truncated)
            acc_sigma |= sigma
        return MarkerFamily(acc, truncated)
    if node.kind == P.CONCAT:
        families = [marker_sets(c) for c in node.children]
        sigmas = [P.alphabet_mask(c) for c in node.children]
        out = []
        truncated = any(f.truncated for f in families)
        for i, fam in enumerate(families):
            others = 0
            for j, sigma in enumerate(sigmas):
                if j != i:
                    others |= sigma
            for t in fam.sets:
                if t & others == 0:
                    out.append(t)
        out, truncated = _dedup_cap(out, truncated)
        return MarkerFamily(out, truncated)
    # star / counted: repetition destroys exactly-once occurrence
    return MarkerFamily(())


def is_letter_marked(node: P.Node) -> bool:
    """True iff every counted body (with a real counter) has markers."""
    return all(marker_sets(c.children[0]) for c in P.counted_nodes(node))


YES, NO, UNKNOWN = "yes", "no", "unknown"


def is_synchronizing(node: P.Node, state_cap: int | None = None) -> str:
    """'yes'/'no'/'unknown' verdict for flat regexes.

    Letter-marked regexes are synchronizing without running the
    determinization; otherwise the verdict is whatever the augmented
    construction decides, 'unknown' only on a resource cap."""
    st = P.stats(node)
    if not st.is_flat:
        raise NotFlatError("synchronizing counting is defined for flat regexes")
    if is_letter_marked(node):
        return YES
    try:
        AU.determinize_augmented(CA.build_ca(node), state_cap=state_cap)
        return YES
    except ReplicationError:
        return NO
    except ResourceLimitError:
        return UNKNOWN


def sum_upper_bounds(node: P.Node):
    """Sum of counter upper bounds; None when some counter is unbounded."""
    total = 0
    for c in P.counted_nodes(node):
        if c.max_count is None:
            return None
        total += c.max_count
    return total


@dataclass
class Classification:
    pattern: str
    error: str | None = None
    error_code: str | None = None
    uses_counting: bool = False
    is_flat: bool = False
    sum_of_upper_bounds: int | None = 0
    above_threshold: bool = False
    letter_marked: bool = False
    marker_family_truncated: bool = False
    synchronizing: str | None = None
    counters: list = field(default_factory=list)

    def as_dict(self) -> dict:
        out = {"pattern": self.pattern}
        if self.error is not None:
            out["error"] = self.error
            out["error_code"] = self.error_code
            return out
        out.update({
            "uses_counting": self.uses_counting,
            "is_flat": self.is_flat,
            "sum_of_upper_bounds": self.sum_of_upper_bounds,
            "above_threshold": self.above_threshold,
            "letter_marked": self.letter_marked,
            "synchronizing": self.synchronizing,
            "counters": self.counters,
        })
        if self.marker_family_truncated:
            out["marker_family_truncated"] = True
        return out


def classify_pattern(pattern: str, threshold: int = 20,
                     state_cap: int | None = None,
                     dotall: bool = False) -> Classification:
    try:
        ast = P.normalize(P.parse(pattern, dotall=dotall))
    except CrexError as err:
        return Classification(pattern, error=str(err), error_code=err.code)
    st = P.stats(ast)
    bounds = sum_upper_bounds(ast)
    result = Classification(
        pattern,
        uses_counting=st.uses_counting,
        is_flat=st.is_flat,
        sum_of_upper_bounds=bounds,
        above_threshold=bounds is None or bounds > threshold,
    )
    for c in P.counted_nodes(ast):
        fam = marker_sets(c.children[0])
        result.marker_family_truncated |= fam.truncated
        result.counters.append({
            "expression": P.pretty(c),
            "min": c.min_count,
            "max": c.max_count,
            "letter_marked": bool(fam),
            "markers": [bytesets.format_set(m) for m in fam.sets[:4]],
        })
    result.letter_marked = st.uses_counting and all(
        c["letter_marked"] for c in result.counters)
    if st.is_flat:
        try:
            result.synchronizing = is_synchronizing(ast, state_cap=state_cap)
        except ResourceLimitError:
            result.synchronizing = UNKNOWN
    return result


def classify_corpus(lines, threshold: int = 20,
                    state_cap: int | None = None) -> dict:
    """Classify a corpus (one pattern per line, '#' comments skipped)."""
    patterns = []
    aggregate = {
        "total": 0, "parsed": 0, "parse_errors": 0,
        "counting": 0, "flat_counting": 0, "above_threshold": 0,
        "letter_marked": 0, "synchronizing_yes": 0,
        "synchronizing_no": 0, "synchronizing_unknown": 0,
    }
    for raw in lines:
        line = raw.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        aggregate["total"] += 1
        c = classify_pattern(line, threshold=threshold, state_cap=state_cap)
        patterns.append(c.as_dict())
        if c.error is not None:
            aggregate["parse_errors"] += 1
            continue
        aggregate["parsed"] += 1
        if c.uses_counting:
            aggregate["counting"] += 1
            if c.is_flat:
                aggregate["flat_counting"] += 1
                if c.above_threshold:
                    aggregate["above_threshold"] += 1
                if c.letter_marked:
                    aggregate["letter_marked"] += 1
                if c.synchronizing == YES:
                    aggregate["synchronizing_yes"] += 1
                elif c.synchronizing == NO:
                    aggregate["synchronizing_no"] += 1
                elif c.synchronizing == UNKNOWN:
                    aggregate["synchronizing_unknown"] += 1
    return {"schema_version": 1, "threshold": threshold,
            "aggregate": aggregate, "patterns": patterns}


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False) + "\n"
