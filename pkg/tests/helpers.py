"""Shared test machinery.

``assert_engines_agree`` proves language agreement of the three engines
on every word up to a length bound without enumerating words: all
engines are deterministic at the configuration level (the oracle after
subset construction), so a breadth-first product walk with memoization
covers exactly the reachable joint configurations, and acceptance is
compared at every node.  Walking per byte class is exhaustive because
no engine can distinguish bytes within a class.
"""

from __future__ import annotations

import random

from crex import augmented as AU
from crex import bytesets
from crex import ca as CA
from crex import csa as CS
from crex import matcher as M
from crex import oracle as O
from crex import parser as P
from crex.offset_list import Stats


def compile_pattern(pattern: str):
    return CA.build_ca(P.normalize(P.parse(pattern)))


def freeze_mem(memory: dict) -> frozenset:
    return frozenset((reg, values) for reg, values in memory.items() if values)


def class_reps(ca, alphabet: bytes | None):
    """(class id, representative byte) pairs, optionally restricted."""
    reps = []
    for class_id, mask in enumerate(ca.class_sets):
        if alphabet is None:
            reps.append((class_id, bytesets.min_byte(mask)))
        else:
            inside = [b for b in alphabet if bytesets.contains(mask, b)]
            if inside:
                reps.append((class_id, inside[0]))
    return reps


def assert_engines_agree(pattern: str, alphabet: bytes | None = None,
                         max_len: int = 10, state_cap: int = 50_000,
                         audit: bool = False) -> dict:
    """Raise on any acceptance disagreement between the offset-list
    matcher (augmented), the basic CSA set semantics and the CA oracle,
    over every word of length <= max_len (restricted to ``alphabet``).

    Returns exploration statistics for reporting."""
    ca = compile_pattern(pattern)
    aug = AU.AugmentedCsa(ca, state_cap=state_cap)
    basic = CS.BasicCsa(ca, state_cap=state_cap)
    sim = M.Simulation(aug, stats=Stats(), audit=audit)
    reps = class_reps(ca, alphabet)

    aug0 = (aug.initial_key(), freeze_mem(aug.initial_memory()))
    basic0 = (basic.initial_key(), freeze_mem(basic.initial_memory()))
    oracle0 = frozenset((CA.initial_config(),))
    start = (aug0, basic0, oracle0)
    seen = {start}
    frontier = [start]
    checked = 0
    for depth in range(max_len + 1):
        next_frontier = []
        for node in frontier:
            aug_state, basic_state, oracle_state = node
            a_acc = aug.is_final(aug_state[0], dict(aug_state[1]))
            b_acc = basic.is_final(basic_state[0], dict(basic_state[1]))
            o_acc = any(CA.config_final(ca, c) for c in oracle_state)
            checked += 1
            assert a_acc == b_acc == o_acc, (
                f"{pattern!r}: engines disagree at depth {depth}: "
                f"augmented={a_acc} basic={b_acc} oracle={o_acc} "
                f"(state {aug_state[0]})")
            if depth == max_len:
                continue
            for class_id, byte in reps:
                sim.load(aug_state)
                sim.step(byte)
                new_aug = sim.freeze()
                new_aug = (new_aug[0], frozenset(
                    (r, v) for r, v in new_aug[1] if v))
                bkey, bmem = basic_state
                bt = basic.transition_for(bkey, class_id, dict(bmem))
                new_basic = (bt.target,
                             freeze_mem(basic.eval_update(bt.update, dict(bmem))))
                new_oracle = frozenset(
                    succ for cfg in oracle_state
                    for succ in CA.ca_step(ca, cfg, byte))
                nxt = (new_aug, new_basic, new_oracle)
                if nxt not in seen:
                    seen.add(nxt)
                    next_frontier.append(nxt)
        frontier = next_frontier
        if not frontier:
            break
    assert sim.stats.ledger_ok(), f"{pattern!r}: amortization ledger violated"
    return {"nodes": len(seen), "checked": checked,
            "aug_states": aug.states_built}


def random_flat_pattern(rng: random.Random, max_bound: int = 5) -> str:
    """Random flat pattern over {a,b,c} in the acceptance fixture shape."""

    def body(depth=2):
        r = rng.random()
        if depth == 0 or r < 0.40:
            return rng.choice(["a", "b", "c", "[ab]", "[bc]"])
        if r < 0.58:
            return body(depth - 1) + body(depth - 1)
        if r < 0.74:
            return "(" + body(depth - 1) + "|" + body(depth - 1) + ")"
        if r < 0.82:
            return "(" + body(depth - 1) + ")*"
        if r < 0.90:
            return "(" + body(depth - 1) + ")?"
        return "(" + body(depth - 1) + ")+"

    parts = []
    for _ in range(rng.randrange(1, 4)):
        r = rng.random()
        if r < 0.5:
            lo = rng.randrange(0, max_bound)
            hi = min(max(1, lo + rng.randrange(0, 3)), max_bound)
            lo = min(lo, hi)
            parts.append("(" + body() + "){%d,%d}" % (lo, hi))
        elif r < 0.65:
            parts.append("(" + body() + ")*")
        else:
            parts.append(body())
    return "".join(parts)


def random_flat_fixtures(seed: int, count: int, *, require_counting=True,
                         synchronizing=None, max_sharp: int = 7):
    """Deterministic list of random flat fixtures.

    ``synchronizing``: True = keep only constructible ones, False = only
    aborting ones, None = no filter."""
    from crex.errors import ReplicationError

    rng = random.Random(seed)
    out = []
    while len(out) < count:
        pattern = random_flat_pattern(rng)
        try:
            ast = P.normalize(P.parse(pattern))
        except Exception:
            continue
        st = P.stats(ast)
        if not st.is_flat or st.sharp == 0 or st.sharp > max_sharp:
            continue
        if require_counting and not st.uses_counting:
            continue
        if synchronizing is not None:
            try:
                AU.determinize_augmented(CA.build_ca(ast), state_cap=30_000)
                ok = True
            except ReplicationError:
                ok = False
            if ok != synchronizing:
                continue
        out.append(pattern)
    return out
