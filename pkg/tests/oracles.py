"""Independent brute-force oracles used to check the indexed fast paths.

These deliberately avoid every data structure the implementation uses:
rule grounding is plain itertools enumeration over fact tuples, and
confidence ratios are exact fractions.
"""

import itertools
from fractions import Fraction


def chain_of(body, combo):
    """Walk a candidate fact tuple along the body chain.

    Returns (start_entity, end_entity, last_timestamp) or None when the
    facts do not form a valid chain grounding: relations must match the
    atoms, consecutive atoms must share the chain entity, and timestamps
    must be non-decreasing.
    """
    start = None
    node = None
    prev_t = None
    for (relation, inverted), fact in zip(body, combo):
        if fact.relation != relation:
            return None
        if inverted:
            frm, to = fact.object, fact.subject
        else:
            frm, to = fact.subject, fact.object
        if start is None:
            start = frm
        elif frm != node:
            return None
        node = to
        if prev_t is not None and fact.timestamp < prev_t:
            return None
        prev_t = fact.timestamp
    return start, node, prev_t


def brute_force_supports(facts, body, head, strict=False):
    """Exhaustive (body support, rule support) for a rule over a fact list."""
    body_support = 0
    rule_support = 0
    facts = list(facts)
    for combo in itertools.product(facts, repeat=len(body)):
        grounding = chain_of(body, combo)
        if grounding is None:
            continue
        body_support += 1
        start, end, last_t = grounding
        for f in facts:
            if f.relation != head or f.subject != start or f.object != end:
                continue
            if (f.timestamp > last_t) if strict else (f.timestamp >= last_t):
                rule_support += 1
                break
    return body_support, rule_support


def brute_force_confidence(facts, body, head, strict=False):
    body_support, rule_support = brute_force_supports(facts, body, head, strict)
    if body_support == 0:
        return None
    return Fraction(rule_support, body_support)


def brute_force_candidates(facts, body, subject, day, window):
    """Distinct chain-end objects for groundings anchored at ``subject``.

    Facts must fall in [day - window, day) and keep non-decreasing
    timestamps along the chain.
    """
    t_max = day.toordinal()
    t_min = t_max - window
    eligible = [
        f for f in facts if t_min <= f.timestamp.toordinal() < t_max
    ]
    out = set()
    for combo in itertools.product(eligible, repeat=len(body)):
        grounding = chain_of(body, combo)
        if grounding is None:
            continue
        start, end, _last = grounding
        if start == subject:
            out.add(end)
    return out
