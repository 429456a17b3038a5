"""Temporal rule mining, rule application and forecasting evaluation.

Rules are cyclic: the head (X1, head, X_{l+1}, T) is predicted from a body
chain X1 -> X2 -> ... -> X_{l+1} of up to three atoms. Each atom carries an
``inverted`` flag: a non-inverted atom i matches a fact whose subject sits
at chain node i, an inverted one matches a fact whose object sits there.
Grounding timestamps must be non-decreasing along the chain and the head
timestamp must be >= the last body timestamp (strictly greater when the
strict ordering flag is set).

Mining samples backward temporal walks from head edges; every distinct walk
pattern is lifted to a rule by variable abstraction and its confidence is
computed by exhaustive grounding enumeration (rule support / body support),
not by sampling.
"""

from __future__ import annotations

import bisect
import hashlib
import json
import logging
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .errors import DataError, ValidationError
from .facts import EncodedFacts, Quadruple, TemporalKnowledgeGraph
from .io import write_json

logger = logging.getLogger(__name__)

RULE_LENGTHS = (1, 2, 3)


@dataclass(frozen=True)
class RuleAtom:
    relation: str
    inverted: bool = False

    def __str__(self):
        return f"{self.relation}^-1" if self.inverted else self.relation


@dataclass(frozen=True)
class TemporalRule:
    """A mined rule: head relation, ordered body chain, confidence, supports."""

    head: str
    body: tuple[RuleAtom, ...]
    confidence: float
    rule_support: int
    body_support: int

    def __post_init__(self):
        if not self.body:
            raise ValidationError("rule body must be non-empty")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(
                f"rule confidence {self.confidence} outside [0, 1]"
            )
        if self.rule_support < 0 or self.body_support < 0:
            raise ValidationError("rule supports must be non-negative")
        if self.rule_support > self.body_support:
            raise ValidationError("rule support cannot exceed body support")
        if self.body_support > 0:
            expected = self.rule_support / self.body_support
            if abs(self.confidence - expected) > 1e-9:
                raise ValidationError(
                    f"confidence {self.confidence} inconsistent with supports "
                    f"{self.rule_support}/{self.body_support}"
                )

    @property
    def key(self) -> str:
        """Stable human-readable identifier."""
        return f"{self.head} <- " + ", ".join(str(a) for a in self.body)

    def to_json_dict(self) -> dict:
        return {
            "head": self.head,
            "body": [
                {"relation": a.relation, "inverted": a.inverted} for a in self.body
            ],
            "confidence": self.confidence,
            "rule_support": self.rule_support,
            "body_support": self.body_support,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "TemporalRule":
        return cls(
            head=data["head"],
            body=tuple(
                RuleAtom(a["relation"], bool(a["inverted"])) for a in data["body"]
            ),
            confidence=float(data["confidence"]),
            rule_support=int(data["rule_support"]),
            body_support=int(data["body_support"]),
        )


@dataclass
class WalkConfig:
    """Random-walk mining parameters."""

    walks: int = 200
    lengths: tuple[int, ...] = RULE_LENGTHS
    transition: str = "exp"  # "uniform" or "exp"
    decay: float = 0.01  # per-day rate of the exponential transition
    strict_order: bool = False
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.walks <= 0:
            raise ValidationError("walks must be positive")
        bad = set(self.lengths) - set(RULE_LENGTHS)
        if bad or not self.lengths:
            raise ValidationError(f"rule lengths must be a subset of {RULE_LENGTHS}")
        if self.transition not in ("uniform", "exp"):
            raise ValidationError("transition must be 'uniform' or 'exp'")
        if self.transition == "exp" and self.decay <= 0:
            raise ValidationError("exponential transition requires decay > 0")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")


@dataclass(frozen=True)
class Candidate:
    object: str
    score: float
    rule: str  # key of the strongest contributing rule


@dataclass
class QueryAnswer:
    candidates: list[Candidate] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def rank_of(self, obj: str) -> Optional[int]:
        for i, c in enumerate(self.candidates, start=1):
            if c.object == obj:
                return i
        return None


class GroundingIndex:
    """Sorted composite-key arrays over encoded facts, consumed by kernels.

    fwd: sorted by (relation, subject, timestamp), key = rel * nv + subject.
    inv: sorted by (relation, object, timestamp), key = rel * nv + object.
    pair: max timestamp per distinct (relation, subject, object).
    """

    def __init__(self, enc: EncodedFacts):
        nv = max(len(enc.entities), 1)
        nr = max(len(enc.relations), 1)
        if (nr * nv + nv) * nv >= 2**62:
            raise DataError("vocabulary too large for composite-key encoding")
        self.nv = nv
        self.enc = enc

        s, r, o, t = enc.s, enc.r, enc.o, enc.t
        order = np.lexsort((t, s, r))
        self.fwd_key = np.ascontiguousarray((r * nv + s)[order])
        self.fwd_to = np.ascontiguousarray(o[order])
        self.fwd_ts = np.ascontiguousarray(t[order])

        order = np.lexsort((t, o, r))
        self.inv_key = np.ascontiguousarray((r * nv + o)[order])
        self.inv_to = np.ascontiguousarray(s[order])
        self.inv_ts = np.ascontiguousarray(t[order])

        pk = (r * nv + s) * nv + o
        order = np.lexsort((t, pk))
        pk_sorted = pk[order]
        ts_sorted = t[order]
        if len(pk_sorted):
            last = np.r_[pk_sorted[1:] != pk_sorted[:-1], True]
            self.pair_key = np.ascontiguousarray(pk_sorted[last])
            self.pair_max_ts = np.ascontiguousarray(ts_sorted[last])
        else:
            self.pair_key = pk_sorted
            self.pair_max_ts = ts_sorted

    @classmethod
    def build(cls, graph: TemporalKnowledgeGraph) -> "GroundingIndex":
        return cls(graph.encoded())

    def body_supports(self, body_rels, body_inverted, head_rel, strict):
        return _kernels.body_supports(
            self.fwd_key, self.fwd_to, self.fwd_ts,
            self.inv_key, self.inv_to, self.inv_ts,
            self.pair_key, self.pair_max_ts,
            self.nv, body_rels, body_inverted, head_rel, 1 if strict else 0,
        )

    def query_candidates(self, body_rels, body_inverted, anchor, t_min, t_max):
        return _kernels.query_candidates(
            self.fwd_key, self.fwd_to, self.fwd_ts,
            self.inv_key, self.inv_to, self.inv_ts,
            self.nv, body_rels, body_inverted, anchor, t_min, t_max,
        )


def _encode_body(enc: EncodedFacts, body: Sequence[RuleAtom]):
    """Integer-encode a rule body; None when a relation is absent from the graph."""
    rels = np.empty(len(body), dtype=np.int64)
    invs = np.empty(len(body), dtype=np.uint8)
    for i, atom in enumerate(body):
        code = enc.relation_index.get(atom.relation)
        if code is None:
            return None, None
        rels[i] = code
        invs[i] = 1 if atom.inverted else 0
    return rels, invs


class _TraversalIndex:
    """Per-node edge lists (both directions) sorted by timestamp, for walks."""

    def __init__(self, enc: EncodedFacts):
        by_node: dict[int, list[tuple[int, int, int, int, int]]] = {}
        for i in range(len(enc.s)):
            s = int(enc.s[i]); o = int(enc.o[i])
            r = int(enc.r[i]); t = int(enc.t[i])
            by_node.setdefault(s, []).append((t, r, 0, o, i))
            by_node.setdefault(o, []).append((t, r, 1, s, i))
        self.by_node = {}
        for node, edges in by_node.items():
            edges.sort()
            self.by_node[node] = (
                [e[0] for e in edges],  # timestamps, ascending
                edges,
            )

    def edges_until(self, node: int, max_ts: int, inclusive: bool):
        entry = self.by_node.get(node)
        if entry is None:
            return []
        ts_list, edges = entry
        if inclusive:
            hi = bisect.bisect_right(ts_list, max_ts)
        else:
            hi = bisect.bisect_left(ts_list, max_ts)
        return edges[:hi]


def _child_seed(seed: int, *parts) -> int:
    text = "|".join([str(seed), *map(str, parts)])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _sample_walk(
    enc: EncodedFacts,
    trav: _TraversalIndex,
    head_fact: int,
    length: int,
    rng: random.Random,
    config: WalkConfig,
) -> Optional[tuple[RuleAtom, ...]]:
    """One backward temporal walk from a head edge; returns the lifted body.

    The walk starts at the head's object, steps backward in time and must
    close the cycle at the head's subject. Re-traversing the edge used in
    the immediately preceding step (the head edge, for the first step) is
    not allowed.
    """
    e1 = int(enc.s[head_fact])
    cur = int(enc.o[head_fact])
    cur_ts = int(enc.t[head_fact])
    prev_fact = head_fact
    atoms: list[Optional[RuleAtom]] = [None] * length

    for pos in range(length, 0, -1):
        first_step = pos == length
        inclusive = not (first_step and config.strict_order)
        options = [
            e for e in trav.edges_until(cur, cur_ts, inclusive)
            if e[4] != prev_fact
        ]
        if pos == 1:
            options = [e for e in options if e[3] == e1]
        if not options:
            return None
        if config.transition == "exp":
            weights = [math.exp(-config.decay * (cur_ts - e[0])) for e in options]
            total = sum(weights)
            if total > 0.0:
                chosen = rng.choices(options, weights=weights, k=1)[0]
            else:  # all candidate edges too distant; degrade to uniform
                chosen = options[rng.randrange(len(options))]
        else:
            chosen = options[rng.randrange(len(options))]
        t, rel, direction, other, fid = chosen
        # Moving against the fact (direction 1, object side) keeps the atom
        # forward in the chain; moving along it makes the atom inverted.
        atoms[pos - 1] = RuleAtom(enc.relations[rel], inverted=(direction == 0))
        cur = other
        cur_ts = t
        prev_fact = fid
    return tuple(a for a in atoms if a is not None)


def mine_rules(graph: TemporalKnowledgeGraph, config: WalkConfig) -> list[TemporalRule]:
    """Mine temporal rules and score them by exhaustive grounding counts.

    For every (relation, length) pair, up to ``config.walks`` head edges are
    sampled without replacement with an independently seeded generator, so
    results do not depend on scheduling. Rules with zero rule support are
    discarded. Output is sorted by (head, confidence desc, body).
    """
    if len(graph) == 0:
        raise DataError("cannot mine rules from an empty graph")
    enc = graph.encoded()
    index = GroundingIndex(enc)
    trav = _TraversalIndex(enc)

    head_facts: dict[int, list[int]] = {}
    for i in range(len(enc.r)):
        head_facts.setdefault(int(enc.r[i]), []).append(i)

    def mine_one(rel_name: str, length: int) -> set[tuple[RuleAtom, ...]]:
        rel_code = enc.relation_index[rel_name]
        fact_ids = head_facts.get(rel_code, [])
        if not fact_ids:
            return set()
        rng = random.Random(_child_seed(config.seed, rel_name, length))
        sample = rng.sample(fact_ids, min(config.walks, len(fact_ids)))
        patterns = set()
        for fid in sample:
            body = _sample_walk(enc, trav, fid, length, rng, config)
            if body is not None:
                patterns.add(body)
        return patterns

    units = [
        (rel, length)
        for rel in graph.relations
        for length in sorted(config.lengths)
    ]
    patterns_by_head: dict[str, set[tuple[RuleAtom, ...]]] = {}
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(lambda u: mine_one(*u), units))
    else:
        results = [mine_one(*u) for u in units]
    for (rel, _length), patterns in zip(units, results):
        patterns_by_head.setdefault(rel, set()).update(patterns)

    rules: list[TemporalRule] = []
    for head, patterns in patterns_by_head.items():
        head_code = enc.relation_index[head]
        for body in patterns:
            rels, invs = _encode_body(enc, body)
            body_support, rule_support = index.body_supports(
                rels, invs, head_code, config.strict_order
            )
            if body_support == 0 or rule_support == 0:
                continue
            rules.append(
                TemporalRule(
                    head=head,
                    body=body,
                    confidence=rule_support / body_support,
                    rule_support=int(rule_support),
                    body_support=int(body_support),
                )
            )
    rules.sort(key=lambda r: (r.head, -r.confidence, r.key))
    logger.info(
        "mined %d rules over %d relations (%s kernels)",
        len(rules), len(patterns_by_head), _kernels.backend_name(),
    )
    return rules


def apply_rules(
    graph: TemporalKnowledgeGraph,
    rules: Sequence[TemporalRule],
    query: tuple,
    window: int,
    aggregation: str = "noisy_or",
    index: Optional[GroundingIndex] = None,
) -> QueryAnswer:
    """Complete a (subject, relation, ?, timestamp) query.

    Only facts with timestamps in [t - window, t) participate in
    groundings. Candidate scores combine the confidences of the distinct
    rules that produced them: noisy-OR by default, max when
    ``aggregation='max'``. Candidates are sorted by score descending with
    ascending object-id tie-breaking.
    """
    if window <= 0:
        raise ValidationError("window must be positive")
    if aggregation not in ("noisy_or", "max"):
        raise ValidationError("aggregation must be 'noisy_or' or 'max'")
    subject, relation, t = query
    enc = graph.encoded()
    if index is None:
        index = GroundingIndex(enc)

    diagnostics: dict = {}
    subj_code = enc.entity_index.get(subject)
    if subj_code is None:
        diagnostics["unknown_subject"] = subject
        return QueryAnswer(candidates=[], diagnostics=diagnostics)
    matching = [r for r in rules if r.head == relation]
    if not matching:
        diagnostics["no_rules_for_relation"] = relation
        return QueryAnswer(candidates=[], diagnostics=diagnostics)

    t_ord = t.toordinal()
    per_object: dict[str, list[tuple[float, str]]] = {}
    for rule in matching:
        rels, invs = _encode_body(enc, rule.body)
        if rels is None:
            continue
        objects = index.query_candidates(
            rels, invs, subj_code, t_ord - window, t_ord
        )
        for code in objects:
            name = enc.entities[code]
            per_object.setdefault(name, []).append((rule.confidence, rule.key))

    candidates = []
    for name, raw_contribs in per_object.items():
        # A rule contributes once per candidate no matter how many
        # groundings produced it.
        contribs = sorted({(conf, key) for conf, key in raw_contribs})
        if aggregation == "max":
            score = max(c for c, _ in contribs)
        else:
            miss = 1.0
            for c, _ in contribs:
                miss *= 1.0 - c
            score = 1.0 - miss
        best_conf, best_key = max(contribs, key=lambda p: (p[0], p[1]))
        candidates.append(Candidate(object=name, score=score, rule=best_key))
    candidates.sort(key=lambda c: (-c.score, c.object))
    return QueryAnswer(candidates=candidates, diagnostics=diagnostics)


@dataclass
class ForecastMetrics:
    hits_at_k: float
    mrr: float
    k: int
    queries: int


def evaluate_forecasting(
    graph: TemporalKnowledgeGraph,
    rules: Sequence[TemporalRule],
    test_fraction: float = 0.02,
    window: int = 2048,
    k: int = 10,
    aggregation: str = "noisy_or",
) -> ForecastMetrics:
    """Time-aware filtered Hits@k and MRR on the chronologically latest split.

    For each held-out fact (s, r, o, t) the query (s, r, ?, t) is answered
    from facts strictly earlier than t (within the window). Other objects
    o' != o that are true for the same (s, r, t) in the test split are
    filtered out before ranking; an unranked o contributes 0 to both
    metrics.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValidationError("test_fraction must be in (0, 1)")
    n = len(graph)
    n_test = int(n * test_fraction)
    if n_test == 0:
        raise DataError(
            f"test split is empty ({n} facts, fraction {test_fraction})"
        )
    test = graph.facts[n - n_test:]
    index = GroundingIndex(graph.encoded())

    true_objects: dict[tuple, set] = {}
    for f in test:
        true_objects.setdefault((f.subject, f.relation, f.timestamp), set()).add(
            f.object
        )

    hits = 0
    rr_total = 0.0
    for f in test:
        answer = apply_rules(
            graph, rules, (f.subject, f.relation, f.timestamp), window,
            aggregation=aggregation, index=index,
        )
        others = true_objects[(f.subject, f.relation, f.timestamp)] - {f.object}
        rank = 0
        for c in answer.candidates:
            if c.object in others:
                continue
            rank += 1
            if c.object == f.object:
                break
        else:
            rank = 0
        if rank:
            rr_total += 1.0 / rank
            if rank <= k:
                hits += 1
    return ForecastMetrics(
        hits_at_k=hits / n_test, mrr=rr_total / n_test, k=k, queries=n_test
    )


def save_rules(rules: Iterable[TemporalRule], path) -> None:
    """Write rules as JSON, sorted by (head, confidence desc) for diffability."""
    ordered = sorted(rules, key=lambda r: (r.head, -r.confidence, r.key))
    data = [r.to_json_dict() for r in ordered]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, ensure_ascii=False, indent=2)
        fh.write("\n")


def load_rules(path) -> list[TemporalRule]:
    from .io import read_json

    data = read_json(path)
    if not isinstance(data, list):
        raise ValidationError(f"rules file {path} must contain a JSON list")
    return [TemporalRule.from_json_dict(entry) for entry in data]
