"""Domain types for temporal facts and the indexed graph that holds them.

A fact is a quadruple (subject, relation, object, day-level timestamp).
Interval facts are linearized into point facts by splitting them into a
start-of and an end-of relation; the naming convention is
``memberOf -> startMemberOf / endMemberOf``.
"""

from __future__ import annotations

import datetime
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import ValidationError

PLAIN = "plain"
START = "start"
END = "end"

_KIND_PREFIXES = ((START, "start"), (END, "end"))


def relation_kind(name: str) -> str:
    """Classify a relation name as plain, start-of or end-of."""
    for kind, prefix in _KIND_PREFIXES:
        rest = name[len(prefix):]
        if name.startswith(prefix) and rest and rest[0].isupper():
            return kind
    return PLAIN


def base_relation(name: str) -> str:
    """Base relation of a start-of/end-of name; a plain name is its own base."""
    kind = relation_kind(name)
    if kind == PLAIN:
        return name
    rest = name[len(kind):]
    return rest[0].lower() + rest[1:]


def start_relation(base: str) -> str:
    return "start" + base[0].upper() + base[1:]


def end_relation(base: str) -> str:
    return "end" + base[0].upper() + base[1:]


@dataclass(frozen=True, order=True)
class Quadruple:
    """One temporal fact: (subject, relation, object, timestamp).

    Ordering is (timestamp, subject, relation, object), the canonical fact
    order used throughout the package.
    """

    timestamp: datetime.date
    subject: str
    relation: str
    object: str

    def __init__(self, subject, relation, object, timestamp):
        # __init__ takes the quadruple reading order; the dataclass field
        # order drives chronological sorting.
        for name, value in (
            ("subject", subject),
            ("relation", relation),
            ("object", object),
        ):
            if not value:
                raise ValidationError(f"quadruple {name} must be non-empty")
        if not isinstance(timestamp, datetime.date) or isinstance(
            timestamp, datetime.datetime
        ):
            raise ValidationError("quadruple timestamp must be a date")
        super().__setattr__("subject", subject)
        super().__setattr__("relation", relation)
        super().__setattr__("object", object)
        super().__setattr__("timestamp", timestamp)

    def replace_timestamp(self, timestamp: datetime.date) -> "Quadruple":
        return Quadruple(self.subject, self.relation, self.object, timestamp)

    def as_tuple(self):
        return (self.subject, self.relation, self.object, self.timestamp)

    def __repr__(self):
        return (
            f"Quadruple({self.subject!r}, {self.relation!r}, "
            f"{self.object!r}, {self.timestamp.isoformat()})"
        )


@dataclass(frozen=True)
class IntervalFact:
    """A fact holding over [start, end]; end may be open (None)."""

    subject: str
    relation: str
    object: str
    start: datetime.date
    end: Optional[datetime.date] = None


def linearize(
    facts: Iterable[IntervalFact], non_linearizable: Iterable[str] = ()
) -> list[Quadruple]:
    """Split interval facts into start-of/end-of point facts.

    Relations listed in ``non_linearizable`` (by base name) keep a single
    plain quadruple at the interval start; everything else yields a start-of
    fact and, when the end is present, an end-of fact.
    """
    skip = set(non_linearizable)
    out: list[Quadruple] = []
    for f in facts:
        if f.end is not None and f.start > f.end:
            raise ValidationError(
                f"interval start after end for ({f.subject}, {f.relation}, "
                f"{f.object}, [{f.start.isoformat()}, {f.end.isoformat()}])"
            )
        if f.relation in skip:
            out.append(Quadruple(f.subject, f.relation, f.object, f.start))
            continue
        out.append(
            Quadruple(f.subject, start_relation(f.relation), f.object, f.start)
        )
        if f.end is not None:
            out.append(
                Quadruple(f.subject, end_relation(f.relation), f.object, f.end)
            )
    return out


class TemporalKnowledgeGraph:
    """Immutable, indexed collection of quadruples.

    Facts are deduplicated (exact quadruple equality) and kept in canonical
    (timestamp, subject, relation, object) order. Construction builds
    subject/relation/timestamp indexes; instances are safe to share across
    threads.
    """

    def __init__(
        self,
        facts: Iterable[Quadruple],
        labels: Optional[Mapping[str, str]] = None,
    ):
        seen = set()
        unique = []
        dropped = 0
        for f in facts:
            if f in seen:
                dropped += 1
                continue
            seen.add(f)
            unique.append(f)
        unique.sort()
        self.facts: tuple[Quadruple, ...] = tuple(unique)
        self.duplicates_dropped = dropped

        ents = set()
        rels = set()
        by_subject: dict[str, list[int]] = {}
        by_relation: dict[str, list[int]] = {}
        by_timestamp: dict[datetime.date, list[int]] = {}
        for i, f in enumerate(self.facts):
            ents.add(f.subject)
            ents.add(f.object)
            rels.add(f.relation)
            by_subject.setdefault(f.subject, []).append(i)
            by_relation.setdefault(f.relation, []).append(i)
            by_timestamp.setdefault(f.timestamp, []).append(i)
        self.entities: tuple[str, ...] = tuple(sorted(ents))
        self.relations: tuple[str, ...] = tuple(sorted(rels))
        self._by_subject = {k: tuple(v) for k, v in by_subject.items()}
        self._by_relation = {k: tuple(v) for k, v in by_relation.items()}
        self._by_timestamp = {k: tuple(v) for k, v in by_timestamp.items()}
        self.labels: dict[str, str] = dict(labels or {})
        self._encoded = None

    def __len__(self):
        return len(self.facts)

    def __contains__(self, fact: Quadruple):
        return fact in self._fact_set()

    def _fact_set(self):
        if not hasattr(self, "_facts_set"):
            self._facts_set = frozenset(self.facts)
        return self._facts_set

    @property
    def time_range(self) -> Optional[tuple[datetime.date, datetime.date]]:
        if not self.facts:
            return None
        return (self.facts[0].timestamp, self.facts[-1].timestamp)

    def label(self, entity: str) -> str:
        return self.labels.get(entity, entity)

    def facts_by_subject(self, subject: str) -> tuple[Quadruple, ...]:
        return tuple(self.facts[i] for i in self._by_subject.get(subject, ()))

    def facts_by_relation(self, relation: str) -> tuple[Quadruple, ...]:
        return tuple(self.facts[i] for i in self._by_relation.get(relation, ()))

    def facts_on(self, day: datetime.date) -> tuple[Quadruple, ...]:
        return tuple(self.facts[i] for i in self._by_timestamp.get(day, ()))

    def encoded(self) -> "EncodedFacts":
        """Integer-encoded fact arrays, built once and cached."""
        if self._encoded is None:
            self._encoded = EncodedFacts.from_graph(self)
        return self._encoded

    def with_labels(self, labels: Mapping[str, str]) -> "TemporalKnowledgeGraph":
        merged = dict(self.labels)
        merged.update(labels)
        g = TemporalKnowledgeGraph(self.facts, merged)
        g.duplicates_dropped = self.duplicates_dropped
        return g


@dataclass
class EncodedFacts:
    """Numpy view of a fact multiset for the grounding kernels.

    Entities/relations are encoded against sorted vocabularies; timestamps
    become proleptic-Gregorian day ordinals.
    """

    entities: tuple[str, ...]
    relations: tuple[str, ...]
    entity_index: dict[str, int]
    relation_index: dict[str, int]
    s: np.ndarray
    r: np.ndarray
    o: np.ndarray
    t: np.ndarray
    labels: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def from_graph(cls, graph: TemporalKnowledgeGraph) -> "EncodedFacts":
        ent_index = {e: i for i, e in enumerate(graph.entities)}
        rel_index = {r: i for i, r in enumerate(graph.relations)}
        n = len(graph.facts)
        s = np.empty(n, dtype=np.int64)
        r = np.empty(n, dtype=np.int64)
        o = np.empty(n, dtype=np.int64)
        t = np.empty(n, dtype=np.int64)
        for i, f in enumerate(graph.facts):
            s[i] = ent_index[f.subject]
            r[i] = rel_index[f.relation]
            o[i] = ent_index[f.object]
            t[i] = f.timestamp.toordinal()
        return cls(
            graph.entities, graph.relations, ent_index, rel_index,
            s, r, o, t, graph.labels,
        )


def prune_rare_entities(graph: TemporalKnowledgeGraph) -> TemporalKnowledgeGraph:
    """Recursively drop entities participating in fewer than two facts.

    Degree counts quadruple occurrences on the fact multiset (a self-loop
    contributes one). Runs to fixpoint; the empty graph is a legal result.
    """
    facts = list(graph.facts)
    while True:
        degree: dict[str, int] = {}
        for f in facts:
            degree[f.subject] = degree.get(f.subject, 0) + 1
            if f.object != f.subject:
                degree[f.object] = degree.get(f.object, 0) + 1
        doomed = {e for e, d in degree.items() if d < 2}
        if not doomed:
            break
        facts = [
            f for f in facts
            if f.subject not in doomed and f.object not in doomed
        ]
    pruned = TemporalKnowledgeGraph(facts, graph.labels)
    pruned.duplicates_dropped = graph.duplicates_dropped
    return pruned
